#include "supermap/descriptors.hpp"

#include <cmath>
#include <string>

namespace supermap {

LogDescriptors log_transform(const DescriptorSet& d) {
    LogDescriptors out;
    out.grid = d.grid;
    out.autocorr = d.autocorr;
    out.log_moments.reserve(d.moments.size());
    for (std::size_t i = 0; i < d.moments.size(); ++i) {
        if (!(d.moments[i] > 0.0))
            throw_domain("log transform requires positive moments; m(" + std::to_string(i + 1) +
                         ") = " + std::to_string(d.moments[i]));
        out.log_moments.push_back(std::log(d.moments[i]));
    }
    return out;
}

DescriptorSet exp_transform(const LogDescriptors& d) {
    DescriptorSet out;
    out.grid = d.grid;
    out.autocorr = d.autocorr;
    out.moments.reserve(d.log_moments.size());
    for (double lm : d.log_moments) out.moments.push_back(std::exp(lm));
    return out;
}

}  // namespace supermap
