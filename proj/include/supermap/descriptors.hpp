#pragma once

#include <cstddef>
#include <vector>

#include "supermap/errors.hpp"

namespace supermap {

// Shape of a statistical signature: moment orders 1..n_mom plus the
// autocorrelation grid over lags 1..n_lag and powers 1..n_pow on each
// side. Cells iterate lexicographically in (k, a1, a2), so for the
// (n_lag=2, n_pow=2) target grid the eight cells are
// (1,1,1), (1,1,2), (1,2,1), (1,2,2), (2,1,1), (2,1,2), (2,2,1), (2,2,2).
struct DescriptorGrid {
    int n_mom = 5;
    int n_lag = 2;
    int n_pow = 2;

    int autocorr_size() const { return n_lag * n_pow * n_pow; }
    int flat_size() const { return n_mom + autocorr_size(); }

    std::size_t autocorr_index(int k, int a1, int a2) const {
        return static_cast<std::size_t>(((k - 1) * n_pow + (a1 - 1)) * n_pow + (a2 - 1));
    }

    bool operator==(const DescriptorGrid&) const = default;

    void validate() const {
        if (n_mom < 1 || n_lag < 1 || n_pow < 1)
            throw_config("descriptor grid dimensions must be positive");
    }
};

// The target grid every trained operator predicts: five moments, lags and
// powers up to two (eight autocorrelation cells).
inline constexpr DescriptorGrid kTargetGrid{5, 2, 2};

// Raw statistical signature of a stream: moments in time^i units plus the
// autocorrelation grid (values in [-1, 1]).
struct DescriptorSet {
    std::vector<double> moments;
    std::vector<double> autocorr;
    DescriptorGrid grid;

    double moment(int order) const { return moments.at(static_cast<std::size_t>(order - 1)); }
    double rho(int k, int a1, int a2) const { return autocorr.at(grid.autocorr_index(k, a1, a2)); }
    double rate() const { return 1.0 / moment(1); }
    double scv() const {
        const double m1 = moment(1);
        return moment(2) / (m1 * m1) - 1.0;
    }
};

// Log-moment form consumed and produced by the neural operator; the
// autocorrelation block is carried through untouched.
struct LogDescriptors {
    std::vector<double> log_moments;
    std::vector<double> autocorr;
    DescriptorGrid grid;

    double log_moment(int order) const {
        return log_moments.at(static_cast<std::size_t>(order - 1));
    }
};

LogDescriptors log_transform(const DescriptorSet& d);
DescriptorSet exp_transform(const LogDescriptors& d);

}  // namespace supermap
