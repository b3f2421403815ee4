#include "supermap/metrics.hpp"

#include <cmath>
#include <sstream>

namespace supermap::metrics {

double mape(std::span<const double> truth, std::span<const double> predicted) {
    if (truth.size() != predicted.size()) throw_config("mape: length mismatch");
    if (truth.empty()) throw_config("mape: empty input");
    double sum = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (truth[i] == 0.0) throw_domain("mape undefined for zero true value");
        sum += std::abs((truth[i] - predicted[i]) / truth[i]);
    }
    return 100.0 * sum / static_cast<double>(truth.size());
}

double mae(std::span<const double> truth, std::span<const double> predicted) {
    if (truth.size() != predicted.size()) throw_config("mae: length mismatch");
    if (truth.empty()) throw_config("mae: empty input");
    double sum = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i) sum += std::abs(truth[i] - predicted[i]);
    return sum / static_cast<double>(truth.size());
}

double sae(std::span<const double> truth, std::span<const double> predicted) {
    if (truth.size() != kDistributionLen || predicted.size() != kDistributionLen)
        throw_config("sae expects length-500 distributions");
    double sum = 0.0;
    for (std::size_t i = 0; i < kDistributionLen; ++i) {
        if (truth[i] < 0.0 || predicted[i] < 0.0)
            throw_domain("sae requires nonnegative probabilities");
        sum += std::abs(truth[i] - predicted[i]);
    }
    return sum;
}

double rem(std::span<const double> truth, std::span<const double> predicted) {
    if (truth.size() != kDistributionLen || predicted.size() != kDistributionLen)
        throw_config("rem expects length-500 distributions");
    double diff = 0.0;
    double predicted_mean = 0.0;
    for (std::size_t i = 0; i < kDistributionLen; ++i) {
        diff += static_cast<double>(i) * (truth[i] - predicted[i]);
        predicted_mean += static_cast<double>(i) * predicted[i];
    }
    if (predicted_mean == 0.0) throw_domain("rem undefined for zero predicted mean");
    return 100.0 * std::abs(diff) / predicted_mean;
}

int scv_class(double scv) { return scv < 3.0 ? 0 : 1; }

int rho_band(double rho) {
    if (rho < -0.25) return 0;
    if (rho < 0.0) return 1;
    if (rho < 0.25) return 2;
    return 3;
}

int ratio_class(double ratio) { return ratio < 0.5 ? 0 : 1; }

int sign_class(double rho) { return rho < 0.0 ? 0 : 1; }

int utilization_class(double utilization) { return utilization < 0.7 ? 0 : 1; }

RegimeKey classify_scv(double scv1, double scv2, double ratio) {
    RegimeKey key;
    key.scheme = PartitionScheme::scv;
    key.codes[0] = scv_class(scv1);
    key.codes[1] = scv_class(scv2);
    key.codes[2] = ratio_class(ratio);
    return key;
}

RegimeKey classify_rho(double rho1, double rho2, double ratio) {
    RegimeKey key;
    key.scheme = PartitionScheme::rho;
    key.codes[0] = rho_band(rho1);
    key.codes[1] = rho_band(rho2);
    key.codes[2] = ratio_class(ratio);
    return key;
}

RegimeKey classify_system(double scv1, double scv2, double service_scv, double rho1, double rho2,
                          double utilization) {
    RegimeKey key;
    key.scheme = PartitionScheme::system_table;
    key.codes[0] = scv_class(scv1);
    key.codes[1] = scv_class(scv2);
    key.codes[2] = scv_class(service_scv);
    key.codes[3] = sign_class(rho1);
    key.codes[4] = sign_class(rho2);
    key.codes[5] = utilization_class(utilization);
    return key;
}

namespace {

const char* scv_label(int code) { return code == 0 ? "<3" : ">=3"; }
const char* ratio_label(int code) { return code == 0 ? "<0.5" : ">0.5"; }
const char* band_label(int code) {
    switch (code) {
        case 0: return "<-0.25";
        case 1: return "(-0.25,0)";
        case 2: return "(0,0.25)";
        default: return "(0.25,1)";
    }
}
const char* sign_label(int code) { return code == 0 ? "<0" : ">0"; }
const char* util_label(int code) { return code == 0 ? "<0.7" : ">0.7"; }

}  // namespace

std::string RegimeKey::label() const {
    std::ostringstream os;
    switch (scheme) {
        case PartitionScheme::scv:
            os << "scv1" << scv_label(codes[0]) << " scv2" << scv_label(codes[1]) << " ratio"
               << ratio_label(codes[2]);
            break;
        case PartitionScheme::rho:
            os << "rho1" << band_label(codes[0]) << " rho2" << band_label(codes[1]) << " ratio"
               << ratio_label(codes[2]);
            break;
        case PartitionScheme::system_table:
            os << "scv1" << scv_label(codes[0]) << " scv2" << scv_label(codes[1]) << " svc"
               << scv_label(codes[2]) << " rho1" << sign_label(codes[3]) << " rho2"
               << sign_label(codes[4]) << " util" << util_label(codes[5]);
            break;
    }
    return os.str();
}

std::vector<RegimeKey> all_regimes(PartitionScheme scheme) {
    std::vector<RegimeKey> keys;
    switch (scheme) {
        case PartitionScheme::scv:
            for (int a = 0; a < 2; ++a)
                for (int b = 0; b < 2; ++b)
                    for (int r = 0; r < 2; ++r) {
                        RegimeKey k;
                        k.scheme = scheme;
                        k.codes = {a, b, r, -1, -1, -1};
                        keys.push_back(k);
                    }
            break;
        case PartitionScheme::rho:
            for (int a = 0; a < 4; ++a)
                for (int b = 0; b < 4; ++b)
                    for (int r = 0; r < 2; ++r) {
                        RegimeKey k;
                        k.scheme = scheme;
                        k.codes = {a, b, r, -1, -1, -1};
                        keys.push_back(k);
                    }
            break;
        case PartitionScheme::system_table:
            for (int a = 0; a < 2; ++a)
                for (int b = 0; b < 2; ++b)
                    for (int s = 0; s < 2; ++s)
                        for (int r1 = 0; r1 < 2; ++r1)
                            for (int r2 = 0; r2 < 2; ++r2)
                                for (int u = 0; u < 2; ++u) {
                                    RegimeKey k;
                                    k.scheme = scheme;
                                    k.codes = {a, b, s, r1, r2, u};
                                    keys.push_back(k);
                                }
            break;
    }
    return keys;
}

SampleStats sample_stats(const data::LabeledSample& sample) {
    auto block_stats = [](const LogDescriptors& d, double& scv, double& rho) {
        if (d.grid.n_mom < 2) throw_config("partition needs at least two input moments");
        const double m1 = std::exp(d.log_moment(1));
        const double m2 = std::exp(d.log_moment(2));
        scv = m2 / (m1 * m1) - 1.0;
        rho = d.autocorr.at(d.grid.autocorr_index(1, 1, 1));
    };
    SampleStats stats;
    block_stats(sample.input_a, stats.scv_a, stats.rho_a);
    block_stats(sample.input_b, stats.scv_b, stats.rho_b);
    stats.ratio = sample.meta.mean_ratio;
    return stats;
}

std::map<RegimeKey, std::vector<std::size_t>> partition_regimes(
    const std::vector<data::LabeledSample>& samples, PartitionScheme scheme) {
    if (scheme == PartitionScheme::system_table)
        throw_config("the system-table scheme classifies simulation scenarios, not dataset samples");
    std::map<RegimeKey, std::vector<std::size_t>> out;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const SampleStats stats = sample_stats(samples[i]);
        const RegimeKey key = scheme == PartitionScheme::scv
                                  ? classify_scv(stats.scv_a, stats.scv_b, stats.ratio)
                                  : classify_rho(stats.rho_a, stats.rho_b, stats.ratio);
        out[key].push_back(i);
    }
    return out;
}

}  // namespace supermap::metrics
