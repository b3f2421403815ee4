#include "supermap/baselines.hpp"

#include <cmath>

namespace supermap::baselines {

namespace {

void check_streams(std::span<const StreamSummary> streams) {
    if (streams.empty()) throw_config("baseline needs at least one stream");
    for (const auto& s : streams) {
        if (!(s.rate > 0.0) || !std::isfinite(s.rate))
            throw_config("stream rate must be positive and finite");
        if (!(s.scv > 0.0) || !std::isfinite(s.scv))
            throw_config("stream scv must be positive and finite");
    }
}

constexpr int kMaxErlangPhases = 50;

}  // namespace

StreamSummary whitt_asymptotic(std::span<const StreamSummary> streams) {
    check_streams(streams);
    double total_rate = 0.0;
    for (const auto& s : streams) total_rate += s.rate;
    double scv = 0.0;
    for (const auto& s : streams) scv += (s.rate / total_rate) * s.scv;
    return {total_rate, scv};
}

PhaseTypeDist fit_ph_two_moment(double mean, double scv) {
    if (!(mean > 0.0)) throw_config("PH fit requires a positive mean");
    if (!(scv > 0.0)) throw_config("PH fit requires a positive scv");

    if (std::abs(scv - 1.0) <= 1e-9) return erlang_ph(1, mean);

    if (scv > 1.0) {
        // Balanced-means hyperexponential.
        const double p = 0.5 * (1.0 + std::sqrt((scv - 1.0) / (scv + 1.0)));
        PhaseTypeDist ph;
        ph.alpha = RowVector(2);
        ph.alpha << p, 1.0 - p;
        ph.t = Matrix::Zero(2, 2);
        ph.t(0, 0) = -2.0 * p / mean;
        ph.t(1, 1) = -2.0 * (1.0 - p) / mean;
        return ph;
    }

    // Mixed Erlang E_{k-1,k}: exact for 1/k <= scv <= 1/(k-1); the phase
    // budget caps how small an scv is representable.
    double c2 = std::max(scv, 1.0 / kMaxErlangPhases);
    const int k = static_cast<int>(std::ceil(1.0 / c2));
    c2 = std::max(c2, 1.0 / k);  // guard roundoff at the band edge
    const double p =
        (k * c2 - std::sqrt(k * (1.0 + c2) - k * k * c2)) / (1.0 + c2);
    const double nu = (k - p) / mean;

    PhaseTypeDist ph;
    ph.alpha = RowVector::Zero(k);
    // Phase 1 of an Erlang(k) chain; with probability p the chain skips
    // one stage, giving the E_{k-1} branch on the shared rate.
    ph.t = Matrix::Zero(k, k);
    for (int i = 0; i < k; ++i) {
        ph.t(i, i) = -nu;
        if (i + 1 < k) ph.t(i, i + 1) = nu;
    }
    if (k == 1) {
        ph.alpha(0) = 1.0;
    } else {
        ph.alpha(0) = 1.0 - p;  // full Erlang(k)
        ph.alpha(1) = p;        // Erlang(k-1) branch
    }
    return ph;
}

namespace {

StreamSummary merge_pair_stationary_interval(const StreamSummary& s1, const StreamSummary& s2) {
    const PhaseTypeDist ph1 = fit_ph_two_moment(1.0 / s1.rate, s1.scv);
    const PhaseTypeDist ph2 = fit_ph_two_moment(1.0 / s2.rate, s2.scv);
    const MarkovArrivalProcess merged = superpose(renewal_map(ph1), renewal_map(ph2));
    const auto m = interarrival_moments(merged, 2);
    return {1.0 / m[0], m[1] / (m[0] * m[0]) - 1.0};
}

}  // namespace

StreamSummary whitt_stationary_interval(std::span<const StreamSummary> streams) {
    check_streams(streams);
    if (streams.size() == 1) return streams[0];
    StreamSummary acc = merge_pair_stationary_interval(streams[0], streams[1]);
    for (std::size_t i = 2; i < streams.size(); ++i)
        acc = merge_pair_stationary_interval(acc, streams[i]);
    return acc;
}

StreamSummary albin_hybrid(std::span<const StreamSummary> streams, const AlbinContext& context) {
    check_streams(streams);
    double w;
    if (context.weight) {
        w = *context.weight;
    } else {
        if (!(context.utilization >= 0.0 && context.utilization < 1.0))
            throw_config("Albin utilization must lie in [0,1)");
        double total = 0.0;
        for (const auto& s : streams) total += s.rate;
        double sq = 0.0;
        for (const auto& s : streams) sq += (s.rate / total) * (s.rate / total);
        const double v = 1.0 / sq;
        const double one_minus_u = 1.0 - context.utilization;
        w = 1.0 / (1.0 + 4.0 * one_minus_u * one_minus_u * (v - 1.0));
    }
    if (!(w >= 0.0 && w <= 1.0))
        throw_domain("Albin weight outside [0,1]: " + std::to_string(w));

    const StreamSummary asym = whitt_asymptotic(streams);
    const StreamSummary si = whitt_stationary_interval(streams);
    return {asym.rate, w * asym.scv + (1.0 - w) * si.scv};
}

std::string to_string(BaselineMethod method) {
    switch (method) {
        case BaselineMethod::whitt_asymptotic: return "whitt_a";
        case BaselineMethod::whitt_stationary_interval: return "whitt_r";
        case BaselineMethod::albin: return "albin";
    }
    return "unknown";
}

double baseline_m2(const data::LabeledSample& sample, BaselineMethod method,
                   const AlbinContext& context) {
    auto summary = [](const LogDescriptors& d) {
        const double m1 = std::exp(d.log_moment(1));
        const double m2 = std::exp(d.log_moment(2));
        return StreamSummary{1.0 / m1, m2 / (m1 * m1) - 1.0};
    };
    const StreamSummary streams[2] = {summary(sample.input_a), summary(sample.input_b)};

    StreamSummary merged;
    switch (method) {
        case BaselineMethod::whitt_asymptotic: merged = whitt_asymptotic(streams); break;
        case BaselineMethod::whitt_stationary_interval:
            merged = whitt_stationary_interval(streams);
            break;
        case BaselineMethod::albin: merged = albin_hybrid(streams, context); break;
    }
    const double mean = 1.0 / merged.rate;
    return (1.0 + merged.scv) * mean * mean;
}

BaselineErrorTable baseline_second_moment_error(const std::vector<data::LabeledSample>& samples,
                                                BaselineMethod method,
                                                const AlbinContext& context) {
    if (samples.empty()) throw_config("baseline evaluation needs samples");
    std::vector<double> truth(samples.size());
    std::vector<double> predicted(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        truth[i] = std::exp(samples[i].target.log_moment(2));
        predicted[i] = baseline_m2(samples[i], method, context);
    }

    BaselineErrorTable table;
    table.overall_mape_m2 = metrics::mape(truth, predicted);
    const auto partition = metrics::partition_regimes(samples, metrics::PartitionScheme::scv);
    for (const auto& [key, indices] : partition) {
        std::vector<double> t, p;
        t.reserve(indices.size());
        p.reserve(indices.size());
        for (std::size_t idx : indices) {
            t.push_back(truth[idx]);
            p.push_back(predicted[idx]);
        }
        table.by_regime[key] = {indices.size(), metrics::mape(t, p)};
    }
    return table;
}

}  // namespace supermap::baselines
