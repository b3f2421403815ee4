#pragma once

#include <map>
#include <optional>
#include <span>

#include "supermap/metrics.hpp"
#include "supermap/phase_type.hpp"

namespace supermap::baselines {

// Renewal-surrogate summary of one stream: arrival rate and inter-arrival
// SCV. Everything the classical methods see.
struct StreamSummary {
    double rate = 0.0;
    double scv = 1.0;
};

// Rate-weighted combination of the individual variabilities:
//   scv = sum (rate_i / total_rate) * scv_i.
StreamSummary whitt_asymptotic(std::span<const StreamSummary> streams);

// SCV of the stationary interval of the merged renewal surrogates. Each
// stream is replaced by a two-moment PH renewal process and the pair is
// merged exactly; n-way merges fold pairwise. Recipe details in
// BASELINES.md; behavior is regression-pinned.
StreamSummary whitt_stationary_interval(std::span<const StreamSummary> streams);

struct AlbinContext {
    double utilization = 0.5;           // downstream load feeding the weight
    std::optional<double> weight;       // explicit override of w
};

// Convex combination w * asymptotic + (1 - w) * stationary-interval with
//   w = 1 / (1 + 4 (1-u)^2 (v-1)),  v = 1 / sum (rate_i/total)^2.
StreamSummary albin_hybrid(std::span<const StreamSummary> streams, const AlbinContext& context);

// Two-moment PH fit backing the stationary-interval surrogate:
// exponential at scv 1, balanced-means hyperexponential above, mixed
// Erlang below (phase count capped at 50, so scv below 0.02 is clamped).
PhaseTypeDist fit_ph_two_moment(double mean, double scv);

enum class BaselineMethod { whitt_asymptotic, whitt_stationary_interval, albin };

std::string to_string(BaselineMethod method);

// Baseline second moment for one labeled pair: merged scv by the chosen
// method, then m2 = (1 + scv) * m_S(1)^2 with the exact merged mean.
double baseline_m2(const data::LabeledSample& sample, BaselineMethod method,
                   const AlbinContext& context = {});

struct RegimeError {
    std::size_t count = 0;
    double mape_m2 = 0.0;
};

// Second-moment percentage errors against the exact targets, aggregated
// over the SCV-scheme regime partition.
struct BaselineErrorTable {
    std::map<metrics::RegimeKey, RegimeError> by_regime;
    double overall_mape_m2 = 0.0;
};

BaselineErrorTable baseline_second_moment_error(const std::vector<data::LabeledSample>& samples,
                                                BaselineMethod method,
                                                const AlbinContext& context = {});

}  // namespace supermap::baselines
