#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>

#include "supermap/phase_type.hpp"
#include "supermap/rng.hpp"

namespace supermap {

enum class GenMethod { strong_negative, strong_positive, mild };

std::string to_string(GenMethod method);
GenMethod gen_method_from_string(const std::string& name);

// Regime-switching skeleton: per-regime PH inter-arrival laws plus the
// stochastic regime-transition matrix applied at arrival epochs.
struct RegimeSpec {
    std::vector<PhaseTypeDist> regimes;
    Matrix r;
};

// d0 = blockdiag of regime subgenerators; the d1 block (r,s) routes the
// exit vector of regime r into the start vector of regime s with
// probability R[r,s].
MarkovArrivalProcess build_regime_switching_map(const RegimeSpec& spec);

// Distributions behind the parameters the construction algorithms leave
// free. Defaults reproduce the documented envelope checks; every field is
// configurable.
struct SamplingRanges {
    double mu_fast_lo = 0.02;
    double mu_fast_hi = 0.4;
    int erlang_k_lo = 1;   // methods 1-2
    int erlang_k_hi = 5;
    double p_stay_lo = 0.85;  // method 2
    double p_stay_hi = 0.99;
    double rho_target_lo = -0.6;  // method 3
    double rho_target_hi = 0.6;
    double heavy_prob = 0.5;    // method 3: P(heavy_marginals) when unset
    // Method-1 marginal-SCV acceptance window (keeps draws inside the
    // documented envelope; see ledger).
    double neg_scv_lo = 0.12;
    double neg_scv_hi = 1.90;
    double pair_scale_lo = 0.1;  // mean of the rescaled stream in a pair
    double pair_scale_hi = 1.0;
    int max_dim = 50;  // per-stream state budget
    int max_resample = 200;
};

struct GeneratorConfig {
    GenMethod method = GenMethod::mild;
    // Explicit values pin a parameter; unset fields are sampled from
    // `ranges` using `seed`.
    std::optional<double> rho_target;
    std::optional<double> mean_fast;
    std::optional<double> mean_slow;
    std::optional<int> k_fast;
    std::optional<int> k_slow;
    std::optional<double> p_stay;
    std::optional<bool> heavy_marginals;
    std::uint64_t seed = 0;
    SamplingRanges ranges;
};

std::string generator_config_to_json(const GeneratorConfig& config);
GeneratorConfig generator_config_from_json(const std::string& text);

// Deterministic alternation between a fast and a slow Erlang regime;
// unit mean, first-lag autocorrelation below zero.
MarkovArrivalProcess gen_strong_negative(const GeneratorConfig& config);

// Sticky two-regime Erlang MAP (diagonal p_stay > 1/2); unit mean,
// first-lag autocorrelation above zero.
MarkovArrivalProcess gen_strong_positive(const GeneratorConfig& config);

// Maps a target first-lag dependence to regime stickiness:
// clip(0.5 + 0.45 tanh(2 rho_target), 0.05, 0.95).
double mild_stickiness(double rho_target);

// Moderate-dependence construction: Erlang fast regime, randomized
// hyperexponential/Erlang slow regime, stickiness from mild_stickiness;
// unit mean.
MarkovArrivalProcess gen_mild(const GeneratorConfig& config);

MarkovArrivalProcess generate_map(const GeneratorConfig& config);

struct MapPair {
    MarkovArrivalProcess a;  // unit mean
    MarkovArrivalProcess b;  // mean = scale, in (0,1]
    double scale = 1.0;
    GenMethod method_a = GenMethod::mild;
    GenMethod method_b = GenMethod::mild;
};

// Two independent draws from the generator mix (weights over negative,
// positive, mild), both at unit mean, then the second stream is rescaled
// so the pair spans mean ratios on both sides of 1/2.
MapPair sample_map_pair(std::uint64_t seed, const std::array<double, 3>& method_mix,
                        const SamplingRanges& ranges = {});

inline constexpr std::array<double, 3> kDefaultMethodMix{1.0 / 6, 1.0 / 3, 1.0 / 2};

}  // namespace supermap
