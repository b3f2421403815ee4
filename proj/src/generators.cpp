#include "supermap/generators.hpp"

#include <cmath>
#include <nlohmann/json.hpp>

namespace supermap {

std::string to_string(GenMethod method) {
    switch (method) {
        case GenMethod::strong_negative: return "strong_negative";
        case GenMethod::strong_positive: return "strong_positive";
        case GenMethod::mild: return "mild";
    }
    return "unknown";
}

GenMethod gen_method_from_string(const std::string& name) {
    if (name == "strong_negative") return GenMethod::strong_negative;
    if (name == "strong_positive") return GenMethod::strong_positive;
    if (name == "mild") return GenMethod::mild;
    throw_config("unknown generator method: " + name);
}

MarkovArrivalProcess build_regime_switching_map(const RegimeSpec& spec) {
    if (spec.regimes.empty()) throw_structural("regime spec needs at least one regime");
    const int m = static_cast<int>(spec.regimes.size());
    if (spec.r.rows() != m || spec.r.cols() != m)
        throw_structural("regime transition matrix dimension mismatch");
    for (int i = 0; i < m; ++i) {
        double row = 0.0;
        for (int j = 0; j < m; ++j) {
            if (spec.r(i, j) < 0.0 || spec.r(i, j) > 1.0)
                throw_structural("regime transition probabilities must lie in [0,1]");
            row += spec.r(i, j);
        }
        if (std::abs(row - 1.0) > 1e-10)
            throw_structural("regime transition matrix rows must sum to 1");
    }

    int total = 0;
    std::vector<int> offsets(spec.regimes.size());
    for (std::size_t r = 0; r < spec.regimes.size(); ++r) {
        require_valid_ph(spec.regimes[r]);
        offsets[r] = total;
        total += spec.regimes[r].dim();
    }

    MarkovArrivalProcess map;
    map.d0 = Matrix::Zero(total, total);
    map.d1 = Matrix::Zero(total, total);
    for (int r = 0; r < m; ++r) {
        const auto& ph_r = spec.regimes[static_cast<std::size_t>(r)];
        map.d0.block(offsets[static_cast<std::size_t>(r)], offsets[static_cast<std::size_t>(r)],
                     ph_r.dim(), ph_r.dim()) = ph_r.t;
        const Vector exit = ph_r.exit_rates();
        for (int s = 0; s < m; ++s) {
            const auto& ph_s = spec.regimes[static_cast<std::size_t>(s)];
            map.d1.block(offsets[static_cast<std::size_t>(r)], offsets[static_cast<std::size_t>(s)],
                         ph_r.dim(), ph_s.dim()) = spec.r(r, s) * (exit * ph_s.alpha);
        }
    }
    return map;
}

namespace {

Matrix two_regime_matrix(double p_stay) {
    Matrix r(2, 2);
    r << p_stay, 1.0 - p_stay, 1.0 - p_stay, p_stay;
    return r;
}

MarkovArrivalProcess build_two_erlang_map(double mu_fast, int k_fast, double mu_slow, int k_slow,
                                          double p_stay) {
    RegimeSpec spec;
    spec.regimes.push_back(erlang_ph(k_fast, mu_fast));
    spec.regimes.push_back(erlang_ph(k_slow, mu_slow));
    spec.r = two_regime_matrix(p_stay);
    return time_scale(build_regime_switching_map(spec), 1.0);
}

// Marginal SCV of the even fast/slow Erlang mixture at unit pre-scale
// mean; used to accept/reject method-1 parameter draws.
double alternating_marginal_scv(double mu_fast, int k_fast, double mu_slow, int k_slow) {
    const double m1 = 0.5 * (mu_fast + mu_slow);
    const double m2 = 0.5 * (mu_fast * mu_fast * (1.0 + 1.0 / k_fast) +
                             mu_slow * mu_slow * (1.0 + 1.0 / k_slow));
    return m2 / (m1 * m1) - 1.0;
}

struct RegimeParams {
    double mu_fast;
    double mu_slow;
    int k_fast;
    int k_slow;
};

RegimeParams draw_regime_params(const GeneratorConfig& config, Philox& rng, bool scv_guard) {
    const auto& rr = config.ranges;
    for (int attempt = 0; attempt < rr.max_resample; ++attempt) {
        RegimeParams p{};
        p.mu_fast = config.mean_fast.value_or(rng.uniform(rr.mu_fast_lo, rr.mu_fast_hi));
        p.mu_slow = config.mean_slow.value_or(2.0 - p.mu_fast);
        p.k_fast = config.k_fast.value_or(static_cast<int>(
            rng.uniform_int(static_cast<std::uint64_t>(rr.erlang_k_lo),
                            static_cast<std::uint64_t>(rr.erlang_k_hi))));
        p.k_slow = config.k_slow.value_or(static_cast<int>(
            rng.uniform_int(static_cast<std::uint64_t>(rr.erlang_k_lo),
                            static_cast<std::uint64_t>(rr.erlang_k_hi))));
        if (!(p.mu_fast < p.mu_slow)) throw_config("mean_fast must be below mean_slow");
        const bool all_explicit = config.mean_fast && config.k_fast && config.k_slow;
        if (scv_guard && !all_explicit) {
            const double scv = alternating_marginal_scv(p.mu_fast, p.k_fast, p.mu_slow, p.k_slow);
            if (scv < rr.neg_scv_lo || scv > rr.neg_scv_hi) continue;
        }
        return p;
    }
    throw_analysis("regime parameter sampling failed to satisfy the SCV window");
}

}  // namespace

MarkovArrivalProcess gen_strong_negative(const GeneratorConfig& config) {
    Philox rng(config.seed);
    const RegimeParams p = draw_regime_params(config, rng, /*scv_guard=*/true);
    return build_two_erlang_map(p.mu_fast, p.k_fast, p.mu_slow, p.k_slow, 0.0);
}

MarkovArrivalProcess gen_strong_positive(const GeneratorConfig& config) {
    Philox rng(config.seed);
    const auto& rr = config.ranges;
    const double p_stay = config.p_stay.value_or(rng.uniform(rr.p_stay_lo, rr.p_stay_hi));
    if (!(p_stay > 0.5 && p_stay < 1.0))
        throw_config("strong-positive p_stay must lie in (0.5, 1)");
    const RegimeParams p = draw_regime_params(config, rng, /*scv_guard=*/false);
    return build_two_erlang_map(p.mu_fast, p.k_fast, p.mu_slow, p.k_slow, p_stay);
}

double mild_stickiness(double rho_target) {
    const double p_stay = 0.5 + 0.45 * std::tanh(2.0 * rho_target);
    return std::min(0.95, std::max(0.05, p_stay));
}

MarkovArrivalProcess gen_mild(const GeneratorConfig& config) {
    Philox rng(config.seed);
    const auto& rr = config.ranges;

    for (int attempt = 0; attempt < rr.max_resample; ++attempt) {
        const double rho_target =
            config.rho_target.value_or(rng.uniform(rr.rho_target_lo, rr.rho_target_hi));
        if (!(rho_target > -1.0 && rho_target < 1.0))
            throw_config("rho_target must lie in (-1, 1)");
        const double mu_fast = config.mean_fast.value_or(rng.uniform(rr.mu_fast_lo, rr.mu_fast_hi));
        const double mu_slow = config.mean_slow.value_or(2.0 - mu_fast);
        if (!(mu_fast < mu_slow)) throw_config("mean_fast must be below mean_slow");

        const int k_fast = config.k_fast.value_or(static_cast<int>(rng.uniform_int(3, 19)));
        const PhaseTypeDist fast = erlang_ph(k_fast, mu_fast);

        const bool heavy = config.heavy_marginals.value_or(rng.bernoulli(rr.heavy_prob));
        PhaseTypeDist slow;
        if (heavy) {
            const double mix = rng.uniform(0.2, 0.8);
            const double ratio = rng.uniform(5.0, 80.0);
            const PhaseTypeDist hyper = hyperexp2_ph(mu_slow, mix, ratio);
            if (rng.uniform() < 0.6) {
                const int k_slow = config.k_slow.value_or(static_cast<int>(rng.uniform_int(2, 14)));
                const double w = rng.uniform(0.2, 0.8);
                slow = mix_ph(hyper, erlang_ph(k_slow, mu_slow), w);
            } else {
                slow = hyper;
            }
        } else {
            const int k_slow = config.k_slow.value_or(static_cast<int>(rng.uniform_int(2, 24)));
            slow = erlang_ph(k_slow, mu_slow);
        }

        if (fast.dim() + slow.dim() > rr.max_dim) continue;

        const double p_stay = mild_stickiness(rho_target);

        RegimeSpec spec;
        spec.regimes.push_back(fast);
        spec.regimes.push_back(slow);
        spec.r = two_regime_matrix(p_stay);
        return time_scale(build_regime_switching_map(spec), 1.0);
    }
    throw_analysis("mild generator failed to satisfy the state budget");
}

MarkovArrivalProcess generate_map(const GeneratorConfig& config) {
    switch (config.method) {
        case GenMethod::strong_negative: return gen_strong_negative(config);
        case GenMethod::strong_positive: return gen_strong_positive(config);
        case GenMethod::mild: return gen_mild(config);
    }
    throw_config("unknown generator method");
}

MapPair sample_map_pair(std::uint64_t seed, const std::array<double, 3>& method_mix,
                        const SamplingRanges& ranges) {
    double total = 0.0;
    for (double w : method_mix) {
        if (w < 0.0) throw_config("method mix weights must be nonnegative");
        total += w;
    }
    if (std::abs(total - 1.0) > 1e-9) throw_config("method mix weights must sum to 1");

    Philox rng(seed);
    auto draw_method = [&]() {
        const double u = rng.uniform();
        if (u < method_mix[0]) return GenMethod::strong_negative;
        if (u < method_mix[0] + method_mix[1]) return GenMethod::strong_positive;
        return GenMethod::mild;
    };

    MapPair pair;
    pair.method_a = draw_method();
    pair.method_b = draw_method();
    const double scale = rng.uniform(ranges.pair_scale_lo, ranges.pair_scale_hi);

    GeneratorConfig config_a;
    config_a.method = pair.method_a;
    config_a.ranges = ranges;
    config_a.seed = Philox(seed).derive(1).next_u64();
    GeneratorConfig config_b;
    config_b.method = pair.method_b;
    config_b.ranges = ranges;
    config_b.seed = Philox(seed).derive(2).next_u64();

    pair.a = generate_map(config_a);
    pair.b = time_scale(generate_map(config_b), scale);
    pair.scale = scale;
    return pair;
}

namespace {

nlohmann::json ranges_to_json(const SamplingRanges& r) {
    return nlohmann::json{{"mu_fast_lo", r.mu_fast_lo},
                          {"mu_fast_hi", r.mu_fast_hi},
                          {"erlang_k_lo", r.erlang_k_lo},
                          {"erlang_k_hi", r.erlang_k_hi},
                          {"p_stay_lo", r.p_stay_lo},
                          {"p_stay_hi", r.p_stay_hi},
                          {"rho_target_lo", r.rho_target_lo},
                          {"rho_target_hi", r.rho_target_hi},
                          {"heavy_prob", r.heavy_prob},
                          {"neg_scv_lo", r.neg_scv_lo},
                          {"neg_scv_hi", r.neg_scv_hi},
                          {"pair_scale_lo", r.pair_scale_lo},
                          {"pair_scale_hi", r.pair_scale_hi},
                          {"max_dim", r.max_dim},
                          {"max_resample", r.max_resample}};
}

SamplingRanges ranges_from_json(const nlohmann::json& j) {
    SamplingRanges r;
    r.mu_fast_lo = j.value("mu_fast_lo", r.mu_fast_lo);
    r.mu_fast_hi = j.value("mu_fast_hi", r.mu_fast_hi);
    r.erlang_k_lo = j.value("erlang_k_lo", r.erlang_k_lo);
    r.erlang_k_hi = j.value("erlang_k_hi", r.erlang_k_hi);
    r.p_stay_lo = j.value("p_stay_lo", r.p_stay_lo);
    r.p_stay_hi = j.value("p_stay_hi", r.p_stay_hi);
    r.rho_target_lo = j.value("rho_target_lo", r.rho_target_lo);
    r.rho_target_hi = j.value("rho_target_hi", r.rho_target_hi);
    r.heavy_prob = j.value("heavy_prob", r.heavy_prob);
    r.neg_scv_lo = j.value("neg_scv_lo", r.neg_scv_lo);
    r.neg_scv_hi = j.value("neg_scv_hi", r.neg_scv_hi);
    r.pair_scale_lo = j.value("pair_scale_lo", r.pair_scale_lo);
    r.pair_scale_hi = j.value("pair_scale_hi", r.pair_scale_hi);
    r.max_dim = j.value("max_dim", r.max_dim);
    r.max_resample = j.value("max_resample", r.max_resample);
    return r;
}

}  // namespace

std::string generator_config_to_json(const GeneratorConfig& config) {
    nlohmann::json j;
    j["method"] = to_string(config.method);
    if (config.rho_target) j["rho_target"] = *config.rho_target;
    if (config.mean_fast) j["mean_fast"] = *config.mean_fast;
    if (config.mean_slow) j["mean_slow"] = *config.mean_slow;
    if (config.k_fast) j["k_fast"] = *config.k_fast;
    if (config.k_slow) j["k_slow"] = *config.k_slow;
    if (config.p_stay) j["p_stay"] = *config.p_stay;
    if (config.heavy_marginals) j["heavy_marginals"] = *config.heavy_marginals;
    j["seed"] = config.seed;
    j["ranges"] = ranges_to_json(config.ranges);
    return j.dump(2);
}

GeneratorConfig generator_config_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw_config(std::string("generator config parse failure: ") + e.what());
    }
    GeneratorConfig config;
    if (j.contains("method")) config.method = gen_method_from_string(j["method"].get<std::string>());
    if (j.contains("rho_target")) config.rho_target = j["rho_target"].get<double>();
    if (j.contains("mean_fast")) config.mean_fast = j["mean_fast"].get<double>();
    if (j.contains("mean_slow")) config.mean_slow = j["mean_slow"].get<double>();
    if (j.contains("k_fast")) config.k_fast = j["k_fast"].get<int>();
    if (j.contains("k_slow")) config.k_slow = j["k_slow"].get<int>();
    if (j.contains("p_stay")) config.p_stay = j["p_stay"].get<double>();
    if (j.contains("heavy_marginals")) config.heavy_marginals = j["heavy_marginals"].get<bool>();
    if (j.contains("seed")) config.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("ranges")) config.ranges = ranges_from_json(j["ranges"]);
    return config;
}

}  // namespace supermap
