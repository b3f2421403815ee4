#include "supermap/simulator.hpp"

#include <algorithm>
#include <cmath>

namespace supermap::sim {

namespace {

// Per-state competing-exponential tables for one MAP: total exit rate and
// the cumulative law over (target state, arrival?) transitions.
struct MapSampler {
    struct Target {
        double cum;
        int state;
        bool arrival;
    };

    explicit MapSampler(const MarkovArrivalProcess& map) {
        const int n = map.dim();
        exit_rate.resize(static_cast<std::size_t>(n));
        targets.resize(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            const double total = -map.d0(i, i);
            exit_rate[static_cast<std::size_t>(i)] = total;
            auto& row = targets[static_cast<std::size_t>(i)];
            double cum = 0.0;
            for (int j = 0; j < n; ++j) {
                if (j != i && map.d0(i, j) > 0.0) {
                    cum += map.d0(i, j) / total;
                    row.push_back({cum, j, false});
                }
            }
            for (int j = 0; j < n; ++j) {
                if (map.d1(i, j) > 0.0) {
                    cum += map.d1(i, j) / total;
                    row.push_back({cum, j, true});
                }
            }
            if (!row.empty()) row.back().cum = 1.0;  // swallow roundoff
        }
    }

    std::vector<double> exit_rate;
    std::vector<std::vector<Target>> targets;
};

int pick_from_cdf(const std::vector<double>& cdf, double u) {
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    return static_cast<int>(std::min<std::ptrdiff_t>(it - cdf.begin(),
                                                     static_cast<std::ptrdiff_t>(cdf.size()) - 1));
}

// PH absorption-time sampler with precomputed per-phase tables.
struct PhSampler {
    explicit PhSampler(const PhaseTypeDist& ph) {
        require_valid_ph(ph);
        const int n = ph.dim();
        alpha_cdf.reserve(static_cast<std::size_t>(n));
        double cum = 0.0;
        for (int i = 0; i < n; ++i) {
            cum += ph.alpha(i);
            alpha_cdf.push_back(cum);
        }
        alpha_cdf.back() = 1.0;

        const Vector exit = ph.exit_rates();
        rate.resize(static_cast<std::size_t>(n));
        rows.resize(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            const double total = -ph.t(i, i);
            rate[static_cast<std::size_t>(i)] = total;
            auto& row = rows[static_cast<std::size_t>(i)];
            double c = 0.0;
            for (int j = 0; j < n; ++j) {
                if (j != i && ph.t(i, j) > 0.0) {
                    c += ph.t(i, j) / total;
                    row.push_back({c, j});
                }
            }
            c += std::max(exit(i), 0.0) / total;
            row.push_back({1.0, -1});  // absorption
        }
    }

    double draw(Philox& rng) const {
        double t = 0.0;
        int phase = pick_from_cdf(alpha_cdf, rng.uniform());
        while (phase >= 0) {
            t += rng.exponential(rate[static_cast<std::size_t>(phase)]);
            const double u = rng.uniform();
            const auto& row = rows[static_cast<std::size_t>(phase)];
            int next = -1;
            for (const auto& entry : row) {
                if (u <= entry.cum) {
                    next = entry.state;
                    break;
                }
            }
            phase = next;
        }
        return t;
    }

    struct Entry {
        double cum;
        int state;
    };
    std::vector<double> alpha_cdf;
    std::vector<double> rate;
    std::vector<std::vector<Entry>> rows;
};

}  // namespace

std::vector<double> simulate_map_stream(const MarkovArrivalProcess& map, std::size_t count,
                                        std::uint64_t seed) {
    require_valid(map);
    const StationaryContext ctx = stationary_context(map);
    const MapSampler sampler(map);
    Philox rng(seed);

    std::vector<double> pi_cdf;
    pi_cdf.reserve(static_cast<std::size_t>(map.dim()));
    double cum = 0.0;
    for (int i = 0; i < map.dim(); ++i) {
        cum += ctx.pi(i);
        pi_cdf.push_back(cum);
    }
    pi_cdf.back() = 1.0;

    std::vector<double> arrivals;
    arrivals.reserve(count);
    int state = pick_from_cdf(pi_cdf, rng.uniform());
    double t = 0.0;
    while (arrivals.size() < count) {
        t += rng.exponential(sampler.exit_rate[static_cast<std::size_t>(state)]);
        const double u = rng.uniform();
        const auto& row = sampler.targets[static_cast<std::size_t>(state)];
        for (const auto& target : row) {
            if (u <= target.cum) {
                if (target.arrival) arrivals.push_back(t);
                state = target.state;
                break;
            }
        }
    }
    return arrivals;
}

double sample_ph(const PhaseTypeDist& ph, Philox& rng) { return PhSampler(ph).draw(rng); }

DescriptorSet empirical_descriptors(std::span<const double> interarrivals,
                                    const DescriptorGrid& grid) {
    grid.validate();
    const std::size_t n = interarrivals.size();
    if (n < 2) throw_domain("empirical descriptors need at least two samples");

    const int mom_needed = std::max(grid.n_mom, 2 * grid.n_pow);
    std::vector<double> mean_pow(static_cast<std::size_t>(mom_needed), 0.0);
    for (double x : interarrivals) {
        double p = 1.0;
        for (int a = 0; a < mom_needed; ++a) {
            p *= x;
            mean_pow[static_cast<std::size_t>(a)] += p;
        }
    }
    for (double& v : mean_pow) v /= static_cast<double>(n);
    auto m = [&](int i) { return mean_pow[static_cast<std::size_t>(i - 1)]; };

    DescriptorSet out;
    out.grid = grid;
    out.moments.assign(mean_pow.begin(), mean_pow.begin() + grid.n_mom);
    out.autocorr.assign(static_cast<std::size_t>(grid.autocorr_size()), 0.0);

    std::vector<double> variance(static_cast<std::size_t>(grid.n_pow));
    for (int a = 1; a <= grid.n_pow; ++a) {
        const double v = m(2 * a) - m(a) * m(a);
        if (!(v > m(2 * a) * 1e-12))
            throw_degenerate("degenerate sample variance for power " + std::to_string(a));
        variance[static_cast<std::size_t>(a - 1)] = v;
    }

    // Powers of the sample path, a = 1..n_pow.
    std::vector<std::vector<double>> pow_path(static_cast<std::size_t>(grid.n_pow));
    for (int a = 1; a <= grid.n_pow; ++a) {
        auto& v = pow_path[static_cast<std::size_t>(a - 1)];
        v.resize(n);
        if (a == 1) {
            std::copy(interarrivals.begin(), interarrivals.end(), v.begin());
        } else {
            const auto& prev = pow_path[static_cast<std::size_t>(a - 2)];
            for (std::size_t i = 0; i < n; ++i) v[i] = prev[i] * interarrivals[i];
        }
    }

    for (int k = 1; k <= grid.n_lag; ++k) {
        if (static_cast<std::size_t>(k) >= n)
            throw_domain("not enough samples for lag " + std::to_string(k));
        for (int a1 = 1; a1 <= grid.n_pow; ++a1) {
            const auto& early = pow_path[static_cast<std::size_t>(a1 - 1)];
            for (int a2 = 1; a2 <= grid.n_pow; ++a2) {
                const auto& late = pow_path[static_cast<std::size_t>(a2 - 1)];
                double cross = 0.0;
                for (std::size_t t = 0; t + static_cast<std::size_t>(k) < n; ++t)
                    cross += early[t] * late[t + static_cast<std::size_t>(k)];
                cross /= static_cast<double>(n - static_cast<std::size_t>(k));
                const double cov = cross - m(a1) * m(a2);
                // Different averaging windows can push the estimate
                // marginally outside [-1,1]; clamp.
                const double rho =
                    cov / std::sqrt(variance[static_cast<std::size_t>(a1 - 1)] *
                                    variance[static_cast<std::size_t>(a2 - 1)]);
                out.autocorr[grid.autocorr_index(k, a1, a2)] = std::clamp(rho, -1.0, 1.0);
            }
        }
    }
    return out;
}

StationResult run_station(std::span<const double> arrivals, const PhaseTypeDist& service,
                          double warmup_fraction, std::uint64_t seed) {
    if (arrivals.empty()) throw_domain("station needs at least one arrival");
    if (!(warmup_fraction >= 0.0 && warmup_fraction < 1.0))
        throw_config("warmup fraction must lie in [0,1)");

    const PhSampler sampler(service);
    Philox rng(seed);

    StationResult result;
    result.departures.resize(arrivals.size());
    double prev_dep = 0.0;
    for (std::size_t i = 0; i < arrivals.size(); ++i) {
        const double start = std::max(arrivals[i], prev_dep);
        prev_dep = start + sampler.draw(rng);
        result.departures[i] = prev_dep;
    }

    const double t_end = prev_dep;
    const double arrival_rate = static_cast<double>(arrivals.size()) / arrivals.back();
    const double load = arrival_rate * ph_mean(service);
    result.hist.instability_warning = load >= 1.0;

    const double t_warm = warmup_fraction * t_end;
    auto& hist = result.hist;
    hist.probs.assign(kHistogramLen, 0.0);

    // Sweep the merged arrival/departure event sequence accumulating
    // time-in-state areas over [t_warm, t_end].
    std::size_t ai = 0, di = 0;
    long level = 0;
    double t_cur = 0.0;
    double area = 0.0;
    double busy_window = 0.0;
    const double window = t_end - t_warm;
    while (di < result.departures.size()) {
        double t_next;
        int delta;
        if (ai < arrivals.size() && arrivals[ai] <= result.departures[di]) {
            t_next = arrivals[ai++];
            delta = +1;
        } else {
            t_next = result.departures[di++];
            delta = -1;
        }
        const double lo = std::max(t_cur, t_warm);
        if (t_next > lo) {
            const double dt = t_next - lo;
            if (level < kHistogramLen)
                hist.probs[static_cast<std::size_t>(level)] += dt;
            else
                hist.truncated_mass += dt;
            area += dt * static_cast<double>(level);
            if (level > 0) busy_window += dt;
        }
        level += delta;
        t_cur = t_next;
    }

    for (double& p : hist.probs) p /= window;
    hist.truncated_mass /= window;
    hist.mean_in_system = area / window;
    hist.observed_utilization = busy_window / window;
    return result;
}

std::vector<double> merge_event_streams(std::span<const double> a, std::span<const double> b) {
    std::vector<double> merged(a.size() + b.size());
    std::merge(a.begin(), a.end(), b.begin(), b.end(), merged.begin());
    return merged;
}

System1Result run_system1(const MarkovArrivalProcess& map1, const MarkovArrivalProcess& map2,
                          const PhaseTypeDist& service, const SimConfig& config) {
    const Philox root(config.seed);
    const auto arrivals1 =
        simulate_map_stream(map1, config.arrivals_per_stream, root.derive(1).next_u64());
    const auto arrivals2 =
        simulate_map_stream(map2, config.arrivals_per_stream, root.derive(2).next_u64());
    const auto merged = merge_event_streams(arrivals1, arrivals2);

    System1Result result;
    result.merged_interarrivals.resize(merged.size() - 1);
    for (std::size_t i = 1; i < merged.size(); ++i)
        result.merged_interarrivals[i - 1] = merged[i] - merged[i - 1];

    result.hist =
        run_station(merged, service, config.warmup_fraction, root.derive(3).next_u64()).hist;
    return result;
}

System2Result run_system2(const MarkovArrivalProcess& map_1a, const MarkovArrivalProcess& map_2a,
                          const MarkovArrivalProcess& map_1b, const MarkovArrivalProcess& map_2b,
                          const PhaseTypeDist& service_a, const PhaseTypeDist& service_b,
                          const PhaseTypeDist& service_c, const SimConfig& config) {
    const Philox root(config.seed);
    const auto a1 = simulate_map_stream(map_1a, config.arrivals_per_stream, root.derive(1).next_u64());
    const auto a2 = simulate_map_stream(map_2a, config.arrivals_per_stream, root.derive(2).next_u64());
    const auto b1 = simulate_map_stream(map_1b, config.arrivals_per_stream, root.derive(3).next_u64());
    const auto b2 = simulate_map_stream(map_2b, config.arrivals_per_stream, root.derive(4).next_u64());

    const auto merged_a = merge_event_streams(a1, a2);
    const auto merged_b = merge_event_streams(b1, b2);

    auto station_a = run_station(merged_a, service_a, 0.0, root.derive(5).next_u64());
    auto station_b = run_station(merged_b, service_b, 0.0, root.derive(6).next_u64());

    const auto merged_c = merge_event_streams(station_a.departures, station_b.departures);
    auto station_c =
        run_station(merged_c, service_c, config.warmup_fraction, root.derive(7).next_u64());

    System2Result result;
    result.hist_c = station_c.hist;
    result.utilization_a = station_a.hist.observed_utilization;
    result.utilization_b = station_b.hist.observed_utilization;
    result.utilization_c = station_c.hist.observed_utilization;
    return result;
}

}  // namespace supermap::sim
