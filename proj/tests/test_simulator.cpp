#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "supermap/metrics.hpp"
#include "supermap/simulator.hpp"
#include "support.hpp"

using namespace supermap;
using namespace supermap::testsupport;

namespace {

std::vector<double> mm1_geometric(double rho) {
    std::vector<double> probs(sim::kHistogramLen);
    double p = 1.0 - rho;
    for (auto& v : probs) {
        v = p;
        p *= rho;
    }
    return probs;
}

}  // namespace

TEST_CASE("map stream sampling reproduces exponential and erlang laws") {
    const auto poisson = sim::simulate_map_stream(MarkovArrivalProcess::poisson(2.0), 1000000, 11);
    double sum = 0.0;
    for (std::size_t i = 1; i < poisson.size(); ++i) sum += poisson[i] - poisson[i - 1];
    sum += poisson[0];
    const double mean = sum / static_cast<double>(poisson.size());
    CHECK(std::abs(mean - 0.5) < 0.002);

    const auto erlang = sim::simulate_map_stream(renewal_map(erlang_ph(2, 1.0)), 1000000, 13);
    std::vector<double> gaps(erlang.size() - 1);
    for (std::size_t i = 1; i < erlang.size(); ++i) gaps[i - 1] = erlang[i] - erlang[i - 1];
    const auto d = sim::empirical_descriptors(gaps, {2, 1, 1});
    CHECK(std::abs(d.scv() - 0.5) < 0.01);
    CHECK(std::abs(d.autocorr[0]) < 0.005);
}

TEST_CASE("empirical descriptors match the analytic path on a generated MAP") {
    const auto map = random_map(31, 10);
    const auto exact = descriptor_set(map, 3, 1, 1);
    const auto epochs = sim::simulate_map_stream(map, 1000000, 17);
    std::vector<double> gaps(epochs.size() - 1);
    for (std::size_t i = 1; i < epochs.size(); ++i) gaps[i - 1] = epochs[i] - epochs[i - 1];
    const auto empirical = sim::empirical_descriptors(gaps, {3, 1, 1});
    for (int i = 0; i < 3; ++i)
        CHECK(close_rel(empirical.moments[static_cast<std::size_t>(i)],
                        exact.moments[static_cast<std::size_t>(i)], 0.01));
    CHECK(std::abs(empirical.autocorr[0] - exact.autocorr[0]) < 0.01);
}

TEST_CASE("empirical descriptors reject constant sequences") {
    const std::vector<double> constant(1000, 2.0);
    CHECK_THROWS_AS(sim::empirical_descriptors(constant, DescriptorGrid{2, 1, 1}), Error);
}

TEST_CASE("iid exponential samples show no dependence") {
    Philox rng(5);
    std::vector<double> samples(1000000);
    for (auto& x : samples) x = rng.exponential(1.0);
    const auto d = sim::empirical_descriptors(samples, {2, 1, 1});
    CHECK(std::abs(d.autocorr[0]) < 0.005);
    CHECK(std::abs(d.moments[0] - 1.0) < 0.01);
}

TEST_CASE("merged simulated streams match the exact superposition descriptors") {
    const auto a = random_map(41, 6);
    const auto b = random_map_any(52, 6);
    const auto exact = descriptor_set(superpose(a, b), 5, 2, 2);

    const auto ea = sim::simulate_map_stream(a, 1000000, 21);
    const auto eb = sim::simulate_map_stream(b, 1000000, 22);
    const auto merged = sim::merge_event_streams(ea, eb);
    std::vector<double> gaps(merged.size() - 1);
    for (std::size_t i = 1; i < merged.size(); ++i) gaps[i - 1] = merged[i] - merged[i - 1];
    const auto empirical = sim::empirical_descriptors(gaps, {5, 2, 2});

    for (int i = 0; i < 3; ++i)
        CHECK(close_rel(empirical.moments[static_cast<std::size_t>(i)],
                        exact.moments[static_cast<std::size_t>(i)], 0.01));
    for (std::size_t i = 0; i < exact.autocorr.size(); ++i)
        CHECK(std::abs(empirical.autocorr[i] - exact.autocorr[i]) < 0.01);
}

TEST_CASE("station matches the M/M/1 law at rho 0.5 and 0.7") {
    const auto arrivals = sim::simulate_map_stream(MarkovArrivalProcess::poisson(1.0), 2000000, 3);

    auto station_half = sim::run_station(arrivals, erlang_ph(1, 0.5), 0.1, 4);
    CHECK(station_half.departures.size() == arrivals.size());  // flow conservation
    CHECK(std::abs(station_half.hist.probs[0] - 0.5) < 0.01);
    CHECK(std::abs(station_half.hist.mean_in_system - 1.0) < 0.02);
    CHECK(std::abs(station_half.hist.observed_utilization - 0.5) < 0.01);
    CHECK_FALSE(station_half.hist.instability_warning);

    auto station_heavy = sim::run_station(arrivals, erlang_ph(1, 0.7), 0.1, 5);
    CHECK(std::abs(station_heavy.hist.mean_in_system - 7.0 / 3.0) < 0.05);

    // Low-variability service pushes congestion below the M/M/1 level.
    auto station_det = sim::run_station(arrivals, erlang_ph(16, 0.5), 0.1, 6);
    CHECK(station_det.hist.mean_in_system < 1.0);
}

TEST_CASE("station flags unstable load") {
    const auto arrivals = sim::simulate_map_stream(MarkovArrivalProcess::poisson(1.0), 20000, 7);
    auto r = sim::run_station(arrivals, erlang_ph(1, 1.2), 0.1, 8);
    CHECK(r.hist.instability_warning);
}

TEST_CASE("system 1 with poisson inputs is an M/M/1 queue") {
    sim::SimConfig config;
    config.arrivals_per_stream = 1000000;  // merged: 2e6 arrivals
    config.seed = 99;
    const auto result = sim::run_system1(MarkovArrivalProcess::poisson(0.25),
                                         MarkovArrivalProcess::poisson(0.25),
                                         erlang_ph(1, 1.0), config);
    const auto analytic = mm1_geometric(0.5);
    CHECK(metrics::sae(analytic, result.hist.probs) <= 0.01);
    CHECK(metrics::rem(analytic, result.hist.probs) <= 1.0);

    const auto rerun = sim::run_system1(MarkovArrivalProcess::poisson(0.25),
                                        MarkovArrivalProcess::poisson(0.25),
                                        erlang_ph(1, 1.0), config);
    for (std::size_t i = 0; i < result.hist.probs.size(); ++i)
        CHECK(result.hist.probs[i] == rerun.hist.probs[i]);
    CHECK(result.hist.truncated_mass < 1e-4);
}

TEST_CASE("system 2: flow conservation and determinism") {
    sim::SimConfig config;
    config.arrivals_per_stream = 200000;
    config.seed = 123;
    const auto p = MarkovArrivalProcess::poisson(0.25);
    const auto service = erlang_ph(1, 0.8);  // util 0.4 at a/b, 0.8·... see below
    const auto fast_service = erlang_ph(1, 0.5);

    const auto result = sim::run_system2(p, p, p, p, service, service, fast_service, config);
    // Station c sees rate 1 in total; utilization = rate * mean service.
    CHECK(std::abs(result.utilization_c - 0.5) < 0.01);
    CHECK(std::abs(result.utilization_a - 0.4) < 0.01);
    CHECK(std::abs(result.utilization_b - 0.4) < 0.01);

    const auto rerun = sim::run_system2(p, p, p, p, service, service, fast_service, config);
    for (std::size_t i = 0; i < result.hist_c.probs.size(); ++i)
        CHECK(result.hist_c.probs[i] == rerun.hist_c.probs[i]);
}

TEST_CASE("system 2 reduces to system 1 when station b is starved") {
    // With station a serving at negligible utilization its departures
    // track the external arrivals, so feeding them to c reproduces the
    // single-station system.
    sim::SimConfig config;
    config.arrivals_per_stream = 1000000;
    config.seed = 7;

    const auto map1 = MarkovArrivalProcess::poisson(0.25);
    const auto map2 = MarkovArrivalProcess::poisson(0.25);
    const auto system1 = sim::run_system1(map1, map2, erlang_ph(1, 1.0), config);

    const Philox root(config.seed);
    const auto e1 = sim::simulate_map_stream(map1, config.arrivals_per_stream, root.derive(1).next_u64());
    const auto e2 = sim::simulate_map_stream(map2, config.arrivals_per_stream, root.derive(2).next_u64());
    const auto merged = sim::merge_event_streams(e1, e2);
    const auto station_a =
        sim::run_station(merged, erlang_ph(1, 1e-4), 0.0, root.derive(10).next_u64());
    const auto station_c = sim::run_station(station_a.departures, erlang_ph(1, 1.0),
                                            config.warmup_fraction, root.derive(11).next_u64());
    CHECK(metrics::sae(system1.hist.probs, station_c.hist.probs) <= 0.01);
}
