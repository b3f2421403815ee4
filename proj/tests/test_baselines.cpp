#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "supermap/baselines.hpp"
#include "support.hpp"

using namespace supermap;
using namespace supermap::baselines;
using namespace supermap::testsupport;

namespace {

data::LabeledSample poisson_pair_sample(double rate_a, double rate_b) {
    return data::label_pair(MarkovArrivalProcess::poisson(rate_a),
                            MarkovArrivalProcess::poisson(rate_b), kTargetGrid);
}

}  // namespace

TEST_CASE("asymptotic method: rate-weighted variability") {
    const StreamSummary poisson[2] = {{1.0, 1.0}, {2.0, 1.0}};
    CHECK(whitt_asymptotic(poisson).scv == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(whitt_asymptotic(poisson).rate == doctest::Approx(3.0).epsilon(1e-14));

    const StreamSummary equal[2] = {{1.0, 0.5}, {1.0, 1.5}};
    CHECK(whitt_asymptotic(equal).scv == doctest::Approx(1.0).epsilon(1e-14));

    const StreamSummary skewed[2] = {{2.0, 3.0}, {1.0, 0.6}};
    CHECK(whitt_asymptotic(skewed).scv == doctest::Approx(2.2).epsilon(1e-14));
}

TEST_CASE("two-moment PH fit reproduces its inputs") {
    for (double scv : {0.05, 0.2, 0.5, 0.8, 1.0, 1.3, 4.0, 20.0}) {
        for (double mean : {0.25, 1.0, 3.0}) {
            const auto ph = fit_ph_two_moment(mean, scv);
            CHECK(close_rel(ph_mean(ph), mean, 1e-9));
            CHECK(close_rel(ph_scv(ph), scv, 1e-9));
        }
    }
    // Below the 50-phase budget the scv clamps at 1/50.
    const auto clamped = fit_ph_two_moment(1.0, 0.005);
    CHECK(close_rel(ph_scv(clamped), 0.02, 1e-9));
}

TEST_CASE("stationary-interval method: poisson fixed point and regression pin") {
    const StreamSummary poisson[2] = {{1.0, 1.0}, {2.0, 1.0}};
    const auto si = whitt_stationary_interval(poisson);
    CHECK(si.rate == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(si.scv == doctest::Approx(1.0).epsilon(1e-9));
    // Both Whitt variants agree at the shared fixed point.
    CHECK(si.scv == doctest::Approx(whitt_asymptotic(poisson).scv).epsilon(1e-9));

    // Self-regression pin from the first build of the documented recipe
    // (BASELINES.md); a change here means the recipe changed.
    const StreamSummary mixed[2] = {{1.0, 2.0}, {2.0, 0.5}};
    const auto pinned = whitt_stationary_interval(mixed);
    CHECK(pinned.rate == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(pinned.scv == doctest::Approx(0.9248516559).epsilon(1e-8));
}

TEST_CASE("albin hybrid: endpoints, fixed point, convexity") {
    const StreamSummary streams[2] = {{1.0, 2.5}, {0.4, 0.4}};
    const auto asym = whitt_asymptotic(streams);
    const auto si = whitt_stationary_interval(streams);

    AlbinContext ctx;
    ctx.weight = 1.0;
    CHECK(albin_hybrid(streams, ctx).scv == doctest::Approx(asym.scv).epsilon(1e-12));
    ctx.weight = 0.0;
    CHECK(albin_hybrid(streams, ctx).scv == doctest::Approx(si.scv).epsilon(1e-12));
    ctx.weight = 1.5;
    CHECK_THROWS_AS(albin_hybrid(streams, ctx), Error);

    const StreamSummary poisson[2] = {{1.0, 1.0}, {1.0, 1.0}};
    for (double w : {0.0, 0.3, 1.0}) {
        AlbinContext wctx;
        wctx.weight = w;
        CHECK(albin_hybrid(poisson, wctx).scv == doctest::Approx(1.0).epsilon(1e-9));
    }

    // Utilization-driven weight: equal rates give v = 2, so u = 0.5 means
    // w = 1/(1+4*0.25) = 0.5 exactly.
    AlbinContext half;
    half.utilization = 0.5;
    const auto blended = albin_hybrid(streams, half);
    CHECK(blended.scv == doctest::Approx(0.5 * asym.scv + 0.5 * si.scv).epsilon(1e-12));

    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        Philox rng(seed);
        const StreamSummary random_pair[2] = {{rng.uniform(0.2, 3.0), rng.uniform(0.1, 8.0)},
                                              {rng.uniform(0.2, 3.0), rng.uniform(0.1, 8.0)}};
        AlbinContext uctx;
        uctx.utilization = rng.uniform(0.0, 0.95);
        const double a = whitt_asymptotic(random_pair).scv;
        const double s = whitt_stationary_interval(random_pair).scv;
        const double h = albin_hybrid(random_pair, uctx).scv;
        CHECK(h >= std::min(a, s) - 1e-12);
        CHECK(h <= std::max(a, s) + 1e-12);
    }
}

TEST_CASE("baselines preserve rate additivity") {
    const StreamSummary streams[2] = {{0.7, 4.0}, {1.9, 0.3}};
    AlbinContext ctx;
    CHECK(close_rel(whitt_asymptotic(streams).rate, 2.6, 1e-12));
    CHECK(close_rel(whitt_stationary_interval(streams).rate, 2.6, 1e-9));
    CHECK(close_rel(albin_hybrid(streams, ctx).rate, 2.6, 1e-9));
}

TEST_CASE("baseline table: zero error on poisson pairs") {
    std::vector<data::LabeledSample> samples;
    samples.push_back(poisson_pair_sample(1.0, 1.0));
    samples.push_back(poisson_pair_sample(1.0, 0.25));
    for (auto method : {BaselineMethod::whitt_asymptotic,
                        BaselineMethod::whitt_stationary_interval, BaselineMethod::albin}) {
        const auto table = baseline_second_moment_error(samples, method);
        CHECK(table.overall_mape_m2 < 1e-6);
    }
}

TEST_CASE("baseline per-sample second moment matches a hand recomputation") {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const auto pair = sample_map_pair(seed, kDefaultMethodMix);
        const auto sample = data::label_pair(pair.a, pair.b, kTargetGrid);

        const double m1a = std::exp(sample.input_a.log_moment(1));
        const double m2a = std::exp(sample.input_a.log_moment(2));
        const double m1b = std::exp(sample.input_b.log_moment(1));
        const double m2b = std::exp(sample.input_b.log_moment(2));
        const double la = 1.0 / m1a, lb = 1.0 / m1b;
        const double ca = m2a / (m1a * m1a) - 1.0, cb = m2b / (m1b * m1b) - 1.0;
        const double scv = (la / (la + lb)) * ca + (lb / (la + lb)) * cb;
        const double mean = 1.0 / (la + lb);
        const double expected = (1.0 + scv) * mean * mean;

        CHECK(close_rel(baseline_m2(sample, BaselineMethod::whitt_asymptotic), expected, 1e-12));
    }
}
