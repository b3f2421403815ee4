#pragma once

#include <cmath>

#include "supermap/generators.hpp"
#include "supermap/map_process.hpp"

namespace supermap::testsupport {

inline bool close_rel(double a, double b, double tol) {
    const double scale = std::max(std::abs(a), std::abs(b));
    return std::abs(a - b) <= tol * std::max(scale, 1e-300);
}

inline bool close_abs(double a, double b, double tol) { return std::abs(a - b) <= tol; }

// A valid random MAP for property tests: a mild-generator draw keeps the
// structure honest (irreducible, unit mean) while varying shape per seed.
inline MarkovArrivalProcess random_map(std::uint64_t seed, int max_dim = 12) {
    GeneratorConfig config;
    config.method = GenMethod::mild;
    config.seed = seed;
    config.ranges.max_dim = max_dim;
    return gen_mild(config);
}

// Small random MAP over all three families (for closure/symmetry sweeps).
inline MarkovArrivalProcess random_map_any(std::uint64_t seed, int max_dim = 12) {
    GeneratorConfig config;
    switch (seed % 3) {
        case 0: config.method = GenMethod::strong_negative; break;
        case 1: config.method = GenMethod::strong_positive; break;
        default: config.method = GenMethod::mild; break;
    }
    config.seed = seed;
    config.ranges.max_dim = max_dim;
    return generate_map(config);
}

// Stationary law via uniformization power iteration; independent of the
// LU-based solve it checks.
inline RowVector uniformization_stationary(const MarkovArrivalProcess& map) {
    const Matrix d = map.d0 + map.d1;
    const int n = map.dim();
    double lambda = 0.0;
    for (int i = 0; i < n; ++i) lambda = std::max(lambda, -d(i, i));
    lambda *= 1.05;
    const Matrix p = Matrix::Identity(n, n) + d / lambda;
    RowVector pi = RowVector::Constant(n, 1.0 / n);
    for (int iter = 0; iter < 200000; ++iter) {
        RowVector next = pi * p;
        next /= next.sum();
        const double delta = (next - pi).cwiseAbs().maxCoeff();
        pi = next;
        if (delta < 1e-14) break;
    }
    return pi;
}

}  // namespace supermap::testsupport
