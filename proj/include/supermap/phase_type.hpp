#pragma once

#include "supermap/map_process.hpp"

namespace supermap {

// Phase-type distribution: absorption time of a CTMC started from alpha
// with subgenerator t (negative diagonal, nonnegative off-diagonal, row
// sums <= 0, nonsingular).
struct PhaseTypeDist {
    RowVector alpha;
    Matrix t;

    int dim() const { return static_cast<int>(t.rows()); }
    Vector exit_rates() const { return -t.rowwise().sum(); }
};

void require_valid_ph(const PhaseTypeDist& ph);

// k sequential phases, each at rate k/mean: mean exactly `mean`, SCV 1/k.
PhaseTypeDist erlang_ph(int k, double mean);

// Two parallel exponential branches with probabilities (mix, 1-mix) and
// rates (fast, fast/rate_ratio), fast = (mix + (1-mix)*rate_ratio)/mean.
PhaseTypeDist hyperexp2_ph(double mean, double mix, double rate_ratio);

// Block-diagonal mixture: starts in ph1 with probability w, ph2 otherwise.
PhaseTypeDist mix_ph(const PhaseTypeDist& ph1, const PhaseTypeDist& ph2, double w);

// m(i) = i! alpha (-t)^{-i} 1 for i = 1..n_mom.
std::vector<double> ph_moments(const PhaseTypeDist& ph, int n_mom);
double ph_mean(const PhaseTypeDist& ph);
double ph_scv(const PhaseTypeDist& ph);

// Rescales time so the mean becomes target_mean (shape invariant).
PhaseTypeDist scale_ph_mean(const PhaseTypeDist& ph, double target_mean);

// Renewal process with PH(alpha, t) inter-arrival times: d0 = t,
// d1 = exit-vector (x) restart-vector. All lag autocorrelations are zero.
MarkovArrivalProcess renewal_map(const PhaseTypeDist& ph);

}  // namespace supermap
