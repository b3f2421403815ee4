#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <string>
#include <vector>

#include "supermap/descriptors.hpp"

namespace supermap {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;

// Default cap on the state count of a merged process. Dense LU on anything
// larger than this stops being desk-scale.
inline constexpr int kDefaultDimCap = 2500;

// Markovian arrival process: d0 carries transition rates without an
// arrival, d1 transition rates that emit one; d0 + d1 is a stable CTMC
// generator.
struct MarkovArrivalProcess {
    Matrix d0;
    Matrix d1;

    int dim() const { return static_cast<int>(d0.rows()); }

    static MarkovArrivalProcess poisson(double rate);
};

struct ValidationIssue {
    std::string condition;
    int row = -1;
    int col = -1;

    std::string describe() const;
};

struct ValidationReport {
    bool ok = true;
    std::vector<ValidationIssue> issues;

    std::string describe() const;
};

// Checks squareness, sign pattern, zero row sums of d0 + d1 (tolerance
// 1e-9) and nonsingularity of d0. Structural problems (missing/mismatched
// dimensions, non-finite entries) throw; rule violations are reported.
ValidationReport validate_map(const MarkovArrivalProcess& map);

// Throws ErrorKind::structural with the full report when validation fails.
void require_valid(const MarkovArrivalProcess& map);

// pi: stationary law of d0 + d1; phi: phase law just after an arrival
// (pi d1 / rate); rate: arrivals per unit time.
struct StationaryContext {
    RowVector pi;
    RowVector phi;
    double rate = 0.0;
};

StationaryContext stationary_context(const MarkovArrivalProcess& map);

// Shared analysis state for one process: validates once, factorizes -d0
// once, and serves every stationary descriptor off that factorization.
class MapAnalyzer {
public:
    explicit MapAnalyzer(const MarkovArrivalProcess& map);

    const StationaryContext& context() const { return ctx_; }
    int dim() const { return static_cast<int>(neg_d0_.rows()); }

    // m(i) = i! phi (-d0)^{-i} 1 for i = 1..n_mom.
    std::vector<double> interarrival_moments(int n_mom) const;

    // Correlation between the a1-th power of an inter-arrival time and the
    // a2-th power of the inter-arrival k steps later, under the
    // phi-started stationary sequence.
    double lag_autocorrelation(int k, int a1, int a2) const;

    DescriptorSet descriptor_set(int n_mom, int n_lag, int n_pow) const;
    DescriptorSet descriptor_set(const DescriptorGrid& grid) const {
        return descriptor_set(grid.n_mom, grid.n_lag, grid.n_pow);
    }

private:
    // phi (-d0)^{-a}, a = 1..n (rows), via transposed solves.
    std::vector<RowVector> left_powers_(int n) const;
    // (-d0)^{-a} 1, a = 1..n (columns).
    std::vector<Vector> right_powers_(int n) const;
    RowVector step_(const RowVector& row) const;  // row -> row P,  P = (-d0)^{-1} d1

    Matrix d1_;
    Matrix neg_d0_;
    Eigen::PartialPivLU<Matrix> lu_;
    StationaryContext ctx_;
};

std::vector<double> interarrival_moments(const MarkovArrivalProcess& map, int n_mom);
double lag_autocorrelation(const MarkovArrivalProcess& map, int k, int a1, int a2);
DescriptorSet descriptor_set(const MarkovArrivalProcess& map, int n_mom, int n_lag, int n_pow);

// Exact merge of two independent processes via Kronecker sums:
//   d0 = d0_a (+) d0_b,  d1 = d1_a (+) d1_b.
// Throws ErrorKind::capacity when dim_a * dim_b exceeds dim_cap.
MarkovArrivalProcess superpose(const MarkovArrivalProcess& a, const MarkovArrivalProcess& b,
                               int dim_cap = kDefaultDimCap);

// Multiplies both matrices by m(1)/target_mean; moments scale as
// (target/m(1))^i and every autocorrelation is unchanged.
MarkovArrivalProcess time_scale(const MarkovArrivalProcess& map, double target_mean);

// JSON file format: {"dim": n, "d0": row-major n*n array, "d1": likewise}.
// Round-trips bit-faithfully at double precision.
void write_map_json(const MarkovArrivalProcess& map, const std::filesystem::path& path);
MarkovArrivalProcess read_map_json(const std::filesystem::path& path);
std::string map_to_json(const MarkovArrivalProcess& map);
MarkovArrivalProcess map_from_json(const std::string& text);

}  // namespace supermap
