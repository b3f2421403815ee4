#pragma once

#include <array>
#include <compare>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "supermap/dataset.hpp"

namespace supermap::metrics {

// Mean absolute percentage error, in percent. True values must be nonzero.
double mape(std::span<const double> truth, std::span<const double> predicted);

double mae(std::span<const double> truth, std::span<const double> predicted);

inline constexpr std::size_t kDistributionLen = 500;

// Sum of absolute errors between two length-500 steady-state laws.
double sae(std::span<const double> truth, std::span<const double> predicted);

// Relative error of the mean number in system, in percent; the
// denominator uses the predicted distribution.
double rem(std::span<const double> truth, std::span<const double> predicted);

enum class PartitionScheme { scv, rho, system_table };

// One cell of a regime partition. Code meaning by scheme:
//   scv:          [scv1<3?, scv2<3?, ratio] -> 8 cells
//   rho:          [band1, band2, ratio]     -> 32 cells
//   system_table: [scv1, scv2, svc_scv, rho1 sign, rho2 sign, util] -> 64
// All interval boundaries are half-open [low, high): SCV exactly 3 counts
// as >=3, ratio exactly 0.5 as >0.5, rho exactly 0 as positive.
struct RegimeKey {
    PartitionScheme scheme = PartitionScheme::scv;
    std::array<int, 6> codes{-1, -1, -1, -1, -1, -1};

    auto operator<=>(const RegimeKey&) const = default;
    std::string label() const;
};

int scv_class(double scv);               // 0: <3, 1: >=3
int rho_band(double rho);                // 0: <-0.25, 1: [-0.25,0), 2: [0,0.25), 3: >=0.25
int ratio_class(double ratio);           // 0: <0.5, 1: >=0.5
int sign_class(double rho);              // 0: <0, 1: >=0
int utilization_class(double utilization);  // 0: <0.7, 1: >=0.7

RegimeKey classify_scv(double scv1, double scv2, double ratio);
RegimeKey classify_rho(double rho1, double rho2, double ratio);
RegimeKey classify_system(double scv1, double scv2, double service_scv, double rho1, double rho2,
                          double utilization);

// Enumerates every cell of a scheme (8 / 32 / 64).
std::vector<RegimeKey> all_regimes(PartitionScheme scheme);

// Assigns every sample to exactly one key, reading per-stream SCV and
// first-lag autocorrelation from the stored input descriptors.
std::map<RegimeKey, std::vector<std::size_t>> partition_regimes(
    const std::vector<data::LabeledSample>& samples, PartitionScheme scheme);

// Per-stream summary values used by the partitions.
struct SampleStats {
    double scv_a = 0.0;
    double scv_b = 0.0;
    double rho_a = 0.0;
    double rho_b = 0.0;
    double ratio = 1.0;
};
SampleStats sample_stats(const data::LabeledSample& sample);

}  // namespace supermap::metrics
