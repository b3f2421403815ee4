#pragma once

#include <cstdint>
#include <span>

#include "supermap/generators.hpp"
#include "supermap/map_process.hpp"
#include "supermap/phase_type.hpp"

namespace supermap::sim {

inline constexpr int kHistogramLen = 500;

struct SimConfig {
    std::size_t arrivals_per_stream = 2'000'000;
    double warmup_fraction = 0.1;
    std::uint64_t seed = 0;
};

// Arrival epochs of one MAP path: competing exponentials over the chain,
// initial phase drawn from the time-stationary law, events emitted on d1
// transitions. Deterministic per seed.
std::vector<double> simulate_map_stream(const MarkovArrivalProcess& map, std::size_t count,
                                        std::uint64_t seed);

// One PH absorption-time draw (phase chain simulated exactly).
double sample_ph(const PhaseTypeDist& ph, Philox& rng);

// Sample moments plus lagged sample correlations of powers, biased-n
// denominators. Throws on degenerate variance.
DescriptorSet empirical_descriptors(std::span<const double> interarrivals,
                                    const DescriptorGrid& grid);

// Time-average law of the number in system, truncated at 500 states.
struct SteadyStateHistogram {
    std::vector<double> probs;  // length 500
    double mean_in_system = 0.0;
    double observed_utilization = 0.0;
    double truncated_mass = 0.0;  // time share spent above state 499
    bool instability_warning = false;
};

struct StationResult {
    SteadyStateHistogram hist;
    std::vector<double> departures;
};

// Single-server FIFO with i.i.d. PH service; histogram over the
// post-warmup horizon, departure epochs returned for downstream stations.
StationResult run_station(std::span<const double> arrivals, const PhaseTypeDist& service,
                          double warmup_fraction, std::uint64_t seed);

std::vector<double> merge_event_streams(std::span<const double> a, std::span<const double> b);

struct System1Result {
    SteadyStateHistogram hist;
    std::vector<double> merged_interarrivals;
};

// Two external streams merged into a single station.
System1Result run_system1(const MarkovArrivalProcess& map1, const MarkovArrivalProcess& map2,
                          const PhaseTypeDist& service, const SimConfig& config);

struct System2Result {
    SteadyStateHistogram hist_c;
    double utilization_a = 0.0;
    double utilization_b = 0.0;
    double utilization_c = 0.0;
};

// Three-station feed-forward: stations a and b each fed by a merged
// external pair; their departures merge into station c.
System2Result run_system2(const MarkovArrivalProcess& map_1a, const MarkovArrivalProcess& map_2a,
                          const MarkovArrivalProcess& map_1b, const MarkovArrivalProcess& map_2b,
                          const PhaseTypeDist& service_a, const PhaseTypeDist& service_b,
                          const PhaseTypeDist& service_c, const SimConfig& config);

}  // namespace supermap::sim
