#pragma once

#include <filesystem>
#include <string>

#include "supermap/generators.hpp"

namespace supermap::data {

struct SampleMeta {
    std::uint64_t seed = 0;   // per-sample generator seed
    std::uint64_t index = 0;  // global sample index across splits
    int dim_a = 0;
    int dim_b = 0;
    GenMethod method_a = GenMethod::mild;
    GenMethod method_b = GenMethod::mild;
    double mean_ratio = 1.0;  // mean of stream b over mean of stream a
};

// One training record: per-stream input descriptors on the configured
// grid, exact merged-stream descriptors on the target grid. Moments are
// stored as logs everywhere on disk.
struct LabeledSample {
    LogDescriptors input_a;  // unit-mean stream
    LogDescriptors input_b;
    LogDescriptors target;   // grid (5, 2, 2)
    SampleMeta meta;
};

// Labels one pair exactly: target = descriptor_set(superpose(a, b)) on the
// target grid, inputs on the requested grid. map_a must have unit mean.
LabeledSample label_pair(const MarkovArrivalProcess& map_a, const MarkovArrivalProcess& map_b,
                         const DescriptorGrid& input_grid, int dim_cap = kDefaultDimCap);

struct DatasetConfig {
    std::string name = "dataset";
    std::filesystem::path out_dir = ".";
    std::size_t train_count = 50000;
    std::size_t val_count = 5000;
    std::size_t test_count = 5000;
    DescriptorGrid input_grid = kTargetGrid;
    std::uint64_t seed = 0;
    std::array<double, 3> method_mix = kDefaultMethodMix;
    SamplingRanges ranges;
    int dim_cap = kDefaultDimCap;
    bool write_binary = false;
    int max_retries = 100;  // resamples per slot on capacity/degeneracy

    std::string to_json() const;
    static DatasetConfig from_json(const std::string& text);
    std::string digest() const;
};

struct DatasetManifest {
    std::size_t train_count = 0;
    std::size_t val_count = 0;
    std::size_t test_count = 0;
    DescriptorGrid input_grid;
    std::string config_digest;
    int format_version = 1;

    std::string to_json() const;
    static DatasetManifest from_json(const std::string& text);
};

// Produces <name>.train.jsonl / .val.jsonl / .test.jsonl plus
// <name>.manifest.json (and .bin twins when write_binary). Deterministic
// given the seed: splits own disjoint global index ranges and every
// record is a pure function of its index.
DatasetManifest build_dataset(const DatasetConfig& config);

// Regenerates a dataset's per-stream inputs on a different grid, reusing
// the stored targets (the streams are rebuilt from recorded seeds; no
// merged-process relabeling happens).
DatasetManifest grid_variant(const DatasetConfig& base_config, const DescriptorGrid& new_grid,
                             const std::filesystem::path& out_dir);

// Builds the deterministic sample for one global index (exposed for the
// variant path and for tests).
LabeledSample make_sample(const DatasetConfig& config, std::uint64_t index);

std::string sample_to_jsonl(const LabeledSample& sample);
LabeledSample sample_from_jsonl(const std::string& line);

std::vector<LabeledSample> read_jsonl(const std::filesystem::path& path);
void write_jsonl(const std::vector<LabeledSample>& samples, const std::filesystem::path& path);

// Packed little-endian records behind an 8-byte magic, for training
// throughput. Contents mirror the JSONL exactly.
inline constexpr char kBinaryMagic[8] = {'S', 'M', 'A', 'P', 'D', 'S', '0', '1'};
void write_binary(const std::vector<LabeledSample>& samples, const std::filesystem::path& path);
std::vector<LabeledSample> read_binary(const std::filesystem::path& path);

// Flattened network layout: [a log-moments, a autocorr, b log-moments,
// b autocorr] and [target log-moments, target autocorr].
std::vector<double> input_vector(const LabeledSample& sample);
std::vector<double> target_vector(const LabeledSample& sample);

}  // namespace supermap::data
