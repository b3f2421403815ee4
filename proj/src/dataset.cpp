#include "supermap/dataset.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <nlohmann/json.hpp>

#include "supermap/parallel.hpp"
#include "supermap/util.hpp"

namespace supermap::data {

namespace {

nlohmann::json grid_to_json(const DescriptorGrid& grid) {
    return nlohmann::json::array({grid.n_mom, grid.n_lag, grid.n_pow});
}

DescriptorGrid grid_from_json(const nlohmann::json& j) {
    if (!j.is_array() || j.size() != 3) throw_io("grid must be a [n_mom, n_lag, n_pow] triple");
    DescriptorGrid grid{j[0].get<int>(), j[1].get<int>(), j[2].get<int>()};
    grid.validate();
    return grid;
}

nlohmann::json block_to_json(const LogDescriptors& d) {
    return nlohmann::json{
        {"log_moments", d.log_moments}, {"autocorr", d.autocorr}, {"grid", grid_to_json(d.grid)}};
}

LogDescriptors block_from_json(const nlohmann::json& j) {
    LogDescriptors d;
    d.log_moments = j.at("log_moments").get<std::vector<double>>();
    d.autocorr = j.at("autocorr").get<std::vector<double>>();
    d.grid = grid_from_json(j.at("grid"));
    if (d.log_moments.size() != static_cast<std::size_t>(d.grid.n_mom) ||
        d.autocorr.size() != static_cast<std::size_t>(d.grid.autocorr_size()))
        throw_io("descriptor block length does not match its grid");
    return d;
}

}  // namespace

LabeledSample label_pair(const MarkovArrivalProcess& map_a, const MarkovArrivalProcess& map_b,
                         const DescriptorGrid& input_grid, int dim_cap) {
    input_grid.validate();
    const MapAnalyzer analyzer_a(map_a);
    const MapAnalyzer analyzer_b(map_b);

    const double mean_a = analyzer_a.interarrival_moments(1)[0];
    if (std::abs(mean_a - 1.0) > 1e-9)
        throw_domain("label_pair expects a unit-mean first stream, got mean " +
                     std::to_string(mean_a));
    const double mean_b = analyzer_b.interarrival_moments(1)[0];

    LabeledSample sample;
    sample.input_a = log_transform(analyzer_a.descriptor_set(input_grid));
    sample.input_b = log_transform(analyzer_b.descriptor_set(input_grid));
    sample.target =
        log_transform(descriptor_set(superpose(map_a, map_b, dim_cap), kTargetGrid.n_mom,
                                     kTargetGrid.n_lag, kTargetGrid.n_pow));
    sample.meta.dim_a = map_a.dim();
    sample.meta.dim_b = map_b.dim();
    sample.meta.mean_ratio = mean_b / mean_a;
    return sample;
}

LabeledSample make_sample(const DatasetConfig& config, std::uint64_t index) {
    const std::uint64_t slot_seed = Philox(config.seed).derive(0x5a17, index).next_u64();
    for (int attempt = 0; attempt <= config.max_retries; ++attempt) {
        const std::uint64_t seed =
            attempt == 0 ? slot_seed
                         : Philox(slot_seed).derive(0xfe7c, static_cast<std::uint64_t>(attempt))
                               .next_u64();
        try {
            const MapPair pair = sample_map_pair(seed, config.method_mix, config.ranges);
            LabeledSample sample = label_pair(pair.a, pair.b, config.input_grid, config.dim_cap);
            sample.meta.seed = seed;
            sample.meta.index = index;
            sample.meta.method_a = pair.method_a;
            sample.meta.method_b = pair.method_b;
            return sample;
        } catch (const Error& e) {
            if (e.kind() == ErrorKind::capacity || e.kind() == ErrorKind::degenerate_variance)
                continue;
            throw;
        }
    }
    throw_analysis("sample " + std::to_string(index) + " exhausted " +
                   std::to_string(config.max_retries) + " retries");
}

std::string sample_to_jsonl(const LabeledSample& sample) {
    nlohmann::json j;
    j["meta"] = {{"seed", sample.meta.seed},
                 {"index", sample.meta.index},
                 {"dim_a", sample.meta.dim_a},
                 {"dim_b", sample.meta.dim_b},
                 {"method_a", to_string(sample.meta.method_a)},
                 {"method_b", to_string(sample.meta.method_b)},
                 {"mean_ratio", sample.meta.mean_ratio}};
    j["input_a"] = block_to_json(sample.input_a);
    j["input_b"] = block_to_json(sample.input_b);
    j["target"] = block_to_json(sample.target);
    return j.dump();
}

LabeledSample sample_from_jsonl(const std::string& line) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
        throw_io(std::string("record parse failure: ") + e.what());
    }
    LabeledSample sample;
    const auto& meta = j.at("meta");
    sample.meta.seed = meta.at("seed").get<std::uint64_t>();
    sample.meta.index = meta.at("index").get<std::uint64_t>();
    sample.meta.dim_a = meta.at("dim_a").get<int>();
    sample.meta.dim_b = meta.at("dim_b").get<int>();
    sample.meta.method_a = gen_method_from_string(meta.at("method_a").get<std::string>());
    sample.meta.method_b = gen_method_from_string(meta.at("method_b").get<std::string>());
    sample.meta.mean_ratio = meta.at("mean_ratio").get<double>();
    sample.input_a = block_from_json(j.at("input_a"));
    sample.input_b = block_from_json(j.at("input_b"));
    sample.target = block_from_json(j.at("target"));
    return sample;
}

std::vector<LabeledSample> read_jsonl(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw_io("cannot open dataset file: " + path.string());
    std::vector<LabeledSample> samples;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        samples.push_back(sample_from_jsonl(line));
    }
    return samples;
}

void write_jsonl(const std::vector<LabeledSample>& samples, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw_io("cannot open for writing: " + path.string());
    for (const auto& sample : samples) out << sample_to_jsonl(sample) << "\n";
    if (!out) throw_io("write failure: " + path.string());
}

namespace {

void put_u32(std::ofstream& out, std::uint32_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}
void put_u64(std::ofstream& out, std::uint64_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}
std::uint32_t get_u32(std::ifstream& in) {
    std::uint32_t v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof(v));
    return v;
}
std::uint64_t get_u64(std::ifstream& in) {
    std::uint64_t v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof(v));
    return v;
}

}  // namespace

void write_binary(const std::vector<LabeledSample>& samples, const std::filesystem::path& path) {
    if (samples.empty()) throw_io("binary writer needs at least one record");
    const DescriptorGrid in_grid = samples.front().input_a.grid;
    const DescriptorGrid tgt_grid = samples.front().target.grid;
    const std::uint32_t record_doubles =
        2 * static_cast<std::uint32_t>(in_grid.flat_size()) +
        static_cast<std::uint32_t>(tgt_grid.flat_size()) + 1;  // + mean_ratio

    std::ofstream out(path, std::ios::binary);
    if (!out) throw_io("cannot open for writing: " + path.string());
    out.write(kBinaryMagic, sizeof(kBinaryMagic));
    put_u32(out, 1);  // format version
    put_u64(out, samples.size());
    put_u32(out, record_doubles);
    for (int v : {in_grid.n_mom, in_grid.n_lag, in_grid.n_pow, tgt_grid.n_mom, tgt_grid.n_lag,
                  tgt_grid.n_pow})
        put_u32(out, static_cast<std::uint32_t>(v));

    for (const auto& sample : samples) {
        if (sample.input_a.grid != in_grid || sample.target.grid != tgt_grid)
            throw_io("binary writer requires a homogeneous grid");
        put_u64(out, sample.meta.seed);
        put_u64(out, sample.meta.index);
        put_u32(out, static_cast<std::uint32_t>(sample.meta.dim_a));
        put_u32(out, static_cast<std::uint32_t>(sample.meta.dim_b));
        put_u32(out, static_cast<std::uint32_t>(sample.meta.method_a));
        put_u32(out, static_cast<std::uint32_t>(sample.meta.method_b));
        std::vector<double> payload;
        payload.reserve(record_doubles);
        payload.push_back(sample.meta.mean_ratio);
        auto append = [&payload](const LogDescriptors& d) {
            payload.insert(payload.end(), d.log_moments.begin(), d.log_moments.end());
            payload.insert(payload.end(), d.autocorr.begin(), d.autocorr.end());
        };
        append(sample.input_a);
        append(sample.input_b);
        append(sample.target);
        out.write(reinterpret_cast<const char*>(payload.data()),
                  static_cast<std::streamsize>(payload.size() * sizeof(double)));
    }
    if (!out) throw_io("write failure: " + path.string());
}

std::vector<LabeledSample> read_binary(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw_io("cannot open dataset file: " + path.string());
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kBinaryMagic, sizeof(magic)) != 0)
        throw_io("bad magic in binary dataset: " + path.string());
    const std::uint32_t version = get_u32(in);
    if (version != 1) throw_io("unsupported binary dataset version");
    const std::uint64_t count = get_u64(in);
    const std::uint32_t record_doubles = get_u32(in);
    DescriptorGrid in_grid{static_cast<int>(get_u32(in)), static_cast<int>(get_u32(in)),
                           static_cast<int>(get_u32(in))};
    DescriptorGrid tgt_grid{static_cast<int>(get_u32(in)), static_cast<int>(get_u32(in)),
                            static_cast<int>(get_u32(in))};
    in_grid.validate();
    tgt_grid.validate();
    const std::uint32_t expected =
        2 * static_cast<std::uint32_t>(in_grid.flat_size()) +
        static_cast<std::uint32_t>(tgt_grid.flat_size()) + 1;
    if (record_doubles != expected) throw_io("binary record length mismatch");

    std::vector<LabeledSample> samples;
    samples.reserve(count);
    std::vector<double> payload(record_doubles);
    for (std::uint64_t r = 0; r < count; ++r) {
        LabeledSample sample;
        sample.meta.seed = get_u64(in);
        sample.meta.index = get_u64(in);
        sample.meta.dim_a = static_cast<int>(get_u32(in));
        sample.meta.dim_b = static_cast<int>(get_u32(in));
        sample.meta.method_a = static_cast<GenMethod>(get_u32(in));
        sample.meta.method_b = static_cast<GenMethod>(get_u32(in));
        in.read(reinterpret_cast<char*>(payload.data()),
                static_cast<std::streamsize>(payload.size() * sizeof(double)));
        if (!in) throw_io("truncated binary dataset: " + path.string());
        sample.meta.mean_ratio = payload[0];
        std::size_t pos = 1;
        auto take = [&](const DescriptorGrid& grid) {
            LogDescriptors d;
            d.grid = grid;
            d.log_moments.assign(payload.begin() + static_cast<std::ptrdiff_t>(pos),
                                 payload.begin() + static_cast<std::ptrdiff_t>(pos + grid.n_mom));
            pos += static_cast<std::size_t>(grid.n_mom);
            d.autocorr.assign(
                payload.begin() + static_cast<std::ptrdiff_t>(pos),
                payload.begin() + static_cast<std::ptrdiff_t>(pos + grid.autocorr_size()));
            pos += static_cast<std::size_t>(grid.autocorr_size());
            return d;
        };
        sample.input_a = take(in_grid);
        sample.input_b = take(in_grid);
        sample.target = take(tgt_grid);
        samples.push_back(std::move(sample));
    }
    return samples;
}

std::string DatasetConfig::to_json() const {
    nlohmann::json j;
    j["name"] = name;
    j["train_count"] = train_count;
    j["val_count"] = val_count;
    j["test_count"] = test_count;
    j["input_grid"] = grid_to_json(input_grid);
    j["seed"] = seed;
    j["method_mix"] = method_mix;
    j["dim_cap"] = dim_cap;
    j["write_binary"] = write_binary;
    j["max_retries"] = max_retries;
    GeneratorConfig gc;
    gc.ranges = ranges;
    j["ranges"] = nlohmann::json::parse(generator_config_to_json(gc))["ranges"];
    return j.dump(2);
}

DatasetConfig DatasetConfig::from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw_config(std::string("dataset config parse failure: ") + e.what());
    }
    DatasetConfig config;
    config.name = j.value("name", config.name);
    config.train_count = j.value("train_count", config.train_count);
    config.val_count = j.value("val_count", config.val_count);
    config.test_count = j.value("test_count", config.test_count);
    if (j.contains("input_grid")) config.input_grid = grid_from_json(j["input_grid"]);
    config.seed = j.value("seed", config.seed);
    if (j.contains("method_mix")) {
        const auto mix = j["method_mix"].get<std::vector<double>>();
        if (mix.size() != 3) throw_config("method_mix must have three weights");
        std::copy(mix.begin(), mix.end(), config.method_mix.begin());
    }
    config.dim_cap = j.value("dim_cap", config.dim_cap);
    config.write_binary = j.value("write_binary", config.write_binary);
    config.max_retries = j.value("max_retries", config.max_retries);
    if (j.contains("ranges")) {
        nlohmann::json gc;
        gc["ranges"] = j["ranges"];
        config.ranges = generator_config_from_json(gc.dump()).ranges;
    }
    return config;
}

std::string DatasetConfig::digest() const { return digest_hex(to_json()); }

std::string DatasetManifest::to_json() const {
    nlohmann::json j;
    j["format_version"] = format_version;
    j["train_count"] = train_count;
    j["val_count"] = val_count;
    j["test_count"] = test_count;
    j["input_grid"] = grid_to_json(input_grid);
    j["config_digest"] = config_digest;
    return j.dump(2);
}

DatasetManifest DatasetManifest::from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw_io(std::string("manifest parse failure: ") + e.what());
    }
    DatasetManifest m;
    m.format_version = j.at("format_version").get<int>();
    m.train_count = j.at("train_count").get<std::size_t>();
    m.val_count = j.at("val_count").get<std::size_t>();
    m.test_count = j.at("test_count").get<std::size_t>();
    m.input_grid = grid_from_json(j.at("input_grid"));
    m.config_digest = j.at("config_digest").get<std::string>();
    return m;
}

namespace {

struct SplitPlan {
    const char* suffix;
    std::size_t count;
    std::uint64_t offset;  // global index of the split's first sample
};

std::vector<LabeledSample> build_split(const DatasetConfig& config, const SplitPlan& plan) {
    std::vector<LabeledSample> samples(plan.count);
    parallel_for(plan.count, [&](std::size_t i) {
        samples[i] = make_sample(config, plan.offset + i);
    });
    return samples;
}

}  // namespace

DatasetManifest build_dataset(const DatasetConfig& config) {
    if (config.train_count == 0 || config.val_count == 0 || config.test_count == 0)
        throw_config("split counts must be positive");
    config.input_grid.validate();
    std::filesystem::create_directories(config.out_dir);

    const SplitPlan plans[3] = {
        {"train", config.train_count, 0},
        {"val", config.val_count, config.train_count},
        {"test", config.test_count, config.train_count + config.val_count},
    };

    for (const auto& plan : plans) {
        const auto samples = build_split(config, plan);
        const auto base = config.out_dir / (config.name + "." + plan.suffix);
        write_jsonl(samples, base.string() + ".jsonl");
        if (config.write_binary) write_binary(samples, base.string() + ".bin");
    }

    DatasetManifest manifest;
    manifest.train_count = config.train_count;
    manifest.val_count = config.val_count;
    manifest.test_count = config.test_count;
    manifest.input_grid = config.input_grid;
    manifest.config_digest = config.digest();

    std::ofstream out(config.out_dir / (config.name + ".manifest.json"));
    if (!out) throw_io("cannot write manifest");
    out << manifest.to_json() << "\n";
    return manifest;
}

DatasetManifest grid_variant(const DatasetConfig& base_config, const DescriptorGrid& new_grid,
                             const std::filesystem::path& out_dir) {
    if (new_grid.n_mom < 2 || new_grid.n_mom > 10 || new_grid.n_lag < 1 || new_grid.n_lag > 5 ||
        new_grid.n_pow < 1 || new_grid.n_pow > 5)
        throw_config("grid variant outside the supported box: n in [2,10], lags in [1,5], powers in [1,5]");

    DatasetConfig variant = base_config;
    variant.input_grid = new_grid;
    variant.out_dir = out_dir;
    std::filesystem::create_directories(out_dir);

    for (const char* suffix : {"train", "val", "test"}) {
        const auto base_path =
            base_config.out_dir / (base_config.name + "." + std::string(suffix) + ".jsonl");
        auto samples = read_jsonl(base_path);
        parallel_for(samples.size(), [&](std::size_t i) {
            auto& sample = samples[i];
            const MapPair pair =
                sample_map_pair(sample.meta.seed, base_config.method_mix, base_config.ranges);
            sample.input_a = log_transform(
                descriptor_set(pair.a, new_grid.n_mom, new_grid.n_lag, new_grid.n_pow));
            sample.input_b = log_transform(
                descriptor_set(pair.b, new_grid.n_mom, new_grid.n_lag, new_grid.n_pow));
        });
        const auto out_base = out_dir / (variant.name + "." + std::string(suffix));
        write_jsonl(samples, out_base.string() + ".jsonl");
        if (variant.write_binary) write_binary(samples, out_base.string() + ".bin");
    }

    DatasetManifest manifest;
    manifest.train_count = variant.train_count;
    manifest.val_count = variant.val_count;
    manifest.test_count = variant.test_count;
    manifest.input_grid = new_grid;
    manifest.config_digest = variant.digest();
    std::ofstream out(out_dir / (variant.name + ".manifest.json"));
    if (!out) throw_io("cannot write manifest");
    out << manifest.to_json() << "\n";
    return manifest;
}

std::vector<double> input_vector(const LabeledSample& sample) {
    std::vector<double> v;
    v.reserve(static_cast<std::size_t>(2 * sample.input_a.grid.flat_size()));
    for (const auto* block : {&sample.input_a, &sample.input_b}) {
        v.insert(v.end(), block->log_moments.begin(), block->log_moments.end());
        v.insert(v.end(), block->autocorr.begin(), block->autocorr.end());
    }
    return v;
}

std::vector<double> target_vector(const LabeledSample& sample) {
    std::vector<double> v;
    v.reserve(static_cast<std::size_t>(sample.target.grid.flat_size()));
    v.insert(v.end(), sample.target.log_moments.begin(), sample.target.log_moments.end());
    v.insert(v.end(), sample.target.autocorr.begin(), sample.target.autocorr.end());
    return v;
}

}  // namespace supermap::data
