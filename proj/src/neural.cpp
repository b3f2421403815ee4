#include "supermap/neural.hpp"

#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>
#include <numeric>
#include <sstream>

#include "supermap/rng.hpp"
#include "supermap/util.hpp"

namespace supermap::nn {

namespace {

void check_model(const MlpModel& model) {
    if (model.layer_sizes.size() < 2) throw_config("model needs at least input and output layers");
    if (model.weights.size() != model.layer_sizes.size() - 1 ||
        model.biases.size() != model.weights.size())
        throw_structural("model parameter blocks do not match layer sizes");
    for (std::size_t l = 0; l < model.weights.size(); ++l) {
        if (model.weights[l].rows() != model.layer_sizes[l + 1] ||
            model.weights[l].cols() != model.layer_sizes[l] ||
            model.biases[l].size() != model.layer_sizes[l + 1])
            throw_structural("model layer " + std::to_string(l) + " has inconsistent shape");
    }
    if (model.activation != "relu") throw_config("unsupported activation: " + model.activation);
}

}  // namespace

std::size_t MlpModel::parameter_count() const {
    std::size_t count = 0;
    for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l)
        count += static_cast<std::size_t>(layer_sizes[l]) * layer_sizes[l + 1] +
                 static_cast<std::size_t>(layer_sizes[l + 1]);
    return count;
}

MlpModel init_model(const std::vector<int>& layer_sizes, std::uint64_t seed) {
    if (layer_sizes.size() < 2) throw_config("model needs at least input and output layers");
    for (int s : layer_sizes)
        if (s < 1) throw_config("layer sizes must be positive");

    MlpModel model;
    model.layer_sizes = layer_sizes;
    Philox rng(seed);
    for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
        const int fan_in = layer_sizes[l];
        const int fan_out = layer_sizes[l + 1];
        const double limit = std::sqrt(6.0 / fan_in);
        Matrix w(fan_out, fan_in);
        for (int i = 0; i < fan_out; ++i)
            for (int j = 0; j < fan_in; ++j) w(i, j) = rng.uniform(-limit, limit);
        model.weights.push_back(std::move(w));
        model.biases.push_back(Vector::Zero(fan_out));
    }
    return model;
}

Matrix forward_batch(const MlpModel& model, const Matrix& inputs) {
    check_model(model);
    if (inputs.rows() != model.input_dim())
        throw_config("input length " + std::to_string(inputs.rows()) + " does not match model (" +
                     std::to_string(model.input_dim()) + ")");
    Matrix a = inputs;
    for (std::size_t l = 0; l < model.weights.size(); ++l) {
        Matrix z = (model.weights[l] * a).colwise() + model.biases[l];
        if (l + 1 < model.weights.size()) z = z.cwiseMax(0.0);
        a = std::move(z);
    }
    return a;
}

Vector forward(const MlpModel& model, const Vector& input) {
    return forward_batch(model, input);
}

LossBreakdown loss(const Matrix& predictions, const Matrix& targets, double alpha,
                   int n_mom_rows) {
    if (predictions.rows() != targets.rows() || predictions.cols() != targets.cols())
        throw_config("prediction/target shape mismatch");
    if (predictions.cols() < 1) throw_config("loss needs at least one sample");
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw_config("alpha must lie in [0,1]");
    if (n_mom_rows < 0 || n_mom_rows > predictions.rows())
        throw_config("n_mom_rows out of range");

    const double inv_b = 1.0 / static_cast<double>(predictions.cols());
    const Matrix diff = predictions - targets;
    const double mom_sq = diff.topRows(n_mom_rows).squaredNorm();
    const double corr_sq = diff.bottomRows(diff.rows() - n_mom_rows).squaredNorm();

    LossBreakdown out;
    out.moment_term = alpha * inv_b * mom_sq;
    out.corr_term = (1.0 - alpha) * inv_b * corr_sq;
    out.total = out.moment_term + out.corr_term;
    return out;
}

Gradients backward(const MlpModel& model, const Matrix& inputs, const Matrix& targets,
                   double alpha, int n_mom_rows) {
    check_model(model);
    const std::size_t layers = model.weights.size();

    // Forward pass keeping activations.
    std::vector<Matrix> activations;
    activations.reserve(layers + 1);
    activations.push_back(inputs);
    for (std::size_t l = 0; l < layers; ++l) {
        Matrix z = (model.weights[l] * activations.back()).colwise() + model.biases[l];
        if (l + 1 < layers) z = z.cwiseMax(0.0);
        activations.push_back(std::move(z));
    }

    const double inv_b = 1.0 / static_cast<double>(inputs.cols());
    Matrix delta = activations.back() - targets;
    delta.topRows(n_mom_rows) *= 2.0 * alpha * inv_b;
    delta.bottomRows(delta.rows() - n_mom_rows) *= 2.0 * (1.0 - alpha) * inv_b;

    Gradients grads;
    grads.weights.resize(layers);
    grads.biases.resize(layers);
    for (std::size_t l = layers; l-- > 0;) {
        grads.weights[l] = delta * activations[l].transpose();
        grads.biases[l] = delta.rowwise().sum();
        if (l > 0) {
            delta = model.weights[l].transpose() * delta;
            // Rectifier derivative at the stored (already rectified)
            // activations: inactive units kill the gradient.
            delta = (activations[l].array() > 0.0).cast<double>().matrix().cwiseProduct(delta);
        }
    }
    return grads;
}

namespace {

struct AdamState {
    std::vector<Matrix> m_w, v_w;
    std::vector<Vector> m_b, v_b;
    long step = 0;

    explicit AdamState(const MlpModel& model) {
        for (std::size_t l = 0; l < model.weights.size(); ++l) {
            m_w.push_back(Matrix::Zero(model.weights[l].rows(), model.weights[l].cols()));
            v_w.push_back(Matrix::Zero(model.weights[l].rows(), model.weights[l].cols()));
            m_b.push_back(Vector::Zero(model.biases[l].size()));
            v_b.push_back(Vector::Zero(model.biases[l].size()));
        }
    }
};

constexpr double kBeta1 = 0.9;
constexpr double kBeta2 = 0.999;
constexpr double kEps = 1e-8;

void adam_update(MlpModel& model, const Gradients& grads, AdamState& state,
                 const TrainConfig& config) {
    ++state.step;
    const double bias1 = 1.0 - std::pow(kBeta1, static_cast<double>(state.step));
    const double bias2 = 1.0 - std::pow(kBeta2, static_cast<double>(state.step));
    for (std::size_t l = 0; l < model.weights.size(); ++l) {
        auto update = [&](auto& param, auto& m, auto& v, const auto& g) {
            m = kBeta1 * m + (1.0 - kBeta1) * g;
            v = kBeta2 * v + (1.0 - kBeta2) * g.cwiseProduct(g);
            const auto m_hat = m / bias1;
            const auto v_hat = (v / bias2).cwiseSqrt();
            // Decoupled weight decay: applied to the parameter, not the
            // gradient moments.
            param -= config.learning_rate *
                     (m_hat.cwiseQuotient(v_hat.array().unaryExpr([](double x) {
                                               return x + kEps;
                                           }).matrix()) +
                      config.weight_decay * param);
        };
        update(model.weights[l], state.m_w[l], state.v_w[l], grads.weights[l]);
        update(model.biases[l], state.m_b[l], state.v_b[l], grads.biases[l]);
    }
}

LossBreakdown evaluate_loss(const MlpModel& model, const Matrix& inputs, const Matrix& targets,
                            double alpha, int n_mom_rows) {
    // Chunked to bound the activation footprint on big splits.
    constexpr Eigen::Index kChunk = 8192;
    const Eigen::Index n = inputs.cols();
    double mom = 0.0, corr = 0.0;
    for (Eigen::Index start = 0; start < n; start += kChunk) {
        const Eigen::Index len = std::min(kChunk, n - start);
        const Matrix pred = forward_batch(model, inputs.middleCols(start, len));
        const Matrix diff = pred - targets.middleCols(start, len);
        mom += diff.topRows(n_mom_rows).squaredNorm();
        corr += diff.bottomRows(diff.rows() - n_mom_rows).squaredNorm();
    }
    LossBreakdown out;
    const double inv_n = 1.0 / static_cast<double>(n);
    out.moment_term = alpha * inv_n * mom;
    out.corr_term = (1.0 - alpha) * inv_n * corr;
    out.total = out.moment_term + out.corr_term;
    return out;
}

}  // namespace

TrainResult train(MlpModel model, const Matrix& train_inputs, const Matrix& train_targets,
                  const Matrix& val_inputs, const Matrix& val_targets, const TrainConfig& config) {
    check_model(model);
    if (train_inputs.cols() == 0 || val_inputs.cols() == 0)
        throw_config("training and validation sets must be nonempty");
    if (train_inputs.cols() != train_targets.cols() || val_inputs.cols() != val_targets.cols())
        throw_config("input/target sample counts differ");
    if (config.batch_size < 1 || config.epochs < 1 || !(config.learning_rate > 0.0))
        throw_config("invalid training configuration");

    const int n_mom_rows = model.output_grid.n_mom;
    const Eigen::Index n = train_inputs.cols();
    AdamState state(model);
    Philox rng(config.seed);

    TrainResult result;
    result.model = model;
    result.best_val_loss = std::numeric_limits<double>::infinity();

    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);

    int since_best = 0;
    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        // Fisher-Yates with the epoch-split stream keeps runs bit-identical.
        Philox shuffle = rng.derive(0xe60c, static_cast<std::uint64_t>(epoch));
        for (std::size_t i = order.size(); i > 1; --i) {
            const std::size_t j =
                static_cast<std::size_t>(shuffle.uniform_int(0, static_cast<std::uint64_t>(i - 1)));
            std::swap(order[i - 1], order[j]);
        }

        double train_loss_sum = 0.0;
        Eigen::Index seen = 0;
        Matrix batch_x(train_inputs.rows(), config.batch_size);
        Matrix batch_y(train_targets.rows(), config.batch_size);
        for (Eigen::Index start = 0; start < n; start += config.batch_size) {
            const Eigen::Index len = std::min<Eigen::Index>(config.batch_size, n - start);
            for (Eigen::Index c = 0; c < len; ++c) {
                batch_x.col(c) = train_inputs.col(order[static_cast<std::size_t>(start + c)]);
                batch_y.col(c) = train_targets.col(order[static_cast<std::size_t>(start + c)]);
            }
            const auto x = batch_x.leftCols(len);
            const auto y = batch_y.leftCols(len);
            const Gradients grads = backward(model, x, y, config.alpha, n_mom_rows);
            const LossBreakdown batch_loss =
                loss(forward_batch(model, x), y, config.alpha, n_mom_rows);
            if (!std::isfinite(batch_loss.total)) {
                result.diverged = true;
                if (config.verbose) std::fprintf(stderr, "training diverged at epoch %d\n", epoch);
                return result;  // last finite checkpoint = best so far
            }
            train_loss_sum += batch_loss.total * static_cast<double>(len);
            seen += len;
            adam_update(model, grads, state, config);
        }

        const LossBreakdown val =
            evaluate_loss(model, val_inputs, val_targets, config.alpha, n_mom_rows);
        EpochStats stats;
        stats.epoch = epoch;
        stats.train_loss = train_loss_sum / static_cast<double>(seen);
        stats.val_loss = val.total;
        stats.moment_term = val.moment_term;
        stats.corr_term = val.corr_term;
        result.history.push_back(stats);
        if (config.verbose)
            std::fprintf(stderr, "epoch %3d  train %.6f  val %.6f\n", epoch, stats.train_loss,
                         stats.val_loss);

        if (!std::isfinite(val.total)) {
            result.diverged = true;
            return result;
        }
        if (val.total < result.best_val_loss) {
            result.best_val_loss = val.total;
            result.best_epoch = epoch;
            result.model = model;
            since_best = 0;
        } else if (++since_best >= config.patience) {
            break;
        }
    }
    return result;
}

void write_history_csv(const std::vector<EpochStats>& history,
                       const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw_io("cannot open for writing: " + path.string());
    out << "epoch,train_loss,val_loss,moment_term,corr_term\n";
    for (const auto& row : history) {
        std::ostringstream line;
        line.precision(12);
        line << row.epoch << "," << row.train_loss << "," << row.val_loss << ","
             << row.moment_term << "," << row.corr_term;
        out << line.str() << "\n";
    }
}

DescriptorSet predict_superposed(const MlpModel& model, const DescriptorSet& stream_a,
                                 const DescriptorSet& stream_b) {
    check_model(model);
    if (stream_a.grid != model.input_grid || stream_b.grid != model.input_grid)
        throw_config("stream descriptors are not on the model's input grid");
    for (const auto* d : {&stream_a, &stream_b})
        for (double m : d->moments)
            if (!(m > 0.0)) throw_domain("stream moments must be positive");

    // Canonical order: the larger-mean stream first (it becomes the
    // unit-mean stream after rescaling); full-vector comparison breaks
    // ties so swapped arguments produce identical inputs.
    const DescriptorSet* first = &stream_a;
    const DescriptorSet* second = &stream_b;
    const double mean_a = stream_a.moment(1);
    const double mean_b = stream_b.moment(1);
    if (mean_b > mean_a) {
        std::swap(first, second);
    } else if (mean_a == mean_b) {
        const auto tie = [](const DescriptorSet& d) {
            std::vector<double> v = d.moments;
            v.insert(v.end(), d.autocorr.begin(), d.autocorr.end());
            return v;
        };
        if (tie(stream_b) < tie(stream_a)) std::swap(first, second);
    }

    const double c = first->moment(1);
    Vector input(model.input_dim());
    Eigen::Index pos = 0;
    for (const DescriptorSet* d : {first, second}) {
        double scale_pow = 1.0;
        for (int i = 1; i <= d->grid.n_mom; ++i) {
            scale_pow *= c;
            input(pos++) = std::log(d->moment(i) / scale_pow);
        }
        for (double r : d->autocorr) input(pos++) = r;
    }

    const Vector output = forward(model, input);

    DescriptorSet merged;
    merged.grid = model.output_grid;
    merged.moments.resize(static_cast<std::size_t>(model.output_grid.n_mom));
    double scale_pow = 1.0;
    for (int i = 1; i <= model.output_grid.n_mom; ++i) {
        scale_pow *= c;
        merged.moments[static_cast<std::size_t>(i - 1)] = std::exp(output(i - 1)) * scale_pow;
    }
    // The merged rate is the sum of the input rates; the first moment is
    // known exactly and overwritten.
    merged.moments[0] = 1.0 / (1.0 / stream_a.moment(1) + 1.0 / stream_b.moment(1));
    merged.autocorr.resize(static_cast<std::size_t>(model.output_grid.autocorr_size()));
    for (std::size_t i = 0; i < merged.autocorr.size(); ++i) {
        const double r = output(model.output_grid.n_mom + static_cast<Eigen::Index>(i));
        merged.autocorr[i] = std::clamp(r, -1.0, 1.0);
    }
    return merged;
}

namespace {

std::vector<double> flatten_parameters(const MlpModel& model) {
    std::vector<double> flat;
    flat.reserve(model.parameter_count());
    for (std::size_t l = 0; l < model.weights.size(); ++l) {
        const Matrix& w = model.weights[l];
        for (Eigen::Index i = 0; i < w.rows(); ++i)
            for (Eigen::Index j = 0; j < w.cols(); ++j) flat.push_back(w(i, j));
        const Vector& b = model.biases[l];
        for (Eigen::Index i = 0; i < b.size(); ++i) flat.push_back(b(i));
    }
    return flat;
}

}  // namespace

void save_model(const MlpModel& model, const std::filesystem::path& path) {
    check_model(model);
    nlohmann::json j;
    j["format"] = "smapnn";
    j["format_version"] = 1;
    j["layer_sizes"] = model.layer_sizes;
    j["activation"] = model.activation;
    j["input_grid"] = {model.input_grid.n_mom, model.input_grid.n_lag, model.input_grid.n_pow};
    j["output_grid"] = {model.output_grid.n_mom, model.output_grid.n_lag, model.output_grid.n_pow};
    j["parameter_count"] = model.parameter_count();

    const auto flat = flatten_parameters(model);
    const auto bytes = doubles_to_bytes(flat);
    j["digest"] = digest_hex(bytes);

    nlohmann::json layers = nlohmann::json::array();
    for (std::size_t l = 0; l < model.weights.size(); ++l) {
        std::vector<double> w;
        const Matrix& wm = model.weights[l];
        w.reserve(static_cast<std::size_t>(wm.size()));
        for (Eigen::Index i = 0; i < wm.rows(); ++i)
            for (Eigen::Index jj = 0; jj < wm.cols(); ++jj) w.push_back(wm(i, jj));
        std::vector<double> b(model.biases[l].data(),
                              model.biases[l].data() + model.biases[l].size());
        layers.push_back({{"weights", base64_encode(doubles_to_bytes(w))},
                          {"biases", base64_encode(doubles_to_bytes(b))}});
    }
    j["layers"] = layers;

    std::ofstream out(path);
    if (!out) throw_io("cannot open for writing: " + path.string());
    out << j.dump(2) << "\n";
    if (!out) throw_io("write failure: " + path.string());
}

MlpModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw_io("cannot open model file: " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw_io(std::string("model parse failure: ") + e.what());
    }
    if (j.value("format", "") != "smapnn" || j.value("format_version", 0) != 1)
        throw_io("unsupported model format/version");

    MlpModel model;
    model.layer_sizes = j.at("layer_sizes").get<std::vector<int>>();
    model.activation = j.at("activation").get<std::string>();
    const auto ig = j.at("input_grid").get<std::vector<int>>();
    const auto og = j.at("output_grid").get<std::vector<int>>();
    if (ig.size() != 3 || og.size() != 3) throw_io("model grids malformed");
    model.input_grid = {ig[0], ig[1], ig[2]};
    model.output_grid = {og[0], og[1], og[2]};

    const auto& layers = j.at("layers");
    if (layers.size() + 1 != model.layer_sizes.size()) throw_io("model layer count mismatch");
    for (std::size_t l = 0; l < layers.size(); ++l) {
        const int rows = model.layer_sizes[l + 1];
        const int cols = model.layer_sizes[l];
        const auto w = bytes_to_doubles(base64_decode(layers[l].at("weights").get<std::string>()));
        const auto b = bytes_to_doubles(base64_decode(layers[l].at("biases").get<std::string>()));
        if (w.size() != static_cast<std::size_t>(rows) * cols ||
            b.size() != static_cast<std::size_t>(rows))
            throw_io("model layer " + std::to_string(l) + " block size mismatch");
        Matrix wm(rows, cols);
        std::size_t idx = 0;
        for (int i = 0; i < rows; ++i)
            for (int jj = 0; jj < cols; ++jj) wm(i, jj) = w[idx++];
        model.weights.push_back(std::move(wm));
        model.biases.push_back(Eigen::Map<const Vector>(b.data(), rows));
    }

    if (model.parameter_count() != j.at("parameter_count").get<std::size_t>())
        throw_io("model parameter count does not match header");
    const auto flat = flatten_parameters(model);
    if (digest_hex(doubles_to_bytes(flat)) != j.at("digest").get<std::string>())
        throw_io("model digest mismatch");
    check_model(model);
    return model;
}

}  // namespace supermap::nn
