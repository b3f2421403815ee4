#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "supermap/descriptors.hpp"
#include "supermap/map_process.hpp"

namespace supermap::nn {

// Fully connected regressor mapping two per-stream descriptor blocks to
// the merged-stream descriptor block. Hidden layers use a rectifier, the
// output layer is linear; moments travel in log space end to end.
struct MlpModel {
    std::vector<int> layer_sizes;  // input, hidden..., output
    std::vector<Matrix> weights;   // weights[l]: layer_sizes[l+1] x layer_sizes[l]
    std::vector<Vector> biases;
    std::string activation = "relu";
    DescriptorGrid input_grid = kTargetGrid;   // per-stream block shape
    DescriptorGrid output_grid = kTargetGrid;

    int input_dim() const { return layer_sizes.front(); }
    int output_dim() const { return layer_sizes.back(); }
    std::size_t parameter_count() const;
};

// Hidden sizes of the deployed operator.
inline const std::vector<int> kDefaultHiddenSizes{50, 50, 70, 70, 50};

// Fan-in-scaled symmetric uniform weights, zero biases, deterministic per
// seed.
MlpModel init_model(const std::vector<int>& layer_sizes, std::uint64_t seed);

Vector forward(const MlpModel& model, const Vector& input);
// Columns are samples: input block (in x B) -> output block (out x B).
Matrix forward_batch(const MlpModel& model, const Matrix& inputs);

struct LossBreakdown {
    double total = 0.0;
    double moment_term = 0.0;
    double corr_term = 0.0;
};

// (alpha/B) sum of squared log-moment errors + ((1-alpha)/B) sum of
// squared autocorrelation errors; rows 0..n_mom-1 are log moments.
LossBreakdown loss(const Matrix& predictions, const Matrix& targets, double alpha,
                   int n_mom_rows = kTargetGrid.n_mom);

struct Gradients {
    std::vector<Matrix> weights;
    std::vector<Vector> biases;
};

// Analytic gradients of `loss` composed with `forward_batch`.
Gradients backward(const MlpModel& model, const Matrix& inputs, const Matrix& targets,
                   double alpha, int n_mom_rows = kTargetGrid.n_mom);

struct TrainConfig {
    double learning_rate = 1e-4;
    int epochs = 150;
    int batch_size = 64;
    double weight_decay = 1e-5;
    double alpha = 0.5;
    std::uint64_t seed = 0;
    int patience = 20;  // early-stop window on validation loss
    bool verbose = false;
};

struct EpochStats {
    int epoch = 0;
    double train_loss = 0.0;
    double val_loss = 0.0;
    double moment_term = 0.0;  // validation split of the loss
    double corr_term = 0.0;
};

struct TrainResult {
    MlpModel model;  // best-validation parameters
    std::vector<EpochStats> history;
    int best_epoch = -1;
    double best_val_loss = 0.0;
    bool diverged = false;
};

// Mini-batch Adam with decoupled weight decay; keeps the best-validation
// parameters; deterministic given seed.
TrainResult train(MlpModel model, const Matrix& train_inputs, const Matrix& train_targets,
                  const Matrix& val_inputs, const Matrix& val_targets, const TrainConfig& config);

void write_history_csv(const std::vector<EpochStats>& history, const std::filesystem::path& path);

// Inference wrapper: common time rescaling so the larger-mean stream sits
// at mean one, canonical stream order, log transform in, exponentiation
// and unscaling out, exact first moment, autocorrelations clamped to
// [-1, 1].
DescriptorSet predict_superposed(const MlpModel& model, const DescriptorSet& stream_a,
                                 const DescriptorSet& stream_b);

// Model file (.smapnn.json): layer sizes, grids, base64 little-endian
// parameter blocks, content digest. Round-trips bit-exactly.
void save_model(const MlpModel& model, const std::filesystem::path& path);
MlpModel load_model(const std::filesystem::path& path);

}  // namespace supermap::nn
