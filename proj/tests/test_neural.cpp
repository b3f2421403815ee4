#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <chrono>
#include <filesystem>
#include <fstream>

#include "supermap/neural.hpp"
#include "supermap/rng.hpp"
#include "support.hpp"

using namespace supermap;
using namespace supermap::testsupport;
namespace fs = std::filesystem;

namespace {

Matrix random_matrix(int rows, int cols, std::uint64_t seed, double scale = 1.0) {
    Philox rng(seed);
    Matrix m(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) m(i, j) = rng.uniform(-scale, scale);
    return m;
}

}  // namespace

TEST_CASE("parameter counts") {
    const auto deployed = nn::init_model({26, 50, 50, 70, 70, 50, 13}, 0);
    CHECK(deployed.parameter_count() == 16653);
    CHECK(nn::init_model({2, 2}, 0).parameter_count() == 6);
}

TEST_CASE("initialization is deterministic and fan-in bounded") {
    const auto a = nn::init_model({26, 50, 13}, 9);
    const auto b = nn::init_model({26, 50, 13}, 9);
    for (std::size_t l = 0; l < a.weights.size(); ++l) {
        CHECK((a.weights[l] - b.weights[l]).cwiseAbs().maxCoeff() == 0.0);
        CHECK(a.biases[l].cwiseAbs().maxCoeff() == 0.0);
        const double limit = std::sqrt(6.0 / a.weights[l].cols());
        CHECK(a.weights[l].cwiseAbs().maxCoeff() <= limit);
    }
    const auto c = nn::init_model({26, 50, 13}, 10);
    CHECK((a.weights[0] - c.weights[0]).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("forward: bias-only and identity models") {
    auto model = nn::init_model({4, 3}, 1);
    model.weights[0].setZero();
    model.biases[0] << 1.0, -2.0, 0.5;
    const Vector out = nn::forward(model, Vector::Zero(4));
    CHECK(out(0) == 1.0);
    CHECK(out(1) == -2.0);
    CHECK(out(2) == 0.5);

    auto identity = nn::init_model({3, 3}, 2);
    identity.weights[0] = Matrix::Identity(3, 3);
    identity.biases[0].setZero();
    Vector x(3);
    x << -1.5, 0.25, 3.0;
    CHECK((nn::forward(identity, x) - x).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("batched forward equals per-column forward") {
    const auto model = nn::init_model({26, 50, 50, 13}, 3);
    const Matrix inputs = random_matrix(26, 5000, 4);
    const Matrix batched = nn::forward_batch(model, inputs);
    for (int c = 0; c < 50; ++c) {  // spot-check a stride of columns
        const Vector single = nn::forward(model, inputs.col(c * 100));
        CHECK((batched.col(c * 100) - single).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("loss: nullity, alpha weighting, arithmetic") {
    const Matrix target = random_matrix(13, 4, 5);
    CHECK(nn::loss(target, target, 0.5).total == 0.0);

    Matrix off = target;
    off(2, 0) += 0.1;  // one log-moment off by 0.1 on one sample
    const auto pure_moment = nn::loss(off.leftCols(1), target.leftCols(1), 1.0);
    CHECK(pure_moment.total == doctest::Approx(0.01).epsilon(1e-12));
    CHECK(pure_moment.corr_term == 0.0);

    const auto pure_corr = nn::loss(off.leftCols(1), target.leftCols(1), 0.0);
    CHECK(pure_corr.total == 0.0);  // moment error discarded at alpha 0

    Matrix corr_off = target;
    corr_off(7, 1) += 0.2;
    CHECK(nn::loss(corr_off, target, 1.0).total == 0.0);
    CHECK(nn::loss(corr_off, target, 0.0).total ==
          doctest::Approx(0.04 / 4.0).epsilon(1e-12));

    CHECK_THROWS_AS(nn::loss(target, target.leftCols(2), 0.5), Error);
}

TEST_CASE("analytic gradients match central finite differences") {
    auto model = nn::init_model({26, 8, 13}, 7);
    const Matrix inputs = random_matrix(26, 3, 8);
    const Matrix targets = random_matrix(13, 3, 9);
    const double alpha = 0.37;

    const auto grads = nn::backward(model, inputs, targets, alpha);
    const double eps = 1e-6;
    double worst = 0.0;
    for (std::size_t l = 0; l < model.weights.size(); ++l) {
        for (int i = 0; i < model.weights[l].rows(); ++i)
            for (int j = 0; j < model.weights[l].cols(); ++j) {
                const double saved = model.weights[l](i, j);
                model.weights[l](i, j) = saved + eps;
                const double up = nn::loss(nn::forward_batch(model, inputs), targets, alpha).total;
                model.weights[l](i, j) = saved - eps;
                const double down = nn::loss(nn::forward_batch(model, inputs), targets, alpha).total;
                model.weights[l](i, j) = saved;
                const double fd = (up - down) / (2.0 * eps);
                const double rel = std::abs(fd - grads.weights[l](i, j)) /
                                   std::max(1.0, std::abs(fd));
                worst = std::max(worst, rel);
            }
        for (int i = 0; i < model.biases[l].size(); ++i) {
            const double saved = model.biases[l](i);
            model.biases[l](i) = saved + eps;
            const double up = nn::loss(nn::forward_batch(model, inputs), targets, alpha).total;
            model.biases[l](i) = saved - eps;
            const double down = nn::loss(nn::forward_batch(model, inputs), targets, alpha).total;
            model.biases[l](i) = saved;
            const double fd = (up - down) / (2.0 * eps);
            worst = std::max(worst, std::abs(fd - grads.biases[l](i)) / std::max(1.0, std::abs(fd)));
        }
    }
    CHECK(worst < 1e-5);
}

TEST_CASE("training fits a synthetic linear task") {
    const int n = 200;
    const Matrix a = random_matrix(13, 26, 11, 0.4);
    const Matrix inputs = random_matrix(26, n, 12);
    const Matrix val_inputs = random_matrix(26, 50, 13);
    const Matrix targets = a * inputs;
    const Matrix val_targets = a * val_inputs;

    auto model = nn::init_model({26, 40, 40, 13}, 14);
    nn::TrainConfig config;
    config.learning_rate = 1e-3;
    config.epochs = 150;
    config.batch_size = 16;
    config.seed = 15;
    const auto result =
        nn::train(model, inputs, targets, val_inputs, val_targets, config);
    REQUIRE_FALSE(result.diverged);
    REQUIRE_FALSE(result.history.empty());
    const double first = result.history.front().val_loss;
    CHECK(result.best_val_loss < 0.1 * first);
}

TEST_CASE("training is deterministic per seed") {
    const Matrix inputs = random_matrix(26, 64, 21);
    const Matrix targets = random_matrix(13, 64, 22, 0.3);
    nn::TrainConfig config;
    config.epochs = 5;
    config.learning_rate = 1e-3;
    config.seed = 4;

    const auto r1 = nn::train(nn::init_model({26, 20, 13}, 5), inputs, targets, inputs, targets,
                              config);
    const auto r2 = nn::train(nn::init_model({26, 20, 13}, 5), inputs, targets, inputs, targets,
                              config);
    REQUIRE(r1.history.size() == r2.history.size());
    for (std::size_t i = 0; i < r1.history.size(); ++i) {
        CHECK(r1.history[i].train_loss == r2.history[i].train_loss);
        CHECK(r1.history[i].val_loss == r2.history[i].val_loss);
    }
}

TEST_CASE("model save/load round trip is bit-exact and digest-guarded") {
    const auto model = nn::init_model({26, 50, 50, 70, 70, 50, 13}, 33);
    const auto path = fs::temp_directory_path() / "supermap_model.smapnn.json";
    nn::save_model(model, path);
    const auto loaded = nn::load_model(path);

    const Matrix probe = random_matrix(26, 17, 34);
    const Matrix a = nn::forward_batch(model, probe);
    const Matrix b = nn::forward_batch(loaded, probe);
    CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);

    // Corrupt the digest field.
    std::ifstream in(path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    in.close();
    const auto pos = text.find("\"digest\": \"");
    REQUIRE(pos != std::string::npos);
    text[pos + 11] = text[pos + 11] == '0' ? '1' : '0';
    std::ofstream out(path);
    out << text;
    out.close();
    CHECK_THROWS_AS(nn::load_model(path), Error);
    fs::remove(path);
}

TEST_CASE("predict_superposed: exact first moment and wrapper invariances") {
    const auto model = nn::init_model({26, 50, 50, 13}, 44);

    const auto map_a = random_map(61, 8);
    const auto map_b = random_map_any(62, 8);
    const auto desc_a = descriptor_set(map_a, 5, 2, 2);
    const auto desc_b = descriptor_set(time_scale(map_b, 0.5), 5, 2, 2);

    const auto merged = nn::predict_superposed(model, desc_a, desc_b);
    CHECK(close_rel(merged.moments[0],
                    1.0 / (1.0 / desc_a.moments[0] + 1.0 / desc_b.moments[0]), 1e-14));
    for (double rho : merged.autocorr) {
        CHECK(rho >= -1.0);
        CHECK(rho <= 1.0);
    }

    // Input-order invariance.
    const auto swapped = nn::predict_superposed(model, desc_b, desc_a);
    for (std::size_t i = 0; i < merged.moments.size(); ++i)
        CHECK(merged.moments[i] == swapped.moments[i]);
    for (std::size_t i = 0; i < merged.autocorr.size(); ++i)
        CHECK(merged.autocorr[i] == swapped.autocorr[i]);

    // Common time-rescaling invariance: scale both inputs by c, unscale the
    // prediction, recover the original prediction.
    const double c = 3.0;
    auto scale_desc = [&](const DescriptorSet& d) {
        DescriptorSet out = d;
        double cp = 1.0;
        for (auto& m : out.moments) {
            cp *= c;
            m *= cp;
        }
        return out;
    };
    const auto scaled = nn::predict_superposed(model, scale_desc(desc_a), scale_desc(desc_b));
    double cp = 1.0;
    for (std::size_t i = 0; i < merged.moments.size(); ++i) {
        cp *= c;
        CHECK(close_rel(scaled.moments[i] / cp, merged.moments[i], 1e-9));
    }
    for (std::size_t i = 0; i < merged.autocorr.size(); ++i)
        CHECK(std::abs(scaled.autocorr[i] - merged.autocorr[i]) < 1e-12);

    // Grid mismatch is rejected.
    const auto wrong = descriptor_set(map_a, 4, 2, 2);
    CHECK_THROWS_AS(nn::predict_superposed(model, wrong, desc_b), Error);
}

TEST_CASE("batched inference for 5000 pairs stays under a second") {
    const auto model = nn::init_model({26, 50, 50, 70, 70, 50, 13}, 55);
    const Matrix inputs = random_matrix(26, 5000, 56);
    const auto start = std::chrono::steady_clock::now();
    const Matrix out = nn::forward_batch(model, inputs);
    const auto elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start);
    CHECK(out.cols() == 5000);
    CHECK(elapsed.count() < 1.0);
}
