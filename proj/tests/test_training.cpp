#include <doctest.h>

#include <cmath>
#include <random>

#include "taglets/error.hpp"
#include "taglets/rng.hpp"
#include "taglets/training.hpp"

using namespace taglets;

namespace {

Eigen::MatrixXd gaussian(Eigen::Index rows, Eigen::Index cols, Rng& rng, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = n(rng);
  }
  return m;
}

Eigen::MatrixXd random_targets(Eigen::Index rows, Eigen::Index classes, Rng& rng) {
  std::exponential_distribution<double> e(1.0);
  Eigen::MatrixXd p(rows, classes);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index c = 0; c < classes; ++c) p(i, c) = e(rng);
    p.row(i) /= p.row(i).sum();
  }
  return p;
}

// Two Gaussian blobs on a line, labelled by sign.
LabeledData line_task(int n, std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_real_distribution<double> u(0.5, 2.0);
  LabeledData d;
  d.features.resize(n, 1);
  for (int i = 0; i < n; ++i) {
    const int y = i % 2;
    d.features(i, 0) = (y == 1 ? 1.0 : -1.0) * u(rng);
    d.labels.push_back(y);
  }
  return d;
}

}  // namespace

TEST_SUITE("training") {
  TEST_CASE("analytic gradient matches central differences") {
    Rng rng(3);
    const double h = 1e-5;
    for (int trial = 0; trial < 100; ++trial) {
      const Eigen::Index n = 1 + trial % 7, d = 1 + trial % 5, c = 2 + trial % 4;
      LinearModel model(gaussian(c, d, rng), gaussian(c, 1, rng).col(0));
      const SoftLabeledData data{gaussian(n, d, rng), random_targets(n, c, rng)};
      const LinearGradient g = soft_cross_entropy_gradient(model, data.features, data.targets);

      Eigen::MatrixXd num_w(c, d);
      Eigen::VectorXd num_b(c);
      for (Eigen::Index i = 0; i < c; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) {
          LinearModel up = model, down = model;
          up.weights(i, j) += h;
          down.weights(i, j) -= h;
          num_w(i, j) =
              (mean_soft_cross_entropy(up, data) - mean_soft_cross_entropy(down, data)) / (2 * h);
        }
        LinearModel up = model, down = model;
        up.bias(i) += h;
        down.bias(i) -= h;
        num_b(i) = (mean_soft_cross_entropy(up, data) - mean_soft_cross_entropy(down, data)) / (2 * h);
      }
      const double diff = std::sqrt((g.weights - num_w).squaredNorm() + (g.bias - num_b).squaredNorm());
      const double scale = std::sqrt(g.weights.squaredNorm() + g.bias.squaredNorm()) +
                           std::sqrt(num_w.squaredNorm() + num_b.squaredNorm());
      CHECK(diff / std::max(scale, 1e-12) < 1e-5);
    }
  }

  TEST_CASE("separable one-dimensional task is learned") {
    const LabeledData d = line_task(40, 1);
    TrainConfig cfg;
    cfg.learning_rate = 0.1;
    cfg.epochs = 200;
    cfg.batch_size = 8;
    const auto r = train_supervised(LinearModel(2, 1), d, cfg);
    CHECK(evaluate_accuracy(r.model, d) == 1.0);
    CHECK(r.final_loss < 0.2);
  }

  TEST_CASE("zero epochs leaves the model untouched") {
    const LabeledData d = line_task(10, 2);
    Rng rng(5);
    const LinearModel init(gaussian(2, 1, rng), gaussian(2, 1, rng).col(0));
    TrainConfig cfg;
    cfg.epochs = 0;
    const auto r = train_supervised(init, d, cfg);
    CHECK(r.model == init);
    CHECK(r.final_loss == mean_soft_cross_entropy(init, one_hot(d, 2)));
  }

  TEST_CASE("full-batch descent with a small step never increases the loss") {
    Rng rng(9);
    const Eigen::Index n = 64, d = 6, c = 4;
    const SoftLabeledData data{gaussian(n, d, rng), random_targets(n, c, rng)};
    TrainConfig cfg;
    cfg.learning_rate = 1e-3;
    cfg.momentum = 0.0;
    cfg.batch_size = static_cast<int>(n);
    cfg.epochs = 1;
    LinearModel model(c, d);
    double prev = mean_soft_cross_entropy(model, data);
    for (int epoch = 0; epoch < 200; ++epoch) {
      auto r = train_supervised(model, data, cfg);
      CHECK(r.final_loss <= prev + 1e-15);
      prev = r.final_loss;
      model = std::move(r.model);
    }
  }

  TEST_CASE("training is deterministic for a fixed seed") {
    Rng rng(4);
    const SoftLabeledData data{gaussian(100, 5, rng), random_targets(100, 3, rng)};
    TrainConfig cfg;
    cfg.batch_size = 16;
    cfg.epochs = 5;
    cfg.seed = 77;
    const auto a = train_supervised(LinearModel(3, 5), data, cfg);
    const auto b = train_supervised(LinearModel(3, 5), data, cfg);
    CHECK(a.model == b.model);
    cfg.seed = 78;
    CHECK_FALSE(train_supervised(LinearModel(3, 5), data, cfg).model == a.model);
  }

  TEST_CASE("shape and config errors") {
    LabeledData d = line_task(4, 1);
    try {
      train_supervised(LinearModel(2, 3), d, TrainConfig{});
      FAIL("expected ShapeError");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::ShapeError);
    }
    TrainConfig bad;
    bad.learning_rate = 0.0;
    CHECK_THROWS_AS(train_supervised(LinearModel(2, 1), d, bad), Error);
    bad = TrainConfig{};
    bad.momentum = 1.0;
    CHECK_THROWS_AS(train_supervised(LinearModel(2, 1), d, bad), Error);
  }

  TEST_CASE("accuracy counts argmax hits") {
    Eigen::MatrixXd p(10, 2);
    std::vector<int> labels;
    for (int i = 0; i < 10; ++i) {
      p.row(i) << 0.9, 0.1;
      labels.push_back(i < 5 ? 0 : 1);
    }
    CHECK(accuracy(p, labels) == 0.5);
    try {
      evaluate_accuracy(LinearModel(2, 1), LabeledData{});
      FAIL("expected NoTestData");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::NoTestData);
    }
  }

  TEST_CASE("one_hot and concat") {
    LabeledData d;
    d.features = Eigen::MatrixXd::Ones(2, 3);
    d.labels = {1, 0};
    const SoftLabeledData s = one_hot(d, 3);
    CHECK(s.targets(0, 1) == 1.0);
    CHECK(s.targets(1, 0) == 1.0);
    CHECK(s.targets.sum() == 2.0);
    const SoftLabeledData both = concat(SoftLabeledData{}, s);
    CHECK(both.size() == 2);
    CHECK(concat(s, s).size() == 4);
  }
}
