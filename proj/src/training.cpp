#include "taglets/training.hpp"

#include <cmath>

#include "taglets/error.hpp"
#include "taglets/math.hpp"
#include "taglets/rng.hpp"

namespace taglets {

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw Error(Errc::InvalidConfig, "learning rate must be > 0");
  if (!(momentum >= 0.0 && momentum < 1.0)) {
    throw Error(Errc::InvalidConfig, "momentum must be in [0, 1)");
  }
  if (batch_size < 1) throw Error(Errc::InvalidConfig, "batch size must be >= 1");
  if (epochs < 0) throw Error(Errc::InvalidConfig, "epochs must be >= 0");
}

// Evaluated through log-softmax so saturated predictions stay finite.
double mean_soft_cross_entropy(const LinearModel& model, const SoftLabeledData& data) {
  if (data.empty()) return 0.0;
  Eigen::MatrixXd logits = data.features * model.weights.transpose();
  logits.rowwise() += model.bias.transpose();
  double total = 0.0;
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const double top = logits.row(i).maxCoeff();
    const double lse = top + std::log((logits.row(i).array() - top).exp().sum());
    for (Eigen::Index c = 0; c < logits.cols(); ++c) {
      const double p = data.targets(i, c);
      if (p != 0.0) total -= p * (logits(i, c) - lse);
    }
  }
  return total / static_cast<double>(logits.rows());
}

LinearGradient soft_cross_entropy_gradient(const LinearModel& model,
                                           const Eigen::MatrixXd& features,
                                           const Eigen::MatrixXd& targets) {
  const Eigen::MatrixXd q = model.predict_batch(features);
  const Eigen::VectorXd mass = targets.rowwise().sum();
  const Eigen::MatrixXd delta = (q.array().colwise() * mass.array()).matrix() - targets;
  const double inv_n = 1.0 / static_cast<double>(features.rows());
  return {inv_n * delta.transpose() * features, inv_n * delta.colwise().sum().transpose()};
}

namespace {

void check_shapes(const LinearModel& model, const SoftLabeledData& data) {
  if (data.features.rows() != data.targets.rows()) {
    throw Error(Errc::ShapeError, "features and targets have different row counts");
  }
  if (data.empty()) return;
  if (data.features.cols() != model.dim()) {
    throw Error(Errc::ShapeError, "feature dimension " + std::to_string(data.features.cols()) +
                                      " does not match model dimension " +
                                      std::to_string(model.dim()));
  }
  if (data.targets.cols() != model.num_classes()) {
    throw Error(Errc::ShapeError, "label arity " + std::to_string(data.targets.cols()) +
                                      " does not match model classes " +
                                      std::to_string(model.num_classes()));
  }
}

}  // namespace

TrainResult train_supervised(LinearModel model, const SoftLabeledData& data,
                             const TrainConfig& cfg) {
  cfg.validate();
  check_shapes(model, data);
  if (data.empty() || cfg.epochs == 0) {
    const double loss = mean_soft_cross_entropy(model, data);
    return {std::move(model), loss};
  }

  const MomentumSgd opt(cfg.learning_rate, cfg.momentum);
  Eigen::MatrixXd vel_w = Eigen::MatrixXd::Zero(model.weights.rows(), model.weights.cols());
  Eigen::VectorXd vel_b = Eigen::VectorXd::Zero(model.bias.size());
  Rng rng(cfg.seed);

  const auto n = static_cast<std::size_t>(data.size());
  const auto batch = static_cast<std::size_t>(cfg.batch_size);
  Eigen::MatrixXd xb;
  Eigen::MatrixXd pb;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto order = shuffled_indices(n, rng);
    for (std::size_t start = 0; start < n; start += batch) {
      const std::size_t len = std::min(batch, n - start);
      xb.resize(static_cast<Eigen::Index>(len), data.features.cols());
      pb.resize(static_cast<Eigen::Index>(len), data.targets.cols());
      for (std::size_t r = 0; r < len; ++r) {
        xb.row(static_cast<Eigen::Index>(r)) = data.features.row(static_cast<Eigen::Index>(order[start + r]));
        pb.row(static_cast<Eigen::Index>(r)) = data.targets.row(static_cast<Eigen::Index>(order[start + r]));
      }
      const auto g = soft_cross_entropy_gradient(model, xb, pb);
      opt.step(model.weights, g.weights, vel_w);
      opt.step(model.bias, g.bias, vel_b);
    }
  }
  const double loss = mean_soft_cross_entropy(model, data);
  return {std::move(model), loss};
}

TrainResult train_supervised(LinearModel model, const LabeledData& data, const TrainConfig& cfg) {
  const Eigen::Index classes = model.num_classes();
  return train_supervised(std::move(model), one_hot(data, classes), cfg);
}

double accuracy(const Eigen::MatrixXd& probabilities, const std::vector<int>& labels) {
  if (labels.empty()) throw Error(Errc::NoTestData, "accuracy over an empty test set");
  if (static_cast<std::size_t>(probabilities.rows()) != labels.size()) {
    throw Error(Errc::ShapeError, "prediction/label count mismatch");
  }
  std::size_t correct = 0;
  for (Eigen::Index i = 0; i < probabilities.rows(); ++i) {
    if (argmax(probabilities.row(i)) == labels[static_cast<std::size_t>(i)]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(labels.size());
}

double evaluate_accuracy(const LinearModel& model, const LabeledData& test) {
  if (test.empty()) throw Error(Errc::NoTestData, "accuracy over an empty test set");
  return accuracy(model.predict_batch(test.features), test.labels);
}

}  // namespace taglets
