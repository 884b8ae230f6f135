#pragma once

#include <Eigen/Dense>

#include <cstdint>

#include "taglets/dataset.hpp"
#include "taglets/linear_model.hpp"

namespace taglets {

struct TrainConfig {
  double learning_rate = 0.003;
  double momentum = 0.9;
  int batch_size = 128;
  int epochs = 10;
  std::uint64_t seed = 0;

  void validate() const;
};

struct LinearGradient {
  Eigen::MatrixXd weights;
  Eigen::VectorXd bias;
};

/// Mean soft cross-entropy of the model over the rows of `data`.
double mean_soft_cross_entropy(const LinearModel& model, const SoftLabeledData& data);

/// Gradient of the mean soft cross-entropy. For target rows p and predicted
/// rows q the logit gradient is q * sum(p) - p.
LinearGradient soft_cross_entropy_gradient(const LinearModel& model,
                                           const Eigen::MatrixXd& features,
                                           const Eigen::MatrixXd& targets);

/// Heavy-ball momentum state, v <- mu v + g; theta <- theta - lr v.
class MomentumSgd {
 public:
  MomentumSgd(double learning_rate, double momentum)
      : lr_(learning_rate), mu_(momentum) {}

  void step(Eigen::Ref<Eigen::MatrixXd> param, const Eigen::MatrixXd& grad,
            Eigen::MatrixXd& velocity) const {
    velocity = mu_ * velocity + grad;
    param -= lr_ * velocity;
  }
  void step(Eigen::Ref<Eigen::VectorXd> param, const Eigen::VectorXd& grad,
            Eigen::VectorXd& velocity) const {
    velocity = mu_ * velocity + grad;
    param -= lr_ * velocity;
  }

 private:
  double lr_;
  double mu_;
};

struct TrainResult {
  LinearModel model;
  double final_loss = 0.0;  // mean loss over the full data after the last epoch
};

/// Mini-batch gradient descent with momentum on mean soft cross-entropy.
/// Batches are drawn from a per-epoch shuffle seeded by cfg.seed.
TrainResult train_supervised(LinearModel model, const SoftLabeledData& data,
                             const TrainConfig& cfg);
TrainResult train_supervised(LinearModel model, const LabeledData& data, const TrainConfig& cfg);

double accuracy(const Eigen::MatrixXd& probabilities, const std::vector<int>& labels);
double evaluate_accuracy(const LinearModel& model, const LabeledData& test);

}  // namespace taglets
