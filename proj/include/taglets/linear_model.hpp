#pragma once

#include <Eigen/Dense>

#include "taglets/error.hpp"
#include "taglets/math.hpp"

namespace taglets {

/// Multinomial logistic regression: p(x) = softmax(W x + b).
template <typename Scalar_>
struct SoftmaxLinearModel {
  using Scalar = Scalar_;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  Matrix weights;  // classes x dim
  Vector bias;     // classes

  SoftmaxLinearModel() = default;
  SoftmaxLinearModel(Eigen::Index num_classes, Eigen::Index dim)
      : weights(Matrix::Zero(num_classes, dim)), bias(Vector::Zero(num_classes)) {}
  SoftmaxLinearModel(Matrix w, Vector b) : weights(std::move(w)), bias(std::move(b)) {
    if (weights.rows() != bias.size()) {
      throw Error(Errc::ShapeError, "SoftmaxLinearModel: weights/bias row mismatch");
    }
  }

  Eigen::Index num_classes() const { return weights.rows(); }
  Eigen::Index dim() const { return weights.cols(); }

  template <typename Derived>
  Vector predict(const Eigen::MatrixBase<Derived>& x) const {
    check_dim(x.size());
    return softmax((weights * x + bias).eval());
  }

  /// One probability row per input row.
  template <typename Derived>
  Matrix predict_batch(const Eigen::MatrixBase<Derived>& x) const {
    check_dim(x.cols());
    Matrix logits = x * weights.transpose();
    logits.rowwise() += bias.transpose();
    return softmax_rows(logits);
  }

  bool operator==(const SoftmaxLinearModel& o) const {
    return weights.rows() == o.weights.rows() && weights.cols() == o.weights.cols() &&
           weights == o.weights && bias == o.bias;
  }

 private:
  void check_dim(Eigen::Index d) const {
    if (d != dim()) throw Error(Errc::ShapeError, "SoftmaxLinearModel: feature dimension mismatch");
  }
};

using LinearModel = SoftmaxLinearModel<double>;

}  // namespace taglets
