#pragma once

// Expression-friendly numeric kernels shared by the similarity index, the
// trainers and the ensembler. All functions accept any Eigen dense expression.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

#include "taglets/error.hpp"

namespace taglets {

template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar cosine_similarity(const Eigen::MatrixBase<DerivedA>& a,
                                            const Eigen::MatrixBase<DerivedB>& b) {
  using Scalar = typename DerivedA::Scalar;
  if (a.size() != b.size()) {
    throw Error(Errc::ShapeError, "cosine_similarity: length mismatch");
  }
  const Scalar na = a.norm();
  const Scalar nb = b.norm();
  if (na == Scalar(0) || nb == Scalar(0)) {
    throw Error(Errc::DegenerateVector, "cosine_similarity: zero vector");
  }
  const Scalar s = a.dot(b) / (na * nb);
  // rounding can push |s| a hair past 1
  return std::clamp(s, Scalar(-1), Scalar(1));
}

/// Numerically stable softmax of a logit vector.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> softmax(
    const Eigen::MatrixBase<Derived>& logits) {
  using Scalar = typename Derived::Scalar;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> e = (logits.array() - logits.maxCoeff()).exp();
  return e / e.sum();
}

/// Row-wise softmax; each row of `logits` is one example.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> softmax_rows(
    const Eigen::MatrixBase<Derived>& logits) {
  using Scalar = typename Derived::Scalar;
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  Mat out = logits;
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    out.row(i).array() -= out.row(i).maxCoeff();
    out.row(i) = out.row(i).array().exp().matrix();
    out.row(i) /= out.row(i).sum();
  }
  return out;
}

/// -sum_c p_c log q_c with 0 * log(anything) taken as 0. Throws InfiniteLoss
/// when a class with positive target mass has zero predicted probability.
template <typename DerivedP, typename DerivedQ>
typename DerivedP::Scalar soft_cross_entropy(const Eigen::MatrixBase<DerivedP>& p,
                                             const Eigen::MatrixBase<DerivedQ>& q) {
  using Scalar = typename DerivedP::Scalar;
  if (p.size() != q.size()) {
    throw Error(Errc::ShapeError, "soft_cross_entropy: length mismatch");
  }
  Scalar loss(0);
  for (Eigen::Index c = 0; c < p.size(); ++c) {
    if (p(c) == Scalar(0)) continue;
    if (q(c) <= Scalar(0)) {
      throw Error(Errc::InfiniteLoss, "soft_cross_entropy: zero probability on a target class");
    }
    loss -= p(c) * std::log(q(c));
  }
  return loss;
}

/// Index of the largest coefficient; ties go to the lowest index.
template <typename Derived>
Eigen::Index argmax(const Eigen::MatrixBase<Derived>& v) {
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < v.size(); ++i) {
    if (v(i) > v(best)) best = i;
  }
  return best;
}

template <typename Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& m) {
  return m.array().isFinite().all();
}

}  // namespace taglets
