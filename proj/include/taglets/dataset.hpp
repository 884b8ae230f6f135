#pragma once

#include <Eigen/Dense>

#include <vector>

namespace taglets {

/// Examples stored row-wise with one integer class label per row.
struct LabeledData {
  Eigen::MatrixXd features;  // n x d
  std::vector<int> labels;   // n

  Eigen::Index size() const { return features.rows(); }
  Eigen::Index dim() const { return features.cols(); }
  bool empty() const { return features.rows() == 0; }
};

/// Examples with probability-vector targets, one row per example.
struct SoftLabeledData {
  Eigen::MatrixXd features;  // n x d
  Eigen::MatrixXd targets;   // n x C

  Eigen::Index size() const { return features.rows(); }
  bool empty() const { return features.rows() == 0; }
};

SoftLabeledData one_hot(const LabeledData& data, Eigen::Index num_classes);

/// Row concatenation; either side may be empty (0 rows), in which case its
/// column count is ignored.
SoftLabeledData concat(const SoftLabeledData& a, const SoftLabeledData& b);

}  // namespace taglets
