#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "taglets/dataset.hpp"
#include "taglets/taglets.hpp"
#include "taglets/training.hpp"

namespace taglets {

/// Row t is taglet t's prediction on x.
Eigen::MatrixXd build_vote_matrix(const std::vector<Taglet>& taglets, const Eigen::VectorXd& x);

/// Arithmetic mean of the rows, summed in row order.
Eigen::VectorXd aggregate_votes(const Eigen::MatrixXd& votes);

struct PseudoLabeledSet {
  Eigen::MatrixXd features;  // n x d
  Eigen::MatrixXd labels;    // n x C, each row on the simplex
  std::vector<std::string> provenance;

  Eigen::Index size() const { return features.rows(); }
};

/// Ensemble prediction for every row of `x`; identical to vote matrix plus
/// aggregation applied example by example.
Eigen::MatrixXd ensemble_predict(const std::vector<Taglet>& taglets, const Eigen::MatrixXd& x);

PseudoLabeledSet pseudo_label_set(const std::vector<Taglet>& taglets,
                                  const Eigen::MatrixXd& unlabeled);

struct EndModel {
  std::vector<std::string> classes;
  LinearModel model;

  Eigen::MatrixXd predict_batch(const Eigen::MatrixXd& x) const { return model.predict_batch(x); }
};

/// Fresh model trained on pseudo labels followed by one-hot labeled rows.
EndModel train_end_model(const PseudoLabeledSet& pseudo, const LabeledData& labeled,
                         const std::vector<std::string>& classes, const TrainConfig& cfg);

double evaluate_accuracy(const EndModel& model, const LabeledData& test);

}  // namespace taglets
