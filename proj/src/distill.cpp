#include "taglets/distill.hpp"

#include "taglets/error.hpp"

namespace taglets {

namespace {

void check_taglets(const std::vector<Taglet>& taglets) {
  if (taglets.empty()) throw Error(Errc::NoTaglets, "ensemble needs at least one taglet");
  const Eigen::Index c = taglets.front().num_classes();
  for (const auto& t : taglets) {
    if (t.num_classes() != c) {
      throw Error(Errc::ShapeError, "taglet '" + t.name + "' predicts " +
                                        std::to_string(t.num_classes()) + " classes, expected " +
                                        std::to_string(c));
    }
  }
}

}  // namespace

Eigen::MatrixXd build_vote_matrix(const std::vector<Taglet>& taglets, const Eigen::VectorXd& x) {
  check_taglets(taglets);
  Eigen::MatrixXd votes(static_cast<Eigen::Index>(taglets.size()), taglets.front().num_classes());
  for (std::size_t t = 0; t < taglets.size(); ++t) {
    votes.row(static_cast<Eigen::Index>(t)) = taglets[t].predict(x).transpose();
  }
  return votes;
}

Eigen::VectorXd aggregate_votes(const Eigen::MatrixXd& votes) {
  if (votes.rows() == 0) throw Error(Errc::NoTaglets, "empty vote matrix");
  Eigen::VectorXd sum = votes.row(0).transpose();
  for (Eigen::Index t = 1; t < votes.rows(); ++t) sum += votes.row(t).transpose();
  return sum / static_cast<double>(votes.rows());
}

Eigen::MatrixXd ensemble_predict(const std::vector<Taglet>& taglets, const Eigen::MatrixXd& x) {
  check_taglets(taglets);
  // Same summation order as aggregate_votes, one example per row.
  Eigen::MatrixXd sum = taglets.front().predict_batch(x);
  for (std::size_t t = 1; t < taglets.size(); ++t) sum += taglets[t].predict_batch(x);
  return sum / static_cast<double>(taglets.size());
}

PseudoLabeledSet pseudo_label_set(const std::vector<Taglet>& taglets,
                                  const Eigen::MatrixXd& unlabeled) {
  check_taglets(taglets);
  if (unlabeled.rows() == 0) throw Error(Errc::NoUnlabeledData, "nothing to pseudo-label");
  PseudoLabeledSet out;
  out.features = unlabeled;
  out.labels = ensemble_predict(taglets, unlabeled);
  for (const auto& t : taglets) out.provenance.push_back(t.name);
  return out;
}

EndModel train_end_model(const PseudoLabeledSet& pseudo, const LabeledData& labeled,
                         const std::vector<std::string>& classes, const TrainConfig& cfg) {
  if (pseudo.size() == 0 && labeled.empty()) {
    throw Error(Errc::NoTrainingData, "end model needs pseudo-labeled or labeled data");
  }
  const auto num_classes = static_cast<Eigen::Index>(classes.size());
  if (pseudo.size() > 0 && pseudo.labels.cols() != num_classes) {
    throw Error(Errc::ShapeError, "pseudo labels do not match the class count");
  }
  if (pseudo.size() > 0 && !labeled.empty() && pseudo.features.cols() != labeled.dim()) {
    throw Error(Errc::ShapeError, "pseudo-labeled and labeled feature dimensions differ");
  }
  const SoftLabeledData soft_pseudo{pseudo.features, pseudo.labels};
  const SoftLabeledData data =
      labeled.empty() ? soft_pseudo : concat(soft_pseudo, one_hot(labeled, num_classes));
  auto result = train_supervised(LinearModel(num_classes, data.features.cols()), data, cfg);
  return EndModel{classes, std::move(result.model)};
}

double evaluate_accuracy(const EndModel& model, const LabeledData& test) {
  return evaluate_accuracy(model.model, test);
}

}  // namespace taglets
