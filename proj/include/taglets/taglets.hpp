#pragma once

// The four training modules. Each one returns a Taglet: a linear softmax
// classifier over the target classes.

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

#include "taglets/dataset.hpp"
#include "taglets/embeddings.hpp"
#include "taglets/linear_model.hpp"
#include "taglets/selection.hpp"
#include "taglets/training.hpp"

namespace taglets {

struct Taglet {
  std::string name;
  std::vector<std::string> classes;
  LinearModel model;

  Eigen::Index num_classes() const { return model.num_classes(); }
  Eigen::VectorXd predict(const Eigen::VectorXd& x) const { return model.predict(x); }
  Eigen::MatrixXd predict_batch(const Eigen::MatrixXd& x) const { return model.predict_batch(x); }
};

std::vector<std::string> class_names(const AuxiliarySelection& selection);

// ---------------------------------------------------------------- transfer

enum class HeadInit { AuxMean, Zero };

struct TransferConfig {
  TrainConfig aux;      // phase 1, N*C-way head on the selected auxiliary data
  TrainConfig labeled;  // phase 2, C-way head on the labeled data
  HeadInit head_init = HeadInit::AuxMean;
};

/// Phase-2 head seeded from a phase-1 model: row c (and bias c) is the mean
/// of the filled auxiliary slots of target class c; classes with no filled
/// slot start at zero.
LinearModel head_from_aux(const LinearModel& aux_model, const AuxiliarySelection& selection);

Taglet train_transfer_taglet(const AuxiliarySelection& selection, const LabeledData& labeled,
                             const TransferConfig& cfg);

// --------------------------------------------------------------- multitask

struct MultitaskConfig {
  TrainConfig train;
  double aux_weight = 1.0;  // lambda
  Eigen::Index hidden_dim = 0;  // 0: same as the feature dimension
};

/// Shared linear map with a target head and an auxiliary head.
struct MultitaskModel {
  Eigen::MatrixXd shared;       // hidden x d
  Eigen::MatrixXd target_w;     // C x hidden
  Eigen::VectorXd target_b;
  Eigen::MatrixXd aux_w;        // N*C x hidden
  Eigen::VectorXd aux_b;

  /// The target head composed with the shared map.
  LinearModel target_model() const;
};

MultitaskModel train_multitask(const AuxiliarySelection& selection, const LabeledData& labeled,
                               const MultitaskConfig& cfg);
Taglet train_multitask_taglet(const AuxiliarySelection& selection, const LabeledData& labeled,
                              const MultitaskConfig& cfg);

// ---------------------------------------------------------------- fixmatch

struct PerturbSpec {
  double weak = 0.01;   // noise std as a multiple of the per-dimension std of U
  double strong = 0.1;
  std::uint64_t seed = 0;
};

struct FixMatchConfig {
  TransferConfig pretrain;
  TrainConfig unlabeled;
  double threshold = 0.95;  // tau
  PerturbSpec perturb;
};

/// Per-example unlabeled loss: hard cross-entropy between the pseudo label of
/// the weak view and the prediction on the strong view, or exactly zero when
/// the weak view's confidence is below `threshold`.
Eigen::VectorXd fixmatch_losses(const LinearModel& model, const Eigen::MatrixXd& weak,
                                const Eigen::MatrixXd& strong, double threshold);

/// Runs only the unlabeled phase starting from `init`.
LinearModel fixmatch_refine(LinearModel init, const Eigen::MatrixXd& unlabeled,
                            const FixMatchConfig& cfg);

Taglet train_fixmatch_taglet(const AuxiliarySelection& selection, const LabeledData& labeled,
                             const Eigen::MatrixXd& unlabeled, const FixMatchConfig& cfg);

// --------------------------------------------------------------- zero-shot

struct ZeroShotConfig {
  double ridge = 1e-6;
};

/// Ridge least-squares map from feature space to embedding space, fitted on
/// the selected auxiliary examples against their source concept embeddings.
/// Returned as an m x d matrix.
Eigen::MatrixXd fit_projector(const AuxiliarySelection& selection, const EmbeddingStore& scads,
                              double ridge);

Taglet build_zeroshot_taglet(const std::vector<TargetClass>& targets, const EmbeddingStore& scads,
                             const AuxiliarySelection& projector_source,
                             const ZeroShotConfig& cfg = {});

}  // namespace taglets
