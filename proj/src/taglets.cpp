#include "taglets/taglets.hpp"

#include <cmath>

#include "taglets/error.hpp"
#include "taglets/math.hpp"
#include "taglets/rng.hpp"

namespace taglets {

std::vector<std::string> class_names(const AuxiliarySelection& selection) {
  std::vector<std::string> out;
  out.reserve(selection.targets.size());
  for (const auto& t : selection.targets) out.push_back(t.name);
  return out;
}

namespace {

void require_labeled(const LabeledData& labeled, Eigen::Index num_classes) {
  if (labeled.empty()) throw Error(Errc::NoLabeledData, "module needs labeled examples");
  for (int y : labeled.labels) {
    if (y < 0 || y >= num_classes) {
      throw Error(Errc::ShapeError, "labeled example has class " + std::to_string(y) +
                                        " outside [0, " + std::to_string(num_classes) + ")");
    }
  }
}

void require_same_dim(const AuxiliarySelection& selection, Eigen::Index dim) {
  if (!selection.examples.empty() && selection.examples.dim() != dim) {
    throw Error(Errc::ShapeError, "auxiliary features have dimension " +
                                      std::to_string(selection.examples.dim()) +
                                      ", labeled data has " + std::to_string(dim));
  }
}

Eigen::MatrixXd gather_rows(const Eigen::MatrixXd& m, const std::vector<std::size_t>& order,
                            std::size_t start, std::size_t len) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(len), m.cols());
  for (std::size_t r = 0; r < len; ++r) {
    out.row(static_cast<Eigen::Index>(r)) = m.row(static_cast<Eigen::Index>(order[start + r]));
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------- transfer

LinearModel head_from_aux(const LinearModel& aux_model, const AuxiliarySelection& selection) {
  const auto classes = static_cast<Eigen::Index>(selection.num_classes());
  LinearModel head(classes, aux_model.dim());
  std::vector<int> filled(static_cast<std::size_t>(classes), 0);
  for (const auto& s : selection.slots) {
    const auto label = static_cast<Eigen::Index>(s.target * selection.n_related + s.rank);
    const auto c = static_cast<Eigen::Index>(s.target);
    head.weights.row(c) += aux_model.weights.row(label);
    head.bias(c) += aux_model.bias(label);
    ++filled[s.target];
  }
  for (Eigen::Index c = 0; c < classes; ++c) {
    if (filled[static_cast<std::size_t>(c)] > 0) {
      head.weights.row(c) /= filled[static_cast<std::size_t>(c)];
      head.bias(c) /= filled[static_cast<std::size_t>(c)];
    }
  }
  return head;
}

Taglet train_transfer_taglet(const AuxiliarySelection& selection, const LabeledData& labeled,
                             const TransferConfig& cfg) {
  const auto classes = static_cast<Eigen::Index>(selection.num_classes());
  require_labeled(labeled, classes);
  require_same_dim(selection, labeled.dim());

  LinearModel init(classes, labeled.dim());
  if (!selection.examples.empty()) {
    const auto aux_classes = static_cast<Eigen::Index>(selection.num_aux_classes());
    auto phase1 = train_supervised(LinearModel(aux_classes, labeled.dim()), selection.examples,
                                   cfg.aux);
    if (cfg.head_init == HeadInit::AuxMean) init = head_from_aux(phase1.model, selection);
  }
  auto phase2 = train_supervised(std::move(init), labeled, cfg.labeled);
  return Taglet{"transfer", class_names(selection), std::move(phase2.model)};
}

// --------------------------------------------------------------- multitask

LinearModel MultitaskModel::target_model() const {
  return LinearModel(target_w * shared, target_b);
}

MultitaskModel train_multitask(const AuxiliarySelection& selection, const LabeledData& labeled,
                               const MultitaskConfig& cfg) {
  if (!(cfg.aux_weight >= 0.0)) throw Error(Errc::InvalidWeight, "lambda must be >= 0");
  cfg.train.validate();
  const auto classes = static_cast<Eigen::Index>(selection.num_classes());
  require_labeled(labeled, classes);
  require_same_dim(selection, labeled.dim());

  const Eigen::Index d = labeled.dim();
  const Eigen::Index h = cfg.hidden_dim > 0 ? cfg.hidden_dim : d;
  const auto aux_classes = static_cast<Eigen::Index>(selection.num_aux_classes());

  MultitaskModel m;
  m.shared = Eigen::MatrixXd::Identity(h, d);
  m.target_w = Eigen::MatrixXd::Zero(classes, h);
  m.target_b = Eigen::VectorXd::Zero(classes);
  m.aux_w = Eigen::MatrixXd::Zero(aux_classes, h);
  m.aux_b = Eigen::VectorXd::Zero(aux_classes);

  const SoftLabeledData target = one_hot(labeled, classes);
  const bool use_aux = cfg.aux_weight > 0.0 && !selection.examples.empty();
  SoftLabeledData aux;
  if (use_aux) aux = one_hot(selection.examples, aux_classes);

  const MomentumSgd opt(cfg.train.learning_rate, cfg.train.momentum);
  Eigen::MatrixXd v_shared = Eigen::MatrixXd::Zero(h, d);
  Eigen::MatrixXd v_tw = Eigen::MatrixXd::Zero(classes, h);
  Eigen::VectorXd v_tb = Eigen::VectorXd::Zero(classes);
  Eigen::MatrixXd v_aw = Eigen::MatrixXd::Zero(aux_classes, h);
  Eigen::VectorXd v_ab = Eigen::VectorXd::Zero(aux_classes);

  // An epoch is one pass over the larger of the two sets; the smaller one is
  // cycled. Each set is shuffled from its own stream, so with the auxiliary
  // head disabled the target schedule is plain minibatch SGD.
  Rng target_rng(cfg.train.seed);
  Rng aux_rng(derive_seed(cfg.train.seed, "multitask/aux"));
  const auto n = static_cast<std::size_t>(target.size());
  const auto n_aux = static_cast<std::size_t>(aux.size());
  const auto batch = static_cast<std::size_t>(cfg.train.batch_size);
  const std::size_t target_batches = (n + batch - 1) / batch;
  const std::size_t steps = std::max(target_batches, use_aux ? (n_aux + batch - 1) / batch : 0);
  std::vector<std::size_t> order;
  std::vector<std::size_t> aux_order;
  std::size_t aux_pos = 0;

  for (int epoch = 0; epoch < cfg.train.epochs; ++epoch) {
    for (std::size_t step = 0; step < steps; ++step) {
      const std::size_t slot = step % target_batches;
      if (slot == 0) order = shuffled_indices(n, target_rng);
      const std::size_t start = slot * batch;
      const std::size_t len = std::min(batch, n - start);
      const Eigen::MatrixXd xb = gather_rows(target.features, order, start, len);
      const Eigen::MatrixXd pb = gather_rows(target.targets, order, start, len);

      const Eigen::MatrixXd hidden = xb * m.shared.transpose();
      Eigen::MatrixXd logits = hidden * m.target_w.transpose();
      logits.rowwise() += m.target_b.transpose();
      const Eigen::MatrixXd delta = (softmax_rows(logits) - pb) / static_cast<double>(len);

      const Eigen::MatrixXd g_tw = delta.transpose() * hidden;
      const Eigen::VectorXd g_tb = delta.colwise().sum().transpose();
      Eigen::MatrixXd g_shared = m.target_w.transpose() * delta.transpose() * xb;

      if (use_aux) {
        const std::size_t alen = std::min(batch, n_aux);
        Eigen::MatrixXd rb(static_cast<Eigen::Index>(alen), aux.features.cols());
        Eigen::MatrixXd qb(static_cast<Eigen::Index>(alen), aux.targets.cols());
        for (std::size_t r = 0; r < alen; ++r) {
          if (aux_pos == aux_order.size()) {
            aux_order = shuffled_indices(n_aux, aux_rng);
            aux_pos = 0;
          }
          const auto idx = static_cast<Eigen::Index>(aux_order[aux_pos++]);
          rb.row(static_cast<Eigen::Index>(r)) = aux.features.row(idx);
          qb.row(static_cast<Eigen::Index>(r)) = aux.targets.row(idx);
        }
        const Eigen::MatrixXd aux_hidden = rb * m.shared.transpose();
        Eigen::MatrixXd aux_logits = aux_hidden * m.aux_w.transpose();
        aux_logits.rowwise() += m.aux_b.transpose();
        const Eigen::MatrixXd aux_delta =
            cfg.aux_weight * (softmax_rows(aux_logits) - qb) / static_cast<double>(alen);

        const Eigen::MatrixXd g_aw = aux_delta.transpose() * aux_hidden;
        const Eigen::VectorXd g_ab = aux_delta.colwise().sum().transpose();
        g_shared += m.aux_w.transpose() * aux_delta.transpose() * rb;
        opt.step(m.aux_w, g_aw, v_aw);
        opt.step(m.aux_b, g_ab, v_ab);
      }
      opt.step(m.target_w, g_tw, v_tw);
      opt.step(m.target_b, g_tb, v_tb);
      opt.step(m.shared, g_shared, v_shared);
    }
  }
  return m;
}

Taglet train_multitask_taglet(const AuxiliarySelection& selection, const LabeledData& labeled,
                              const MultitaskConfig& cfg) {
  const auto m = train_multitask(selection, labeled, cfg);
  return Taglet{"multitask", class_names(selection), m.target_model()};
}

// ---------------------------------------------------------------- fixmatch

Eigen::VectorXd fixmatch_losses(const LinearModel& model, const Eigen::MatrixXd& weak,
                                const Eigen::MatrixXd& strong, double threshold) {
  if (weak.rows() != strong.rows()) throw Error(Errc::ShapeError, "weak/strong view count mismatch");
  const Eigen::MatrixXd qa = model.predict_batch(weak);
  Eigen::MatrixXd logits = strong * model.weights.transpose();
  logits.rowwise() += model.bias.transpose();

  Eigen::VectorXd out = Eigen::VectorXd::Zero(weak.rows());
  for (Eigen::Index i = 0; i < weak.rows(); ++i) {
    if (!(qa.row(i).maxCoeff() >= threshold)) continue;
    const Eigen::Index y = argmax(qa.row(i));
    const double top = logits.row(i).maxCoeff();
    const double lse = top + std::log((logits.row(i).array() - top).exp().sum());
    out(i) = lse - logits(i, y);
  }
  return out;
}

LinearModel fixmatch_refine(LinearModel model, const Eigen::MatrixXd& unlabeled,
                            const FixMatchConfig& cfg) {
  if (!(cfg.threshold > 0.0)) throw Error(Errc::InvalidThreshold, "tau must be > 0");
  if (unlabeled.rows() == 0) throw Error(Errc::NoUnlabeledData, "FixMatch needs unlabeled data");
  if (unlabeled.cols() != model.dim()) {
    throw Error(Errc::ShapeError, "unlabeled features do not match the model dimension");
  }
  cfg.unlabeled.validate();

  const Eigen::RowVectorXd mean = unlabeled.colwise().mean();
  const Eigen::RowVectorXd stddev =
      ((unlabeled.rowwise() - mean).array().square().colwise().sum() /
       static_cast<double>(unlabeled.rows()))
          .sqrt()
          .matrix();
  const Eigen::RowVectorXd weak_sigma = cfg.perturb.weak * stddev;
  const Eigen::RowVectorXd strong_sigma = cfg.perturb.strong * stddev;

  const MomentumSgd opt(cfg.unlabeled.learning_rate, cfg.unlabeled.momentum);
  Eigen::MatrixXd vel_w = Eigen::MatrixXd::Zero(model.weights.rows(), model.weights.cols());
  Eigen::VectorXd vel_b = Eigen::VectorXd::Zero(model.bias.size());
  Rng order_rng(cfg.unlabeled.seed);
  Rng noise_rng(cfg.perturb.seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  const auto n = static_cast<std::size_t>(unlabeled.rows());
  const auto batch = static_cast<std::size_t>(cfg.unlabeled.batch_size);
  const Eigen::Index classes = model.num_classes();
  for (int epoch = 0; epoch < cfg.unlabeled.epochs; ++epoch) {
    const auto order = shuffled_indices(n, order_rng);
    for (std::size_t start = 0; start < n; start += batch) {
      const std::size_t len = std::min(batch, n - start);
      const Eigen::MatrixXd base = gather_rows(unlabeled, order, start, len);
      Eigen::MatrixXd weak = base;
      Eigen::MatrixXd strong = base;
      for (Eigen::Index i = 0; i < weak.rows(); ++i) {
        for (Eigen::Index j = 0; j < weak.cols(); ++j) weak(i, j) += weak_sigma(j) * normal(noise_rng);
        for (Eigen::Index j = 0; j < strong.cols(); ++j) {
          strong(i, j) += strong_sigma(j) * normal(noise_rng);
        }
      }

      const Eigen::MatrixXd qa = model.predict_batch(weak);
      const Eigen::MatrixXd qb = model.predict_batch(strong);
      Eigen::MatrixXd delta = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(len), classes);
      for (Eigen::Index i = 0; i < qa.rows(); ++i) {
        if (!(qa.row(i).maxCoeff() >= cfg.threshold)) continue;
        delta.row(i) = qb.row(i);
        delta(i, argmax(qa.row(i))) -= 1.0;
      }
      delta /= static_cast<double>(len);
      const Eigen::MatrixXd g_w = delta.transpose() * strong;
      const Eigen::VectorXd g_b = delta.colwise().sum().transpose();
      opt.step(model.weights, g_w, vel_w);
      opt.step(model.bias, g_b, vel_b);
    }
  }
  return model;
}

Taglet train_fixmatch_taglet(const AuxiliarySelection& selection, const LabeledData& labeled,
                             const Eigen::MatrixXd& unlabeled, const FixMatchConfig& cfg) {
  if (!(cfg.threshold > 0.0)) throw Error(Errc::InvalidThreshold, "tau must be > 0");
  if (unlabeled.rows() == 0) throw Error(Errc::NoUnlabeledData, "FixMatch needs unlabeled data");
  if (unlabeled.cols() != labeled.dim()) {
    throw Error(Errc::ShapeError, "unlabeled and labeled feature dimensions differ");
  }
  auto pre = train_transfer_taglet(selection, labeled, cfg.pretrain);
  return Taglet{"fixmatch", class_names(selection),
                fixmatch_refine(std::move(pre.model), unlabeled, cfg)};
}

// --------------------------------------------------------------- zero-shot

Eigen::MatrixXd fit_projector(const AuxiliarySelection& selection, const EmbeddingStore& scads,
                              double ridge) {
  const auto& x = selection.examples.features;
  if (x.rows() == 0) {
    throw Error(Errc::NoTrainingData, "zero-shot projector needs selected auxiliary examples");
  }
  Eigen::MatrixXd z(x.rows(), scads.dim());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const AuxSlot* s = selection.slot(selection.examples.labels[static_cast<std::size_t>(i)]);
    if (s == nullptr) throw Error(Errc::IndexError, "auxiliary label without a slot");
    z.row(i) = scads.at(s->concept_id).transpose();
  }
  Eigen::MatrixXd gram = x.transpose() * x;
  gram.diagonal().array() += ridge;
  const Eigen::MatrixXd pt = gram.ldlt().solve(x.transpose() * z);  // d x m
  return pt.transpose();
}

Taglet build_zeroshot_taglet(const std::vector<TargetClass>& targets, const EmbeddingStore& scads,
                             const AuxiliarySelection& projector_source,
                             const ZeroShotConfig& cfg) {
  Eigen::MatrixXd class_embeddings(static_cast<Eigen::Index>(targets.size()), scads.dim());
  std::vector<std::string> names;
  for (std::size_t c = 0; c < targets.size(); ++c) {
    class_embeddings.row(static_cast<Eigen::Index>(c)) =
        resolve_embedding(targets[c].concept_id, scads).transpose();
    names.push_back(targets[c].name);
  }
  const Eigen::MatrixXd projector = fit_projector(projector_source, scads, cfg.ridge);
  LinearModel model(class_embeddings * projector,
                    Eigen::VectorXd::Zero(static_cast<Eigen::Index>(targets.size())));
  return Taglet{"zeroshot", std::move(names), std::move(model)};
}

}  // namespace taglets
