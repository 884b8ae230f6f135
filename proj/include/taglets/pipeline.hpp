#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "taglets/distill.hpp"
#include "taglets/embeddings.hpp"
#include "taglets/graph.hpp"
#include "taglets/selection.hpp"
#include "taglets/taglets.hpp"

namespace taglets {

enum class Module { Transfer, Multitask, FixMatch, ZeroShot };

std::string_view to_string(Module m);
Module parse_module(std::string_view text);
std::vector<Module> parse_modules(std::string_view comma_list);

struct PipelineConfig {
  std::uint64_t seed = 0;

  std::filesystem::path graph;
  std::filesystem::path word_embeddings;
  std::vector<std::filesystem::path> manifests;
  std::filesystem::path labeled;
  std::filesystem::path unlabeled;
  std::filesystem::path test;
  std::optional<std::filesystem::path> output_dir;

  std::vector<TargetClass> targets;
  std::size_t n_related = 10;
  std::size_t per_concept = 100;
  PruneLevel prune = PruneLevel::None;
  double aux_weight = 1.0;  // lambda
  double threshold = 0.95;  // tau
  RetrofitMode retrofit_mode = RetrofitMode::AsWritten;
  HeadInit head_init = HeadInit::AuxMean;
  Eigen::Index hidden_dim = 0;
  PerturbSpec perturb;
  double ridge = 1e-6;

  TrainConfig train_aux{0.003, 0.9, 128, 30, 0};
  TrainConfig train_labeled{0.003, 0.9, 128, 20, 0};
  TrainConfig train_multitask{0.003, 0.9, 128, 20, 0};
  TrainConfig train_fixmatch{0.003, 0.9, 128, 20, 0};
  TrainConfig train_end{0.003, 0.9, 128, 50, 0};

  std::vector<Module> modules{Module::Transfer, Module::Multitask, Module::FixMatch,
                              Module::ZeroShot};
  bool report_timings = false;

  void validate() const;
};

/// Parses a JSON config; unknown keys are rejected. Relative paths are
/// resolved against `base_dir`.
PipelineConfig parse_config(const std::string& json_text, const std::filesystem::path& base_dir);
PipelineConfig load_config(const std::filesystem::path& path);
std::string config_to_json(const PipelineConfig& cfg);

struct PipelineInputs {
  ConceptGraph graph;  // with every manifest installed
  EmbeddingStore words;
  LabeledData labeled;
  Eigen::MatrixXd unlabeled;
  LabeledData test;
};

PipelineInputs load_inputs(const PipelineConfig& cfg);

struct RunReport {
  std::string config_json;
  std::vector<std::pair<std::string, std::vector<Related>>> selection;
  std::size_t selected_examples = 0;
  std::vector<std::pair<std::string, double>> taglet_accuracy;
  double ensemble_accuracy = 0.0;
  double end_model_accuracy = 0.0;
  std::optional<double> baseline_accuracy;  // supervised on the labeled data alone
  std::vector<std::pair<std::string, double>> timings_ms;
  bool include_timings = false;

  double mean_taglet_accuracy() const;
  std::string to_json() const;
};

struct PipelineResult {
  RunReport report;
  AuxiliarySelection selection;
  std::vector<Taglet> taglets;
  PseudoLabeledSet pseudo;
  EndModel end_model;
};

/// In-memory run over already-loaded inputs. Errors carry the failing stage.
PipelineResult run_pipeline(const PipelineInputs& inputs, const PipelineConfig& cfg);

/// Loads every input named by the config, runs, and writes artifacts when
/// cfg.output_dir is set.
PipelineResult run_pipeline(const PipelineConfig& cfg);

/// Labeled-only reference: a fresh model trained on the labeled data with the
/// labeled-phase settings.
double supervised_baseline_accuracy(const PipelineInputs& inputs, const PipelineConfig& cfg);

}  // namespace taglets
