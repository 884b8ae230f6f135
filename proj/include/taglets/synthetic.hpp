#pragma once

// Desk-scale benchmark generator: Gaussian target clusters plus auxiliary
// concepts whose clusters are pulled toward the target clusters by a
// relatedness knob rho.
//
// Concept layout per target class c:
//   group_c                        hierarchy parent of c, no word vector
//   class_c       is-a group_c     the target concept
//   sub_c_j       is-a class_c     auxiliary, half of the per-class concepts
//   sib_c_j       is-a group_c     auxiliary, the other half
// plus distractor concepts misc_j under a shared `misc` root. Every
// auxiliary concept also has a `related-to` edge to its target concept.

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "taglets/csv.hpp"
#include "taglets/dataset.hpp"
#include "taglets/embeddings.hpp"
#include "taglets/graph.hpp"
#include "taglets/selection.hpp"

namespace taglets {

struct SyntheticSpec {
  std::uint64_t seed = 0;
  int num_classes = 5;
  int dim = 16;
  int shots = 1;
  int unlabeled = 500;
  double relatedness = 1.0;  // rho in [0, 1]

  int aux_per_class = 10;
  int distractors = 20;
  int examples_per_concept = 100;
  int test_per_class = 50;
  double class_separation = 0.5;  // scale of cluster means
  double noise = 1.0;             // within-cluster std
  double embedding_noise = 0.3;   // spread of auxiliary word vectors around their target

  void validate() const;
};

struct SyntheticDataset {
  DatasetManifest manifest;  // examples path is relative ("<name>.csv")
  FeatureTable table;
};

struct SyntheticTask {
  ConceptGraph graph;  // concepts and edges only; datasets are in `datasets`
  EmbeddingStore words;
  std::vector<SyntheticDataset> datasets;
  std::vector<TargetClass> targets;
  LabeledData labeled;
  Eigen::MatrixXd unlabeled;
  LabeledData test;
};

SyntheticTask generate_synthetic_task(const SyntheticSpec& spec);

/// Installs every generated dataset into a copy of the task graph.
ConceptGraph graph_with_datasets(const SyntheticTask& task);

/// Writes graph.jsonl, words.tsv, one manifest + CSV per dataset, labeled.csv,
/// unlabeled.csv, test.csv and a ready-to-run config.json into `dir`.
void write_synthetic_task(const std::filesystem::path& dir, const SyntheticTask& task,
                          std::uint64_t seed);

}  // namespace taglets
