#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "taglets/dataset.hpp"
#include "taglets/embeddings.hpp"
#include "taglets/graph.hpp"

namespace taglets {

struct TargetClass {
  std::string name;
  std::string concept_id;
};

struct SelectionRequest {
  std::vector<TargetClass> targets;
  std::size_t n_related = 10;
  std::size_t per_concept = 100;
  PruneLevel prune = PruneLevel::None;
  std::uint64_t seed = 0;
};

/// One slot of the auxiliary label space: the `rank`-th concept related to
/// target class `target`.
struct AuxSlot {
  std::size_t target = 0;
  std::size_t rank = 0;
  std::string concept_id;
  double similarity = 0.0;
};

struct AuxiliarySelection {
  std::vector<TargetClass> targets;
  std::size_t n_related = 0;
  std::vector<std::vector<Related>> related;  // per target class, descending
  std::vector<AuxSlot> slots;                 // filled slots, ascending label
  LabeledData examples;                       // labels are auxiliary indices

  std::size_t num_classes() const { return targets.size(); }
  std::size_t num_aux_classes() const { return targets.size() * n_related; }
  const AuxSlot* slot(int aux_label) const;
};

AuxiliarySelection select_related_data(const ConceptGraph& graph, const EmbeddingStore& scads,
                                       const SelectionRequest& req);

/// Row-major index `class * N + rank` into [0, N*C).
int aux_label_of(const AuxiliarySelection& selection, std::size_t target_index, std::size_t rank);
int aux_label_of(const AuxiliarySelection& selection, const std::string& target_class,
                 std::size_t rank);

// JSON descriptor plus a feature CSV whose class column holds auxiliary indices.
std::string selection_to_json(const AuxiliarySelection& selection, const std::string& examples_path);
void save_selection(const std::filesystem::path& json_path, const AuxiliarySelection& selection);

}  // namespace taglets
