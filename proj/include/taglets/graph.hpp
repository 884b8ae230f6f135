#pragma once

// Concept graph with attached auxiliary examples.
//
// Concepts and edges keep insertion order, which is also the on-disk order.
// Edges are keyed by (src, dst, relation); the `is-a` relation (src is-a dst)
// defines the hierarchy used for pruning and must form a forest.

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <unordered_map>
#include <utility>
#include <vector>

#include "taglets/csv.hpp"

namespace taglets {

inline constexpr const char* kIsA = "is-a";

struct Concept {
  std::string id;
  std::string name;
  std::vector<std::string> aliases;

  bool operator==(const Concept&) const = default;
};

struct RelationEdge {
  std::string src;
  std::string dst;
  std::string relation;
  double weight = 1.0;

  bool operator==(const RelationEdge&) const = default;
};

struct DatasetManifest {
  std::string name;
  std::vector<std::pair<std::string, std::string>> classes;  // class name -> concept id
  std::filesystem::path examples;
};

DatasetManifest read_manifest(const std::filesystem::path& path);

enum class PruneLevel { None, Level0, Level1 };

PruneLevel parse_prune_level(std::string_view text);  // "none", "0", "1"
std::string_view to_string(PruneLevel level);

class ConceptGraph {
 public:
  struct InstalledDataset {
    std::string name;
    std::vector<std::pair<std::string, std::string>> classes;
    std::size_t example_count = 0;
  };

  void upsert_concept(Concept node);
  void upsert_edge(RelationEdge edge);

  void install_dataset(const DatasetManifest& manifest);
  void install_dataset(const std::string& name,
                       const std::vector<std::pair<std::string, std::string>>& classes,
                       const FeatureTable& table);
  // Adds one example to a concept on behalf of an installed dataset. Used by
  // the loader; install_dataset is the public way in.
  void attach_example(const std::string& dataset, const std::string& concept_id,
                      Eigen::VectorXd features);
  void remove_dataset(const std::string& name);

  /// Up to `limit` examples of a concept, one per row. When more are
  /// available a seeded uniform sample is drawn; rows keep insertion order.
  Eigen::MatrixXd examples_for_concept(const std::string& id, std::size_t limit,
                                       std::uint64_t seed = 0) const;
  std::size_t example_count(const std::string& id) const;

  std::set<std::string> prune_candidates(const std::vector<std::string>& targets,
                                         PruneLevel level) const;

  bool contains(const std::string& id) const { return index_.count(id) != 0; }
  const Concept& node(const std::string& id) const;
  std::size_t degree(const std::string& id) const;
  std::optional<std::string> parent_of(const std::string& id) const;
  std::vector<std::string> children_of(const std::string& id) const;

  /// Indices into edges() of all edges touching the concept, in edge order.
  const std::vector<std::size_t>& incident_edges(const std::string& id) const;

  const std::vector<Concept>& concepts() const { return concepts_; }
  const std::vector<RelationEdge>& edges() const { return edges_; }
  const std::vector<InstalledDataset>& datasets() const { return datasets_; }
  Eigen::Index feature_dim() const { return dim_; }

  struct Attachment {
    std::string dataset;
    Eigen::VectorXd features;
  };
  const std::vector<Attachment>& attachments(const std::string& id) const;

  void freeze() { frozen_ = true; }
  bool frozen() const { return frozen_; }

 private:
  std::size_t index_of(const std::string& id) const;
  void require_mutable() const;
  void check_hierarchy() const;

  std::vector<Concept> concepts_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<RelationEdge> edges_;
  std::map<std::tuple<std::string, std::string, std::string>, std::size_t> edge_index_;
  std::vector<std::vector<std::size_t>> incident_;
  std::vector<std::vector<Attachment>> examples_;
  std::vector<InstalledDataset> datasets_;
  Eigen::Index dim_ = 0;
  bool frozen_ = false;
};

}  // namespace taglets
