#include "taglets/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <unordered_set>

#include <json.hpp>

#include "taglets/error.hpp"
#include "taglets/rng.hpp"

namespace taglets {

PruneLevel parse_prune_level(std::string_view text) {
  if (text == "none") return PruneLevel::None;
  if (text == "0") return PruneLevel::Level0;
  if (text == "1") return PruneLevel::Level1;
  throw Error(Errc::InvalidConfig, "prune level must be one of none, 0, 1 (got '" +
                                       std::string(text) + "')");
}

std::string_view to_string(PruneLevel level) {
  switch (level) {
    case PruneLevel::None: return "none";
    case PruneLevel::Level0: return "0";
    case PruneLevel::Level1: return "1";
  }
  return "none";
}

DatasetManifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::FileNotFound, "cannot open manifest " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::MalformedData, path.string() + ": " + e.what());
  }
  try {
    DatasetManifest m;
    m.name = j.at("name").get<std::string>();
    for (const auto& [cls, cid] : j.at("classes").items()) {
      m.classes.emplace_back(cls, cid.get<std::string>());
    }
    m.examples = j.at("examples").get<std::string>();
    if (m.examples.is_relative()) m.examples = path.parent_path() / m.examples;
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::MalformedData, path.string() + ": " + e.what());
  }
}

std::size_t ConceptGraph::index_of(const std::string& id) const {
  const auto it = index_.find(id);
  if (it == index_.end()) throw Error(Errc::UnknownConcept, "unknown concept '" + id + "'");
  return it->second;
}

void ConceptGraph::require_mutable() const {
  if (frozen_) throw Error(Errc::FrozenGraph, "graph is frozen");
}

const Concept& ConceptGraph::node(const std::string& id) const {
  return concepts_[index_of(id)];
}

std::size_t ConceptGraph::degree(const std::string& id) const {
  return incident_[index_of(id)].size();
}

const std::vector<std::size_t>& ConceptGraph::incident_edges(const std::string& id) const {
  return incident_[index_of(id)];
}

const std::vector<ConceptGraph::Attachment>& ConceptGraph::attachments(
    const std::string& id) const {
  return examples_[index_of(id)];
}

void ConceptGraph::upsert_concept(Concept node) {
  require_mutable();
  if (node.id.empty()) throw Error(Errc::InvalidConcept, "concept id must be non-empty");
  if (const auto it = index_.find(node.id); it != index_.end()) {
    concepts_[it->second].name = std::move(node.name);
    concepts_[it->second].aliases = std::move(node.aliases);
    return;
  }
  index_.emplace(node.id, concepts_.size());
  concepts_.push_back(std::move(node));
  incident_.emplace_back();
  examples_.emplace_back();
}

void ConceptGraph::upsert_edge(RelationEdge edge) {
  require_mutable();
  const std::size_t src = index_of(edge.src);
  const std::size_t dst = index_of(edge.dst);
  if (!(edge.weight >= 0.0) || !std::isfinite(edge.weight)) {
    throw Error(Errc::InvalidWeight, "edge weight must be finite and non-negative");
  }
  auto key = std::make_tuple(edge.src, edge.dst, edge.relation);
  if (const auto it = edge_index_.find(key); it != edge_index_.end()) {
    edges_[it->second].weight = edge.weight;
    return;
  }
  if (edge.relation == kIsA) {
    if (edge.src == edge.dst) {
      throw Error(Errc::InvalidHierarchy, "'" + edge.src + "' cannot be its own parent");
    }
    if (auto parent = parent_of(edge.src)) {
      throw Error(Errc::InvalidHierarchy, "'" + edge.src + "' already has parent '" + *parent +
                                              "'; the is-a hierarchy must be a forest");
    }
  }
  const std::size_t e = edges_.size();
  edge_index_.emplace(std::move(key), e);
  edges_.push_back(std::move(edge));
  incident_[src].push_back(e);
  if (dst != src) incident_[dst].push_back(e);
}

std::optional<std::string> ConceptGraph::parent_of(const std::string& id) const {
  for (std::size_t e : incident_[index_of(id)]) {
    const auto& edge = edges_[e];
    if (edge.relation == kIsA && edge.src == id) return edge.dst;
  }
  return std::nullopt;
}

std::vector<std::string> ConceptGraph::children_of(const std::string& id) const {
  std::vector<std::string> out;
  for (std::size_t e : incident_[index_of(id)]) {
    const auto& edge = edges_[e];
    if (edge.relation == kIsA && edge.dst == id) out.push_back(edge.src);
  }
  return out;
}

void ConceptGraph::install_dataset(const DatasetManifest& manifest) {
  const FeatureTable table = read_feature_csv(manifest.examples, true);
  install_dataset(manifest.name, manifest.classes, table);
}

void ConceptGraph::install_dataset(const std::string& name,
                                   const std::vector<std::pair<std::string, std::string>>& classes,
                                   const FeatureTable& table) {
  require_mutable();
  if (name.empty()) throw Error(Errc::MalformedData, "dataset name must be non-empty");
  for (const auto& d : datasets_) {
    if (d.name == name) throw Error(Errc::MalformedData, "dataset '" + name + "' already installed");
  }
  if (table.labels.size() != static_cast<std::size_t>(table.features.rows())) {
    throw Error(Errc::MalformedData, "dataset '" + name + "': label/row count mismatch");
  }
  std::unordered_map<std::string, std::size_t> class_to_node;
  for (const auto& [cls, concept_id] : classes) {
    if (class_to_node.count(cls)) {
      throw Error(Errc::MalformedData, "class '" + cls + "' mapped twice in '" + name + "'");
    }
    class_to_node.emplace(cls, index_of(concept_id));
  }
  if (table.features.rows() > 0) {
    if (dim_ != 0 && table.features.cols() != dim_) {
      throw Error(Errc::MalformedData, "dataset '" + name + "' has feature dimension " +
                                           std::to_string(table.features.cols()) +
                                           ", store uses " + std::to_string(dim_));
    }
    if (!table.features.allFinite()) {
      throw Error(Errc::MalformedData, "dataset '" + name + "' contains non-finite features");
    }
  }
  std::vector<std::size_t> nodes;
  nodes.reserve(table.labels.size());
  for (const auto& label : table.labels) {
    const auto it = class_to_node.find(label);
    if (it == class_to_node.end()) {
      throw Error(Errc::UnknownConcept, "class '" + label + "' of dataset '" + name +
                                            "' is not mapped to a concept");
    }
    nodes.push_back(it->second);
  }

  if (table.features.rows() > 0) dim_ = table.features.cols();
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    examples_[nodes[i]].push_back(
        Attachment{name, table.features.row(static_cast<Eigen::Index>(i)).transpose()});
  }
  datasets_.push_back(InstalledDataset{name, classes, nodes.size()});
}

void ConceptGraph::attach_example(const std::string& dataset, const std::string& concept_id,
                                  Eigen::VectorXd features) {
  require_mutable();
  const std::size_t node = index_of(concept_id);
  auto it = std::find_if(datasets_.begin(), datasets_.end(),
                         [&](const InstalledDataset& d) { return d.name == dataset; });
  if (it == datasets_.end()) {
    throw Error(Errc::MalformedData, "example refers to unknown dataset '" + dataset + "'");
  }
  if (dim_ != 0 && features.size() != dim_) {
    throw Error(Errc::MalformedData, "example dimension mismatch");
  }
  if (!features.allFinite()) throw Error(Errc::MalformedData, "non-finite example features");
  dim_ = features.size();
  examples_[node].push_back(Attachment{dataset, std::move(features)});
  ++it->example_count;
}

void ConceptGraph::remove_dataset(const std::string& name) {
  require_mutable();
  auto it = std::find_if(datasets_.begin(), datasets_.end(),
                         [&](const InstalledDataset& d) { return d.name == name; });
  if (it == datasets_.end()) {
    throw Error(Errc::MalformedData, "dataset '" + name + "' is not installed");
  }
  datasets_.erase(it);
  bool any = false;
  for (auto& list : examples_) {
    std::erase_if(list, [&](const Attachment& a) { return a.dataset == name; });
    any = any || !list.empty();
  }
  if (!any) dim_ = 0;
}

std::size_t ConceptGraph::example_count(const std::string& id) const {
  return examples_[index_of(id)].size();
}

Eigen::MatrixXd ConceptGraph::examples_for_concept(const std::string& id, std::size_t limit,
                                                   std::uint64_t seed) const {
  const auto& list = examples_[index_of(id)];
  if (limit == 0) throw Error(Errc::IndexError, "example limit must be positive");
  const auto picks = sample_without_replacement(list.size(), limit, seed);
  Eigen::MatrixXd out(static_cast<Eigen::Index>(picks.size()), dim_);
  for (std::size_t r = 0; r < picks.size(); ++r) {
    out.row(static_cast<Eigen::Index>(r)) = list[picks[r]].features.transpose();
  }
  return out;
}

void ConceptGraph::check_hierarchy() const {
  // Each node has at most one parent, so following parents from any node
  // either terminates at a root or revisits a node on the current walk.
  std::vector<int> state(concepts_.size(), 0);  // 0 unseen, 1 on walk, 2 done
  for (std::size_t start = 0; start < concepts_.size(); ++start) {
    std::vector<std::size_t> walk;
    std::optional<std::size_t> cur = start;
    while (cur && state[*cur] == 0) {
      state[*cur] = 1;
      walk.push_back(*cur);
      const auto parent = parent_of(concepts_[*cur].id);
      cur = parent ? std::optional<std::size_t>(index_.at(*parent)) : std::nullopt;
    }
    if (cur && state[*cur] == 1) {
      throw Error(Errc::InvalidHierarchy,
                  "is-a cycle through '" + concepts_[*cur].id + "'");
    }
    for (std::size_t n : walk) state[n] = 2;
  }
}

std::set<std::string> ConceptGraph::prune_candidates(const std::vector<std::string>& targets,
                                                     PruneLevel level) const {
  for (const auto& t : targets) index_of(t);
  check_hierarchy();

  std::vector<bool> removed(concepts_.size(), false);
  auto remove_subtree = [&](const std::string& root) {
    std::vector<std::string> stack{root};
    while (!stack.empty()) {
      const std::string node = std::move(stack.back());
      stack.pop_back();
      const std::size_t i = index_.at(node);
      if (removed[i]) continue;
      removed[i] = true;
      for (auto& child : children_of(node)) stack.push_back(std::move(child));
    }
  };

  if (level != PruneLevel::None) {
    for (const auto& t : targets) {
      remove_subtree(t);
      if (level == PruneLevel::Level1) {
        if (auto parent = parent_of(t)) remove_subtree(*parent);
      }
    }
  }

  std::set<std::string> out;
  for (std::size_t i = 0; i < concepts_.size(); ++i) {
    if (!removed[i] && !examples_[i].empty()) out.insert(concepts_[i].id);
  }
  return out;
}

}  // namespace taglets
