#include "taglets/selection.hpp"

#include <fstream>
#include <iostream>

#include <json.hpp>

#include "taglets/csv.hpp"
#include "taglets/error.hpp"
#include "taglets/rng.hpp"

namespace taglets {

const AuxSlot* AuxiliarySelection::slot(int aux_label) const {
  for (const auto& s : slots) {
    if (static_cast<int>(s.target * n_related + s.rank) == aux_label) return &s;
  }
  return nullptr;
}

AuxiliarySelection select_related_data(const ConceptGraph& graph, const EmbeddingStore& scads,
                                       const SelectionRequest& req) {
  if (req.targets.empty()) throw Error(Errc::InvalidSpec, "selection needs at least one target");
  if (req.n_related < 1 || req.per_concept < 1) {
    throw Error(Errc::InvalidSpec, "selection needs N >= 1 and K >= 1");
  }
  std::vector<std::string> target_ids;
  for (const auto& t : req.targets) {
    if (!graph.contains(t.concept_id)) {
      throw Error(Errc::UnknownConcept, "target concept '" + t.concept_id + "' is not in the graph");
    }
    target_ids.push_back(t.concept_id);
  }

  std::set<std::string> candidates = graph.prune_candidates(target_ids, req.prune);
  for (auto it = candidates.begin(); it != candidates.end();) {
    if (scads.contains(*it)) {
      ++it;
    } else {
      std::cerr << "warning: select: candidate '" << *it << "' has no scads embedding; skipped\n";
      it = candidates.erase(it);
    }
  }
  if (candidates.empty()) throw Error(Errc::EmptyCandidates, "no candidate concepts to select from");

  AuxiliarySelection sel;
  sel.targets = req.targets;
  sel.n_related = req.n_related;

  struct Block {
    int label;
    Eigen::MatrixXd rows;
  };
  std::vector<Block> blocks;
  Eigen::Index total = 0;
  for (std::size_t c = 0; c < req.targets.size(); ++c) {
    auto related = top_n_related(req.targets[c].concept_id, candidates, req.n_related, scads);
    for (std::size_t r = 0; r < related.size(); ++r) {
      const int label = static_cast<int>(c * req.n_related + r);
      sel.slots.push_back({c, r, related[r].concept_id, related[r].similarity});
      // Seeded per concept so a concept shared by two slots yields the same rows.
      Eigen::MatrixXd rows = graph.examples_for_concept(
          related[r].concept_id, req.per_concept, derive_seed(req.seed, related[r].concept_id));
      total += rows.rows();
      blocks.push_back({label, std::move(rows)});
    }
    sel.related.push_back(std::move(related));
  }

  sel.examples.features.resize(total, graph.feature_dim());
  sel.examples.labels.reserve(static_cast<std::size_t>(total));
  Eigen::Index at = 0;
  for (const auto& b : blocks) {
    sel.examples.features.middleRows(at, b.rows.rows()) = b.rows;
    sel.examples.labels.insert(sel.examples.labels.end(), static_cast<std::size_t>(b.rows.rows()),
                               b.label);
    at += b.rows.rows();
  }
  return sel;
}

int aux_label_of(const AuxiliarySelection& selection, std::size_t target_index, std::size_t rank) {
  if (target_index >= selection.targets.size()) {
    throw Error(Errc::IndexError, "target index " + std::to_string(target_index) + " out of range");
  }
  if (rank >= selection.n_related) {
    throw Error(Errc::IndexError, "rank " + std::to_string(rank) + " >= N = " +
                                      std::to_string(selection.n_related));
  }
  return static_cast<int>(target_index * selection.n_related + rank);
}

int aux_label_of(const AuxiliarySelection& selection, const std::string& target_class,
                 std::size_t rank) {
  for (std::size_t i = 0; i < selection.targets.size(); ++i) {
    if (selection.targets[i].name == target_class) return aux_label_of(selection, i, rank);
  }
  throw Error(Errc::IndexError, "unknown target class '" + target_class + "'");
}

std::string selection_to_json(const AuxiliarySelection& selection,
                              const std::string& examples_path) {
  nlohmann::ordered_json j;
  j["targets"] = nlohmann::ordered_json::array();
  for (const auto& t : selection.targets) {
    j["targets"].push_back({{"class", t.name}, {"concept", t.concept_id}});
  }
  j["n_related"] = selection.n_related;
  j["related"] = nlohmann::ordered_json::object();
  for (std::size_t c = 0; c < selection.targets.size(); ++c) {
    auto& list = j["related"][selection.targets[c].name] = nlohmann::ordered_json::array();
    for (const auto& r : selection.related[c]) {
      list.push_back({{"concept", r.concept_id}, {"sim", r.similarity}});
    }
  }
  j["aux_labels"] = nlohmann::ordered_json::object();
  for (const auto& s : selection.slots) {
    j["aux_labels"][std::to_string(s.target * selection.n_related + s.rank)] = {
        {"class", selection.targets[s.target].name}, {"rank", s.rank}, {"concept", s.concept_id}};
  }
  j["examples"] = examples_path;
  return j.dump(2);
}

void save_selection(const std::filesystem::path& json_path, const AuxiliarySelection& selection) {
  std::filesystem::path csv_path = json_path;
  csv_path.replace_extension(".csv");
  std::vector<std::string> labels;
  labels.reserve(selection.examples.labels.size());
  for (int l : selection.examples.labels) labels.push_back(std::to_string(l));
  write_feature_csv(csv_path, labels, selection.examples.features);

  std::ofstream out(json_path);
  if (!out) throw Error(Errc::FileNotFound, "cannot write " + json_path.string());
  out << selection_to_json(selection, csv_path.filename().string()) << '\n';
}

}  // namespace taglets
