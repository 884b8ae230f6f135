#pragma once

// Newline-delimited JSON persistence for the concept graph.
//
// Line types:
//   {"type":"concept","id":...,"name":...,"aliases":[...]}
//   {"type":"edge","src":...,"dst":...,"relation":...,"weight":...}
//   {"type":"dataset","name":...,"classes":{class:concept_id,...}}
//   {"type":"example","dataset":...,"concept":...,"features":[...]}
//   {"type":"embedding","term":...,"vector":[...]}          (store files only)
//
// A missing edge weight reads as 1.0.

#include <filesystem>
#include <iosfwd>
#include <optional>

#include "taglets/embeddings.hpp"
#include "taglets/graph.hpp"

namespace taglets {

/// A frozen graph together with its scads embeddings.
struct ScadsStore {
  ConceptGraph graph;
  EmbeddingStore scads{EmbeddingKind::Scads};
};

void save_graph(std::ostream& out, const ConceptGraph& graph);
void save_graph(const std::filesystem::path& path, const ConceptGraph& graph);

ConceptGraph load_graph(std::istream& in, const std::string& source = "<stream>");
ConceptGraph load_graph(const std::filesystem::path& path);

void save_store(const std::filesystem::path& path, const ScadsStore& store);
// Loaded stores are frozen unless `freeze` is false (used to install or
// remove datasets in place).
ScadsStore load_store(const std::filesystem::path& path, bool freeze = true);
ScadsStore load_store(std::istream& in, const std::string& source = "<stream>",
                      bool freeze = true);

}  // namespace taglets
