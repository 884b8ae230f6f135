#pragma once

#include <Eigen/Dense>

#include <filesystem>
#include <iostream>
#include <sstream>
#include <random>
#include <string>
#include <vector>

#include "taglets/embeddings.hpp"
#include "taglets/graph.hpp"
#include "taglets/rng.hpp"

namespace testing {

inline taglets::Concept node(const std::string& id) { return {id, id, {}}; }

inline taglets::FeatureTable table(const std::vector<std::string>& labels, Eigen::Index dim,
                                   double base = 0.0) {
  taglets::FeatureTable t;
  t.labels = labels;
  t.features.resize(static_cast<Eigen::Index>(labels.size()), dim);
  for (Eigen::Index i = 0; i < t.features.rows(); ++i) {
    for (Eigen::Index j = 0; j < dim; ++j) t.features(i, j) = base + static_cast<double>(i * dim + j);
  }
  return t;
}

// material -> plastic -> bag, material -> paper, animal -> dog; one example each.
inline taglets::ConceptGraph toy_tree() {
  taglets::ConceptGraph g;
  for (const char* id : {"material", "plastic", "bag", "paper", "animal", "dog"}) {
    g.upsert_concept(node(id));
  }
  g.upsert_edge({"plastic", "material", taglets::kIsA, 1.0});
  g.upsert_edge({"bag", "plastic", taglets::kIsA, 1.0});
  g.upsert_edge({"paper", "material", taglets::kIsA, 1.0});
  g.upsert_edge({"dog", "animal", taglets::kIsA, 1.0});
  std::vector<std::pair<std::string, std::string>> classes;
  std::vector<std::string> labels;
  for (const char* id : {"material", "plastic", "bag", "paper", "animal", "dog"}) {
    classes.emplace_back(id, id);
    labels.push_back(id);
  }
  g.install_dataset("toy", classes, table(labels, 2));
  return g;
}

struct RandomGraph {
  taglets::ConceptGraph graph;
  taglets::EmbeddingStore words;
};

// Random forest of is-a edges plus random related-to edges, random word
// vectors on a subset, and one dataset attaching examples to random nodes.
inline RandomGraph random_graph(std::uint64_t seed, int max_nodes = 30, int max_dim = 8,
                                bool with_examples = true) {
  taglets::Rng rng(seed);
  auto uni = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  std::normal_distribution<double> normal;
  RandomGraph out;
  const int n = uni(1, max_nodes);
  const int dim = uni(1, max_dim);
  std::vector<std::string> ids;
  for (int i = 0; i < n; ++i) {
    ids.push_back("n" + std::to_string(i));
    taglets::Concept c = node(ids.back());
    if (uni(0, 3) == 0) c.aliases.push_back("alias" + std::to_string(i));
    out.graph.upsert_concept(c);
  }
  for (int i = 1; i < n; ++i) {
    if (uni(0, 2) != 0) out.graph.upsert_edge({ids[i], ids[uni(0, i - 1)], taglets::kIsA, 1.0});
  }
  const int extra = uni(0, n);
  for (int e = 0; e < extra; ++e) {
    const double w = std::uniform_real_distribution<double>(0.1, 2.0)(rng);
    out.graph.upsert_edge({ids[uni(0, n - 1)], ids[uni(0, n - 1)], "related-to", w});
  }
  for (int i = 0; i < n; ++i) {
    if (uni(0, 3) == 0) continue;
    Eigen::VectorXd v(dim);
    for (int k = 0; k < dim; ++k) v(k) = normal(rng);
    out.words.insert(ids[static_cast<std::size_t>(i)], v);
  }
  if (with_examples) {
    std::vector<std::pair<std::string, std::string>> classes;
    std::vector<std::string> labels;
    for (int i = 0; i < n; ++i) {
      if (uni(0, 2) == 0) continue;
      classes.emplace_back("c" + std::to_string(i), ids[static_cast<std::size_t>(i)]);
      const int count = uni(1, 4);
      for (int k = 0; k < count; ++k) labels.push_back(classes.back().first);
    }
    if (!classes.empty()) {
      taglets::FeatureTable t;
      t.labels = labels;
      t.features.resize(static_cast<Eigen::Index>(labels.size()), dim);
      for (Eigen::Index i = 0; i < t.features.rows(); ++i) {
        for (int k = 0; k < dim; ++k) t.features(i, k) = normal(rng);
      }
      out.graph.install_dataset("ds", classes, t);
    }
  }
  return out;
}

// Swallows std::cerr for the lifetime of the object.
class QuietStderr {
 public:
  QuietStderr() : old_(std::cerr.rdbuf(sink_.rdbuf())) {}
  ~QuietStderr() { std::cerr.rdbuf(old_); }

 private:
  std::ostringstream sink_;
  std::streambuf* old_;
};

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    path_ = std::filesystem::temp_directory_path() /
            ("taglets_" + tag + "_" + std::to_string(std::random_device{}()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace testing
