#pragma once

#include <Eigen/Dense>

#include <filesystem>
#include <iosfwd>
#include <set>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "taglets/graph.hpp"

namespace taglets {

enum class EmbeddingKind { Word, Scads };

/// Term -> vector map of fixed dimension. Terms keep insertion order.
class EmbeddingStore {
 public:
  explicit EmbeddingStore(EmbeddingKind kind = EmbeddingKind::Word) : kind_(kind) {}

  void insert(const std::string& term, Eigen::VectorXd vec);

  bool contains(const std::string& term) const { return index_.count(term) != 0; }
  const Eigen::VectorXd* find(const std::string& term) const;
  const Eigen::VectorXd& at(const std::string& term) const;  // throws UnknownConcept

  Eigen::Index dim() const { return dim_; }
  std::size_t size() const { return terms_.size(); }
  bool empty() const { return terms_.empty(); }
  EmbeddingKind kind() const { return kind_; }
  const std::vector<std::string>& terms() const { return terms_; }
  const Eigen::VectorXd& vector(std::size_t i) const { return vectors_[i]; }

 private:
  EmbeddingKind kind_;
  Eigen::Index dim_ = 0;
  std::vector<std::string> terms_;
  std::vector<Eigen::VectorXd> vectors_;
  std::unordered_map<std::string, std::size_t> index_;
};

// TSV: term<TAB>v1<TAB>...<TAB>vm, dimension fixed by the first line.
EmbeddingStore read_embeddings_tsv(std::istream& in, EmbeddingKind kind = EmbeddingKind::Word,
                                   const std::string& source = "<stream>");
EmbeddingStore read_embeddings_tsv(const std::filesystem::path& path,
                                   EmbeddingKind kind = EmbeddingKind::Word);
void write_embeddings_tsv(std::ostream& out, const EmbeddingStore& store);
void write_embeddings_tsv(const std::filesystem::path& path, const EmbeddingStore& store);

enum class RetrofitMode {
  AsWritten,  // neighbours contribute their fixed word vectors: closed form per node
  Classical,  // neighbours contribute their retrofitted vectors: Jacobi iteration
};

RetrofitMode parse_retrofit_mode(std::string_view text);  // "as-written" | "classical"
std::string_view to_string(RetrofitMode mode);

struct RetrofitConfig {
  // Per-concept anchoring weight. Concepts not listed get 1 when a word
  // vector exists and 0 otherwise.
  std::unordered_map<std::string, double> alpha;
  RetrofitMode mode = RetrofitMode::AsWritten;
  int max_iterations = 1000;
  double tolerance = 1e-10;
};

/// Word vector for a concept: looked up by id, then display name, then aliases.
const Eigen::VectorXd* word_vector_for(const Concept& node, const EmbeddingStore& words);

/// Scads embeddings for every concept of the graph that can be anchored.
/// Neighbourhoods are undirected: each incident edge contributes its weight.
/// Concepts whose total weight is zero (no anchor, no usable neighbour) are
/// left out and reported on stderr.
EmbeddingStore retrofit(const ConceptGraph& graph, const EmbeddingStore& words,
                        const RetrofitConfig& cfg = {});

/// Exact vector when `term` is in the store, otherwise the mean over all
/// terms that share the longest (non-empty) common prefix with it.
Eigen::VectorXd approximation_embedding(const std::string& term, const EmbeddingStore& store);

/// Length in bytes of the common prefix, backed off to a UTF-8 boundary.
std::size_t common_prefix_length(std::string_view a, std::string_view b);

struct Related {
  std::string concept_id;
  double similarity = 0.0;

  bool operator==(const Related&) const = default;
};

/// Brute-force top-n by cosine similarity, descending, ties by ascending id.
std::vector<Related> top_n_related(const Eigen::VectorXd& query,
                                   const std::set<std::string>& candidates, std::size_t n,
                                   const EmbeddingStore& scads);

/// Resolves `query` through the scads store, falling back to an approximation
/// embedding for terms the store does not contain.
std::vector<Related> top_n_related(const std::string& query,
                                   const std::set<std::string>& candidates, std::size_t n,
                                   const EmbeddingStore& scads);

Eigen::VectorXd resolve_embedding(const std::string& term, const EmbeddingStore& scads);

}  // namespace taglets
