#include "taglets/embeddings.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <numeric>

#include "taglets/csv.hpp"
#include "taglets/error.hpp"
#include "taglets/math.hpp"

namespace taglets {

void EmbeddingStore::insert(const std::string& term, Eigen::VectorXd vec) {
  if (term.empty()) throw Error(Errc::MalformedData, "embedding term must be non-empty");
  if (vec.size() == 0) throw Error(Errc::MalformedData, "embedding for '" + term + "' is empty");
  if (dim_ != 0 && vec.size() != dim_) {
    throw Error(Errc::MalformedData, "embedding for '" + term + "' has dimension " +
                                         std::to_string(vec.size()) + ", store uses " +
                                         std::to_string(dim_));
  }
  if (!vec.allFinite()) {
    throw Error(Errc::MalformedData, "embedding for '" + term + "' has non-finite entries");
  }
  dim_ = vec.size();
  if (const auto it = index_.find(term); it != index_.end()) {
    vectors_[it->second] = std::move(vec);
    return;
  }
  index_.emplace(term, terms_.size());
  terms_.push_back(term);
  vectors_.push_back(std::move(vec));
}

const Eigen::VectorXd* EmbeddingStore::find(const std::string& term) const {
  const auto it = index_.find(term);
  return it == index_.end() ? nullptr : &vectors_[it->second];
}

const Eigen::VectorXd& EmbeddingStore::at(const std::string& term) const {
  if (const auto* v = find(term)) return *v;
  throw Error(Errc::UnknownConcept, "no embedding for '" + term + "'");
}

EmbeddingStore read_embeddings_tsv(std::istream& in, EmbeddingKind kind, const std::string& source) {
  EmbeddingStore store(kind);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split(line, '\t');
    const std::string where = source + ":" + std::to_string(lineno) + ": ";
    if (fields.size() < 2) throw Error(Errc::MalformedData, where + "expected term and values");
    Eigen::VectorXd v(static_cast<Eigen::Index>(fields.size() - 1));
    try {
      for (std::size_t j = 1; j < fields.size(); ++j) {
        v(static_cast<Eigen::Index>(j - 1)) = parse_double(fields[j]);
      }
      store.insert(std::string(fields[0]), std::move(v));
    } catch (const Error& e) {
      throw Error(Errc::MalformedData, where + e.what());
    }
  }
  return store;
}

EmbeddingStore read_embeddings_tsv(const std::filesystem::path& path, EmbeddingKind kind) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::FileNotFound, "cannot open " + path.string());
  return read_embeddings_tsv(in, kind, path.string());
}

void write_embeddings_tsv(std::ostream& out, const EmbeddingStore& store) {
  for (std::size_t i = 0; i < store.size(); ++i) {
    out << store.terms()[i];
    const auto& v = store.vector(i);
    for (Eigen::Index j = 0; j < v.size(); ++j) out << '\t' << format_double(v(j));
    out << '\n';
  }
}

void write_embeddings_tsv(const std::filesystem::path& path, const EmbeddingStore& store) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::FileNotFound, "cannot write " + path.string());
  write_embeddings_tsv(out, store);
}

RetrofitMode parse_retrofit_mode(std::string_view text) {
  if (text == "as-written") return RetrofitMode::AsWritten;
  if (text == "classical") return RetrofitMode::Classical;
  throw Error(Errc::InvalidConfig, "retrofit mode must be as-written or classical");
}

std::string_view to_string(RetrofitMode mode) {
  return mode == RetrofitMode::AsWritten ? "as-written" : "classical";
}

const Eigen::VectorXd* word_vector_for(const Concept& node, const EmbeddingStore& words) {
  if (const auto* v = words.find(node.id)) return v;
  if (!node.name.empty()) {
    if (const auto* v = words.find(node.name)) return v;
  }
  for (const auto& alias : node.aliases) {
    if (const auto* v = words.find(alias)) return v;
  }
  return nullptr;
}

namespace {

struct Neighbor {
  std::size_t node;
  double weight;
};

}  // namespace

EmbeddingStore retrofit(const ConceptGraph& graph, const EmbeddingStore& words,
                        const RetrofitConfig& cfg) {
  if (!(cfg.tolerance > 0.0)) throw Error(Errc::InvalidConfig, "retrofit tolerance must be > 0");
  if (cfg.max_iterations < 1) throw Error(Errc::InvalidConfig, "retrofit needs >= 1 iteration");

  const auto& concepts = graph.concepts();
  const std::size_t n = concepts.size();
  const Eigen::Index m = words.dim();

  std::unordered_map<std::string, std::size_t> node_of;
  for (std::size_t i = 0; i < n; ++i) node_of.emplace(concepts[i].id, i);

  std::vector<const Eigen::VectorXd*> word(n, nullptr);
  std::vector<double> alpha(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    word[i] = word_vector_for(concepts[i], words);
    const auto it = cfg.alpha.find(concepts[i].id);
    alpha[i] = it != cfg.alpha.end() ? it->second : (word[i] ? 1.0 : 0.0);
    if (!(alpha[i] >= 0.0)) {
      throw Error(Errc::InvalidWeight, "alpha for '" + concepts[i].id + "' must be >= 0");
    }
    if (alpha[i] > 0.0 && word[i] == nullptr) {
      throw Error(Errc::MissingWordVector,
                  "concept '" + concepts[i].id + "' has alpha > 0 but no word vector");
    }
  }

  // Undirected neighbourhoods; self-loops carry no information.
  std::vector<std::vector<Neighbor>> nbrs(n);
  for (const auto& e : graph.edges()) {
    const std::size_t a = node_of.at(e.src);
    const std::size_t b = node_of.at(e.dst);
    if (a == b) continue;
    nbrs[a].push_back({b, e.weight});
    nbrs[b].push_back({a, e.weight});
  }

  std::vector<Eigen::VectorXd> out(n);
  std::vector<bool> active(n, false);

  if (cfg.mode == RetrofitMode::AsWritten) {
    // Each node's objective only involves fixed word vectors, so the
    // minimiser is a weighted mean of its own and its neighbours' vectors.
    for (std::size_t i = 0; i < n; ++i) {
      Eigen::VectorXd num = Eigen::VectorXd::Zero(m);
      double den = alpha[i];
      if (alpha[i] > 0.0) num += alpha[i] * *word[i];
      for (const auto& [j, beta] : nbrs[i]) {
        if (word[j] == nullptr) continue;
        num += beta * *word[j];
        den += beta;
      }
      if (den > 0.0) {
        out[i] = num / den;
        active[i] = true;
      }
    }
  } else {
    // Only components that contain an anchored node have a defined solution.
    std::vector<std::size_t> stack;
    for (std::size_t i = 0; i < n; ++i) {
      if (alpha[i] > 0.0 && !active[i]) {
        active[i] = true;
        stack.push_back(i);
      }
    }
    while (!stack.empty()) {
      const std::size_t i = stack.back();
      stack.pop_back();
      for (const auto& [j, beta] : nbrs[i]) {
        if (beta > 0.0 && !active[j]) {
          active[j] = true;
          stack.push_back(j);
        }
      }
    }

    std::vector<Eigen::VectorXd> cur(n, Eigen::VectorXd::Zero(m));
    for (std::size_t i = 0; i < n; ++i) {
      if (active[i] && word[i]) cur[i] = *word[i];
    }
    std::vector<Eigen::VectorXd> next = cur;
    for (int it = 0; it < cfg.max_iterations; ++it) {
      double change = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (!active[i]) continue;
        Eigen::VectorXd num = Eigen::VectorXd::Zero(m);
        double den = alpha[i];
        if (alpha[i] > 0.0) num += alpha[i] * *word[i];
        for (const auto& [j, beta] : nbrs[i]) {
          num += beta * cur[j];
          den += beta;
        }
        next[i] = num / den;
        change = std::max(change, (next[i] - cur[i]).cwiseAbs().maxCoeff());
      }
      std::swap(cur, next);
      if (change < cfg.tolerance) break;
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (active[i]) out[i] = std::move(cur[i]);
    }
  }

  EmbeddingStore scads(EmbeddingKind::Scads);
  for (std::size_t i = 0; i < n; ++i) {
    if (active[i]) {
      scads.insert(concepts[i].id, std::move(out[i]));
    } else {
      std::cerr << "warning: retrofit: concept '" << concepts[i].id
                << "' has no word vector and no usable neighbours; omitted\n";
    }
  }
  return scads;
}

std::size_t common_prefix_length(std::string_view a, std::string_view b) {
  std::size_t l = 0;
  const std::size_t limit = std::min(a.size(), b.size());
  while (l < limit && a[l] == b[l]) ++l;
  // Do not count a partially matched multi-byte character.
  auto continuation = [](char c) { return (static_cast<unsigned char>(c) & 0xC0) == 0x80; };
  while (l > 0 && ((l < a.size() && continuation(a[l])) || (l < b.size() && continuation(b[l])))) {
    --l;
  }
  return l;
}

Eigen::VectorXd approximation_embedding(const std::string& term, const EmbeddingStore& store) {
  if (store.empty()) throw Error(Errc::NoApproximation, "embedding store is empty");
  if (const auto* v = store.find(term)) return *v;

  std::size_t best = 0;
  std::vector<std::size_t> matches;
  for (std::size_t i = 0; i < store.size(); ++i) {
    const std::size_t l = common_prefix_length(term, store.terms()[i]);
    if (l == 0 || l < best) continue;
    if (l > best) {
      best = l;
      matches.clear();
    }
    matches.push_back(i);
  }
  if (matches.empty()) {
    throw Error(Errc::NoApproximation, "no vocabulary term shares a prefix with '" + term + "'");
  }
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(store.dim());
  for (std::size_t i : matches) sum += store.vector(i);
  return sum / static_cast<double>(matches.size());
}

Eigen::VectorXd resolve_embedding(const std::string& term, const EmbeddingStore& scads) {
  if (const auto* v = scads.find(term)) return *v;
  return approximation_embedding(term, scads);
}

std::vector<Related> top_n_related(const Eigen::VectorXd& query,
                                   const std::set<std::string>& candidates, std::size_t n,
                                   const EmbeddingStore& scads) {
  if (n == 0) throw Error(Errc::IndexError, "top_n_related: n must be positive");
  std::vector<Related> scored;
  scored.reserve(candidates.size());
  for (const auto& id : candidates) {
    const auto* v = scads.find(id);
    if (v == nullptr) {
      throw Error(Errc::UnknownConcept, "candidate '" + id + "' has no scads embedding");
    }
    scored.push_back({id, cosine_similarity(query, *v)});
  }
  const auto better = [](const Related& a, const Related& b) {
    if (a.similarity != b.similarity) return a.similarity > b.similarity;
    return a.concept_id < b.concept_id;
  };
  const std::size_t k = std::min(n, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(k), scored.end(),
                    better);
  scored.resize(k);
  return scored;
}

std::vector<Related> top_n_related(const std::string& query,
                                   const std::set<std::string>& candidates, std::size_t n,
                                   const EmbeddingStore& scads) {
  return top_n_related(resolve_embedding(query, scads), candidates, n, scads);
}

}  // namespace taglets
