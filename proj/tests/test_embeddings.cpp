#include <doctest.h>

#include <sstream>

#include "helpers.hpp"
#include "taglets/embeddings.hpp"
#include "taglets/error.hpp"

using namespace taglets;
using testing::node;

namespace {

struct Objective {
  std::vector<std::string> ids;
  std::vector<const Eigen::VectorXd*> word;
  std::vector<double> alpha;
  struct Term {
    std::size_t node;
    const Eigen::VectorXd* target;
    double weight;
  };
  std::vector<Term> terms;  // beta * ||e_node - target||^2

  // Written out edge by edge, independently of the library's neighbourhoods.
  Objective(const ConceptGraph& g, const EmbeddingStore& words) {
    for (const auto& c : g.concepts()) {
      ids.push_back(c.id);
      word.push_back(word_vector_for(c, words));
      alpha.push_back(word.back() ? 1.0 : 0.0);
    }
    auto idx = [&](const std::string& id) {
      return static_cast<std::size_t>(std::find(ids.begin(), ids.end(), id) - ids.begin());
    };
    for (const auto& e : g.edges()) {
      const std::size_t a = idx(e.src);
      const std::size_t b = idx(e.dst);
      if (a == b) continue;
      if (word[b]) terms.push_back({a, word[b], e.weight});
      if (word[a]) terms.push_back({b, word[a], e.weight});
    }
  }

  double value(const std::vector<Eigen::VectorXd>& e) const {
    double v = 0.0;
    for (std::size_t i = 0; i < ids.size(); ++i) {
      if (alpha[i] > 0.0) v += alpha[i] * (e[i] - *word[i]).squaredNorm();
    }
    for (const auto& t : terms) v += t.weight * (e[t.node] - *t.target).squaredNorm();
    return v;
  }
};

std::vector<Eigen::VectorXd> solution(const Objective& obj, const EmbeddingStore& scads,
                                      Eigen::Index dim) {
  std::vector<Eigen::VectorXd> e;
  for (const auto& id : obj.ids) {
    const auto* v = scads.find(id);
    e.push_back(v ? *v : Eigen::VectorXd::Zero(dim));
  }
  return e;
}

}  // namespace

TEST_SUITE("embeddings") {
  TEST_CASE("retrofit closed-form examples") {
    {
      ConceptGraph g;
      g.upsert_concept(node("i"));
      EmbeddingStore w;
      w.insert("i", Eigen::Vector2d(2, 5));
      CHECK(retrofit(g, w).at("i") == Eigen::Vector2d(2, 5));
    }
    {
      ConceptGraph g;
      g.upsert_concept(node("i"));
      g.upsert_concept(node("j"));
      g.upsert_edge({"i", "j", "related-to", 1.0});
      EmbeddingStore w;
      w.insert("j", Eigen::Vector2d(1, 0));
      CHECK(retrofit(g, w).at("i") == Eigen::Vector2d(1, 0));
    }
    {
      ConceptGraph g;
      for (const char* id : {"i", "j", "k"}) g.upsert_concept(node(id));
      g.upsert_edge({"i", "j", "related-to", 1.0});
      g.upsert_edge({"i", "k", "related-to", 1.0});
      EmbeddingStore w;
      w.insert("i", Eigen::Vector2d(0, 0));
      w.insert("j", Eigen::Vector2d(3, 0));
      w.insert("k", Eigen::Vector2d(0, 3));
      const Eigen::VectorXd e = retrofit(g, w).at("i");
      CHECK((e - Eigen::Vector2d(1, 1)).norm() < 1e-12);
    }
  }

  TEST_CASE("retrofit with zero edge weights returns the word vectors") {
    const testing::QuietStderr quiet;
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
      auto rg = testing::random_graph(seed, 30, 8, false);
      ConceptGraph g;
      for (const auto& c : rg.graph.concepts()) g.upsert_concept(c);
      for (auto e : rg.graph.edges()) {
        e.weight = 0.0;
        g.upsert_edge(e);
      }
      const EmbeddingStore scads = retrofit(g, rg.words);
      for (const auto& c : g.concepts()) {
        if (const auto* w = word_vector_for(c, rg.words)) CHECK(scads.at(c.id) == *w);
      }
    }
  }

  TEST_CASE("word vectors are found by id, then name, then alias") {
    EmbeddingStore w;
    w.insert("by-name", Eigen::Vector2d(1, 0));
    w.insert("by-alias", Eigen::Vector2d(0, 1));
    w.insert("by-id", Eigen::Vector2d(1, 1));
    CHECK(*word_vector_for({"by-id", "by-name", {"by-alias"}}, w) == Eigen::Vector2d(1, 1));
    CHECK(*word_vector_for({"x", "by-name", {"by-alias"}}, w) == Eigen::Vector2d(1, 0));
    CHECK(*word_vector_for({"x", "y", {"z", "by-alias"}}, w) == Eigen::Vector2d(0, 1));
    CHECK(word_vector_for({"x", "y", {}}, w) == nullptr);
  }

  TEST_CASE("retrofit stationarity by central finite differences") {
    const testing::QuietStderr quiet;
    const double h = 1e-5;
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
      const auto rg = testing::random_graph(seed + 100, 30, 8, false);
      const EmbeddingStore scads = retrofit(rg.graph, rg.words);
      const Objective obj(rg.graph, rg.words);
      auto e = solution(obj, scads, rg.words.dim());
      double worst = 0.0;
      for (std::size_t i = 0; i < e.size(); ++i) {
        if (!scads.contains(obj.ids[i])) continue;
        for (Eigen::Index k = 0; k < e[i].size(); ++k) {
          const double x = e[i](k);
          e[i](k) = x + h;
          const double up = obj.value(e);
          e[i](k) = x - h;
          const double down = obj.value(e);
          e[i](k) = x;
          worst = std::max(worst, std::abs(up - down) / (2 * h));
        }
      }
      CHECK(worst < 1e-6);
    }
  }

  TEST_CASE("retrofit omits nodes with nothing to anchor them") {
    ConceptGraph g;
    g.upsert_concept(node("lonely"));
    g.upsert_concept(node("a"));
    EmbeddingStore w;
    w.insert("a", Eigen::Vector2d(1, 2));
    std::ostringstream captured;
    auto* old = std::cerr.rdbuf(captured.rdbuf());
    const EmbeddingStore scads = retrofit(g, w);
    std::cerr.rdbuf(old);
    CHECK_FALSE(scads.contains("lonely"));
    CHECK(scads.contains("a"));
    CHECK(captured.str().find("lonely") != std::string::npos);
  }

  TEST_CASE("retrofit alpha overrides") {
    ConceptGraph g;
    g.upsert_concept(node("a"));
    g.upsert_concept(node("b"));
    g.upsert_edge({"a", "b", "r", 1.0});
    EmbeddingStore w;
    w.insert("a", Eigen::Vector2d(4, 0));
    w.insert("b", Eigen::Vector2d(0, 4));
    RetrofitConfig cfg;
    cfg.alpha["a"] = 3.0;
    CHECK((retrofit(g, w, cfg).at("a") - Eigen::Vector2d(3, 1)).norm() < 1e-12);

    cfg.alpha["a"] = -1.0;
    CHECK_THROWS_AS(retrofit(g, w, cfg), Error);
    cfg.alpha.clear();
    cfg.alpha["missing"] = 1.0;
    g.upsert_concept(node("missing"));
    try {
      retrofit(g, w, cfg);
      FAIL("expected MissingWordVector");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::MissingWordVector);
    }
  }

  TEST_CASE("classical mode satisfies its own fixed point") {
    const testing::QuietStderr quiet;
    RetrofitConfig cfg;
    cfg.mode = RetrofitMode::Classical;
    cfg.tolerance = 1e-12;
    cfg.max_iterations = 100000;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      const auto rg = testing::random_graph(seed + 300, 30, 8, false);
      const auto& g = rg.graph;
      const EmbeddingStore scads = retrofit(g, rg.words, cfg);
      for (const auto& c : g.concepts()) {
        if (!scads.contains(c.id)) continue;
        const auto* w = word_vector_for(c, rg.words);
        Eigen::VectorXd num = Eigen::VectorXd::Zero(scads.dim());
        double den = 0.0;
        if (w) {
          num += *w;
          den += 1.0;
        }
        for (std::size_t e : g.incident_edges(c.id)) {
          const auto& edge = g.edges()[e];
          if (edge.src == edge.dst) continue;
          const auto& other = edge.src == c.id ? edge.dst : edge.src;
          num += edge.weight * scads.at(other);
          den += edge.weight;
        }
        CHECK((scads.at(c.id) - num / den).cwiseAbs().maxCoeff() <= 10 * cfg.tolerance);
      }
    }
  }

  TEST_CASE("classical and as-written modes on a star") {
    ConceptGraph g;
    for (const char* id : {"hub", "x", "y"}) g.upsert_concept(node(id));
    g.upsert_edge({"hub", "x", "r", 1.0});
    g.upsert_edge({"hub", "y", "r", 1.0});
    EmbeddingStore w;
    w.insert("x", Eigen::Vector2d(2, 0));
    w.insert("y", Eigen::Vector2d(0, 2));
    RetrofitConfig cfg;
    cfg.mode = RetrofitMode::Classical;
    const EmbeddingStore classical = retrofit(g, w, cfg);
    const EmbeddingStore written = retrofit(g, w);
    CHECK((classical.at("hub") - Eigen::Vector2d(1, 1)).norm() < 1e-9);
    CHECK((written.at("hub") - Eigen::Vector2d(1, 1)).norm() < 1e-12);
    // The hub has no word vector, so as-written leaves stay put while
    // classical leaves are pulled toward the hub.
    CHECK(written.at("x") == Eigen::Vector2d(2, 0));
    CHECK((classical.at("x") - Eigen::Vector2d(1.5, 0.5)).norm() < 1e-9);
  }

  TEST_CASE("approximation embedding") {
    EmbeddingStore w;
    w.insert("oat", Eigen::Vector2d(1, 0));
    w.insert("oatmeal", Eigen::Vector2d(0, 1));
    w.insert("milk", Eigen::Vector2d(5, 5));
    CHECK(approximation_embedding("oatghurt", w) == Eigen::Vector2d(0.5, 0.5));
    CHECK(approximation_embedding("milk", w) == Eigen::Vector2d(5, 5));
    try {
      approximation_embedding("zzz", w);
      FAIL("expected NoApproximation");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::NoApproximation);
    }
  }

  TEST_CASE("approximation stays inside the hull of its matches") {
    Rng rng(3);
    std::normal_distribution<double> n;
    const std::vector<std::string> vocab{"car", "cart", "carton", "cat", "dog", "door", "dot"};
    EmbeddingStore w;
    for (const auto& t : vocab) w.insert(t, Eigen::Vector3d(n(rng), n(rng), n(rng)));
    for (const char* q : {"carp", "cartoon", "doe", "dx", "ca", "c"}) {
      const Eigen::VectorXd out = approximation_embedding(q, w);
      std::size_t best = 0;
      for (const auto& t : vocab) best = std::max(best, common_prefix_length(q, t));
      Eigen::VectorXd lo = Eigen::VectorXd::Constant(3, 1e300);
      Eigen::VectorXd hi = Eigen::VectorXd::Constant(3, -1e300);
      for (const auto& t : vocab) {
        if (common_prefix_length(q, t) != best) continue;
        lo = lo.cwiseMin(w.at(t));
        hi = hi.cwiseMax(w.at(t));
      }
      CHECK((out.array() >= lo.array() - 1e-12).all());
      CHECK((out.array() <= hi.array() + 1e-12).all());
    }
  }

  TEST_CASE("common prefix respects UTF-8 boundaries") {
    CHECK(common_prefix_length("abc", "abd") == 2);
    CHECK(common_prefix_length("", "x") == 0);
    // U+00E9 (C3 A9) and U+00E8 (C3 A8) share a lead byte only.
    CHECK(common_prefix_length("caf\xC3\xA9", "caf\xC3\xA8") == 3);
    CHECK(common_prefix_length("\xC3\xA9t\xC3\xA9", "\xC3\xA9t\xC3\xA9s") == 5);
  }

  TEST_CASE("top_n_related ordering") {
    EmbeddingStore s(EmbeddingKind::Scads);
    s.insert("a", Eigen::Vector2d(1, 0));
    s.insert("b", Eigen::Vector2d(0.9, 0.1));
    s.insert("c", Eigen::Vector2d(0, 1));
    const auto two = top_n_related(Eigen::VectorXd(Eigen::Vector2d(1, 0)), {"a", "b", "c"}, 2, s);
    REQUIRE(two.size() == 2);
    CHECK(two[0].concept_id == "a");
    CHECK(two[1].concept_id == "b");

    const auto all = top_n_related(Eigen::VectorXd(Eigen::Vector2d(1, 0)), {"a", "b", "c"}, 10, s);
    REQUIRE(all.size() == 3);
    CHECK(all[2].concept_id == "c");
    CHECK(all[0].similarity >= all[1].similarity);
    CHECK(all[1].similarity >= all[2].similarity);

    CHECK_THROWS_AS(top_n_related(Eigen::VectorXd(Eigen::Vector2d(1, 0)), {"a"}, 0, s), Error);
    CHECK_THROWS_AS(top_n_related(Eigen::VectorXd(Eigen::Vector2d(1, 0)), {"zzz"}, 1, s), Error);
  }

  TEST_CASE("top_n_related ties break by ascending id") {
    EmbeddingStore s(EmbeddingKind::Scads);
    s.insert("zeta", Eigen::Vector2d(2, 0));
    s.insert("alpha", Eigen::Vector2d(1, 0));
    s.insert("mid", Eigen::Vector2d(3, 0));
    const auto r = top_n_related(Eigen::VectorXd(Eigen::Vector2d(1, 0)), {"zeta", "alpha", "mid"}, 3, s);
    CHECK(r[0].concept_id == "alpha");
    CHECK(r[1].concept_id == "mid");
    CHECK(r[2].concept_id == "zeta");
  }

  TEST_CASE("top_n_related is invariant to a common positive scale") {
    Rng rng(5);
    std::normal_distribution<double> n;
    for (int t = 0; t < 200; ++t) {
      EmbeddingStore s(EmbeddingKind::Scads);
      EmbeddingStore scaled(EmbeddingKind::Scads);
      const double k = std::uniform_real_distribution<double>(0.1, 10.0)(rng);
      std::set<std::string> cands;
      for (int i = 0; i < 12; ++i) {
        const Eigen::Vector3d v(n(rng), n(rng), n(rng));
        s.insert("c" + std::to_string(i), v);
        scaled.insert("c" + std::to_string(i), k * v);
        cands.insert("c" + std::to_string(i));
      }
      const Eigen::VectorXd q = Eigen::Vector3d(n(rng), n(rng), n(rng));
      const auto a = top_n_related(q, cands, 5, s);
      const auto b = top_n_related((k * q).eval(), cands, 5, scaled);
      for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].concept_id == b[i].concept_id);
    }
  }

  TEST_CASE("query terms fall back to approximation") {
    EmbeddingStore s(EmbeddingKind::Scads);
    s.insert("oat", Eigen::Vector2d(1, 0));
    s.insert("milk", Eigen::Vector2d(0, 1));
    const auto r = top_n_related("oatghurt", {"oat", "milk"}, 1, s);
    CHECK(r[0].concept_id == "oat");
  }

  TEST_CASE("embedding TSV round trip and errors") {
    EmbeddingStore w;
    w.insert("plastic bag", Eigen::Vector3d(0.1, -2.5, 1.0 / 3.0));
    w.insert("caf\xC3\xA9", Eigen::Vector3d(1e-300, 7, -0.0));
    std::stringstream buf;
    write_embeddings_tsv(buf, w);
    const EmbeddingStore back = read_embeddings_tsv(buf);
    CHECK(back.terms() == w.terms());
    for (const auto& t : w.terms()) CHECK(back.at(t) == w.at(t));

    std::istringstream ragged("a\t1\t2\nb\t1\n");
    CHECK_THROWS_AS(read_embeddings_tsv(ragged), Error);
    std::istringstream bad("a\t1\tx\n");
    CHECK_THROWS_AS(read_embeddings_tsv(bad), Error);
  }

  TEST_CASE("retrofit mode parsing") {
    CHECK(parse_retrofit_mode("as-written") == RetrofitMode::AsWritten);
    CHECK(parse_retrofit_mode("classical") == RetrofitMode::Classical);
    CHECK_THROWS_AS(parse_retrofit_mode("other"), Error);
  }
}
