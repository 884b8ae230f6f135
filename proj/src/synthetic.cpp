#include "taglets/synthetic.hpp"

#include <fstream>

#include <json.hpp>

#include "taglets/error.hpp"
#include "taglets/graph_io.hpp"
#include "taglets/rng.hpp"

namespace taglets {

void SyntheticSpec::validate() const {
  auto fail = [](const std::string& what) { throw Error(Errc::InvalidSpec, what); };
  if (num_classes < 2) fail("synthetic task needs at least 2 classes");
  if (dim < 2) fail("synthetic task needs dimension >= 2");
  if (shots < 0 || unlabeled < 0 || test_per_class < 1) fail("counts must be non-negative");
  if (!(relatedness >= 0.0 && relatedness <= 1.0)) fail("relatedness must lie in [0, 1]");
  if (aux_per_class < 1 || examples_per_concept < 1 || distractors < 0) {
    fail("auxiliary counts must be positive");
  }
  if (!(noise > 0.0) || !(class_separation > 0.0) || !(embedding_noise >= 0.0)) {
    fail("scales must be positive");
  }
}

namespace {

struct Sampler {
  Rng rng;
  std::normal_distribution<double> normal{0.0, 1.0};

  Eigen::VectorXd gaussian(Eigen::Index n) {
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = normal(rng);
    return v;
  }
  Eigen::MatrixXd cluster(const Eigen::VectorXd& mean, int count, double sigma) {
    Eigen::MatrixXd out(count, mean.size());
    for (int i = 0; i < count; ++i) out.row(i) = (mean + sigma * gaussian(mean.size())).transpose();
    return out;
  }
};

std::string id(const char* prefix, int a) { return std::string(prefix) + "_" + std::to_string(a); }
std::string id(const char* prefix, int a, int b) {
  return id(prefix, a) + "_" + std::to_string(b);
}

void add_concept(ConceptGraph& g, const std::string& cid) { g.upsert_concept({cid, cid, {}}); }

}  // namespace

SyntheticTask generate_synthetic_task(const SyntheticSpec& spec) {
  spec.validate();
  Sampler s{Rng(derive_seed(spec.seed, "synthetic")), {}};
  const int C = spec.num_classes;
  const Eigen::Index d = spec.dim;
  const Eigen::Index m = spec.dim;

  // Features of a concept are centred at sep * M e for its embedding e.
  const Eigen::MatrixXd proj =
      Eigen::MatrixXd::NullaryExpr(d, m, [&]() { return s.normal(s.rng); }) /
      std::sqrt(static_cast<double>(m));
  auto mean_of = [&](const Eigen::VectorXd& e) -> Eigen::VectorXd {
    return spec.class_separation * (proj * e);
  };

  SyntheticTask task;
  SyntheticDataset related_ds;
  related_ds.manifest.name = "aux_related";
  related_ds.manifest.examples = "aux_related.csv";
  SyntheticDataset misc_ds;
  misc_ds.manifest.name = "aux_misc";
  misc_ds.manifest.examples = "aux_misc.csv";

  std::vector<Eigen::MatrixXd> related_blocks;
  std::vector<Eigen::MatrixXd> misc_blocks;
  std::vector<Eigen::VectorXd> target_means;

  for (int c = 0; c < C; ++c) {
    const std::string group = id("group", c);
    const std::string cls = id("class", c);
    add_concept(task.graph, group);
    add_concept(task.graph, cls);
    task.graph.upsert_edge({cls, group, kIsA, 1.0});
    const Eigen::VectorXd t = s.gaussian(m);
    task.words.insert(cls, t);
    target_means.push_back(mean_of(t));
    task.targets.push_back({cls, cls});

    for (int j = 0; j < spec.aux_per_class; ++j) {
      const bool child = j % 2 == 0;
      const std::string aux = child ? id("sub", c, j) : id("sib", c, j);
      add_concept(task.graph, aux);
      task.graph.upsert_edge({aux, child ? cls : group, kIsA, 1.0});
      task.graph.upsert_edge({aux, cls, "related-to", 1.0});
      const Eigen::VectorXd e = t + spec.embedding_noise * s.gaussian(m);
      task.words.insert(aux, e);
      const Eigen::VectorXd mean = spec.relatedness * mean_of(e) +
                                   (1.0 - spec.relatedness) * mean_of(s.gaussian(m));
      related_ds.manifest.classes.emplace_back(aux, aux);
      related_blocks.push_back(s.cluster(mean, spec.examples_per_concept, spec.noise));
      related_ds.table.labels.insert(related_ds.table.labels.end(),
                                     static_cast<std::size_t>(spec.examples_per_concept), aux);
    }
  }

  if (spec.distractors > 0) add_concept(task.graph, "misc");
  for (int j = 0; j < spec.distractors; ++j) {
    const std::string name = id("misc", j);
    add_concept(task.graph, name);
    task.graph.upsert_edge({name, "misc", kIsA, 1.0});
    task.words.insert(name, s.gaussian(m));
    misc_ds.manifest.classes.emplace_back(name, name);
    misc_blocks.push_back(s.cluster(mean_of(s.gaussian(m)), spec.examples_per_concept, spec.noise));
    misc_ds.table.labels.insert(misc_ds.table.labels.end(),
                                static_cast<std::size_t>(spec.examples_per_concept), name);
  }

  auto stack = [d](const std::vector<Eigen::MatrixXd>& blocks) {
    Eigen::Index rows = 0;
    for (const auto& b : blocks) rows += b.rows();
    Eigen::MatrixXd out(rows, d);
    Eigen::Index at = 0;
    for (const auto& b : blocks) {
      out.middleRows(at, b.rows()) = b;
      at += b.rows();
    }
    return out;
  };
  related_ds.table.features = stack(related_blocks);
  misc_ds.table.features = stack(misc_blocks);
  task.datasets.push_back(std::move(related_ds));
  if (spec.distractors > 0) task.datasets.push_back(std::move(misc_ds));

  auto draw_labeled = [&](int per_class) {
    LabeledData out;
    std::vector<Eigen::MatrixXd> blocks;
    for (int c = 0; c < C; ++c) {
      blocks.push_back(s.cluster(target_means[static_cast<std::size_t>(c)], per_class, spec.noise));
      out.labels.insert(out.labels.end(), static_cast<std::size_t>(per_class), c);
    }
    out.features = stack(blocks);
    return out;
  };
  task.labeled = draw_labeled(spec.shots);

  task.unlabeled.resize(spec.unlabeled, d);
  std::uniform_int_distribution<int> pick(0, C - 1);
  for (int i = 0; i < spec.unlabeled; ++i) {
    const int c = pick(s.rng);
    task.unlabeled.row(i) =
        (target_means[static_cast<std::size_t>(c)] + spec.noise * s.gaussian(d)).transpose();
  }
  task.test = draw_labeled(spec.test_per_class);
  return task;
}

ConceptGraph graph_with_datasets(const SyntheticTask& task) {
  ConceptGraph g = task.graph;
  for (const auto& ds : task.datasets) {
    g.install_dataset(ds.manifest.name, ds.manifest.classes, ds.table);
  }
  return g;
}

void write_synthetic_task(const std::filesystem::path& dir, const SyntheticTask& task,
                          std::uint64_t seed) {
  std::filesystem::create_directories(dir);
  save_graph(dir / "graph.jsonl", task.graph);
  write_embeddings_tsv(dir / "words.tsv", task.words);

  nlohmann::ordered_json manifests = nlohmann::ordered_json::array();
  for (const auto& ds : task.datasets) {
    write_feature_csv(dir / ds.manifest.examples, ds.table.labels, ds.table.features);
    nlohmann::ordered_json m;
    m["name"] = ds.manifest.name;
    m["classes"] = nlohmann::ordered_json::object();
    for (const auto& [cls, cid] : ds.manifest.classes) m["classes"][cls] = cid;
    m["examples"] = ds.manifest.examples.string();
    const std::string file = ds.manifest.name + ".json";
    std::ofstream(dir / file) << m.dump(2) << '\n';
    manifests.push_back(file);
  }

  auto names = [&](const LabeledData& data) {
    std::vector<std::string> out;
    for (int y : data.labels) out.push_back(task.targets[static_cast<std::size_t>(y)].name);
    return out;
  };
  write_feature_csv(dir / "labeled.csv", names(task.labeled), task.labeled.features);
  write_unlabeled_csv(dir / "unlabeled.csv", task.unlabeled);
  write_feature_csv(dir / "test.csv", names(task.test), task.test.features);

  nlohmann::ordered_json cfg;
  cfg["seed"] = seed;
  cfg["graph"] = "graph.jsonl";
  cfg["word_embeddings"] = "words.tsv";
  cfg["manifests"] = manifests;
  cfg["labeled"] = "labeled.csv";
  cfg["unlabeled"] = "unlabeled.csv";
  cfg["test"] = "test.csv";
  cfg["targets"] = nlohmann::ordered_json::array();
  for (const auto& t : task.targets) {
    cfg["targets"].push_back({{"class", t.name}, {"concept", t.concept_id}});
  }
  std::ofstream out(dir / "config.json");
  if (!out) throw Error(Errc::FileNotFound, "cannot write " + (dir / "config.json").string());
  out << cfg.dump(2) << '\n';
}

}  // namespace taglets
