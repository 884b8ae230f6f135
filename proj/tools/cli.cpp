#include "cli.hpp"

#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "taglets/csv.hpp"
#include "taglets/error.hpp"
#include "taglets/graph_io.hpp"
#include "taglets/pipeline.hpp"
#include "taglets/rng.hpp"
#include "taglets/serialize.hpp"
#include "taglets/synthetic.hpp"

namespace taglets::cli {

namespace {

using ojson = nlohmann::ordered_json;

ojson datasets_json(const ConceptGraph& g) {
  ojson list = ojson::array();
  for (const auto& ds : g.datasets()) {
    list.push_back({{"name", ds.name}, {"classes", ds.classes.size()}, {"examples", ds.example_count}});
  }
  return list;
}

ojson related_json(const std::vector<Related>& related) {
  ojson list = ojson::array();
  for (const auto& r : related) list.push_back({{"concept", r.concept_id}, {"similarity", r.similarity}});
  return list;
}

// "name" or "name=concept".
std::vector<TargetClass> parse_targets(const std::vector<std::string>& specs) {
  std::vector<TargetClass> out;
  for (const auto& s : specs) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) {
      out.push_back({s, s});
    } else {
      out.push_back({s.substr(0, eq), s.substr(eq + 1)});
    }
  }
  return out;
}

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> prune;
  std::optional<std::size_t> n;
  std::optional<std::size_t> k;
  std::optional<std::string> modules;

  void add_to(CLI::App* app) {
    app->add_option("--seed", seed, "global seed");
    app->add_option("--prune-level", prune, "none, 0 or 1")
        ->check(CLI::IsMember({"none", "0", "1"}));
    app->add_option("--n", n, "related concepts per target class")->check(CLI::PositiveNumber);
    app->add_option("--k", k, "examples per related concept")->check(CLI::PositiveNumber);
  }
};

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Few-shot training with auxiliary data selected through a concept graph", "taglets"};
  app.require_subcommand(1);

  // build
  std::filesystem::path graph_path, words_path, db_path, out_path;
  std::vector<std::filesystem::path> manifest_paths;
  std::string retrofit_mode = "as-written";
  auto* build = app.add_subcommand("build", "graph + word embeddings -> frozen .scads store");
  build->add_option("--graph", graph_path, "graph NDJSON")->required()->check(CLI::ExistingFile);
  build->add_option("--words", words_path, "word embeddings TSV")->required()->check(CLI::ExistingFile);
  build->add_option("--manifest", manifest_paths, "dataset manifests to install");
  build->add_option("--retrofit-mode", retrofit_mode)->check(CLI::IsMember({"as-written", "classical"}));
  build->add_option("--out", out_path, "output store")->required();

  // install
  std::optional<std::filesystem::path> install_manifest;
  std::optional<std::string> remove_name;
  auto* install = app.add_subcommand("install", "install or remove a dataset in a store");
  install->add_option("--db", db_path, "store")->required()->check(CLI::ExistingFile);
  auto* man_opt = install->add_option("--manifest", install_manifest, "manifest to install");
  auto* rm_opt = install->add_option("--remove", remove_name, "dataset to remove");
  man_opt->excludes(rm_opt);
  rm_opt->excludes(man_opt);

  // related
  std::string query;
  std::size_t top_n = 10;
  bool include_self = false;
  auto* related = app.add_subcommand("related", "top-N related concepts for a class");
  related->add_option("--db", db_path, "store")->required()->check(CLI::ExistingFile);
  related->add_option("--class", query, "class name or concept id")->required();
  related->add_option("--n", top_n, "how many")->check(CLI::PositiveNumber);
  related->add_flag("--include-self", include_self, "keep the query concept among candidates");

  // select
  std::vector<std::string> target_specs;
  Overrides select_over;
  std::optional<std::filesystem::path> select_out;
  auto* select = app.add_subcommand("select", "select auxiliary data for target classes");
  select->add_option("--db", db_path, "store")->required()->check(CLI::ExistingFile);
  select->add_option("--class", target_specs, "target class, as name or name=concept")->required();
  select_over.add_to(select);
  select->add_option("--out", select_out, "write selection JSON and CSV here");

  // run
  std::filesystem::path config_path;
  Overrides run_over;
  std::optional<std::filesystem::path> output_dir;
  auto* run = app.add_subcommand("run", "run the full pipeline");
  run->add_option("--config", config_path, "config JSON")->required();
  run_over.add_to(run);
  run->add_option("--modules", run_over.modules, "comma list of transfer,multitask,fixmatch,zeroshot");
  run->add_option("--output-dir", output_dir, "write artifacts here");

  // eval
  std::filesystem::path model_path, test_path;
  auto* eval = app.add_subcommand("eval", "accuracy of a saved end model or taglet");
  eval->add_option("--model", model_path, "model JSON")->required()->check(CLI::ExistingFile);
  eval->add_option("--test", test_path, "labeled CSV")->required()->check(CLI::ExistingFile);

  // synth
  SyntheticSpec spec;
  std::filesystem::path synth_dir;
  auto* synth = app.add_subcommand("synth", "write a synthetic task and its config");
  synth->add_option("--out", synth_dir, "output directory")->required();
  synth->add_option("--seed", spec.seed);
  synth->add_option("--classes", spec.num_classes);
  synth->add_option("--dim", spec.dim);
  synth->add_option("--shots", spec.shots);
  synth->add_option("--unlabeled", spec.unlabeled);
  synth->add_option("--relatedness", spec.relatedness);
  synth->add_option("--aux-per-class", spec.aux_per_class);
  synth->add_option("--distractors", spec.distractors);
  synth->add_option("--examples-per-concept", spec.examples_per_concept);
  synth->add_option("--test-per-class", spec.test_per_class);

  std::vector<const char*> argv{"taglets"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n\n" << app.help();
    return 1;
  }

  try {
    if (build->parsed()) {
      ScadsStore store;
      store.graph = load_graph(graph_path);
      for (const auto& m : manifest_paths) store.graph.install_dataset(read_manifest(m));
      RetrofitConfig rc;
      rc.mode = parse_retrofit_mode(retrofit_mode);
      store.scads = retrofit(store.graph, read_embeddings_tsv(words_path), rc);
      store.graph.freeze();
      save_store(out_path, store);
      out << ojson{{"store", out_path.string()},
                   {"concepts", store.graph.concepts().size()},
                   {"edges", store.graph.edges().size()},
                   {"embeddings", store.scads.size()},
                   {"datasets", datasets_json(store.graph)}}
                 .dump(2)
          << '\n';
    } else if (install->parsed()) {
      if (!install_manifest && !remove_name) {
        err << "install: one of --manifest or --remove is required\n";
        return 1;
      }
      ScadsStore store = load_store(db_path, false);
      if (install_manifest) {
        store.graph.install_dataset(read_manifest(*install_manifest));
      } else {
        store.graph.remove_dataset(*remove_name);
      }
      store.graph.freeze();
      save_store(db_path, store);
      out << ojson{{"store", db_path.string()}, {"datasets", datasets_json(store.graph)}}.dump(2)
          << '\n';
    } else if (related->parsed()) {
      const ScadsStore store = load_store(db_path);
      std::set<std::string> candidates(store.scads.terms().begin(), store.scads.terms().end());
      if (!include_self) candidates.erase(query);
      out << related_json(top_n_related(query, candidates, top_n, store.scads)).dump(2) << '\n';
    } else if (select->parsed()) {
      const ScadsStore store = load_store(db_path);
      SelectionRequest req;
      req.targets = parse_targets(target_specs);
      if (select_over.n) req.n_related = *select_over.n;
      if (select_over.k) req.per_concept = *select_over.k;
      if (select_over.prune) req.prune = parse_prune_level(*select_over.prune);
      req.seed = derive_seed(select_over.seed.value_or(0), "select");
      const auto sel = select_related_data(store.graph, store.scads, req);
      std::string examples = "";
      if (select_out) {
        save_selection(*select_out, sel);
        examples = std::filesystem::path(*select_out).replace_extension(".csv").string();
      }
      out << selection_to_json(sel, examples) << '\n';
    } else if (run->parsed()) {
      PipelineConfig cfg = load_config(config_path);
      if (run_over.seed) cfg.seed = *run_over.seed;
      if (run_over.prune) cfg.prune = parse_prune_level(*run_over.prune);
      if (run_over.n) cfg.n_related = *run_over.n;
      if (run_over.k) cfg.per_concept = *run_over.k;
      if (run_over.modules) cfg.modules = parse_modules(*run_over.modules);
      if (output_dir) cfg.output_dir = *output_dir;
      out << run_pipeline(cfg).report.to_json() << '\n';
    } else if (eval->parsed()) {
      const EndModel model = load_end_model(model_path);
      const FeatureTable table = read_feature_csv(test_path);
      LabeledData test;
      test.features = table.features;
      for (const auto& name : table.labels) {
        const auto it = std::find(model.classes.begin(), model.classes.end(), name);
        if (it == model.classes.end()) {
          throw Error(Errc::MalformedData, "test class '" + name + "' is not a model class");
        }
        test.labels.push_back(static_cast<int>(it - model.classes.begin()));
      }
      out << ojson{{"model", model_path.string()},
                   {"examples", test.labels.size()},
                   {"accuracy", evaluate_accuracy(model, test)}}
                 .dump(2)
          << '\n';
    } else if (synth->parsed()) {
      write_synthetic_task(synth_dir, generate_synthetic_task(spec), spec.seed);
      out << ojson{{"dir", synth_dir.string()}, {"config", (synth_dir / "config.json").string()}}
                 .dump(2)
          << '\n';
    }
  } catch (const Error& e) {
    err << "error";
    if (!e.stage().empty()) err << " [" << e.stage() << "]";
    err << ' ' << errc_name(e.code()) << ": " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}

}  // namespace taglets::cli
