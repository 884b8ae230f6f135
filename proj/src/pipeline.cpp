#include "taglets/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "taglets/csv.hpp"
#include "taglets/error.hpp"
#include "taglets/graph_io.hpp"
#include "taglets/rng.hpp"
#include "taglets/serialize.hpp"

namespace taglets {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

std::string_view to_string(Module m) {
  switch (m) {
    case Module::Transfer: return "transfer";
    case Module::Multitask: return "multitask";
    case Module::FixMatch: return "fixmatch";
    case Module::ZeroShot: return "zeroshot";
  }
  return "?";
}

Module parse_module(std::string_view text) {
  for (Module m : {Module::Transfer, Module::Multitask, Module::FixMatch, Module::ZeroShot}) {
    if (text == to_string(m)) return m;
  }
  throw Error(Errc::InvalidConfig, "unknown module '" + std::string(text) + "'");
}

std::vector<Module> parse_modules(std::string_view comma_list) {
  std::vector<Module> out;
  for (auto part : split(comma_list, ',')) {
    if (part.empty()) continue;
    const Module m = parse_module(part);
    if (std::find(out.begin(), out.end(), m) == out.end()) out.push_back(m);
  }
  if (out.empty()) throw Error(Errc::InvalidConfig, "no modules enabled");
  return out;
}

namespace {

std::string_view to_string(HeadInit h) { return h == HeadInit::AuxMean ? "aux-mean" : "zero"; }

HeadInit parse_head_init(std::string_view text) {
  if (text == "aux-mean") return HeadInit::AuxMean;
  if (text == "zero") return HeadInit::Zero;
  throw Error(Errc::InvalidConfig, "head_init must be 'aux-mean' or 'zero'");
}

void reject_unknown(const json& obj, std::initializer_list<std::string_view> keys,
                    const std::string& where) {
  if (!obj.is_object()) throw Error(Errc::InvalidConfig, where + " must be an object");
  for (const auto& [key, value] : obj.items()) {
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
      throw Error(Errc::InvalidConfig, "unknown config key '" + where + key + "'");
    }
  }
}

void read_train(const json& j, TrainConfig& t, const std::string& where) {
  reject_unknown(j, {"learning_rate", "momentum", "batch_size", "epochs"}, where);
  if (j.contains("learning_rate")) t.learning_rate = j["learning_rate"].get<double>();
  if (j.contains("momentum")) t.momentum = j["momentum"].get<double>();
  if (j.contains("batch_size")) t.batch_size = j["batch_size"].get<int>();
  if (j.contains("epochs")) t.epochs = j["epochs"].get<int>();
}

ojson train_json(const TrainConfig& t) {
  return {{"learning_rate", t.learning_rate},
          {"momentum", t.momentum},
          {"batch_size", t.batch_size},
          {"epochs", t.epochs}};
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.empty() || path.is_absolute() || base.empty() ? path : base / path;
}

}  // namespace

void PipelineConfig::validate() const {
  if (targets.empty()) throw Error(Errc::InvalidConfig, "config needs at least one target class");
  for (std::size_t i = 0; i < targets.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (targets[i].name == targets[j].name) {
        throw Error(Errc::InvalidConfig, "duplicate target class '" + targets[i].name + "'");
      }
    }
  }
  if (n_related < 1 || per_concept < 1) throw Error(Errc::InvalidConfig, "N and K must be >= 1");
  if (!(aux_weight >= 0.0)) throw Error(Errc::InvalidWeight, "aux_weight must be >= 0");
  if (!(threshold > 0.0)) throw Error(Errc::InvalidThreshold, "threshold must be > 0");
  if (!(ridge >= 0.0)) throw Error(Errc::InvalidConfig, "ridge must be >= 0");
  if (!(perturb.weak >= 0.0) || !(perturb.strong >= 0.0)) {
    throw Error(Errc::InvalidConfig, "perturbation scales must be >= 0");
  }
  if (hidden_dim < 0) throw Error(Errc::InvalidConfig, "hidden_dim must be >= 0");
  if (modules.empty()) throw Error(Errc::InvalidConfig, "no modules enabled");
  for (const auto* t : {&train_aux, &train_labeled, &train_multitask, &train_fixmatch, &train_end}) {
    t->validate();
  }
}

PipelineConfig parse_config(const std::string& json_text, const std::filesystem::path& base_dir) {
  PipelineConfig cfg;
  try {
    const json j = json::parse(json_text);
    reject_unknown(j,
                   {"seed", "graph", "word_embeddings", "manifests", "labeled", "unlabeled", "test",
                    "output_dir", "targets", "n_related", "per_concept", "prune", "aux_weight",
                    "threshold", "retrofit_mode", "head_init", "hidden_dim", "perturb", "ridge",
                    "train", "modules", "report_timings"},
                   "");
    auto path = [&](const char* key) { return resolve(base_dir, j.at(key).get<std::string>()); };
    if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
    cfg.graph = path("graph");
    cfg.word_embeddings = path("word_embeddings");
    for (const auto& m : j.value("manifests", json::array())) {
      cfg.manifests.push_back(resolve(base_dir, m.get<std::string>()));
    }
    cfg.labeled = path("labeled");
    cfg.unlabeled = path("unlabeled");
    cfg.test = path("test");
    if (j.contains("output_dir")) cfg.output_dir = path("output_dir");

    for (const auto& t : j.at("targets")) {
      if (t.is_string()) {
        cfg.targets.push_back({t.get<std::string>(), t.get<std::string>()});
        continue;
      }
      reject_unknown(t, {"class", "concept"}, "targets[].");
      const auto name = t.at("class").get<std::string>();
      cfg.targets.push_back({name, t.value("concept", name)});
    }
    if (j.contains("n_related")) cfg.n_related = j["n_related"].get<std::size_t>();
    if (j.contains("per_concept")) cfg.per_concept = j["per_concept"].get<std::size_t>();
    if (j.contains("prune")) {
      const auto& p = j["prune"];
      cfg.prune = parse_prune_level(p.is_number() ? std::to_string(p.get<int>()) : p.get<std::string>());
    }
    if (j.contains("aux_weight")) cfg.aux_weight = j["aux_weight"].get<double>();
    if (j.contains("threshold")) cfg.threshold = j["threshold"].get<double>();
    if (j.contains("retrofit_mode")) {
      cfg.retrofit_mode = parse_retrofit_mode(j["retrofit_mode"].get<std::string>());
    }
    if (j.contains("head_init")) cfg.head_init = parse_head_init(j["head_init"].get<std::string>());
    if (j.contains("hidden_dim")) cfg.hidden_dim = j["hidden_dim"].get<Eigen::Index>();
    if (j.contains("perturb")) {
      const auto& p = j["perturb"];
      reject_unknown(p, {"weak", "strong"}, "perturb.");
      cfg.perturb.weak = p.value("weak", cfg.perturb.weak);
      cfg.perturb.strong = p.value("strong", cfg.perturb.strong);
    }
    if (j.contains("ridge")) cfg.ridge = j["ridge"].get<double>();
    if (j.contains("train")) {
      const auto& t = j["train"];
      reject_unknown(t, {"aux", "labeled", "multitask", "fixmatch", "end"}, "train.");
      if (t.contains("aux")) read_train(t["aux"], cfg.train_aux, "train.aux.");
      if (t.contains("labeled")) read_train(t["labeled"], cfg.train_labeled, "train.labeled.");
      if (t.contains("multitask")) read_train(t["multitask"], cfg.train_multitask, "train.multitask.");
      if (t.contains("fixmatch")) read_train(t["fixmatch"], cfg.train_fixmatch, "train.fixmatch.");
      if (t.contains("end")) read_train(t["end"], cfg.train_end, "train.end.");
    }
    if (j.contains("modules")) {
      cfg.modules.clear();
      for (const auto& m : j["modules"]) {
        const Module mod = parse_module(m.get<std::string>());
        if (std::find(cfg.modules.begin(), cfg.modules.end(), mod) == cfg.modules.end()) {
          cfg.modules.push_back(mod);
        }
      }
    }
    if (j.contains("report_timings")) cfg.report_timings = j["report_timings"].get<bool>();
  } catch (const json::exception& e) {
    throw Error(Errc::InvalidConfig, std::string("config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::FileNotFound, "cannot open config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path.parent_path());
}

std::string config_to_json(const PipelineConfig& cfg) {
  ojson j;
  j["seed"] = cfg.seed;
  j["graph"] = cfg.graph.string();
  j["word_embeddings"] = cfg.word_embeddings.string();
  j["manifests"] = ojson::array();
  for (const auto& m : cfg.manifests) j["manifests"].push_back(m.string());
  j["labeled"] = cfg.labeled.string();
  j["unlabeled"] = cfg.unlabeled.string();
  j["test"] = cfg.test.string();
  if (cfg.output_dir) j["output_dir"] = cfg.output_dir->string();
  j["targets"] = ojson::array();
  for (const auto& t : cfg.targets) j["targets"].push_back({{"class", t.name}, {"concept", t.concept_id}});
  j["n_related"] = cfg.n_related;
  j["per_concept"] = cfg.per_concept;
  j["prune"] = std::string(to_string(cfg.prune));
  j["aux_weight"] = cfg.aux_weight;
  j["threshold"] = cfg.threshold;
  j["retrofit_mode"] = std::string(to_string(cfg.retrofit_mode));
  j["head_init"] = std::string(to_string(cfg.head_init));
  j["hidden_dim"] = cfg.hidden_dim;
  j["perturb"] = {{"weak", cfg.perturb.weak}, {"strong", cfg.perturb.strong}};
  j["ridge"] = cfg.ridge;
  j["train"] = {{"aux", train_json(cfg.train_aux)},
                {"labeled", train_json(cfg.train_labeled)},
                {"multitask", train_json(cfg.train_multitask)},
                {"fixmatch", train_json(cfg.train_fixmatch)},
                {"end", train_json(cfg.train_end)}};
  j["modules"] = ojson::array();
  for (Module m : cfg.modules) j["modules"].push_back(std::string(to_string(m)));
  j["report_timings"] = cfg.report_timings;
  return j.dump(2);
}

namespace {

LabeledData to_labeled(const FeatureTable& table, const std::vector<TargetClass>& targets,
                       const std::filesystem::path& source) {
  LabeledData out;
  out.features = table.features;
  out.labels.reserve(table.labels.size());
  for (std::size_t i = 0; i < table.labels.size(); ++i) {
    const auto it = std::find_if(targets.begin(), targets.end(),
                                 [&](const TargetClass& t) { return t.name == table.labels[i]; });
    if (it == targets.end()) {
      throw Error(Errc::MalformedData, source.string() + ": row " + std::to_string(i + 1) +
                                           " has class '" + table.labels[i] +
                                           "' which is not a target class");
    }
    out.labels.push_back(static_cast<int>(it - targets.begin()));
  }
  return out;
}

template <typename F>
auto staged(const char* stage, F&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Error& e) {
    if (!e.stage().empty()) throw;
    throw e.with_stage(stage);
  }
}

class StageClock {
 public:
  explicit StageClock(std::vector<std::pair<std::string, double>>& sink) : sink_(sink) {}

  template <typename F>
  auto operator()(const char* stage, F&& fn) -> decltype(fn()) {
    const auto start = std::chrono::steady_clock::now();
    struct Record {
      StageClock& clock;
      const char* stage;
      std::chrono::steady_clock::time_point start;
      ~Record() {
        const std::chrono::duration<double, std::milli> ms = std::chrono::steady_clock::now() - start;
        clock.sink_.emplace_back(stage, ms.count());
      }
    } record{*this, stage, start};
    return staged(stage, std::forward<F>(fn));
  }

 private:
  std::vector<std::pair<std::string, double>>& sink_;
};

bool enabled(const PipelineConfig& cfg, Module m) {
  return std::find(cfg.modules.begin(), cfg.modules.end(), m) != cfg.modules.end();
}

TransferConfig transfer_config(const PipelineConfig& cfg) {
  TransferConfig t;
  t.aux = cfg.train_aux;
  t.aux.seed = derive_seed(cfg.seed, "transfer/aux");
  t.labeled = cfg.train_labeled;
  t.labeled.seed = derive_seed(cfg.seed, "transfer/labeled");
  t.head_init = cfg.head_init;
  return t;
}

}  // namespace

PipelineInputs load_inputs(const PipelineConfig& cfg) {
  return staged("load", [&] {
    PipelineInputs in;
    in.graph = load_graph(cfg.graph);
    in.words = read_embeddings_tsv(cfg.word_embeddings);
    for (const auto& m : cfg.manifests) in.graph.install_dataset(read_manifest(m));
    in.labeled = to_labeled(read_feature_csv(cfg.labeled), cfg.targets, cfg.labeled);
    in.unlabeled = read_feature_csv(cfg.unlabeled, false).features;
    in.test = to_labeled(read_feature_csv(cfg.test), cfg.targets, cfg.test);
    in.graph.freeze();
    return in;
  });
}

double RunReport::mean_taglet_accuracy() const {
  if (taglet_accuracy.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& [name, acc] : taglet_accuracy) sum += acc;
  return sum / static_cast<double>(taglet_accuracy.size());
}

std::string RunReport::to_json() const {
  ojson j;
  j["schema"] = 1;
  j["config"] = ojson::parse(config_json);
  ojson sel = ojson::object();
  for (const auto& [cls, related] : selection) {
    auto& list = sel[cls] = ojson::array();
    for (const auto& r : related) list.push_back({{"concept", r.concept_id}, {"sim", r.similarity}});
  }
  j["selection"] = {{"examples", selected_examples}, {"related", sel}};
  j["taglets"] = ojson::object();
  for (const auto& [name, acc] : taglet_accuracy) j["taglets"][name] = acc;
  j["mean_taglet_accuracy"] = mean_taglet_accuracy();
  j["ensemble_accuracy"] = ensemble_accuracy;
  j["end_model_accuracy"] = end_model_accuracy;
  if (baseline_accuracy) j["baseline_accuracy"] = *baseline_accuracy;
  if (include_timings) {
    j["timings_ms"] = ojson::object();
    for (const auto& [stage, ms] : timings_ms) j["timings_ms"][stage] = ms;
  }
  return j.dump(2);
}

double supervised_baseline_accuracy(const PipelineInputs& inputs, const PipelineConfig& cfg) {
  const auto c = static_cast<Eigen::Index>(cfg.targets.size());
  const Eigen::Index d = inputs.test.features.cols();
  TrainConfig t = cfg.train_labeled;
  t.seed = derive_seed(cfg.seed, "transfer/labeled");
  const auto res = train_supervised(LinearModel(c, d), inputs.labeled, t);
  return evaluate_accuracy(res.model, inputs.test);
}

PipelineResult run_pipeline(const PipelineInputs& inputs, const PipelineConfig& cfg) {
  cfg.validate();
  PipelineResult out;
  RunReport& report = out.report;
  report.config_json = config_to_json(cfg);
  report.include_timings = cfg.report_timings;
  StageClock stage(report.timings_ms);

  const EmbeddingStore scads = stage("retrofit", [&] {
    RetrofitConfig rc;
    rc.mode = cfg.retrofit_mode;
    return retrofit(inputs.graph, inputs.words, rc);
  });

  out.selection = stage("select", [&] {
    SelectionRequest req;
    req.targets = cfg.targets;
    req.n_related = cfg.n_related;
    req.per_concept = cfg.per_concept;
    req.prune = cfg.prune;
    req.seed = derive_seed(cfg.seed, "select");
    return select_related_data(inputs.graph, scads, req);
  });
  for (std::size_t c = 0; c < cfg.targets.size(); ++c) {
    report.selection.emplace_back(cfg.targets[c].name, out.selection.related[c]);
  }
  report.selected_examples = static_cast<std::size_t>(out.selection.examples.size());

  const TransferConfig tcfg = transfer_config(cfg);
  std::optional<Taglet> transfer;
  auto transfer_taglet = [&]() -> const Taglet& {
    if (!transfer) transfer = train_transfer_taglet(out.selection, inputs.labeled, tcfg);
    return *transfer;
  };

  // Canonical module order keeps the vote matrix layout independent of how
  // the modules were listed.
  if (enabled(cfg, Module::Transfer)) {
    out.taglets.push_back(stage("transfer", transfer_taglet));
  }
  if (enabled(cfg, Module::Multitask)) {
    out.taglets.push_back(stage("multitask", [&] {
      MultitaskConfig mc;
      mc.train = cfg.train_multitask;
      mc.train.seed = derive_seed(cfg.seed, "multitask");
      mc.aux_weight = cfg.aux_weight;
      mc.hidden_dim = cfg.hidden_dim;
      return train_multitask_taglet(out.selection, inputs.labeled, mc);
    }));
  }
  if (enabled(cfg, Module::FixMatch)) {
    out.taglets.push_back(stage("fixmatch", [&] {
      FixMatchConfig fc;
      fc.pretrain = tcfg;
      fc.unlabeled = cfg.train_fixmatch;
      fc.unlabeled.seed = derive_seed(cfg.seed, "fixmatch");
      fc.threshold = cfg.threshold;
      fc.perturb = cfg.perturb;
      fc.perturb.seed = derive_seed(cfg.seed, "fixmatch/perturb");
      if (!(fc.threshold > 0.0)) throw Error(Errc::InvalidThreshold, "threshold must be > 0");
      if (inputs.unlabeled.rows() == 0) {
        throw Error(Errc::NoUnlabeledData, "fixmatch needs unlabeled data");
      }
      // Same settings as the transfer taglet, so its model is the pretrain.
      Taglet t = transfer_taglet();
      t.name = "fixmatch";
      t.model = fixmatch_refine(std::move(t.model), inputs.unlabeled, fc);
      return t;
    }));
  }
  if (enabled(cfg, Module::ZeroShot)) {
    out.taglets.push_back(stage("zeroshot", [&] {
      return build_zeroshot_taglet(cfg.targets, scads, out.selection, ZeroShotConfig{cfg.ridge});
    }));
  }

  out.pseudo = stage("pseudo_label", [&] { return pseudo_label_set(out.taglets, inputs.unlabeled); });

  out.end_model = stage("end_model", [&] {
    TrainConfig t = cfg.train_end;
    t.seed = derive_seed(cfg.seed, "end");
    return train_end_model(out.pseudo, inputs.labeled, class_names(out.selection), t);
  });

  stage("evaluate", [&] {
    for (const auto& t : out.taglets) {
      report.taglet_accuracy.emplace_back(t.name, accuracy(t.predict_batch(inputs.test.features),
                                                           inputs.test.labels));
    }
    report.ensemble_accuracy =
        accuracy(ensemble_predict(out.taglets, inputs.test.features), inputs.test.labels);
    report.end_model_accuracy = evaluate_accuracy(out.end_model, inputs.test);
    if (!inputs.labeled.empty()) report.baseline_accuracy = supervised_baseline_accuracy(inputs, cfg);
  });

  if (cfg.report_timings) {
    for (const auto& [name, ms] : report.timings_ms) {
      std::clog << "timing: " << name << ' ' << ms << " ms\n";
    }
  }
  return out;
}

PipelineResult run_pipeline(const PipelineConfig& cfg) {
  const PipelineInputs inputs = load_inputs(cfg);
  PipelineResult result = run_pipeline(inputs, cfg);
  if (cfg.output_dir) {
    staged("write", [&] {
      const auto& dir = *cfg.output_dir;
      std::filesystem::create_directories(dir / "taglets");
      save_selection(dir / "selection.json", result.selection);
      for (const auto& t : result.taglets) save_taglet(dir / "taglets" / (t.name + ".json"), t);
      write_pseudo_labels(dir / "pseudo_labels.csv", result.pseudo);
      save_end_model(dir / "end_model.json", result.end_model);
      std::ofstream out(dir / "report.json");
      if (!out) throw Error(Errc::FileNotFound, "cannot write report in " + dir.string());
      out << result.report.to_json() << '\n';
    });
  }
  return result;
}

}  // namespace taglets
