#include <doctest.h>

#include <functional>

#include "taglets/error.hpp"
#include "taglets/pipeline.hpp"
#include "taglets/synthetic.hpp"

using namespace taglets;

namespace {

PipelineInputs inputs_for(const SyntheticTask& task) {
  PipelineInputs in;
  in.graph = graph_with_datasets(task);
  in.words = task.words;
  in.labeled = task.labeled;
  in.unlabeled = task.unlabeled;
  in.test = task.test;
  in.graph.freeze();
  return in;
}

PipelineConfig config_for(const SyntheticTask& task, std::uint64_t seed) {
  PipelineConfig cfg;
  cfg.seed = seed;
  cfg.targets = task.targets;
  return cfg;
}

// Means over a block of seeds disjoint from the ones used to pick defaults.
constexpr std::uint64_t kFirstSeed = 500;
constexpr int kSeeds = 20;

struct Means {
  double baseline = 0, end = 0, transfer = 0, multitask = 0, fixmatch = 0;
};

Means run_block(double relatedness, const std::function<void(PipelineConfig&)>& tweak) {
  Means m;
  for (int i = 0; i < kSeeds; ++i) {
    SyntheticSpec spec;
    spec.seed = kFirstSeed + static_cast<std::uint64_t>(i);
    spec.relatedness = relatedness;
    const SyntheticTask task = generate_synthetic_task(spec);
    PipelineConfig cfg = config_for(task, spec.seed);
    tweak(cfg);
    const auto r = run_pipeline(inputs_for(task), cfg).report;
    m.baseline += *r.baseline_accuracy / kSeeds;
    m.end += r.end_model_accuracy / kSeeds;
    for (const auto& [name, acc] : r.taglet_accuracy) {
      if (name == "transfer") m.transfer += acc / kSeeds;
      if (name == "multitask") m.multitask += acc / kSeeds;
      if (name == "fixmatch") m.fixmatch += acc / kSeeds;
    }
  }
  return m;
}

}  // namespace

TEST_SUITE("synthetic") {
  TEST_CASE("spec validation") {
    SyntheticSpec s;
    s.num_classes = 1;
    try {
      generate_synthetic_task(s);
      FAIL("expected InvalidSpec");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::InvalidSpec);
    }
    s = SyntheticSpec{};
    s.relatedness = 1.5;
    CHECK_THROWS_AS(generate_synthetic_task(s), Error);
    s = SyntheticSpec{};
    s.shots = -1;
    CHECK_THROWS_AS(generate_synthetic_task(s), Error);
  }

  TEST_CASE("generation is deterministic and well formed") {
    SyntheticSpec s;
    s.seed = 42;
    const SyntheticTask a = generate_synthetic_task(s);
    const SyntheticTask b = generate_synthetic_task(s);
    CHECK(a.labeled.features == b.labeled.features);
    CHECK(a.unlabeled == b.unlabeled);
    CHECK(a.test.features == b.test.features);
    CHECK(a.targets.size() == 5);
    CHECK(a.labeled.size() == 5);
    CHECK(a.unlabeled.rows() == 500);
    CHECK(a.test.size() == 250);
    CHECK(a.labeled.dim() == 16);
    // Target concepts carry no examples of their own.
    const ConceptGraph g = graph_with_datasets(a);
    for (const auto& t : a.targets) CHECK(g.example_count(t.concept_id) == 0);
  }

  TEST_CASE("unrelated auxiliary data still fills every slot") {
    SyntheticSpec s;
    s.seed = 7;
    s.relatedness = 0.0;
    const SyntheticTask task = generate_synthetic_task(s);
    PipelineConfig cfg = config_for(task, 7);
    cfg.modules = {Module::Transfer};
    const auto r = run_pipeline(inputs_for(task), cfg);
    CHECK(r.report.selected_examples == 5u * 10u * 100u);
  }

  TEST_CASE("directional behaviour over twenty seeds") {
    const Means full = run_block(1.0, [](PipelineConfig&) {});
    const Means unrelated = run_block(0.0, [](PipelineConfig&) {});
    const Means no_aux_weight = run_block(1.0, [](PipelineConfig& c) {
      c.aux_weight = 0.0;
      c.modules = {Module::Multitask};
    });
    const Means masked = run_block(1.0, [](PipelineConfig& c) {
      c.threshold = 1.5;
      c.modules = {Module::FixMatch};
    });
    MESSAGE("baseline " << full.baseline << " end " << full.end << " transfer " << full.transfer
                        << " multitask " << full.multitask << " fixmatch " << full.fixmatch);
    MESSAGE("rho=0 baseline " << unrelated.baseline << " end " << unrelated.end);
    MESSAGE("lambda=0 multitask " << no_aux_weight.multitask << " masked fixmatch " << masked.fixmatch);

    CHECK(full.transfer >= full.baseline);
    CHECK(full.multitask >= no_aux_weight.multitask);
    // Linear models rarely reach the default confidence threshold here, so the
    // unlabeled phase is close to inert; it must at least not hurt.
    CHECK(full.fixmatch >= masked.fixmatch - 0.01);
    CHECK(full.end - full.baseline > unrelated.end - unrelated.baseline);
  }
}
