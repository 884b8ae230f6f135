#include <doctest.h>

#include <fstream>
#include <sstream>

#include <json.hpp>

#include <cli.hpp>
#include "helpers.hpp"

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome call(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = taglets::cli::dispatch(args, out, err);
  return {code, out.str(), err.str()};
}

std::string path_of(const testing::TempDir& d, const char* name) { return (d.path() / name).string(); }

// Small synthetic task on disk plus a built store.
void prepare(const testing::TempDir& d) {
  const auto synth = call({"synth", "--out", d.path().string(), "--seed", "3", "--classes", "3",
                           "--dim", "6", "--unlabeled", "60", "--aux-per-class", "4",
                           "--distractors", "4", "--examples-per-concept", "10",
                           "--test-per-class", "10"});
  REQUIRE(synth.code == 0);
  const auto build = call({"build", "--graph", path_of(d, "graph.jsonl"), "--words",
                           path_of(d, "words.tsv"), "--manifest", path_of(d, "aux_related.json"),
                           "--manifest", path_of(d, "aux_misc.json"), "--out",
                           path_of(d, "store.scads")});
  REQUIRE(build.code == 0);
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("usage errors exit with 1") {
    CHECK(call({"frobnicate"}).code == 1);
    CHECK(call({}).code == 1);
    CHECK(call({"related", "--class", "x"}).code == 1);
    CHECK(call({"--help"}).code == 0);
  }

  TEST_CASE("build, related and select") {
    testing::TempDir d("cli");
    prepare(d);
    const auto related = call({"related", "--db", path_of(d, "store.scads"), "--class", "class_0",
                               "--n", "3"});
    REQUIRE(related.code == 0);
    const auto list = nlohmann::json::parse(related.out);
    REQUIRE(list.is_array());
    CHECK(list.size() == 3);
    for (const auto& r : list) CHECK(r.at("concept") != "class_0");
    CHECK(list[0].at("similarity").get<double>() >= list[1].at("similarity").get<double>());

    const auto sel = call({"select", "--db", path_of(d, "store.scads"), "--class", "class_0",
                           "--class", "class_1", "--n", "2", "--k", "5", "--out",
                           path_of(d, "sel.json")});
    REQUIRE(sel.code == 0);
    const auto j = nlohmann::json::parse(sel.out);
    CHECK(j.at("related").at("class_1").size() == 2);
    CHECK(std::filesystem::exists(d.path() / "sel.csv"));
  }

  TEST_CASE("install and remove update the store") {
    testing::TempDir d("cli_install");
    prepare(d);
    const auto rm = call({"install", "--db", path_of(d, "store.scads"), "--remove", "aux_misc"});
    REQUIRE(rm.code == 0);
    CHECK(nlohmann::json::parse(rm.out).at("datasets").size() == 1);
    const auto add = call({"install", "--db", path_of(d, "store.scads"), "--manifest",
                           path_of(d, "aux_misc.json")});
    REQUIRE(add.code == 0);
    CHECK(nlohmann::json::parse(add.out).at("datasets").size() == 2);
    CHECK(call({"install", "--db", path_of(d, "store.scads")}).code == 1);
    CHECK(call({"install", "--db", path_of(d, "store.scads"), "--remove", "nope"}).code == 2);
  }

  TEST_CASE("run is reproducible and eval reads its artifacts") {
    testing::TempDir d("cli_run");
    prepare(d);
    const auto a = call({"run", "--config", path_of(d, "config.json")});
    const auto b = call({"run", "--config", path_of(d, "config.json")});
    REQUIRE(a.code == 0);
    CHECK(a.out == b.out);
    const auto saved = call({"run", "--config", path_of(d, "config.json"), "--output-dir",
                             path_of(d, "out")});
    REQUIRE(saved.code == 0);
    const auto report = nlohmann::json::parse(saved.out);
    CHECK(report.at("end_model_accuracy") == nlohmann::json::parse(a.out).at("end_model_accuracy"));

    const auto eval = call({"eval", "--model", path_of(d, "out/end_model.json"), "--test",
                            path_of(d, "test.csv")});
    REQUIRE(eval.code == 0);
    CHECK(nlohmann::json::parse(eval.out).at("accuracy") == report.at("end_model_accuracy"));

    const auto one = call({"run", "--config", path_of(d, "config.json"), "--modules", "zeroshot"});
    REQUIRE(one.code == 0);
    CHECK(nlohmann::json::parse(one.out).at("taglets").size() == 1);
  }

  TEST_CASE("data errors exit with 2 and name the stage") {
    testing::TempDir d("cli_err");
    prepare(d);
    std::filesystem::remove(d.path() / "graph.jsonl");
    const auto r = call({"run", "--config", path_of(d, "config.json")});
    CHECK(r.code == 2);
    CHECK(r.err.find("[load]") != std::string::npos);
    CHECK(r.err.find("FileNotFound") != std::string::npos);

    std::ofstream(d.path() / "bad.json") << "{\"name\":";
    CHECK(call({"eval", "--model", path_of(d, "bad.json"), "--test", path_of(d, "test.csv")}).code == 2);
    CHECK(call({"related", "--db", path_of(d, "store.scads"), "--class", "zzzz"}).code == 2);
  }
}
