#include "taglets/graph_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "taglets/error.hpp"

namespace taglets {

using ojson = nlohmann::ordered_json;

namespace {

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

void write_graph_lines(std::ostream& out, const ConceptGraph& graph) {
  for (const auto& c : graph.concepts()) {
    ojson j;
    j["type"] = "concept";
    j["id"] = c.id;
    j["name"] = c.name;
    j["aliases"] = c.aliases;
    out << j.dump() << '\n';
  }
  for (const auto& e : graph.edges()) {
    ojson j;
    j["type"] = "edge";
    j["src"] = e.src;
    j["dst"] = e.dst;
    j["relation"] = e.relation;
    j["weight"] = e.weight;
    out << j.dump() << '\n';
  }
  for (const auto& d : graph.datasets()) {
    ojson j;
    j["type"] = "dataset";
    j["name"] = d.name;
    j["classes"] = ojson::object();
    for (const auto& [cls, cid] : d.classes) j["classes"][cls] = cid;
    out << j.dump() << '\n';
  }
  for (const auto& c : graph.concepts()) {
    for (const auto& a : graph.attachments(c.id)) {
      ojson j;
      j["type"] = "example";
      j["dataset"] = a.dataset;
      j["concept"] = c.id;
      j["features"] = to_std(a.features);
      out << j.dump() << '\n';
    }
  }
}

Eigen::VectorXd to_vector(const nlohmann::ordered_json& arr) {
  const auto v = arr.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

// Parses every line; embedding lines are only accepted when `scads` is given.
ConceptGraph parse_lines(std::istream& in, const std::string& source, EmbeddingStore* scads) {
  ConceptGraph graph;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    const std::string where = source + ":" + std::to_string(lineno) + ": ";
    try {
      const auto j = nlohmann::ordered_json::parse(line);
      const auto type = j.at("type").get<std::string>();
      if (type == "concept") {
        Concept c;
        c.id = j.at("id").get<std::string>();
        c.name = j.value("name", c.id);
        c.aliases = j.value("aliases", std::vector<std::string>{});
        graph.upsert_concept(std::move(c));
      } else if (type == "edge") {
        RelationEdge e;
        e.src = j.at("src").get<std::string>();
        e.dst = j.at("dst").get<std::string>();
        e.relation = j.value("relation", std::string("related-to"));
        e.weight = j.contains("weight") ? j.at("weight").get<double>() : 1.0;
        graph.upsert_edge(std::move(e));
      } else if (type == "dataset") {
        std::vector<std::pair<std::string, std::string>> classes;
        for (const auto& [cls, cid] : j.at("classes").items()) {
          classes.emplace_back(cls, cid.get<std::string>());
        }
        graph.install_dataset(j.at("name").get<std::string>(), classes, FeatureTable{});
      } else if (type == "example") {
        graph.attach_example(j.at("dataset").get<std::string>(),
                             j.at("concept").get<std::string>(), to_vector(j.at("features")));
      } else if (type == "embedding" && scads != nullptr) {
        scads->insert(j.at("term").get<std::string>(), to_vector(j.at("vector")));
      } else {
        throw Error(Errc::MalformedData, "unknown line type '" + type + "'");
      }
    } catch (const nlohmann::json::exception& e) {
      throw Error(Errc::MalformedData, where + e.what());
    } catch (const Error& e) {
      throw Error(Errc::MalformedData, where + std::string(errc_name(e.code())) + ": " + e.what());
    }
  }
  return graph;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::FileNotFound, "cannot open " + path.string());
  return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::FileNotFound, "cannot write " + path.string());
  return out;
}

}  // namespace

void save_graph(std::ostream& out, const ConceptGraph& graph) { write_graph_lines(out, graph); }

void save_graph(const std::filesystem::path& path, const ConceptGraph& graph) {
  auto out = open_output(path);
  write_graph_lines(out, graph);
}

ConceptGraph load_graph(std::istream& in, const std::string& source) {
  return parse_lines(in, source, nullptr);
}

ConceptGraph load_graph(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_lines(in, path.string(), nullptr);
}

void save_store(const std::filesystem::path& path, const ScadsStore& store) {
  auto out = open_output(path);
  write_graph_lines(out, store.graph);
  for (std::size_t i = 0; i < store.scads.size(); ++i) {
    ojson j;
    j["type"] = "embedding";
    j["term"] = store.scads.terms()[i];
    j["vector"] = to_std(store.scads.vector(i));
    out << j.dump() << '\n';
  }
}

ScadsStore load_store(std::istream& in, const std::string& source, bool freeze) {
  ScadsStore store;
  store.graph = parse_lines(in, source, &store.scads);
  if (freeze) store.graph.freeze();
  return store;
}

ScadsStore load_store(const std::filesystem::path& path, bool freeze) {
  auto in = open_input(path);
  return load_store(in, path.string(), freeze);
}

}  // namespace taglets
