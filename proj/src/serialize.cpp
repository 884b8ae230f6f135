#include "taglets/serialize.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "taglets/csv.hpp"
#include "taglets/error.hpp"

namespace taglets {

using ojson = nlohmann::ordered_json;

std::string taglet_to_json(const Taglet& taglet) {
  ojson j;
  j["name"] = taglet.name;
  j["classes"] = taglet.classes;
  j["W"] = ojson::array();
  for (Eigen::Index r = 0; r < taglet.model.weights.rows(); ++r) {
    std::vector<double> row(static_cast<std::size_t>(taglet.model.weights.cols()));
    for (Eigen::Index c = 0; c < taglet.model.weights.cols(); ++c) {
      row[static_cast<std::size_t>(c)] = taglet.model.weights(r, c);
    }
    j["W"].push_back(row);
  }
  j["b"] = std::vector<double>(taglet.model.bias.data(),
                               taglet.model.bias.data() + taglet.model.bias.size());
  return j.dump();
}

Taglet taglet_from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    Taglet t;
    t.name = j.at("name").get<std::string>();
    t.classes = j.at("classes").get<std::vector<std::string>>();
    const auto rows = j.at("W").get<std::vector<std::vector<double>>>();
    const auto bias = j.at("b").get<std::vector<double>>();
    const auto c = static_cast<Eigen::Index>(rows.size());
    const Eigen::Index d = rows.empty() ? 0 : static_cast<Eigen::Index>(rows.front().size());
    if (bias.size() != rows.size() || t.classes.size() != rows.size()) {
      throw Error(Errc::MalformedData, "taglet JSON: W, b and classes disagree on class count");
    }
    Eigen::MatrixXd w(c, d);
    for (Eigen::Index r = 0; r < c; ++r) {
      const auto& row = rows[static_cast<std::size_t>(r)];
      if (static_cast<Eigen::Index>(row.size()) != d) {
        throw Error(Errc::MalformedData, "taglet JSON: ragged W");
      }
      for (Eigen::Index k = 0; k < d; ++k) w(r, k) = row[static_cast<std::size_t>(k)];
    }
    t.model = LinearModel(std::move(w),
                          Eigen::Map<const Eigen::VectorXd>(bias.data(), static_cast<Eigen::Index>(bias.size())));
    if (!all_finite(t.model.weights) || !all_finite(t.model.bias)) {
      throw Error(Errc::MalformedData, "taglet JSON: non-finite parameters");
    }
    return t;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::MalformedData, std::string("taglet JSON: ") + e.what());
  }
}

void save_taglet(const std::filesystem::path& path, const Taglet& taglet) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::FileNotFound, "cannot write " + path.string());
  out << taglet_to_json(taglet) << '\n';
}

Taglet load_taglet(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::FileNotFound, "cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return taglet_from_json(buf.str());
}

void save_end_model(const std::filesystem::path& path, const EndModel& model) {
  save_taglet(path, Taglet{"end_model", model.classes, model.model});
}

EndModel load_end_model(const std::filesystem::path& path) {
  auto t = load_taglet(path);
  return EndModel{std::move(t.classes), std::move(t.model)};
}

void write_pseudo_labels(std::ostream& out, const PseudoLabeledSet& set) {
  const Eigen::Index c = set.labels.cols();
  const Eigen::Index d = set.features.cols();
  for (Eigen::Index k = 0; k < c; ++k) out << (k ? "," : "") << 'p' << (k + 1);
  for (Eigen::Index k = 0; k < d; ++k) out << ',' << 'f' << (k + 1);
  out << '\n';
  for (Eigen::Index i = 0; i < set.size(); ++i) {
    for (Eigen::Index k = 0; k < c; ++k) out << (k ? "," : "") << format_double(set.labels(i, k));
    for (Eigen::Index k = 0; k < d; ++k) out << ',' << format_double(set.features(i, k));
    out << '\n';
  }
}

void write_pseudo_labels(const std::filesystem::path& path, const PseudoLabeledSet& set) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::FileNotFound, "cannot write " + path.string());
  write_pseudo_labels(out, set);
}

PseudoLabeledSet read_pseudo_labels(std::istream& in, Eigen::Index num_classes) {
  const FeatureTable table = read_feature_csv(in, false, "<pseudo labels>");
  if (table.features.cols() < num_classes) {
    throw Error(Errc::MalformedData, "pseudo-label CSV has fewer columns than classes");
  }
  PseudoLabeledSet out;
  out.labels = table.features.leftCols(num_classes);
  out.features = table.features.rightCols(table.features.cols() - num_classes);
  return out;
}

}  // namespace taglets
