#include "taglets/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "taglets/dataset.hpp"
#include "taglets/error.hpp"

namespace taglets {

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

double parse_double(std::string_view text) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t')) text.remove_suffix(1);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    throw Error(Errc::MalformedData, "not a number: '" + std::string(text) + "'");
  }
  if (!std::isfinite(v)) {
    throw Error(Errc::MalformedData, "non-finite value: '" + std::string(text) + "'");
  }
  return v;
}

namespace {

void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

}  // namespace

FeatureTable read_feature_csv(std::istream& in, bool has_class_column, const std::string& source) {
  std::string line;
  if (!std::getline(in, line)) {
    throw Error(Errc::MalformedData, source + ": missing header");
  }
  strip_cr(line);
  const auto header = split(line, ',');
  const std::size_t offset = has_class_column ? 1 : 0;
  if (header.size() < offset + 1 || (has_class_column && header[0] != "class")) {
    throw Error(Errc::MalformedData, source + ":1: expected header 'class,f1,...,fd'");
  }
  const std::size_t dim = header.size() - offset;

  FeatureTable table;
  std::vector<double> values;
  std::size_t rows = 0;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    strip_cr(line);
    if (line.empty()) continue;
    const auto fields = split(line, ',');
    if (fields.size() != dim + offset) {
      throw Error(Errc::MalformedData, source + ":" + std::to_string(lineno) + ": expected " +
                                           std::to_string(dim + offset) + " fields, got " +
                                           std::to_string(fields.size()));
    }
    if (has_class_column) table.labels.emplace_back(fields[0]);
    for (std::size_t j = offset; j < fields.size(); ++j) {
      try {
        values.push_back(parse_double(fields[j]));
      } catch (const Error& e) {
        throw Error(Errc::MalformedData,
                    source + ":" + std::to_string(lineno) + ": " + e.what());
      }
    }
    ++rows;
  }
  table.features = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      values.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(dim));
  return table;
}

FeatureTable read_feature_csv(const std::filesystem::path& path, bool has_class_column) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::FileNotFound, "cannot open " + path.string());
  return read_feature_csv(in, has_class_column, path.string());
}

namespace {

void write_rows(std::ostream& out, const std::vector<std::string>* labels,
                const Eigen::MatrixXd& features) {
  const bool with_class = labels != nullptr;
  if (with_class && labels->size() != static_cast<std::size_t>(features.rows())) {
    throw Error(Errc::ShapeError, "write_feature_csv: label/row count mismatch");
  }
  if (with_class) out << "class";
  for (Eigen::Index j = 0; j < features.cols(); ++j) {
    if (with_class || j > 0) out << ',';
    out << 'f' << (j + 1);
  }
  out << '\n';
  for (Eigen::Index i = 0; i < features.rows(); ++i) {
    if (with_class) out << (*labels)[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < features.cols(); ++j) {
      if (with_class || j > 0) out << ',';
      out << format_double(features(i, j));
    }
    out << '\n';
  }
}

}  // namespace

void write_feature_csv(std::ostream& out, const std::vector<std::string>& labels,
                       const Eigen::MatrixXd& features) {
  write_rows(out, &labels, features);
}

void write_unlabeled_csv(std::ostream& out, const Eigen::MatrixXd& features) {
  write_rows(out, nullptr, features);
}

void write_feature_csv(const std::filesystem::path& path, const std::vector<std::string>& labels,
                       const Eigen::MatrixXd& features) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::FileNotFound, "cannot write " + path.string());
  write_rows(out, &labels, features);
}

void write_unlabeled_csv(const std::filesystem::path& path, const Eigen::MatrixXd& features) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::FileNotFound, "cannot write " + path.string());
  write_rows(out, nullptr, features);
}

SoftLabeledData one_hot(const LabeledData& data, Eigen::Index num_classes) {
  SoftLabeledData out;
  out.features = data.features;
  out.targets = Eigen::MatrixXd::Zero(data.size(), num_classes);
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    const int y = data.labels[static_cast<std::size_t>(i)];
    if (y < 0 || y >= num_classes) {
      throw Error(Errc::ShapeError, "label " + std::to_string(y) + " outside [0, " +
                                        std::to_string(num_classes) + ")");
    }
    out.targets(i, y) = 1.0;
  }
  return out;
}

SoftLabeledData concat(const SoftLabeledData& a, const SoftLabeledData& b) {
  if (a.empty()) return b;
  if (b.empty()) return a;
  if (a.features.cols() != b.features.cols() || a.targets.cols() != b.targets.cols()) {
    throw Error(Errc::ShapeError, "concat: column mismatch");
  }
  SoftLabeledData out;
  out.features.resize(a.size() + b.size(), a.features.cols());
  out.features << a.features, b.features;
  out.targets.resize(a.size() + b.size(), a.targets.cols());
  out.targets << a.targets, b.targets;
  return out;
}

}  // namespace taglets
