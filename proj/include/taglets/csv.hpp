#pragma once

#include <Eigen/Dense>

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace taglets {

// Feature CSV: header `class,f1,...,fd` (or `f1,...,fd` for unlabeled data),
// one example per row, '.' as the decimal point.
struct FeatureTable {
  std::vector<std::string> labels;  // empty when the table has no class column
  Eigen::MatrixXd features;
};

FeatureTable read_feature_csv(std::istream& in, bool has_class_column = true,
                              const std::string& source = "<stream>");
FeatureTable read_feature_csv(const std::filesystem::path& path, bool has_class_column = true);

void write_feature_csv(std::ostream& out, const std::vector<std::string>& labels,
                       const Eigen::MatrixXd& features);
void write_feature_csv(const std::filesystem::path& path, const std::vector<std::string>& labels,
                       const Eigen::MatrixXd& features);
void write_unlabeled_csv(std::ostream& out, const Eigen::MatrixXd& features);
void write_unlabeled_csv(const std::filesystem::path& path, const Eigen::MatrixXd& features);

// Shortest decimal text that parses back to the same double.
std::string format_double(double v);
double parse_double(std::string_view text);  // throws MalformedData

std::vector<std::string_view> split(std::string_view line, char sep);

}  // namespace taglets
