#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "taglets/distill.hpp"
#include "taglets/taglets.hpp"

namespace taglets {

// {"name":..., "classes":[...], "W":[[...]], "b":[...]}; doubles written in
// shortest round-trip form so a reload is bit-identical.
std::string taglet_to_json(const Taglet& taglet);
Taglet taglet_from_json(const std::string& text);
void save_taglet(const std::filesystem::path& path, const Taglet& taglet);
Taglet load_taglet(const std::filesystem::path& path);

// The end model uses the taglet format with name "end_model".
void save_end_model(const std::filesystem::path& path, const EndModel& model);
EndModel load_end_model(const std::filesystem::path& path);

// CSV `p1,...,pC,f1,...,fd`.
void write_pseudo_labels(std::ostream& out, const PseudoLabeledSet& set);
void write_pseudo_labels(const std::filesystem::path& path, const PseudoLabeledSet& set);
PseudoLabeledSet read_pseudo_labels(std::istream& in, Eigen::Index num_classes);

}  // namespace taglets
