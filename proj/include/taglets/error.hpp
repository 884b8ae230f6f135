#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace taglets {

enum class Errc {
  InvalidConcept,
  UnknownConcept,
  InvalidWeight,
  InvalidHierarchy,
  MalformedData,
  FrozenGraph,
  MissingWordVector,
  NoApproximation,
  DegenerateVector,
  EmptyCandidates,
  IndexError,
  InfiniteLoss,
  ShapeError,
  InvalidThreshold,
  NoLabeledData,
  NoUnlabeledData,
  NoTaglets,
  NoTrainingData,
  NoTestData,
  InvalidSpec,
  InvalidConfig,
  FileNotFound,
};

std::string_view errc_name(Errc code) noexcept;

// Every failure in the library surfaces as this type. `stage` is filled in by
// the pipeline when an error crosses a stage boundary.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  Errc code() const noexcept { return code_; }
  const std::string& stage() const noexcept { return stage_; }

  Error with_stage(std::string stage) const {
    Error e(code_, what());
    e.stage_ = std::move(stage);
    return e;
  }

 private:
  Errc code_;
  std::string stage_;
};

inline std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::InvalidConcept: return "InvalidConcept";
    case Errc::UnknownConcept: return "UnknownConcept";
    case Errc::InvalidWeight: return "InvalidWeight";
    case Errc::InvalidHierarchy: return "InvalidHierarchy";
    case Errc::MalformedData: return "MalformedData";
    case Errc::FrozenGraph: return "FrozenGraph";
    case Errc::MissingWordVector: return "MissingWordVector";
    case Errc::NoApproximation: return "NoApproximation";
    case Errc::DegenerateVector: return "DegenerateVector";
    case Errc::EmptyCandidates: return "EmptyCandidates";
    case Errc::IndexError: return "IndexError";
    case Errc::InfiniteLoss: return "InfiniteLoss";
    case Errc::ShapeError: return "ShapeError";
    case Errc::InvalidThreshold: return "InvalidThreshold";
    case Errc::NoLabeledData: return "NoLabeledData";
    case Errc::NoUnlabeledData: return "NoUnlabeledData";
    case Errc::NoTaglets: return "NoTaglets";
    case Errc::NoTrainingData: return "NoTrainingData";
    case Errc::NoTestData: return "NoTestData";
    case Errc::InvalidSpec: return "InvalidSpec";
    case Errc::InvalidConfig: return "InvalidConfig";
    case Errc::FileNotFound: return "FileNotFound";
  }
  return "Unknown";
}

}  // namespace taglets
