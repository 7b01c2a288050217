#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace psfem {

enum class ErrorKind {
  SingularTensor,
  NonSPD,
  InvertedElement,
  NonPositiveJ,
  DimensionMismatch,
  UnsupportedModel,
  UnsupportedRegime,
  NoConvergence,
  NonPhysicalRoot,
  SingularCondensation,
  ConstraintConflict,
  NewtonDiverged,
  LinearSolveFailed,
  SingularSystem,
  InvalidArgument,
  PlacementFailed,
  IoError,
  ConfigError,
};

constexpr std::string_view to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::SingularTensor: return "SingularTensor";
    case ErrorKind::NonSPD: return "NonSPD";
    case ErrorKind::InvertedElement: return "InvertedElement";
    case ErrorKind::NonPositiveJ: return "NonPositiveJ";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::UnsupportedModel: return "UnsupportedModel";
    case ErrorKind::UnsupportedRegime: return "UnsupportedRegime";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::NonPhysicalRoot: return "NonPhysicalRoot";
    case ErrorKind::SingularCondensation: return "SingularCondensation";
    case ErrorKind::ConstraintConflict: return "ConstraintConflict";
    case ErrorKind::NewtonDiverged: return "NewtonDiverged";
    case ErrorKind::LinearSolveFailed: return "LinearSolveFailed";
    case ErrorKind::SingularSystem: return "SingularSystem";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::PlacementFailed: return "PlacementFailed";
    case ErrorKind::IoError: return "IoError";
    case ErrorKind::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

/// Every failure raised by the library carries a machine-checkable kind.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace psfem
