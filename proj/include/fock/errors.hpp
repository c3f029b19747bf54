#pragma once

#include <stdexcept>
#include <string>

namespace fock {

enum class ErrorCode {
  NonPositiveDefinite,
  Overflow,
  ThetaZero,
  Degenerate,
  QuadratureFailure,
  PathAmbiguous,
  BranchPoint,
  CalibrationFailure,
  EmbeddingInvalid,
  DegenerateGraph,
  Inconsistent,
  DegenerateAngles,
  ZeroEdge,
  PeriodicityRequired,
  AnglePole,
  PolePoint,
  NonGenericT,
  NearSingular,
  SectorBlocked,
  CalibrationNeeded,
  SingularGrid,
  PathCrossesAngles,
  PatternMismatch,
  InputError,
};

inline const char* to_string(ErrorCode c) {
  switch (c) {
    case ErrorCode::NonPositiveDefinite: return "NonPositiveDefinite";
    case ErrorCode::Overflow: return "Overflow";
    case ErrorCode::ThetaZero: return "ThetaZero";
    case ErrorCode::Degenerate: return "Degenerate";
    case ErrorCode::QuadratureFailure: return "QuadratureFailure";
    case ErrorCode::PathAmbiguous: return "PathAmbiguous";
    case ErrorCode::BranchPoint: return "BranchPoint";
    case ErrorCode::CalibrationFailure: return "CalibrationFailure";
    case ErrorCode::EmbeddingInvalid: return "EmbeddingInvalid";
    case ErrorCode::DegenerateGraph: return "DegenerateGraph";
    case ErrorCode::Inconsistent: return "Inconsistent";
    case ErrorCode::DegenerateAngles: return "DegenerateAngles";
    case ErrorCode::ZeroEdge: return "ZeroEdge";
    case ErrorCode::PeriodicityRequired: return "PeriodicityRequired";
    case ErrorCode::AnglePole: return "AnglePole";
    case ErrorCode::PolePoint: return "PolePoint";
    case ErrorCode::NonGenericT: return "NonGenericT";
    case ErrorCode::NearSingular: return "NearSingular";
    case ErrorCode::SectorBlocked: return "SectorBlocked";
    case ErrorCode::CalibrationNeeded: return "CalibrationNeeded";
    case ErrorCode::SingularGrid: return "SingularGrid";
    case ErrorCode::PathCrossesAngles: return "PathCrossesAngles";
    case ErrorCode::PatternMismatch: return "PatternMismatch";
    case ErrorCode::InputError: return "InputError";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace fock
