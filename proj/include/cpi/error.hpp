// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cpi {

enum class ErrorCode {
  DimensionMismatch,
  NotSymmetric,
  NotPositiveDefinite,
  RankDeficientBasis,
  ConvergenceFailure,
  FactorizationFailure,
  SingularShift,
  IncompleteSpectrum,
  EmptyCoupling,
  NearSingularShift,
  AllTruncated,
  DomainError,
  UnsupportedDimension,
  NoRoot,
  OutOfRange,
  NoPositiveElement,
  PoleCollision,
  DegenerateInterface,
  EmptyProblem,
  PerturbationTouchesExterior,
  BasisMismatch,
  ParseError,
  IoError,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NotSymmetric: return "NotSymmetric";
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::RankDeficientBasis: return "RankDeficientBasis";
    case ErrorCode::ConvergenceFailure: return "ConvergenceFailure";
    case ErrorCode::FactorizationFailure: return "FactorizationFailure";
    case ErrorCode::SingularShift: return "SingularShift";
    case ErrorCode::IncompleteSpectrum: return "IncompleteSpectrum";
    case ErrorCode::EmptyCoupling: return "EmptyCoupling";
    case ErrorCode::NearSingularShift: return "NearSingularShift";
    case ErrorCode::AllTruncated: return "AllTruncated";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::UnsupportedDimension: return "UnsupportedDimension";
    case ErrorCode::NoRoot: return "NoRoot";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::NoPositiveElement: return "NoPositiveElement";
    case ErrorCode::PoleCollision: return "PoleCollision";
    case ErrorCode::DegenerateInterface: return "DegenerateInterface";
    case ErrorCode::EmptyProblem: return "EmptyProblem";
    case ErrorCode::PerturbationTouchesExterior: return "PerturbationTouchesExterior";
    case ErrorCode::BasisMismatch: return "BasisMismatch";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

// All library failures are reported through this type; `code()` identifies the
// failure class so callers (and the CLI exit-code mapping) can branch on it.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Usage and input-format failures map to exit code 1, everything else is numerical.
constexpr bool is_input_error(ErrorCode code) {
  return code == ErrorCode::ParseError || code == ErrorCode::IoError;
}

}  // namespace cpi
