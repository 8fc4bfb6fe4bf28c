#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gdl {

enum class ErrorCode {
  AsymmetricMatrix,
  BadHistogram,
  FeatureShapeMismatch,
  AllZeroMass,
  ParseError,
  ValidationError,
  InfeasibleMarginals,
  NumericalFailure,
  ShapeMismatch,
  MissingFeatures,
  LengthMismatch,
  MissingWeightAtoms,
  MissingDuals,
  MissingGraphs,
  EmptyDataset,
  BadK,
  DegenerateVariance,
  BadArgument,
  IoError,
};

std::string_view to_string(ErrorCode code) noexcept;

// Every failure surfaced by the library carries a machine-readable code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace gdl
