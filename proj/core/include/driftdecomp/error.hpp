#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace driftdecomp {

// Every failure the library reports carries one of these categories; the CLI
// prints the category name so callers can branch on it.
enum class ErrorKind {
  GridTooSmall,
  DegenerateVariance,
  StabilityViolation,
  NonFiniteState,
  NotMultipleOfDt,
  InvalidArgument,
  IoError,
  FormatVersionMismatch,
  ChecksumMismatch,
  DimensionMismatch,
  RequiresScalarOutput,
  EmptyBatch,
  NonFiniteLoss,
  UnknownBenchmark,
  SolverDiverged,
  IncompatibleRhs,
  ZeroReference,
  ConfigError,
};

std::string_view to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace driftdecomp
