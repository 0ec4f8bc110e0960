#include "driftdecomp/error.hpp"

namespace driftdecomp {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::GridTooSmall: return "GridTooSmall";
    case ErrorKind::DegenerateVariance: return "DegenerateVariance";
    case ErrorKind::StabilityViolation: return "StabilityViolation";
    case ErrorKind::NonFiniteState: return "NonFiniteState";
    case ErrorKind::NotMultipleOfDt: return "NotMultipleOfDt";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::IoError: return "IoError";
    case ErrorKind::FormatVersionMismatch: return "FormatVersionMismatch";
    case ErrorKind::ChecksumMismatch: return "ChecksumMismatch";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::RequiresScalarOutput: return "RequiresScalarOutput";
    case ErrorKind::EmptyBatch: return "EmptyBatch";
    case ErrorKind::NonFiniteLoss: return "NonFiniteLoss";
    case ErrorKind::UnknownBenchmark: return "UnknownBenchmark";
    case ErrorKind::SolverDiverged: return "SolverDiverged";
    case ErrorKind::IncompatibleRhs: return "IncompatibleRhs";
    case ErrorKind::ZeroReference: return "ZeroReference";
    case ErrorKind::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

}  // namespace driftdecomp
