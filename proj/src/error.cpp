#include "crossdiff/error.hpp"

namespace crossdiff {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedHeader: return "MalformedHeader";
    case ErrorCode::TruncatedData: return "TruncatedData";
    case ErrorCode::UnsupportedMaxval: return "UnsupportedMaxval";
    case ErrorCode::ConstantImage: return "ConstantImage";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::ZeroDenominator: return "ZeroDenominator";
    case ErrorCode::ZeroNorm: return "ZeroNorm";
    case ErrorCode::TooSmall: return "TooSmall";
    case ErrorCode::NonPositiveDetector: return "NonPositiveDetector";
    case ErrorCode::BadDimensions: return "BadDimensions";
    case ErrorCode::SolverDiverged: return "SolverDiverged";
    case ErrorCode::SingularMatrix: return "SingularMatrix";
    case ErrorCode::FixedPointStalled: return "FixedPointStalled";
    case ErrorCode::HypothesisViolated: return "HypothesisViolated";
    case ErrorCode::UnstableTimeStep: return "UnstableTimeStep";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace crossdiff
