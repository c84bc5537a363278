#include "spinenav/core/error.hpp"

namespace spinenav {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MismatchedLengths: return "MismatchedLengths";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::DegenerateGeometry: return "DegenerateGeometry";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NonMonotonicTimestamp: return "NonMonotonicTimestamp";
    case ErrorCode::ParallelRays: return "ParallelRays";
    case ErrorCode::ReprojectionRejected: return "ReprojectionRejected";
    case ErrorCode::MissingNormals: return "MissingNormals";
    case ErrorCode::NoCorrespondences: return "NoCorrespondences";
    case ErrorCode::CoincidentControlPoints: return "CoincidentControlPoints";
    case ErrorCode::PointsTooClose: return "PointsTooClose";
    case ErrorCode::InvalidParams: return "InvalidParams";
    case ErrorCode::UnknownRegion: return "UnknownRegion";
    case ErrorCode::NoIntersection: return "NoIntersection";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace spinenav
