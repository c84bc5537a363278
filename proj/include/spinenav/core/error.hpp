#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace spinenav {

enum class ErrorCode {
  MismatchedLengths,
  EmptyInput,
  DegenerateGeometry,
  InvalidArgument,
  NonMonotonicTimestamp,
  ParallelRays,
  ReprojectionRejected,
  MissingNormals,
  NoCorrespondences,
  CoincidentControlPoints,
  PointsTooClose,
  InvalidParams,
  UnknownRegion,
  NoIntersection,
  ParseError,
  IoError,
};

std::string_view to_string(ErrorCode code);

/// Exception carrying a machine-readable error kind. `index()` is set for
/// errors that point at a specific input element (e.g. PointsTooClose).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what,
        std::optional<std::size_t> index = std::nullopt)
      : std::runtime_error(std::string(to_string(code)) + ": " + what),
        code_(code),
        index_(index) {}

  ErrorCode code() const noexcept { return code_; }
  std::optional<std::size_t> index() const noexcept { return index_; }

 private:
  ErrorCode code_;
  std::optional<std::size_t> index_;
};

}  // namespace spinenav
