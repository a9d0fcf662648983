// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gesture {

enum class Errc {
  MissingJoint,
  DegeneratePose,
  InsufficientData,
  IndexOutOfRange,
  InvalidModel,
  MalformedLine,
  DimensionMismatch,
  InvalidConfig,
  ShapeMismatch,
  EmptyInput,
  SeedLengthMismatch,
  NoRecordedGraph,
  LengthMismatch,
  EmptyDataset,
  InvalidDuration,
  UntrainedModel,
  BatchTooSmall,
  DegenerateArm,
  InvalidLimbLength,
  EmptyReference,
  EmptyTrainingSet,
  MalformedFile,
  IoFailure,
  VersionMismatch,
};

std::string_view errc_name(Errc code) noexcept;

/// Single exception type for the library; `code()` identifies the failure.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& detail)
      : std::runtime_error(std::string(errc_name(code)) + ": " + detail),
        code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

/// Error raised while parsing a line-oriented file; carries the 1-based line.
class LineError : public Error {
 public:
  LineError(Errc code, std::size_t line_no, const std::string& detail)
      : Error(code, "line " + std::to_string(line_no) + ": " + detail),
        line_no_(line_no) {}

  std::size_t line_no() const noexcept { return line_no_; }

 private:
  std::size_t line_no_;
};

}  // namespace gesture
