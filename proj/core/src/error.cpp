// SPDX-License-Identifier: Apache-2.0
#include "gesture/error.hpp"

namespace gesture {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::MissingJoint: return "MissingJoint";
    case Errc::DegeneratePose: return "DegeneratePose";
    case Errc::InsufficientData: return "InsufficientData";
    case Errc::IndexOutOfRange: return "IndexOutOfRange";
    case Errc::InvalidModel: return "InvalidModel";
    case Errc::MalformedLine: return "MalformedLine";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::InvalidConfig: return "InvalidConfig";
    case Errc::ShapeMismatch: return "ShapeMismatch";
    case Errc::EmptyInput: return "EmptyInput";
    case Errc::SeedLengthMismatch: return "SeedLengthMismatch";
    case Errc::NoRecordedGraph: return "NoRecordedGraph";
    case Errc::LengthMismatch: return "LengthMismatch";
    case Errc::EmptyDataset: return "EmptyDataset";
    case Errc::InvalidDuration: return "InvalidDuration";
    case Errc::UntrainedModel: return "UntrainedModel";
    case Errc::BatchTooSmall: return "BatchTooSmall";
    case Errc::DegenerateArm: return "DegenerateArm";
    case Errc::InvalidLimbLength: return "InvalidLimbLength";
    case Errc::EmptyReference: return "EmptyReference";
    case Errc::EmptyTrainingSet: return "EmptyTrainingSet";
    case Errc::MalformedFile: return "MalformedFile";
    case Errc::IoFailure: return "IoFailure";
    case Errc::VersionMismatch: return "VersionMismatch";
  }
  return "Unknown";
}

}  // namespace gesture
