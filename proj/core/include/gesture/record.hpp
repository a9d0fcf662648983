// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "gesture/pca.hpp"
#include "gesture/pose.hpp"

namespace gesture {

struct TimedWord {
  std::string surface;
  double t_start = 0.0;  // seconds
  double t_end = 0.0;
};

/// One curated shot: transcript words with timestamps plus per-frame poses.
struct DatasetRecord {
  std::string id;
  double fps = 12.0;
  double frame_height = 0.0;  // pixels
  std::vector<TimedWord> words;
  std::vector<RawPose> frames;

  double duration() const noexcept { return fps > 0.0 ? static_cast<double>(frames.size()) / fps : 0.0; }
};

/// A record whose frames are normalized and PCA-encoded.
struct EncodedRecord {
  std::string id;
  double fps = 12.0;
  std::vector<TimedWord> words;
  std::vector<GestureVector> poses;
};

/// Throws Error(MissingJoint)/Error(DegeneratePose) from normalization.
EncodedRecord encode_record(const DatasetRecord& record, const PcaModel& pca);

std::vector<std::string> surfaces(const std::vector<TimedWord>& words);

}  // namespace gesture
