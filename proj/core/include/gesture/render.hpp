// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "gesture/pca.hpp"
#include "gesture/pose.hpp"
#include "gesture/synthesis.hpp"

namespace gesture {

/// Stick figure in normalized pose units (y down) inside a fixed viewport.
std::string render_svg(const NormalizedPose& pose);

/// Writes frame_00000.svg, ... plus manifest.json listing them in order and
/// returns the file names. Throws Error(IoFailure).
std::vector<std::string> render_frames(std::span<const NormalizedPose> poses, double fps,
                                       const std::filesystem::path& out_dir);

/// Decodes every frame of the track first.
std::vector<std::string> render_track(const TimedPoseTrack& track, const PcaModel& pca,
                                      const std::filesystem::path& out_dir);

}  // namespace gesture
