// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>

#include "gesture/lift.hpp"
#include "gesture/synthesis.hpp"

namespace gesture {

/// Header `t_s,c1,...,cK`, one row per frame, shortest round-trip doubles.
void write_track_csv(const TimedPoseTrack& track, const std::filesystem::path& path);

/// The frame rate is recovered from the time column (12 fps for a single
/// row). Throws Error(MalformedFile) or Error(IoFailure).
TimedPoseTrack read_track_csv(const std::filesystem::path& path);

/// Header `frame,<word>,...`; one row per generated frame.
void write_attention_csv(const AttentionMatrix& attention, const std::filesystem::path& path);

/// Header `t_s,head_pitch,...,r_wr_yaw`.
void write_trajectory_csv(const JointTrajectory& trajectory, const std::filesystem::path& path);
JointTrajectory read_trajectory_csv(const std::filesystem::path& path);

}  // namespace gesture
