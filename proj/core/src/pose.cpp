// SPDX-License-Identifier: Apache-2.0
#include "gesture/pose.hpp"

#include <cmath>
#include <string>

#include "gesture/error.hpp"

namespace gesture {

std::string_view joint_name(Joint j) noexcept {
  switch (j) {
    case Joint::Head: return "head";
    case Joint::Neck: return "neck";
    case Joint::LShoulder: return "l_shoulder";
    case Joint::LElbow: return "l_elbow";
    case Joint::LWrist: return "l_wrist";
    case Joint::RShoulder: return "r_shoulder";
    case Joint::RElbow: return "r_elbow";
    case Joint::RWrist: return "r_wrist";
  }
  return "?";
}

PoseFlat NormalizedPose::flatten() const {
  PoseFlat flat;
  for (std::size_t i = 0; i < kNumJoints; ++i) {
    flat(2 * i) = joints[i].x;
    flat(2 * i + 1) = joints[i].y;
  }
  return flat;
}

NormalizedPose NormalizedPose::from_flat(const Eigen::Ref<const Eigen::VectorXd>& flat) {
  if (flat.size() != static_cast<Eigen::Index>(kPoseDim)) {
    throw Error(Errc::ShapeMismatch, "pose vector must have 16 entries, got " +
                                         std::to_string(flat.size()));
  }
  NormalizedPose pose;
  for (std::size_t i = 0; i < kNumJoints; ++i) {
    pose.joints[i] = {flat(2 * i), flat(2 * i + 1)};
  }
  return pose;
}

double shoulder_length(const std::array<Point2, kNumJoints>& joints) {
  const Point2& neck = joints[index(Joint::Neck)];
  auto dist = [&](Joint j) {
    const Point2& p = joints[index(j)];
    return std::hypot(p.x - neck.x, p.y - neck.y);
  };
  return 0.5 * (dist(Joint::LShoulder) + dist(Joint::RShoulder));
}

NormalizedPose normalize_joints(const std::array<Point2, kNumJoints>& joints) {
  for (const Point2& p : joints) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
      throw Error(Errc::DegeneratePose, "non-finite joint coordinate");
    }
  }
  const double len = shoulder_length(joints);
  if (!(len > 0.0)) {
    throw Error(Errc::DegeneratePose, "both shoulders coincide with the neck");
  }
  const Point2 neck = joints[index(Joint::Neck)];
  NormalizedPose out;
  for (std::size_t i = 0; i < kNumJoints; ++i) {
    out.joints[i] = {(joints[i].x - neck.x) / len, (joints[i].y - neck.y) / len};
  }
  out[Joint::Neck] = {0.0, 0.0};
  return out;
}

NormalizedPose normalize_pose(const RawPose& raw) {
  for (std::size_t i = 0; i < kNumJoints; ++i) {
    if (!raw.present[i]) {
      throw Error(Errc::MissingJoint,
                  std::string(joint_name(static_cast<Joint>(i))) + " is absent");
    }
  }
  return normalize_joints(raw.joints);
}

}  // namespace gesture
