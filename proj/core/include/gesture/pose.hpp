// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstddef>
#include <string_view>

#include <Eigen/Core>

namespace gesture {

/// Upper-body joints in flattening order. Checkpoints and PCA models depend
/// on this order; do not reorder.
enum class Joint : std::size_t {
  Head = 0,  // nose
  Neck,
  LShoulder,
  LElbow,
  LWrist,
  RShoulder,
  RElbow,
  RWrist,
};

inline constexpr std::size_t kNumJoints = 8;
inline constexpr std::size_t kPoseDim = 2 * kNumJoints;

constexpr std::size_t index(Joint j) noexcept { return static_cast<std::size_t>(j); }

std::string_view joint_name(Joint j) noexcept;

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

using PoseFlat = Eigen::Matrix<double, kPoseDim, 1>;

/// Detected 2D joints in image pixels (y down).
struct RawPose {
  std::array<Point2, kNumJoints> joints{};
  std::array<bool, kNumJoints> present{};

  const Point2& operator[](Joint j) const { return joints[index(j)]; }
  Point2& operator[](Joint j) { return joints[index(j)]; }
};

/// Neck at the origin, mean neck-to-shoulder distance equal to one. Keeps
/// the image orientation (x right, y down).
struct NormalizedPose {
  std::array<Point2, kNumJoints> joints{};

  const Point2& operator[](Joint j) const { return joints[index(j)]; }
  Point2& operator[](Joint j) { return joints[index(j)]; }

  /// x before y, joints in `Joint` order.
  PoseFlat flatten() const;
  static NormalizedPose from_flat(const Eigen::Ref<const Eigen::VectorXd>& flat);
};

/// Mean of the two neck-to-shoulder distances.
double shoulder_length(const std::array<Point2, kNumJoints>& joints);

/// Translate the neck to the origin and scale so `shoulder_length` is one.
/// Throws Error(MissingJoint) or Error(DegeneratePose).
NormalizedPose normalize_pose(const RawPose& raw);

/// Same normalization applied to an already-complete joint set.
NormalizedPose normalize_joints(const std::array<Point2, kNumJoints>& joints);

}  // namespace gesture
