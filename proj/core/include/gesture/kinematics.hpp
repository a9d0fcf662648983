// SPDX-License-Identifier: Apache-2.0
#pragma once

// Torso frame: origin at the neck, X toward the speaker's left (right
// shoulder -> left shoulder), Y up, Z = X x Y pointing forward.
//
// Arm chain, identical for both arms: the upper arm rests along -Y. Shoulder
// pitch rotates about X, then shoulder roll about the pitched Z axis, giving
// R_sh = Rx(pitch) * Rz(roll). In that frame the forearm direction is
//   (sin(roll_e) sin(yaw_e), -cos(roll_e), sin(roll_e) cos(yaw_e))
// where roll_e is the interior bend (0 = straight arm) and yaw_e spins the
// forearm plane about the upper-arm axis. Head yaw turns the rest nose
// direction about Y.

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "gesture/pose.hpp"

namespace gesture {

struct Pose3D {
  std::array<Eigen::Vector3d, kNumJoints> joints{};

  const Eigen::Vector3d& operator[](Joint j) const { return joints[index(j)]; }
  Eigen::Vector3d& operator[](Joint j) { return joints[index(j)]; }
};

/// Neck to the origin, mean neck-to-shoulder length to one.
/// Throws Error(DegeneratePose).
Pose3D normalize_pose3d(const Pose3D& pose);

enum class Dof : std::size_t {
  HeadPitch = 0,
  HeadYaw,
  LShoulderPitch,
  LShoulderRoll,
  LElbowRoll,
  LElbowYaw,
  LWristYaw,
  RShoulderPitch,
  RShoulderRoll,
  RElbowRoll,
  RElbowYaw,
  RWristYaw,
};

inline constexpr std::size_t kNumDof = 12;

/// CSV column names, in Dof order.
std::string_view dof_name(Dof dof) noexcept;

struct JointAngles {
  std::array<double, kNumDof> values{};  // radians

  double operator[](Dof d) const { return values[static_cast<std::size_t>(d)]; }
  double& operator[](Dof d) { return values[static_cast<std::size_t>(d)]; }
};

struct LimbLengths {
  double shoulder = 1.0;
  double upper_arm = 1.15;
  double forearm = 1.0;
  double head = 0.9;  // neck to nose
};

/// Rest nose direction: forward and up.
Eigen::Vector3d nose_rest_direction();

/// Throws Error(InvalidLimbLength).
Pose3D forward_kinematics(const JointAngles& angles, const LimbLengths& limbs = {});

/// Analytic inverse of forward_kinematics. Head pitch and wrist yaws are
/// always zero. When an arm is fully extended the elbow yaw is taken from
/// `previous` (or zero). Throws Error(DegenerateArm).
JointAngles compute_joint_angles(const Pose3D& pose, const JointAngles* previous = nullptr);

struct JointLimits {
  std::array<std::optional<std::pair<double, double>>, kNumDof> range{};

  static JointLimits uniform(double lo, double hi);
  bool empty() const noexcept;
};

JointAngles apply_limits(const JointAngles& angles, const JointLimits& limits);

/// Rotation about Y by U(-rot_range, rot_range), isotropic joint noise, then
/// renormalization.
Pose3D augment_3d(const Pose3D& sample, std::mt19937_64& rng, double rot_range = 0.5235987755982988,
                  double noise_sigma = 0.02);

/// Angles drawn from gesture-like ranges pushed through forward_kinematics.
std::vector<Pose3D> synth_pose3d_corpus(std::uint64_t seed, std::size_t size);

/// Random joint angles from the same ranges (also used by tests).
JointAngles sample_gesture_angles(std::mt19937_64& rng);

}  // namespace gesture
