// SPDX-License-Identifier: Apache-2.0
#include "gesture/kinematics.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Geometry>

#include "gesture/error.hpp"

namespace gesture {

namespace {

using Eigen::Matrix3d;
using Eigen::Vector3d;

constexpr double kSingular = 1e-9;

Matrix3d rot_x(double a) { return Eigen::AngleAxisd(a, Vector3d::UnitX()).toRotationMatrix(); }
Matrix3d rot_y(double a) { return Eigen::AngleAxisd(a, Vector3d::UnitY()).toRotationMatrix(); }
Matrix3d rot_z(double a) { return Eigen::AngleAxisd(a, Vector3d::UnitZ()).toRotationMatrix(); }

Matrix3d shoulder_rotation(double pitch, double roll) { return rot_x(pitch) * rot_z(roll); }

Vector3d forearm_local(double bend, double yaw) {
  return {std::sin(bend) * std::sin(yaw), -std::cos(bend), std::sin(bend) * std::cos(yaw)};
}

struct ArmDofs {
  Dof pitch, roll, elbow_roll, elbow_yaw, wrist_yaw;
};

constexpr ArmDofs kLeft{Dof::LShoulderPitch, Dof::LShoulderRoll, Dof::LElbowRoll, Dof::LElbowYaw,
                        Dof::LWristYaw};
constexpr ArmDofs kRight{Dof::RShoulderPitch, Dof::RShoulderRoll, Dof::RElbowRoll, Dof::RElbowYaw,
                         Dof::RWristYaw};

}  // namespace

std::string_view dof_name(Dof dof) noexcept {
  switch (dof) {
    case Dof::HeadPitch: return "head_pitch";
    case Dof::HeadYaw: return "head_yaw";
    case Dof::LShoulderPitch: return "l_sh_pitch";
    case Dof::LShoulderRoll: return "l_sh_roll";
    case Dof::LElbowRoll: return "l_el_roll";
    case Dof::LElbowYaw: return "l_el_yaw";
    case Dof::LWristYaw: return "l_wr_yaw";
    case Dof::RShoulderPitch: return "r_sh_pitch";
    case Dof::RShoulderRoll: return "r_sh_roll";
    case Dof::RElbowRoll: return "r_el_roll";
    case Dof::RElbowYaw: return "r_el_yaw";
    case Dof::RWristYaw: return "r_wr_yaw";
  }
  return "?";
}

Pose3D normalize_pose3d(const Pose3D& pose) {
  const Vector3d neck = pose[Joint::Neck];
  const double len = 0.5 * ((pose[Joint::LShoulder] - neck).norm() +
                            (pose[Joint::RShoulder] - neck).norm());
  if (!(len > 0.0) || !std::isfinite(len)) {
    throw Error(Errc::DegeneratePose, "shoulders coincide with the neck");
  }
  Pose3D out;
  for (std::size_t i = 0; i < kNumJoints; ++i) out.joints[i] = (pose.joints[i] - neck) / len;
  out[Joint::Neck].setZero();
  return out;
}

Vector3d nose_rest_direction() { return Vector3d(0.0, 1.0, 0.35).normalized(); }

Pose3D forward_kinematics(const JointAngles& a, const LimbLengths& limbs) {
  if (!(limbs.shoulder > 0.0) || !(limbs.upper_arm > 0.0) || !(limbs.forearm > 0.0) ||
      !(limbs.head > 0.0)) {
    throw Error(Errc::InvalidLimbLength, "segment lengths must be positive");
  }
  const double s = 1.0 / limbs.shoulder;
  Pose3D p;
  p[Joint::Neck].setZero();
  p[Joint::Head] = s * limbs.head * (rot_y(a[Dof::HeadYaw]) * rot_x(-a[Dof::HeadPitch]) *
                                     nose_rest_direction());

  auto arm = [&](const ArmDofs& d, Joint sh, Joint el, Joint wr, double side) {
    const Vector3d shoulder(side, 0.0, 0.0);
    const Matrix3d R = shoulder_rotation(a[d.pitch], a[d.roll]);
    const Vector3d elbow = shoulder + s * limbs.upper_arm * (R * Vector3d(0.0, -1.0, 0.0));
    const Vector3d wrist =
        elbow + s * limbs.forearm * (R * forearm_local(a[d.elbow_roll], a[d.elbow_yaw]));
    p[sh] = shoulder;
    p[el] = elbow;
    p[wr] = wrist;
  };
  arm(kLeft, Joint::LShoulder, Joint::LElbow, Joint::LWrist, 1.0);
  arm(kRight, Joint::RShoulder, Joint::RElbow, Joint::RWrist, -1.0);
  return p;
}

JointAngles compute_joint_angles(const Pose3D& pose, const JointAngles* previous) {
  const Vector3d across = pose[Joint::LShoulder] - pose[Joint::RShoulder];
  if (across.norm() < 1e-6) throw Error(Errc::DegenerateArm, "shoulders coincide");
  const Vector3d x = across.normalized();
  Vector3d y = Vector3d::UnitY() - x.dot(Vector3d::UnitY()) * x;
  if (y.norm() < 1e-6) throw Error(Errc::DegenerateArm, "shoulder line is vertical");
  y.normalize();
  const Vector3d z = x.cross(y);
  Matrix3d torso;
  torso << x, y, z;
  const Matrix3d to_local = torso.transpose();

  JointAngles out;
  auto arm = [&](const ArmDofs& d, Joint sh, Joint el, Joint wr) {
    const Vector3d upper = to_local * (pose[el] - pose[sh]);
    const Vector3d fore = to_local * (pose[wr] - pose[el]);
    if (upper.norm() < 1e-6 || fore.norm() < 1e-6) {
      throw Error(Errc::DegenerateArm, std::string(joint_name(sh)) + " arm has a zero-length segment");
    }
    const Vector3d u = upper.normalized();
    // u = (sin r, -cos r cos p, -cos r sin p)
    const double roll = std::atan2(u.x(), std::hypot(u.y(), u.z()));
    const double pitch = std::hypot(u.y(), u.z()) > kSingular ? std::atan2(-u.z(), -u.y()) : 0.0;
    const Vector3d f = shoulder_rotation(pitch, roll).transpose() * fore.normalized();
    const double radial = std::hypot(f.x(), f.z());
    const double bend = std::atan2(radial, -f.y());
    double yaw = 0.0;
    if (radial > kSingular) {
      yaw = std::atan2(f.x(), f.z());
    } else if (previous != nullptr) {
      yaw = (*previous)[d.elbow_yaw];
    }
    out[d.pitch] = pitch;
    out[d.roll] = roll;
    out[d.elbow_roll] = bend;
    out[d.elbow_yaw] = yaw;
    out[d.wrist_yaw] = 0.0;
  };
  arm(kLeft, Joint::LShoulder, Joint::LElbow, Joint::LWrist);
  arm(kRight, Joint::RShoulder, Joint::RElbow, Joint::RWrist);

  const Vector3d nose = to_local * (pose[Joint::Head] - pose[Joint::Neck]);
  out[Dof::HeadYaw] = std::hypot(nose.x(), nose.z()) > kSingular ? std::atan2(nose.x(), nose.z()) : 0.0;
  out[Dof::HeadPitch] = 0.0;
  return out;
}

JointLimits JointLimits::uniform(double lo, double hi) {
  JointLimits limits;
  for (auto& r : limits.range) r = std::make_pair(lo, hi);
  return limits;
}

bool JointLimits::empty() const noexcept {
  return std::none_of(range.begin(), range.end(), [](const auto& r) { return r.has_value(); });
}

JointAngles apply_limits(const JointAngles& angles, const JointLimits& limits) {
  JointAngles out = angles;
  for (std::size_t i = 0; i < kNumDof; ++i) {
    if (const auto& r = limits.range[i]) out.values[i] = std::clamp(out.values[i], r->first, r->second);
  }
  return out;
}

Pose3D augment_3d(const Pose3D& sample, std::mt19937_64& rng, double rot_range, double noise_sigma) {
  Pose3D out = sample;
  if (rot_range > 0.0) {
    std::uniform_real_distribution<double> angle(-rot_range, rot_range);
    const Matrix3d R = rot_y(angle(rng));
    for (Vector3d& j : out.joints) j = R * j;
  }
  if (noise_sigma > 0.0) {
    std::normal_distribution<double> noise(0.0, noise_sigma);
    for (Vector3d& j : out.joints) {
      for (int k = 0; k < 3; ++k) j(k) += noise(rng);
    }
  }
  return normalize_pose3d(out);
}

JointAngles sample_gesture_angles(std::mt19937_64& rng) {
  auto uniform = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
  JointAngles a;
  a[Dof::HeadYaw] = uniform(-0.5, 0.5);
  a[Dof::LShoulderPitch] = uniform(-1.6, 0.3);
  a[Dof::LShoulderRoll] = uniform(-0.3, 1.3);
  a[Dof::LElbowRoll] = uniform(0.0, 2.0);
  a[Dof::LElbowYaw] = uniform(-1.0, 1.0);
  a[Dof::RShoulderPitch] = uniform(-1.6, 0.3);
  a[Dof::RShoulderRoll] = uniform(-1.3, 0.3);
  a[Dof::RElbowRoll] = uniform(0.0, 2.0);
  a[Dof::RElbowYaw] = uniform(-1.0, 1.0);
  return a;
}

std::vector<Pose3D> synth_pose3d_corpus(std::uint64_t seed, std::size_t size) {
  if (size < 1) throw Error(Errc::InvalidConfig, "corpus size must be >= 1");
  std::mt19937_64 rng(seed);
  std::vector<Pose3D> out;
  out.reserve(size);
  for (std::size_t i = 0; i < size; ++i) out.push_back(forward_kinematics(sample_gesture_angles(rng)));
  return out;
}

}  // namespace gesture
