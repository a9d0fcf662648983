// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "gesture/autodiff.hpp"
#include "gesture/kinematics.hpp"
#include "gesture/pca.hpp"
#include "gesture/seq2seq.hpp"
#include "gesture/synthesis.hpp"

namespace gesture {

/// Lifting input: the 7 non-neck joints of a normalized 2D pose.
inline constexpr int kLiftInputs = 14;
inline constexpr int kLiftOutputs = 7;
inline constexpr std::array<int, 2> kLiftHidden = {30, 20};

/// FC(14->30) -> BN -> ReLU -> FC(30->20) -> BN -> ReLU -> FC(20->7).
struct LiftNet {
  ad::ParamStore params;
  std::array<ad::ParamId, 3> W;
  std::array<ad::ParamId, 3> b;
  std::array<ad::ParamId, 2> gamma;
  std::array<ad::ParamId, 2> beta;
  std::array<Eigen::VectorXd, 2> running_mean;
  std::array<Eigen::VectorXd, 2> running_var;
  double momentum = 0.1;
  double epsilon = 1e-8;
  bool trained = false;
};

LiftNet init_lift(std::uint64_t seed);

/// Rebinds handles after a checkpoint load. Throws Error(InvalidModel).
LiftNet bind_lift(ad::ParamStore params);

/// 14 x 1 input column: x, y of head, shoulders, elbows, wrists.
Eigen::VectorXd lift_input(const NormalizedPose& pose);

/// Intermediate values of one lift pass.
struct LiftTrace {
  Eigen::MatrixXd depths;  // 7 x B
  /// Batchnorm outputs before scale and shift, per normalized layer.
  std::array<Eigen::MatrixXd, 2> normalized;
};

/// Records the network on a tape. Train mode normalizes with batch
/// statistics and updates the running estimates; eval mode uses the running
/// estimates. `inputs` is 14 x B. Throws Error(BatchTooSmall).
ad::Var lift_graph(ad::Tape& tape, LiftNet& net, const Eigen::MatrixXd& inputs, Mode mode,
                   LiftTrace* trace = nullptr);

/// Depths for the 7 non-neck joints of each pose (7 x B).
Eigen::MatrixXd lift_forward(LiftNet& net, std::span<const NormalizedPose> batch, Mode mode,
                             LiftTrace* trace = nullptr);
Eigen::MatrixXd lift_forward(const LiftNet& net, std::span<const NormalizedPose> batch);

/// 3D skeleton from a 2D pose and its predicted depths (x, -y, depth),
/// renormalized.
Pose3D assemble_pose3d(const NormalizedPose& pose2d, const Eigen::VectorXd& depths);
Pose3D lift_pose(const LiftNet& net, const NormalizedPose& pose2d);

/// Orthographic projection of a 3D pose to a normalized 2D pose plus the
/// depths in the same normalized units.
struct LiftSample {
  NormalizedPose pose2d;
  Eigen::VectorXd depths;  // 7
};
LiftSample project_sample(const Pose3D& pose);

struct LiftHyper {
  int steps = 2000;
  int batch_size = 8;
  double lr = 3e-3;
  double rot_range = 0.5235987755982988;  // 30 degrees
  double noise_sigma = 0.02;
  std::uint64_t seed = 0;
};

/// Minimizes mean squared depth error with Adam on freshly augmented
/// batches. `history` (optional) receives the per-step training mse.
/// Throws Error(EmptyDataset).
LiftNet train_lift(std::span<const Pose3D> dataset, const LiftHyper& h,
                   std::vector<double>* history = nullptr);

/// Mean squared depth error in eval mode.
double depth_mse(const LiftNet& net, std::span<const LiftSample> samples);

struct JointTrajectory {
  double fps = kDefaultFps;
  std::vector<JointAngles> rows;
};

/// decode -> lift (eval) -> analytic joint angles -> optional clamping.
JointTrajectory retarget_track(const TimedPoseTrack& track, const PcaModel& pca, const LiftNet& lift,
                               const JointLimits& limits = {});

}  // namespace gesture
