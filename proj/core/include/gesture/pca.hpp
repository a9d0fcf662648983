// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

#include "gesture/pose.hpp"

namespace gesture {

/// p_t: PCA coefficients of one pose frame. Length equals the model's
/// component count (10 by default).
using GestureVector = Eigen::VectorXd;

inline constexpr int kDefaultComponents = 10;

/// Coefficients clamped to [-1, 1] at encode time (1-based, as in the
/// component gallery): both relate to in-plane rotation of the body.
inline constexpr std::array<int, 2> kClampedComponents = {1, 4};

struct PcaModel {
  PoseFlat mean = PoseFlat::Zero();
  /// k x 16; rows are principal directions, eigenvalue-descending.
  Eigen::MatrixXd components;
  Eigen::VectorXd explained_variance_ratio;

  int dim() const noexcept { return static_cast<int>(components.rows()); }
  bool fitted() const noexcept { return components.rows() > 0; }
};

/// Mean-centered eigen-decomposition of the sample covariance. Signs are
/// fixed so the largest-magnitude entry of every row is positive.
PcaModel fit_pca(std::span<const NormalizedPose> poses, int k = kDefaultComponents);
PcaModel fit_pca_flat(const Eigen::MatrixXd& samples, int k = kDefaultComponents);

/// Unclamped projection onto the components.
GestureVector project_pose(const PcaModel& model, const NormalizedPose& pose);

/// Projection followed by the clamp on components 1 and 4.
GestureVector encode_pose(const PcaModel& model, const NormalizedPose& pose);

/// mean + components^T v. Accepts any coefficient values.
NormalizedPose decode_pose(const PcaModel& model, const GestureVector& v);
PoseFlat decode_flat(const PcaModel& model, const GestureVector& v);

/// Decodes vectors that are zero except for component `dim` (1-based).
std::vector<NormalizedPose> component_sweep(const PcaModel& model, int dim,
                                            std::span<const double> values);

}  // namespace gesture
