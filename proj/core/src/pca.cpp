// SPDX-License-Identifier: Apache-2.0
#include "gesture/pca.hpp"

#include <algorithm>
#include <string>

#include <Eigen/Eigenvalues>

#include "gesture/error.hpp"

namespace gesture {

namespace {

void require_fitted(const PcaModel& model) {
  if (!model.fitted() || model.components.cols() != static_cast<Eigen::Index>(kPoseDim)) {
    throw Error(Errc::InvalidModel, "PCA model is not fitted");
  }
}

}  // namespace

PcaModel fit_pca_flat(const Eigen::MatrixXd& samples, int k) {
  const auto n = samples.rows();
  if (samples.cols() != static_cast<Eigen::Index>(kPoseDim)) {
    throw Error(Errc::ShapeMismatch, "samples must have 16 columns");
  }
  if (k < 1 || k > static_cast<int>(kPoseDim)) {
    throw Error(Errc::InvalidConfig, "component count must be in [1, 16]");
  }
  if (n < k + 1) {
    throw Error(Errc::InsufficientData, "need at least " + std::to_string(k + 1) +
                                            " poses, got " + std::to_string(n));
  }

  PcaModel model;
  model.mean = samples.colwise().mean().transpose();
  const Eigen::MatrixXd centered = samples.rowwise() - model.mean.transpose();
  const Eigen::MatrixXd cov = (centered.transpose() * centered) / static_cast<double>(n - 1);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  // Eigen returns ascending eigenvalues.
  const Eigen::VectorXd evals = solver.eigenvalues().cwiseMax(0.0);
  const Eigen::MatrixXd evecs = solver.eigenvectors();
  const double total = evals.sum();

  model.components.resize(k, kPoseDim);
  model.explained_variance_ratio.resize(k);
  for (int r = 0; r < k; ++r) {
    const Eigen::Index src = kPoseDim - 1 - r;
    Eigen::VectorXd dir = evecs.col(src);
    Eigen::Index arg = 0;
    dir.cwiseAbs().maxCoeff(&arg);
    if (dir(arg) < 0.0) dir = -dir;
    model.components.row(r) = dir.transpose();
    model.explained_variance_ratio(r) = total > 0.0 ? evals(src) / total : 0.0;
  }
  return model;
}

PcaModel fit_pca(std::span<const NormalizedPose> poses, int k) {
  Eigen::MatrixXd samples(static_cast<Eigen::Index>(poses.size()), kPoseDim);
  for (std::size_t i = 0; i < poses.size(); ++i) {
    samples.row(static_cast<Eigen::Index>(i)) = poses[i].flatten().transpose();
  }
  return fit_pca_flat(samples, k);
}

GestureVector project_pose(const PcaModel& model, const NormalizedPose& pose) {
  require_fitted(model);
  return model.components * (pose.flatten() - model.mean);
}

GestureVector encode_pose(const PcaModel& model, const NormalizedPose& pose) {
  GestureVector v = project_pose(model, pose);
  for (int c : kClampedComponents) {
    if (c <= v.size()) v(c - 1) = std::clamp(v(c - 1), -1.0, 1.0);
  }
  return v;
}

PoseFlat decode_flat(const PcaModel& model, const GestureVector& v) {
  require_fitted(model);
  if (v.size() != model.components.rows()) {
    throw Error(Errc::ShapeMismatch, "gesture vector length " + std::to_string(v.size()) +
                                         " does not match model dimension " +
                                         std::to_string(model.components.rows()));
  }
  return model.mean + model.components.transpose() * v;
}

NormalizedPose decode_pose(const PcaModel& model, const GestureVector& v) {
  return NormalizedPose::from_flat(decode_flat(model, v));
}

std::vector<NormalizedPose> component_sweep(const PcaModel& model, int dim,
                                            std::span<const double> values) {
  require_fitted(model);
  if (dim < 1 || dim > model.dim()) {
    throw Error(Errc::IndexOutOfRange, "component " + std::to_string(dim) +
                                           " outside [1, " + std::to_string(model.dim()) + "]");
  }
  std::vector<NormalizedPose> out;
  out.reserve(values.size());
  for (double value : values) {
    GestureVector v = GestureVector::Zero(model.dim());
    v(dim - 1) = value;
    out.push_back(decode_pose(model, v));
  }
  return out;
}

}  // namespace gesture
