// SPDX-License-Identifier: Apache-2.0
#include "gesture/lift.hpp"

#include <cmath>
#include <random>
#include <string>

#include "gesture/error.hpp"
#include "gesture/training.hpp"

namespace gesture {

using ad::Matrix;
using ad::Tape;
using ad::Var;

namespace {

constexpr std::array<Joint, 7> kLiftJoints = {Joint::Head,      Joint::LShoulder, Joint::LElbow,
                                              Joint::LWrist,    Joint::RShoulder, Joint::RElbow,
                                              Joint::RWrist};

void layout(LiftNet& net, bool bind) {
  const std::array<int, 4> sizes = {kLiftInputs, kLiftHidden[0], kLiftHidden[1], kLiftOutputs};
  auto get = [&](const std::string& name, Eigen::Index rows, Eigen::Index cols) {
    if (!bind) return net.params.add(name, rows, cols);
    const ad::ParamId id = net.params.id(name);
    if (net.params.value(id).rows() != rows || net.params.value(id).cols() != cols) {
      throw Error(Errc::InvalidModel, "lift parameter " + name + " has the wrong shape");
    }
    return id;
  };
  for (int l = 0; l < 3; ++l) {
    const std::string prefix = "lift.fc" + std::to_string(l);
    net.W[l] = get(prefix + ".W", sizes[l + 1], sizes[l]);
    net.b[l] = get(prefix + ".b", sizes[l + 1], 1);
    if (l < 2) {
      const std::string bn = "lift.bn" + std::to_string(l);
      net.gamma[l] = get(bn + ".gamma", sizes[l + 1], 1);
      net.beta[l] = get(bn + ".beta", sizes[l + 1], 1);
      net.running_mean[l] = Eigen::VectorXd::Zero(sizes[l + 1]);
      net.running_var[l] = Eigen::VectorXd::Ones(sizes[l + 1]);
    }
  }
}

// y = gamma * (x - mean) / sqrt(var + eps) + beta with batch statistics.
Var batch_norm_train(Var x, Var gamma, Var beta, double eps, Eigen::VectorXd& batch_mean,
                     Eigen::VectorXd& batch_var, Matrix* normalized_out) {
  const Matrix& xv = x.value();
  const double B = static_cast<double>(xv.cols());
  batch_mean = xv.rowwise().mean();
  const Matrix centered = xv.colwise() - batch_mean;
  batch_var = centered.rowwise().squaredNorm() / B;
  const Eigen::VectorXd inv_std = (batch_var.array() + eps).rsqrt().matrix();
  Matrix xhat = inv_std.asDiagonal() * centered;
  if (normalized_out != nullptr) *normalized_out = xhat;
  Matrix out = (gamma.value().col(0).asDiagonal() * xhat).colwise() + beta.value().col(0);
  const std::array<Var, 3> parents{x, gamma, beta};
  return x.tape->record(
      std::move(out), parents, [x, gamma, beta, xhat, inv_std, B](const Matrix& g, Tape& t) {
        if (Matrix* gb = t.grad_slot(beta)) *gb += g.rowwise().sum();
        if (Matrix* gg = t.grad_slot(gamma)) *gg += g.cwiseProduct(xhat).rowwise().sum();
        if (Matrix* gx = t.grad_slot(x)) {
          const Matrix dxhat = t.value(gamma).col(0).asDiagonal() * g;
          const Eigen::VectorXd sum_d = dxhat.rowwise().sum();
          const Eigen::VectorXd sum_dx = dxhat.cwiseProduct(xhat).rowwise().sum();
          Matrix dx = (B * dxhat).colwise() - sum_d;
          dx -= sum_dx.asDiagonal() * xhat;
          *gx += (inv_std / B).asDiagonal() * dx;
        }
      });
}

// Same transform with fixed statistics.
Var batch_norm_eval(Var x, Var gamma, Var beta, const Eigen::VectorXd& mean,
                    const Eigen::VectorXd& var, double eps) {
  const Eigen::VectorXd inv_std = (var.array() + eps).rsqrt().matrix();
  const Matrix xhat = inv_std.asDiagonal() * (x.value().colwise() - mean);
  Matrix out = (gamma.value().col(0).asDiagonal() * xhat).colwise() + beta.value().col(0);
  const std::array<Var, 3> parents{x, gamma, beta};
  return x.tape->record(std::move(out), parents, [x, gamma, beta, xhat, inv_std](const Matrix& g, Tape& t) {
    if (Matrix* gb = t.grad_slot(beta)) *gb += g.rowwise().sum();
    if (Matrix* gg = t.grad_slot(gamma)) *gg += g.cwiseProduct(xhat).rowwise().sum();
    if (Matrix* gx = t.grad_slot(x)) {
      *gx += (t.value(gamma).col(0).cwiseProduct(inv_std)).asDiagonal() * g;
    }
  });
}

Matrix inputs_of(std::span<const NormalizedPose> batch) {
  Matrix inputs(kLiftInputs, static_cast<Eigen::Index>(batch.size()));
  for (std::size_t i = 0; i < batch.size(); ++i) inputs.col(static_cast<Eigen::Index>(i)) = lift_input(batch[i]);
  return inputs;
}

}  // namespace

LiftNet init_lift(std::uint64_t seed) {
  LiftNet net;
  layout(net, false);
  std::mt19937_64 rng(seed);
  for (int l = 0; l < 3; ++l) {
    auto W = net.params.value(net.W[l]);
    const double limit = std::sqrt(6.0 / static_cast<double>(W.rows() + W.cols()));
    std::uniform_real_distribution<double> dist(-limit, limit);
    for (Eigen::Index j = 0; j < W.cols(); ++j) {
      for (Eigen::Index i = 0; i < W.rows(); ++i) W(i, j) = dist(rng);
    }
  }
  for (int l = 0; l < 2; ++l) net.params.value(net.gamma[l]).setOnes();
  return net;
}

LiftNet bind_lift(ad::ParamStore params) {
  LiftNet net;
  net.params = std::move(params);
  layout(net, true);
  return net;
}

Eigen::VectorXd lift_input(const NormalizedPose& pose) {
  Eigen::VectorXd x(kLiftInputs);
  for (std::size_t i = 0; i < kLiftJoints.size(); ++i) {
    const Point2& p = pose[kLiftJoints[i]];
    x(2 * static_cast<Eigen::Index>(i)) = p.x;
    x(2 * static_cast<Eigen::Index>(i) + 1) = p.y;
  }
  return x;
}

Var lift_graph(Tape& tape, LiftNet& net, const Matrix& inputs, Mode mode, LiftTrace* trace) {
  if (inputs.rows() != kLiftInputs) throw Error(Errc::ShapeMismatch, "lift input must have 14 rows");
  if (mode == Mode::Train && inputs.cols() < 2) {
    throw Error(Errc::BatchTooSmall, "train-mode batchnorm needs at least 2 samples");
  }
  const ad::ParamStore& store = net.params;
  Var h = tape.constant(inputs);
  for (int l = 0; l < 2; ++l) {
    h = ad::add_bias(ad::matmul(tape.param(store, net.W[l]), h), tape.param(store, net.b[l]));
    const Var gamma = tape.param(store, net.gamma[l]);
    const Var beta = tape.param(store, net.beta[l]);
    if (mode == Mode::Train) {
      Eigen::VectorXd mean, var;
      h = batch_norm_train(h, gamma, beta, net.epsilon, mean, var,
                           trace ? &trace->normalized[l] : nullptr);
      const double B = static_cast<double>(inputs.cols());
      net.running_mean[l] = (1.0 - net.momentum) * net.running_mean[l] + net.momentum * mean;
      net.running_var[l] =
          (1.0 - net.momentum) * net.running_var[l] + net.momentum * (var * (B / (B - 1.0)));
    } else {
      if (trace) {
        trace->normalized[l] =
            (net.running_var[l].array() + net.epsilon).rsqrt().matrix().asDiagonal() *
            (h.value().colwise() - net.running_mean[l]);
      }
      h = batch_norm_eval(h, gamma, beta, net.running_mean[l], net.running_var[l], net.epsilon);
    }
    h = ad::relu(h);
  }
  const Var out = ad::add_bias(ad::matmul(tape.param(store, net.W[2]), h), tape.param(store, net.b[2]));
  if (trace) trace->depths = out.value();
  return out;
}

Matrix lift_forward(LiftNet& net, std::span<const NormalizedPose> batch, Mode mode, LiftTrace* trace) {
  Tape tape;
  return lift_graph(tape, net, inputs_of(batch), mode, trace).value();
}

Matrix lift_forward(const LiftNet& net, std::span<const NormalizedPose> batch) {
  // Eval mode never writes to the network.
  return lift_forward(const_cast<LiftNet&>(net), batch, Mode::Eval, nullptr);
}

Pose3D assemble_pose3d(const NormalizedPose& pose2d, const Eigen::VectorXd& depths) {
  if (depths.size() != kLiftOutputs) throw Error(Errc::ShapeMismatch, "expected 7 depths");
  Pose3D p;
  p[Joint::Neck].setZero();
  for (std::size_t i = 0; i < kLiftJoints.size(); ++i) {
    const Point2& q = pose2d[kLiftJoints[i]];
    p[kLiftJoints[i]] = Eigen::Vector3d(q.x, -q.y, depths(static_cast<Eigen::Index>(i)));
  }
  return normalize_pose3d(p);
}

Pose3D lift_pose(const LiftNet& net, const NormalizedPose& pose2d) {
  const std::array<NormalizedPose, 1> batch{pose2d};
  return assemble_pose3d(pose2d, lift_forward(net, batch).col(0));
}

LiftSample project_sample(const Pose3D& pose) {
  std::array<Point2, kNumJoints> joints;
  for (std::size_t i = 0; i < kNumJoints; ++i) {
    joints[i] = {pose.joints[i].x() - pose[Joint::Neck].x(), -(pose.joints[i].y() - pose[Joint::Neck].y())};
  }
  const double scale = shoulder_length(joints);
  LiftSample s;
  s.pose2d = normalize_joints(joints);
  s.depths.resize(kLiftOutputs);
  for (std::size_t i = 0; i < kLiftJoints.size(); ++i) {
    s.depths(static_cast<Eigen::Index>(i)) = (pose[kLiftJoints[i]].z() - pose[Joint::Neck].z()) / scale;
  }
  return s;
}

LiftNet train_lift(std::span<const Pose3D> dataset, const LiftHyper& h, std::vector<double>* history) {
  if (dataset.empty()) throw Error(Errc::EmptyDataset, "no 3D poses to train on");
  if (h.batch_size < 2) throw Error(Errc::BatchTooSmall, "lift training needs batches of >= 2");
  if (!(h.lr > 0.0) || h.steps < 0) throw Error(Errc::InvalidConfig, "invalid lift hyperparameters");
  LiftNet net = init_lift(h.seed);
  AdamState adam = AdamState::for_store(net.params);
  std::mt19937_64 rng(h.seed ^ 0x9E3779B97F4A7C15ull);
  std::uniform_int_distribution<std::size_t> pick(0, dataset.size() - 1);

  for (int step = 0; step < h.steps; ++step) {
    Matrix inputs(kLiftInputs, h.batch_size);
    Matrix targets(kLiftOutputs, h.batch_size);
    for (int b = 0; b < h.batch_size; ++b) {
      const LiftSample s = project_sample(augment_3d(dataset[pick(rng)], rng, h.rot_range, h.noise_sigma));
      inputs.col(b) = lift_input(s.pose2d);
      targets.col(b) = s.depths;
    }
    Tape tape;
    const Var loss = ad::mse(lift_graph(tape, net, inputs, Mode::Train), targets);
    net.params.zero_grad();
    tape.backward(loss, net.params);
    adam_step(net.params, adam, h.lr);
    if (history) history->push_back(loss.value()(0, 0));
  }
  net.params.zero_grad();
  net.trained = true;
  return net;
}

double depth_mse(const LiftNet& net, std::span<const LiftSample> samples) {
  if (samples.empty()) throw Error(Errc::EmptyDataset, "no samples");
  std::vector<NormalizedPose> poses;
  Matrix targets(kLiftOutputs, static_cast<Eigen::Index>(samples.size()));
  for (std::size_t i = 0; i < samples.size(); ++i) {
    poses.push_back(samples[i].pose2d);
    targets.col(static_cast<Eigen::Index>(i)) = samples[i].depths;
  }
  const Matrix pred = lift_forward(net, poses);
  return (pred - targets).squaredNorm() / static_cast<double>(targets.size());
}

JointTrajectory retarget_track(const TimedPoseTrack& track, const PcaModel& pca, const LiftNet& lift,
                               const JointLimits& limits) {
  JointTrajectory out;
  out.fps = track.fps;
  out.rows.reserve(track.frames.size());
  // Lifted one frame at a time: batched products round differently per
  // column, and identical frames must give identical angles.
  for (const GestureVector& v : track.frames) {
    const Pose3D p3 = lift_pose(lift, decode_pose(pca, v));
    const JointAngles* prev = out.rows.empty() ? nullptr : &out.rows.back();
    out.rows.push_back(apply_limits(compute_joint_angles(p3, prev), limits));
  }
  return out;
}

}  // namespace gesture
