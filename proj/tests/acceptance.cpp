// SPDX-License-Identifier: Apache-2.0
// Acceptance suite: one PASS/FAIL line per criterion, 12 is informational.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iterator>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Geometry>

#include "gesture/baselines.hpp"
#include "gesture/checkpoint.hpp"
#include "gesture/config.hpp"
#include "gesture/corpus.hpp"
#include "gesture/error.hpp"
#include "gesture/kinematics.hpp"
#include "gesture/lift.hpp"
#include "gesture/pca.hpp"
#include "gesture/synthesis.hpp"
#include "gesture/track_io.hpp"
#include "gesture/training.hpp"
#include "support.hpp"

#ifndef GESTURECTL_PATH
#error "GESTURECTL_PATH must name the gesturectl binary"
#endif

namespace gesture {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using Clock = std::chrono::steady_clock;

// Pinned tolerances.
constexpr double kGradTol = 1e-4;
constexpr double kGradStep = 1e-5;
constexpr double kLossTol = 1e-12;
constexpr double kOrthoTol = 1e-10;
constexpr double kRoundTripTol = 1e-8;
constexpr double kOracleRatioTol = 1e-10;
constexpr double kOracleVectorTol = 1e-8;
constexpr double kRowSumTol = 1e-9;
constexpr double kShiftTol = 1e-12;
constexpr double kFkTol = 1e-6;
constexpr double kBatchNormTol = 1e-6;
constexpr double kBleuTol = 1e-12;
constexpr int kPropertyCases = 1000;

// Toy-run settings for criteria 6 and 7.
constexpr std::size_t kToyTrain = 500;
constexpr std::size_t kToyHeldOut = 100;
constexpr int kToyHidden = 64;
constexpr int kToyEpochs = 30;
constexpr double kToyBeta = 0.1;
constexpr double kToyLr = 1e-3;
constexpr double kToyMinImprovement = 0.30;
constexpr double kToyMinWinRate = 0.80;
constexpr int kToyPairs = 50;
constexpr double kToyBudgetSeconds = 30.0 * 60.0;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* format, double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, value);
  return buf;
}

// 1 ------------------------------------------------------------------------
Outcome gradient_check() {
  const auto t0 = Clock::now();
  Seq2SeqConfig c;
  c.hidden = 4;
  c.m = 3;
  c.n = 2;
  c.dropout = 0.1;
  Seq2SeqModel model = init_model(c, 11);
  std::mt19937_64 rng(12);
  std::normal_distribution<double> g(0.0, 1.0);
  // Move off the zero biases so every gate is exercised.
  for (ad::ParamId id : model.params.ids()) {
    auto v = model.params.value(id);
    for (Eigen::Index j = 0; j < v.cols(); ++j) {
      for (Eigen::Index i = 0; i < v.rows(); ++i) v(i, j) += 0.2 * g(rng);
    }
  }
  auto random = [&](Eigen::Index r, Eigen::Index k, double s) {
    MatrixXd m(r, k);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = s * g(rng);
    return m;
  };
  const std::vector<MatrixXd> words = {random(c.word_dim, 2, 0.3)};
  const std::vector<std::vector<GestureVector>> seeds = {{random(10, 1, 0.5), random(10, 1, 0.5)}};
  const std::vector<MatrixXd> targets = {random(10, 3, 0.5)};

  double worst = 0.0;
  std::string where;
  std::size_t checked = 0;
  for (const Mode mode : {Mode::Eval, Mode::Train}) {
    auto loss = [&](bool backward) {
      ad::Tape tape;
      std::mt19937_64 dropout_rng(13);
      const ForwardGraph graph = build_forward(tape, model, words, seeds, mode, &dropout_rng);
      const ad::Var l = sequence_loss_node(graph.poses, targets, 0.01, 1.0);
      if (backward) {
        model.params.zero_grad();
        tape.backward(l, model.params);
      }
      return l.value()(0, 0);
    };
    loss(true);
    const testing::GradReport r = testing::check_gradients(model.params, [&] { return loss(false); }, kGradStep);
    checked += r.checked;
    if (r.worst > worst) {
      worst = r.worst;
      where = r.where + (mode == Mode::Eval ? " (eval)" : " (train, dropout)");
    }
  }
  const double secs = seconds_since(t0);
  return {worst < kGradTol && secs < 60.0,
          std::to_string(checked) + " partials, worst rel err " + fmt("%.2e", worst) + " at " + where + ", " +
              fmt("%.1f s", secs)};
}

// 2 ------------------------------------------------------------------------
Outcome loss_identities() {
  Hyperparams h;
  const std::vector<GestureVector> constant(5, GestureVector::Constant(10, 0.4));
  const LossBreakdown zero = compute_loss(constant, constant, h);
  std::vector<GestureVector> cont(3, GestureVector::Zero(10));
  cont[1](0) = 1.0;
  cont[2](0) = 1.0;
  const double continuity = compute_loss(cont, cont, h).continuity;
  std::vector<GestureVector> var(2, GestureVector::Zero(10));
  var[1](0) = 2.0;
  const std::vector<GestureVector> target(2, GestureVector::Zero(10));
  const LossBreakdown v = compute_loss(var, target, h);
  const bool zero_ok = zero.mse == 0.0 && zero.continuity == 0.0 && zero.variance == 0.0 && zero.total == 0.0;
  const bool ok = zero_ok && std::abs(continuity - 0.5) <= kLossTol && std::abs(v.variance + 0.1) <= kLossTol &&
                  std::abs(v.total - (v.mse + 0.01 * 2.0 - 0.1)) <= kLossTol;
  return {ok, std::string("constant (0,0,0) ") + (zero_ok ? "exact" : "WRONG") + ", continuity " +
                  fmt("%.15g", continuity) + ", variance " + fmt("%.15g", v.variance)};
}

// 3 ------------------------------------------------------------------------
Outcome chunk_arithmetic() {
  std::vector<Token> words;
  for (int i = 0; i < 25; ++i) words.push_back("w" + std::to_string(i));
  const ChunkPlan plan = plan_chunks(words, 15.0, 10, 20, 12.0);
  Seq2SeqConfig c;
  c.word_dim = 8;
  c.hidden = 8;
  Seq2SeqModel model = init_model(c, 1);
  model.trained = true;
  const EmbeddingTable table = make_synthetic_table(words, 8, 2);
  const GeneratedGesture g = generate_gesture(model, plan, table);
  const TimedPoseTrack aligned = align_track(g.track, 15.0);
  const bool ok = plan.words_per_chunk == 4 && plan.chunks.size() == 7 && g.track.frames.size() == 140 &&
                  aligned.frames.size() == 180;
  return {ok, "s=" + std::to_string(plan.words_per_chunk) + ", chunks=" + std::to_string(plan.chunks.size()) +
                  ", generated=" + std::to_string(g.track.frames.size()) +
                  ", aligned=" + std::to_string(aligned.frames.size())};
}

// 4 ------------------------------------------------------------------------
Outcome pca_properties() {
  std::mt19937_64 rng(21);
  std::normal_distribution<double> g(0.0, 1.0);
  MatrixXd basis(10, 16);
  for (Eigen::Index i = 0; i < basis.size(); ++i) basis.data()[i] = g(rng);
  VectorXd offset(16);
  for (Eigen::Index i = 0; i < 16; ++i) offset(i) = g(rng);
  MatrixXd rank10(200, 16);
  for (Eigen::Index r = 0; r < 200; ++r) {
    VectorXd coef(10);
    for (Eigen::Index k = 0; k < 10; ++k) coef(k) = 0.05 * g(rng);
    rank10.row(r) = (offset + basis.transpose() * coef).transpose();
  }
  const PcaModel low = fit_pca_flat(rank10, 10);
  double ortho = (low.components * low.components.transpose() - MatrixXd::Identity(10, 10)).cwiseAbs().maxCoeff();
  double round_trip = 0.0;
  for (Eigen::Index r = 0; r < rank10.rows(); ++r) {
    const VectorXd p = rank10.row(r).transpose();
    round_trip = std::max(round_trip, (decode_flat(low, encode_pose(low, NormalizedPose::from_flat(p))) - p).cwiseAbs().maxCoeff());
  }

  std::vector<NormalizedPose> poses;
  for (int i = 0; i < 200; ++i) poses.push_back(normalize_pose(testing::random_raw_pose(rng)));
  const PcaModel model = fit_pca(poses, 10);
  ortho = std::max(ortho, (model.components * model.components.transpose() - MatrixXd::Identity(10, 10)).cwiseAbs().maxCoeff());
  MatrixXd data(200, 16);
  for (int i = 0; i < 200; ++i) data.row(i) = poses[static_cast<std::size_t>(i)].flatten().transpose();
  const MatrixXd centered = data.rowwise() - data.colwise().mean();
  const auto [values, vectors] = testing::jacobi_eigen(centered.transpose() * centered / 199.0);
  double ratio_err = 0.0, vector_err = 0.0;
  for (Eigen::Index k = 0; k < 10; ++k) {
    ratio_err = std::max(ratio_err, std::abs(model.explained_variance_ratio(k) - values(k) / values.sum()));
    vector_err = std::max(vector_err, std::abs(1.0 - std::abs(model.components.row(k).dot(vectors.col(k)))));
  }
  const NormalizedPose mean = NormalizedPose::from_flat(model.mean);
  const double enc_mean = encode_pose(model, mean).cwiseAbs().maxCoeff();
  const bool dec_zero = decode_flat(model, GestureVector::Zero(10)) == model.mean;

  const bool ok = ortho <= kOrthoTol && round_trip <= kRoundTripTol && ratio_err <= kOracleRatioTol &&
                  vector_err <= kOracleVectorTol && enc_mean <= 1e-12 && dec_zero;
  return {ok, "orthonormality " + fmt("%.1e", ortho) + ", rank-10 round trip " + fmt("%.1e", round_trip) +
                  ", oracle ratio " + fmt("%.1e", ratio_err) + " / direction " + fmt("%.1e", vector_err) +
                  ", |encode(mean)| " + fmt("%.1e", enc_mean) + ", decode(0)=mean " + (dec_zero ? "exact" : "NO")};
}

// 5 ------------------------------------------------------------------------
Outcome attention_gru_invariants() {
  std::mt19937_64 rng(31);
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_int_distribution<int> len(1, 15);
  auto random = [&](Eigen::Index r, double s) {
    VectorXd v(r);
    for (Eigen::Index i = 0; i < r; ++i) v(i) = s * g(rng);
    return v;
  };
  Seq2SeqConfig c;
  c.word_dim = 6;
  c.hidden = 5;
  double row_err = 0.0, shift_err = 0.0, gru_max = 0.0, half_err = 0.0;
  Seq2SeqModel zero = init_model(c, 0);
  for (ad::ParamId id : zero.params.ids()) zero.params.value(id).setZero();
  for (int trial = 0; trial < kPropertyCases; ++trial) {
    Seq2SeqModel model = init_model(c, static_cast<std::uint64_t>(trial));
    for (ad::ParamId id : model.params.ids()) {
      auto v = model.params.value(id);
      for (Eigen::Index j = 0; j < v.cols(); ++j) {
        for (Eigen::Index i = 0; i < v.rows(); ++i) v(i, j) = 2.0 * g(rng);
      }
    }
    std::vector<VectorXd> anns;
    const int s = len(rng);
    for (int i = 0; i < s; ++i) anns.push_back(random(10, 2.0));
    const AttentionResult a = attention_weights(model, random(5, 1.0), anns);
    row_err = std::max(row_err, std::abs(a.weights.sum() - 1.0));
    if (a.weights.minCoeff() < 0.0) row_err = 1.0;

    ad::Tape tape;
    const MatrixXd scores = random(s, 3.0);
    const MatrixXd mask = MatrixXd::Ones(s, 1);
    const double shift = 100.0 * u(rng);
    const MatrixXd w1 = ad::masked_softmax_cols(tape.constant(scores), mask).value();
    const MatrixXd w2 = ad::masked_softmax_cols(tape.constant(scores.array() + shift), mask).value();
    shift_err = std::max(shift_err, (w1 - w2).cwiseAbs().maxCoeff());

    VectorXd h(5);
    for (Eigen::Index i = 0; i < 5; ++i) h(i) = u(rng);
    const VectorXd next = gru_cell_forward(model.params, model.dec[1], random(5, 5.0), h);
    gru_max = std::max(gru_max, next.cwiseAbs().maxCoeff());
    const VectorXd halved = gru_cell_forward(zero.params, zero.enc_fwd[0], random(6, 3.0), h);
    half_err = std::max(half_err, (halved - 0.5 * h).cwiseAbs().maxCoeff());
  }
  const bool ok = row_err <= kRowSumTol && shift_err <= kShiftTol && gru_max <= 1.0 && half_err == 0.0;
  return {ok, std::to_string(kPropertyCases) + " cases: row-sum err " + fmt("%.1e", row_err) + ", shift err " +
                  fmt("%.1e", shift_err) + ", max |h'| " + fmt("%.6f", gru_max) + ", zero-GRU err " +
                  fmt("%.1e", half_err)};
}

// 6 and 7 ------------------------------------------------------------------
struct ToyRun {
  Seq2SeqModel model;
  PcaModel pca;
  EmbeddingTable table{kWordDim};
  double seconds = 0.0;
  LossBreakdown held_out;
  double mean_pose_mse = 0.0;
  std::size_t train_pairs = 0;
  std::size_t test_pairs = 0;
};

ToyRun train_toy() {
  ToyRun run;
  const auto t0 = Clock::now();
  const std::vector<DatasetRecord> corpus = synth_corpus(1, kToyTrain + kToyHeldOut);
  const CurationResult curated = curate_shots(corpus);
  if (curated.kept.size() <= kToyTrain) throw Error(Errc::EmptyDataset, "curation removed too many records");
  const std::vector<DatasetRecord> train(curated.kept.begin(), curated.kept.begin() + kToyTrain);
  const std::vector<DatasetRecord> test(curated.kept.begin() + kToyTrain, curated.kept.end());

  std::vector<NormalizedPose> poses;
  for (const DatasetRecord& r : train) {
    for (const RawPose& p : r.frames) poses.push_back(normalize_pose(p));
  }
  run.pca = fit_pca(poses, 10);
  std::vector<EncodedRecord> enc_train, enc_test;
  for (const DatasetRecord& r : train) enc_train.push_back(encode_record(r, run.pca));
  for (const DatasetRecord& r : test) enc_test.push_back(encode_record(r, run.pca));
  const auto pairs = make_training_pairs(enc_train, 10, 20);
  const auto held = make_training_pairs(enc_test, 10, 20);
  run.train_pairs = pairs.size();
  run.test_pairs = held.size();

  run.table = make_synthetic_table(synthetic_vocabulary(), kWordDim, 7);
  Seq2SeqConfig c;
  c.hidden = kToyHidden;
  run.model = init_model(c, 3);
  Hyperparams h;
  h.beta = kToyBeta;
  h.lr = kToyLr;
  h.epochs = kToyEpochs;
  h.seed = 5;
  train_model(pairs, h, run.model, run.table);
  run.seconds = seconds_since(t0);

  run.held_out = evaluate_pairs(held, h, run.model, run.table);
  double sum = 0.0;
  std::size_t count = 0;
  for (const TrainingPair& p : held) {
    for (std::size_t t = 10; t < p.target_poses.size(); ++t) {
      sum += p.target_poses[t].squaredNorm();
      count += static_cast<std::size_t>(p.target_poses[t].size());
    }
  }
  run.mean_pose_mse = sum / static_cast<double>(count);
  return run;
}

struct Generated {
  std::vector<GestureVector> frames;
  double max_spread = 0.0;
};

Generated generate_sentence(const ToyRun& run, const std::vector<Token>& sentence) {
  const ChunkPlan plan = plan_chunks(sentence, estimate_speech_duration(sentence), 10, 20);
  Generated out;
  out.frames = generate_gesture(run.model, plan, run.table).track.frames;
  for (const GestureVector& v : out.frames) {
    const NormalizedPose p = decode_pose(run.pca, v);
    out.max_spread = std::max(out.max_spread, std::abs(p[Joint::LWrist].x - p[Joint::RWrist].x));
  }
  return out;
}

std::pair<Outcome, Outcome> toy_learnability() {
  const ToyRun run = train_toy();
  const double improvement = 1.0 - run.held_out.mse / run.mean_pose_mse;

  std::mt19937_64 rng(99);
  int wins = 0;
  std::vector<double> within, boundary;
  for (int i = 0; i < kToyPairs; ++i) {
    // Same draws for both members of the pair: only the keyword differs.
    std::mt19937_64 r_big = rng, r_small = rng;
    const auto big = synth_sentence(r_big, GestureKind::Big);
    const auto small = synth_sentence(r_small, GestureKind::Small);
    rng = r_big;
    const Generated gb = generate_sentence(run, big);
    const Generated gs = generate_sentence(run, small);
    if (gb.max_spread > gs.max_spread) ++wins;
    for (std::size_t f = 1; f < gb.frames.size(); ++f) {
      const double d = (gb.frames[f] - gb.frames[f - 1]).norm();
      (f % 20 == 0 ? boundary : within).push_back(d);
    }
  }
  const double win_rate = static_cast<double>(wins) / kToyPairs;
  const bool six = improvement >= kToyMinImprovement && win_rate >= kToyMinWinRate && run.seconds <= kToyBudgetSeconds;
  Outcome o6{six, std::to_string(run.train_pairs) + " train pairs, " + fmt("%.0f s", run.seconds) +
                      "; held-out mse " + fmt("%.4f", run.held_out.mse) + " vs mean-pose " +
                      fmt("%.4f", run.mean_pose_mse) + " (" + fmt("%.1f%%", 100.0 * improvement) +
                      " better); big>small spread " + std::to_string(wins) + "/" + std::to_string(kToyPairs)};

  std::sort(within.begin(), within.end());
  const double p95 = within[static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(within.size()))) - 1];
  double mean_boundary = 0.0;
  int above = 0;
  for (double b : boundary) {
    mean_boundary += b;
    above += b > p95;
  }
  mean_boundary /= static_cast<double>(boundary.size());
  Outcome o7{!boundary.empty() && mean_boundary <= p95,
             "mean boundary displacement " + fmt("%.4f", mean_boundary) + " vs within-chunk p95 " + fmt("%.4f", p95) +
                 " (median " + fmt("%.4f", within[within.size() / 2]) + "); " + std::to_string(above) + "/" +
                 std::to_string(boundary.size()) + " individual boundaries above p95"};
  return {o6, o7};
}

// 8 ------------------------------------------------------------------------
Outcome retarget_round_trip() {
  std::mt19937_64 rng(41);
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> len(0.5, 1.5);
  auto direction = [&] {
    Eigen::Vector3d v;
    do {
      v = Eigen::Vector3d(g(rng), g(rng), g(rng));
    } while (v.norm() < 1e-3);
    return Eigen::Vector3d(v.normalized());
  };
  auto angle = [](const Eigen::Vector3d& a, const Eigen::Vector3d& b) { return std::atan2(a.cross(b).norm(), a.dot(b)); };
  double worst = 0.0;
  bool zeros = true;
  const std::pair<Joint, Joint> segments[] = {{Joint::LShoulder, Joint::LElbow},
                                              {Joint::LElbow, Joint::LWrist},
                                              {Joint::RShoulder, Joint::RElbow},
                                              {Joint::RElbow, Joint::RWrist}};
  const auto sampled = synth_pose3d_corpus(42, kPropertyCases / 2);
  for (int trial = 0; trial < kPropertyCases; ++trial) {
    Pose3D p;
    if (trial % 2 == 0) {
      p = sampled[static_cast<std::size_t>(trial / 2)];
    } else {
      p = forward_kinematics(JointAngles{});
      p[Joint::LElbow] = p[Joint::LShoulder] + len(rng) * direction();
      p[Joint::LWrist] = p[Joint::LElbow] + len(rng) * direction();
      p[Joint::RElbow] = p[Joint::RShoulder] + len(rng) * direction();
      p[Joint::RWrist] = p[Joint::RElbow] + len(rng) * direction();
    }
    const JointAngles a = compute_joint_angles(p);
    zeros = zeros && a[Dof::HeadPitch] == 0.0 && a[Dof::LWristYaw] == 0.0 && a[Dof::RWristYaw] == 0.0;
    const Pose3D q = forward_kinematics(a);
    for (const auto& [from, to] : segments) worst = std::max(worst, angle(p[to] - p[from], q[to] - q[from]));
  }
  return {worst < kFkTol && zeros, std::to_string(kPropertyCases) + " poses, worst direction error " +
                                       fmt("%.2e", worst) + " rad, head pitch / wrist yaw " +
                                       (zeros ? "always 0" : "NONZERO")};
}

// 9 ------------------------------------------------------------------------
Outcome lift_checks() {
  LiftNet net = init_lift(51);
  std::vector<NormalizedPose> batch;
  for (const Pose3D& p : synth_pose3d_corpus(52, 32)) batch.push_back(project_sample(p).pose2d);
  LiftTrace trace;
  lift_forward(net, batch, Mode::Train, &trace);
  double bn_err = 0.0;
  for (const MatrixXd& xhat : trace.normalized) {
    const VectorXd mean = xhat.rowwise().mean();
    const VectorXd var = (xhat.colwise() - mean).rowwise().squaredNorm() / static_cast<double>(xhat.cols());
    bn_err = std::max({bn_err, mean.cwiseAbs().maxCoeff(), (var.array() - 1.0).abs().maxCoeff()});
  }

  LiftNet fd = init_lift(53);
  std::mt19937_64 rng(54);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int l = 0; l < 2; ++l) {
    for (Eigen::Index i = 0; i < fd.running_var[l].size(); ++i) {
      fd.running_mean[l](i) = 0.3 * g(rng);
      fd.running_var[l](i) = 0.5 + std::abs(g(rng));
    }
  }
  MatrixXd inputs(kLiftInputs, 6), targets(kLiftOutputs, 6);
  const auto few = synth_pose3d_corpus(55, 6);
  for (Eigen::Index i = 0; i < 6; ++i) {
    const LiftSample s = project_sample(few[static_cast<std::size_t>(i)]);
    inputs.col(i) = lift_input(s.pose2d);
    targets.col(i) = s.depths;
  }
  auto loss = [&](bool backward) {
    ad::Tape tape;
    const ad::Var l = ad::mse(lift_graph(tape, fd, inputs, Mode::Eval), targets);
    if (backward) {
      fd.params.zero_grad();
      tape.backward(l, fd.params);
    }
    return l.value()(0, 0);
  };
  loss(true);
  const testing::GradReport r = testing::check_gradients(fd.params, [&] { return loss(false); }, kGradStep);

  LiftHyper h;
  h.steps = 2000;
  h.seed = 11;
  const LiftNet trained = train_lift(synth_pose3d_corpus(10, 50), h);
  std::vector<LiftSample> held;
  for (const Pose3D& p : synth_pose3d_corpus(12, 200)) held.push_back(project_sample(p));
  double zero = 0.0;
  for (const LiftSample& s : held) zero += s.depths.squaredNorm();
  zero /= static_cast<double>(held.size() * kLiftOutputs);
  const double mse = depth_mse(trained, held);

  const bool ok = bn_err <= kBatchNormTol && r.worst < kGradTol && mse < 0.25 * zero;
  return {ok, "batchnorm err " + fmt("%.1e", bn_err) + ", gradient rel err " + fmt("%.1e", r.worst) +
                  ", held-out depth mse " + fmt("%.4f", mse) + " = " + fmt("%.1f%%", 100.0 * mse / zero) +
                  " of zero baseline"};
}

// 10 -----------------------------------------------------------------------
std::vector<Token> split(const std::string& s) {
  std::istringstream in(s);
  return {std::istream_iterator<std::string>(in), std::istream_iterator<std::string>()};
}

Outcome baseline_checks() {
  const std::pair<const char*, const char*> cases[] = {
      {"the cat sat on the mat", "the cat sat on the mat"},
      {"a b c", "d e f"},
      {"the cat sat", "the cat sat down"},
      {"the the the the", "the cat"},
      {"big big big", "it is big"},
      {"you hold it in your hand", "hold it in your hand"},
      {"hold it", "you hold it in your hand"},
      {"a", "a"},
      {"a", "b"},
      {"a b a b a b", "a b a b"},
      {"one two three four five", "five four three two one"},
      {"i am so happy", "i am so very happy"},
      {"the big one and the small one", "the small one and the big one"},
      {"x y z w", "x y z w v"},
      {"all of it", "all of us"},
      {"me me me", "me"},
      {"this is a test", "this is a test of the system"},
      {"everything is fine here", "is everything fine here"},
      {"a b c d e f g", "a b c d e f g"},
      {"tiny small little", "huge big large"},
  };
  double worst = 0.0;
  for (const auto& [c, r] : cases) {
    const auto cand = split(c), ref = split(r);
    worst = std::max(worst, std::abs(bleu_score(cand, ref) - testing::brute_bleu(cand, ref, 4)));
  }
  const bool identical = bleu_score(split(cases[0].first), split(cases[0].second)) == 1.0;
  const bool disjoint = bleu_score(split(cases[1].first), split(cases[1].second)) == 0.0;

  const std::vector<DatasetRecord> corpus = synth_corpus(61, 8);
  std::vector<NormalizedPose> poses;
  for (const DatasetRecord& r : corpus) {
    for (const RawPose& p : r.frames) poses.push_back(normalize_pose(p));
  }
  const PcaModel pca = fit_pca(poses, 10);
  std::vector<EncodedRecord> encoded;
  for (const DatasetRecord& r : corpus) encoded.push_back(encode_record(r, pca));
  const EncodedRecord& target = encoded[5];
  const std::vector<Token> query = surfaces(target.words);
  const TimedPoseTrack nn = nn_baseline(query, encoded, static_cast<int>(query.size()));
  bool verbatim = nn.frames.size() == target.poses.size();
  for (std::size_t f = 0; verbatim && f < nn.frames.size(); ++f) verbatim = nn.frames[f] == target.poses[f];

  std::mt19937_64 rng(62);
  double worst_frames = 0.0;
  testing::TempDir dir("acceptance_manual");
  TimedPoseTrack manual;
  for (int i = 0; i < 20; ++i) manual.frames.push_back(target.poses[static_cast<std::size_t>(i)]);
  write_track_csv(manual, dir / "manual.csv");
  for (const double dur : {0.9, 3.0, 7.3, 12.25, 20.0}) {
    const TimedPoseTrack r = random_baseline(encoded, dur, rng);
    const TimedPoseTrack m = manual_baseline(dir / "manual.csv", dur);
    worst_frames = std::max({worst_frames, std::abs(r.duration() - dur) * r.fps, std::abs(m.duration() - dur) * m.fps});
  }
  const bool ok = worst <= kBleuTol && identical && disjoint && verbatim && worst_frames <= 1.0;
  return {ok, "BLEU vs brute force over 20 cases max diff " + fmt("%.1e", worst) + " (identical 1.0, disjoint 0.0: " +
                  (identical && disjoint ? "yes" : "NO") + "); nn verbatim " + (verbatim ? "yes" : "NO") +
                  "; worst duration error " + fmt("%.2f", worst_frames) + " frames"};
}

// 11 -----------------------------------------------------------------------
std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

bool run_cli(const std::filesystem::path& dir, const std::string& args) {
  const std::string cmd = "cd '" + dir.string() + "' && '" + std::string(GESTURECTL_PATH) + "' --seed 3 " + args +
                          " >> cli.log 2>&1";
  return std::system(cmd.c_str()) == 0;
}

Outcome reproducibility() {
  const std::vector<std::string> steps = {
      "synth-corpus --out data.jsonl --count 40 --embeddings-out words.txt",
      "train --dataset data.jsonl --embeddings words.txt --out model.ckpt --log train.csv --epochs 2 --hidden 16",
      "generate --checkpoint model.ckpt --text \"you hold the big one in your hand and i hold the small one\" "
      "--duration 5 --out-dir gen",
      "lift-train --checkpoint model.ckpt --out lifted.ckpt --samples 400 --steps 100",
      "retarget --checkpoint lifted.ckpt --track gen/track.csv --out joints.csv",
  };
  const std::vector<std::string> outputs = {"data.jsonl",       "words.txt",    "model.ckpt",
                                            "train.csv",        "gen/track.csv", "gen/attention.csv",
                                            "lifted.ckpt",      "joints.csv"};
  testing::TempDir a("acceptance_run_a"), b("acceptance_run_b");
  for (const auto* dir : {&a, &b}) {
    for (const std::string& s : steps) {
      if (!run_cli(dir->path(), s)) {
        return {false, "command failed: " + s.substr(0, s.find(' ')) + " (see " + (dir->path() / "cli.log").string() + ")"};
      }
    }
  }
  std::size_t identical = 0;
  std::string differs;
  for (const std::string& f : outputs) {
    const std::string x = slurp(a / f), y = slurp(b / f);
    if (!x.empty() && x == y) {
      ++identical;
    } else {
      differs += " " + f;
    }
  }
  const Checkpoint ck = load_checkpoint(a / "lifted.ckpt");
  save_checkpoint(ck, a / "resaved.ckpt");
  const bool bit_exact = slurp(a / "resaved.ckpt") == slurp(a / "lifted.ckpt");
  return {identical == outputs.size() && bit_exact,
          std::to_string(identical) + "/" + std::to_string(outputs.size()) + " output files byte-identical" +
              (differs.empty() ? "" : " (differ:" + differs + ")") + "; checkpoint reload/resave " +
              (bit_exact ? "bit-exact" : "DIFFERS")};
}

// 12 -----------------------------------------------------------------------
std::string latency() {
  std::mt19937_64 rng(71);
  std::vector<Token> words;
  while (words.size() < 25) {
    for (const Token& t : synth_sentence(rng)) {
      if (words.size() < 25) words.push_back(t);
    }
  }
  const EmbeddingTable table = make_synthetic_table(synthetic_vocabulary(), kWordDim, 7);
  std::string report;
  for (const int hidden : {kToyHidden, 200}) {
    Seq2SeqConfig c;
    c.hidden = hidden;
    Seq2SeqModel model = init_model(c, 1);
    model.trained = true;
    std::vector<double> times;
    for (int rep = 0; rep < 5; ++rep) {
      const auto t0 = Clock::now();
      const ChunkPlan plan = plan_chunks(words, 15.0);
      align_track(generate_gesture(model, plan, table).track, 15.0);
      times.push_back(seconds_since(t0));
    }
    std::sort(times.begin(), times.end());
    report += (report.empty() ? "" : ", ") + std::string("hidden ") + std::to_string(hidden) + ": " +
              fmt("%.3f s", times[2]);
  }
  return "25 words, 7 chunks, median of 5 on one core: " + report + " (published figure: 0.14 s)";
}

}  // namespace
}  // namespace gesture

int main() {
  using namespace gesture;
  int failures = 0;
  auto report = [&](int id, const char* name, const Outcome& o) {
    std::printf("CRITERION %2d %s  %s: %s\n", id, o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
    std::fflush(stdout);
    failures += o.pass ? 0 : 1;
  };
  auto guarded = [&](int id, const char* name, auto&& fn) {
    try {
      report(id, name, fn());
    } catch (const std::exception& e) {
      report(id, name, Outcome{false, std::string("exception: ") + e.what()});
    }
  };
  guarded(1, "gradient correctness", gradient_check);
  guarded(2, "loss identities", loss_identities);
  guarded(3, "chunk arithmetic", chunk_arithmetic);
  guarded(4, "PCA properties", pca_properties);
  guarded(5, "attention/GRU invariants", attention_gru_invariants);
  try {
    const auto [six, seven] = toy_learnability();
    report(6, "toy learnability", six);
    report(7, "chunk continuity", seven);
  } catch (const std::exception& e) {
    report(6, "toy learnability", Outcome{false, std::string("exception: ") + e.what()});
    report(7, "chunk continuity", Outcome{false, "toy run unavailable"});
  }
  guarded(8, "retargeting round trip", retarget_round_trip);
  guarded(9, "lift network", lift_checks);
  guarded(10, "baselines", baseline_checks);
  guarded(11, "reproducibility", reproducibility);
  try {
    std::printf("CRITERION 12 INFO  generation latency: %s\n", latency().c_str());
  } catch (const std::exception& e) {
    std::printf("CRITERION 12 INFO  generation latency: unavailable (%s)\n", e.what());
  }
  std::printf("%s: %d of 11 gated criteria failed\n", failures == 0 ? "ACCEPTED" : "REJECTED", failures);
  return failures == 0 ? 0 : 1;
}
