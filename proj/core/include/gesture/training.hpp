// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "gesture/autodiff.hpp"
#include "gesture/record.hpp"
#include "gesture/seq2seq.hpp"
#include "gesture/text.hpp"

namespace gesture {

struct Hyperparams {
  double alpha = 0.01;  // continuity weight
  double beta = 1.0;    // variance weight
  double lr = 1e-4;
  int batch_size = 64;
  double clip_lo = -5.0;
  double clip_hi = 5.0;
  double dropout = 0.1;
  int epochs = 560;
  std::uint64_t seed = 0;

  /// Throws Error(InvalidConfig).
  void validate() const;
};

struct LossBreakdown {
  double mse = 0.0;
  double continuity = 0.0;
  double variance = 0.0;  // <= 0
  double total = 0.0;
};

/// Loss of one generated sequence. `pred` and `target` are pose_dim x m.
/// If `grad` is non-null it receives d total / d pred.
LossBreakdown sequence_loss(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& target,
                            double alpha, double beta, Eigen::MatrixXd* grad = nullptr);

/// Throws Error(LengthMismatch) for unequal or shorter-than-2 sequences.
LossBreakdown compute_loss(std::span<const GestureVector> pred,
                           std::span<const GestureVector> target, const Hyperparams& h);

/// Batch-mean loss as a 1x1 tape node. `poses[t]` is pose_dim x B,
/// `targets[b]` is pose_dim x m. `mean` receives the batch-mean breakdown.
ad::Var sequence_loss_node(std::span<const ad::Var> poses, std::span<const Eigen::MatrixXd> targets,
                           double alpha, double beta, LossBreakdown* mean = nullptr);

/// Elementwise clamp of every gradient entry into [lo, hi].
void clip_gradients(ad::ParamStore& store, double lo, double hi);

struct AdamState {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t step = 0;
  std::vector<Eigen::MatrixXd> first;
  std::vector<Eigen::MatrixXd> second;

  static AdamState for_store(const ad::ParamStore& store);
};

/// Bias-corrected Adam update. Gradients are left in place.
void adam_step(ad::ParamStore& store, AdamState& state, double lr);

struct TrainingPair {
  std::vector<Token> words;
  std::vector<GestureVector> target_poses;  // n seed poses followed by m targets
};

/// Windows of n+m consecutive frames every `stride` frames (0 -> m), paired
/// with the words whose time span overlaps the window. Windows without
/// words are dropped.
std::vector<TrainingPair> make_training_pairs(std::span<const EncodedRecord> records, int n, int m,
                                              int stride = 0);

struct TrainCallbacks {
  std::function<void(int epoch, const LossBreakdown&)> on_epoch;
  int checkpoint_every = 0;
  std::function<void(int epoch, const Seq2SeqModel&)> on_checkpoint;
};

/// Seeded shuffle, mini-batches (last partial batch kept), train-mode
/// forward with ground-truth seeds, backward, clip, Adam. Returns per-epoch
/// mean losses. Sets `model.trained`.
std::vector<LossBreakdown> train_model(std::span<const TrainingPair> pairs, const Hyperparams& h,
                                       Seq2SeqModel& model, const EmbeddingTable& table,
                                       const TrainCallbacks& callbacks = {});

/// Mean loss over `pairs` in eval mode, no parameter updates.
LossBreakdown evaluate_pairs(std::span<const TrainingPair> pairs, const Hyperparams& h,
                             const Seq2SeqModel& model, const EmbeddingTable& table);

}  // namespace gesture
