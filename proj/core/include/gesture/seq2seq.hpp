// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "gesture/autodiff.hpp"
#include "gesture/pca.hpp"

namespace gesture {

struct Seq2SeqConfig {
  int word_dim = 300;
  int hidden = 200;
  int pose_dim = 10;
  int n = 10;  // seed poses
  int m = 20;  // generated poses
  int attn_dim = 0;  // 0 -> hidden
  int pre_dim = 0;   // 0 -> hidden
  double dropout = 0.1;

  int attention_size() const noexcept { return attn_dim > 0 ? attn_dim : hidden; }
  int pre_size() const noexcept { return pre_dim > 0 ? pre_dim : hidden; }
  /// Throws Error(InvalidConfig).
  void validate() const;
};

struct GruCellParams {
  int input = 0;
  int hidden = 0;
  ad::ParamId W_z, W_r, W_h;
  ad::ParamId U_z, U_r, U_h;
  ad::ParamId b_z, b_r, b_h;
};

/// Encoder: two bidirectional GRU layers. Decoder: pre-linear on the previous
/// pose, two GRU layers, post-linear back to pose space. Additive attention
/// queried by the top decoder state and fed into the first decoder layer.
struct Seq2SeqModel {
  Seq2SeqConfig config;
  ad::ParamStore params;
  std::array<GruCellParams, 2> enc_fwd;
  std::array<GruCellParams, 2> enc_bwd;
  std::array<GruCellParams, 2> dec;
  ad::ParamId attn_W, attn_U, attn_v;
  ad::ParamId pre_W, pre_b, post_W, post_b;
  bool trained = false;
};

enum class Mode { Train, Eval };

/// Glorot-uniform weights, zero biases; deterministic in `seed`.
Seq2SeqModel init_model(const Seq2SeqConfig& config, std::uint64_t seed);

/// Rebinds parameter handles after the store was filled elsewhere (checkpoint
/// load). Throws Error(InvalidModel) on missing or mis-shaped parameters.
Seq2SeqModel bind_model(const Seq2SeqConfig& config, ad::ParamStore params);

/// One GRU step on a tape; x is input x B, h is hidden x B.
ad::Var gru_cell(ad::Tape& tape, const ad::ParamStore& store, const GruCellParams& p, ad::Var x,
                 ad::Var h);

/// Single-sample GRU step. Throws Error(ShapeMismatch).
Eigen::VectorXd gru_cell_forward(const ad::ParamStore& store, const GruCellParams& p,
                                 const Eigen::VectorXd& x, const Eigen::VectorXd& h);

/// Per word: [forward top state; backward top state], 2*hidden long.
std::vector<Eigen::VectorXd> encode_text(const Seq2SeqModel& model,
                                         std::span<const Eigen::VectorXd> embedded_words);

struct AttentionResult {
  Eigen::VectorXd weights;
  Eigen::VectorXd context;
};

AttentionResult attention_weights(const Seq2SeqModel& model, const Eigen::VectorXd& decoder_state,
                                  std::span<const Eigen::VectorXd> annotations);

struct DecoderState {
  std::array<Eigen::VectorXd, 2> hidden;
};

struct DecodeStepResult {
  GestureVector pose;
  DecoderState state;
  Eigen::VectorXd weights;
};

DecoderState zero_decoder_state(const Seq2SeqModel& model);

/// Eval-mode single step.
DecodeStepResult decode_step(const Seq2SeqModel& model, const GestureVector& prev_pose,
                             const DecoderState& state,
                             std::span<const Eigen::VectorXd> annotations);

/// Graph of one batched forward pass.
struct ForwardGraph {
  std::vector<ad::Var> poses;  // m entries, pose_dim x B
  /// m entries of max_words x B; column b is zero past that sample's words.
  std::vector<Eigen::MatrixXd> attention;
};

/// `words[b]` is word_dim x s_b; `seeds[b]` holds n poses. Samples may have
/// different word counts. `rng` drives dropout and is required in Train mode.
ForwardGraph build_forward(ad::Tape& tape, const Seq2SeqModel& model,
                           std::span<const Eigen::MatrixXd> words,
                           std::span<const std::vector<GestureVector>> seeds, Mode mode,
                           std::mt19937_64* rng);

struct ForwardResult {
  std::vector<GestureVector> poses;  // m
  Eigen::MatrixXd attention;         // m x s
};

/// Runs the n seed poses through the decoder, then emits m poses
/// autoregressively. The step that consumes the last seed produces the first
/// output.
ForwardResult forward(const Seq2SeqModel& model, const Eigen::MatrixXd& words,
                      const std::vector<GestureVector>& seeds, Mode mode = Mode::Eval,
                      std::mt19937_64* rng = nullptr);

}  // namespace gesture
