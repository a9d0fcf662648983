// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include <Eigen/Core>

#include "gesture/pca.hpp"
#include "gesture/seq2seq.hpp"
#include "gesture/text.hpp"

namespace gesture {

inline constexpr double kDefaultFps = 12.0;
inline constexpr double kDefaultWordsPerMinute = 160.0;

struct TimedPoseTrack {
  std::vector<GestureVector> frames;
  double fps = kDefaultFps;

  double duration() const noexcept { return static_cast<double>(frames.size()) / fps; }
};

struct ChunkPlan {
  std::size_t total_words = 0;
  int words_per_chunk = 1;
  std::vector<std::vector<Token>> chunks;
  double speech_duration = 0.0;
  double fps = kDefaultFps;
  int n = 10;
  int m = 20;

  double frame_duration() const noexcept { return 1.0 / fps; }
};

/// word_count / rate, in seconds. Throws Error(EmptyInput).
double estimate_speech_duration(const std::vector<Token>& tokens,
                                double words_per_minute = kDefaultWordsPerMinute);

/// s = floor(S * (m + n) * frame_duration / speech_duration), clamped to
/// [1, S]; tokens split into consecutive chunks of s words.
ChunkPlan plan_chunks(const std::vector<Token>& tokens, double speech_duration, int n = 10,
                      int m = 20, double fps = kDefaultFps);

struct GeneratedGesture {
  TimedPoseTrack track;
  std::vector<Eigen::MatrixXd> attention;  // per chunk, m x chunk words
};

/// One inference per chunk. The first chunk is seeded with n mean poses
/// (zero vectors); later chunks with the last n poses generated so far.
GeneratedGesture generate_gesture(const Seq2SeqModel& model, const ChunkPlan& plan,
                                  const EmbeddingTable& table);

/// Uniform time rescale with linear interpolation to ceil(duration * fps)
/// frames. First and last frames are preserved.
TimedPoseTrack align_track(const TimedPoseTrack& track, double speech_duration);

struct AttentionMatrix {
  Eigen::MatrixXd values;  // frames x words, block diagonal
  std::vector<Token> words;
};

AttentionMatrix assemble_attention(const std::vector<Eigen::MatrixXd>& maps, const ChunkPlan& plan);

}  // namespace gesture
