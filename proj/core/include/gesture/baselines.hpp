// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <random>
#include <span>
#include <vector>

#include "gesture/record.hpp"
#include "gesture/synthesis.hpp"
#include "gesture/text.hpp"

namespace gesture {

/// Modified n-gram precisions up to min(max_n, |candidate|); unigram
/// precision unsmoothed, add-one smoothing for n >= 2; geometric mean times
/// the brevity penalty. Empty candidate scores 0. Throws Error(EmptyReference).
double bleu_score(std::span<const Token> candidate, std::span<const Token> reference, int max_n = 4);

inline constexpr int kDefaultChunkWords = 6;
inline constexpr int kDefaultCrossfade = 4;

/// Per query chunk, the training word window with the highest BLEU supplies
/// its poses; consecutive winners are cross-faded. Throws
/// Error(EmptyTrainingSet) or Error(EmptyInput).
TimedPoseTrack nn_baseline(std::span<const Token> query, std::span<const EncodedRecord> training,
                           int chunk_len = kDefaultChunkWords, int crossfade = kDefaultCrossfade);

/// Throws Error(EmptyTrainingSet).
TimedPoseTrack random_baseline(std::span<const EncodedRecord> training, double speech_duration,
                               std::mt19937_64& rng);

/// Track CSV aligned to the duration. Throws Error(MalformedFile).
TimedPoseTrack manual_baseline(const std::filesystem::path& path, double speech_duration);

struct TrackMetrics {
  double mse = 0.0;                // mean over frames and components
  double mean_displacement = 0.0;  // mean L2 norm between consecutive generated frames
  Eigen::VectorXd variance;        // per-component population variance over time
};

/// Throws Error(LengthMismatch) or Error(EmptyInput).
TrackMetrics eval_tracks(const TimedPoseTrack& generated, const TimedPoseTrack& reference);

}  // namespace gesture
