// SPDX-License-Identifier: Apache-2.0
#include "gesture/synthesis.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gesture/error.hpp"

namespace gesture {

double estimate_speech_duration(const std::vector<Token>& tokens, double words_per_minute) {
  if (tokens.empty()) throw Error(Errc::EmptyInput, "no words to time");
  if (!(words_per_minute > 0.0)) throw Error(Errc::InvalidConfig, "speaking rate must be > 0");
  return static_cast<double>(tokens.size()) * 60.0 / words_per_minute;
}

ChunkPlan plan_chunks(const std::vector<Token>& tokens, double speech_duration, int n, int m,
                      double fps) {
  if (!(speech_duration > 0.0) || !std::isfinite(speech_duration)) {
    throw Error(Errc::InvalidDuration, "speech duration must be positive");
  }
  if (tokens.empty()) throw Error(Errc::EmptyInput, "no words to plan");
  if (n < 1 || m < 1 || !(fps > 0.0)) throw Error(Errc::InvalidConfig, "n, m and fps must be positive");

  ChunkPlan plan;
  plan.total_words = tokens.size();
  plan.speech_duration = speech_duration;
  plan.fps = fps;
  plan.n = n;
  plan.m = m;

  // S * (m + n) * (1 / fps) / duration, arranged to avoid rounding 1/fps.
  const double S = static_cast<double>(tokens.size());
  const double raw = std::floor(S * static_cast<double>(m + n) / (fps * speech_duration));
  const double clamped = std::clamp(raw, 1.0, S);
  plan.words_per_chunk = static_cast<int>(clamped);

  const auto s = static_cast<std::size_t>(plan.words_per_chunk);
  for (std::size_t i = 0; i < tokens.size(); i += s) {
    const std::size_t stop = std::min(tokens.size(), i + s);
    plan.chunks.emplace_back(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                             tokens.begin() + static_cast<std::ptrdiff_t>(stop));
  }
  return plan;
}

GeneratedGesture generate_gesture(const Seq2SeqModel& model, const ChunkPlan& plan,
                                  const EmbeddingTable& table) {
  if (!model.trained) throw Error(Errc::UntrainedModel, "model has not been trained or loaded");
  const Seq2SeqConfig& c = model.config;
  if (plan.n != c.n || plan.m != c.m) {
    throw Error(Errc::InvalidConfig, "plan n/m (" + std::to_string(plan.n) + "/" +
                                         std::to_string(plan.m) + ") differ from model (" +
                                         std::to_string(c.n) + "/" + std::to_string(c.m) + ")");
  }
  GeneratedGesture out;
  out.track.fps = plan.fps;
  for (const std::vector<Token>& chunk : plan.chunks) {
    std::vector<GestureVector> seeds(static_cast<std::size_t>(c.n), GestureVector::Zero(c.pose_dim));
    const std::size_t have = out.track.frames.size();
    const std::size_t take = std::min(have, static_cast<std::size_t>(c.n));
    for (std::size_t i = 0; i < take; ++i) {
      seeds[static_cast<std::size_t>(c.n) - take + i] = out.track.frames[have - take + i];
    }
    ForwardResult r = forward(model, embed_matrix(table, chunk), seeds, Mode::Eval);
    for (GestureVector& p : r.poses) out.track.frames.push_back(std::move(p));
    out.attention.push_back(std::move(r.attention));
  }
  return out;
}

TimedPoseTrack align_track(const TimedPoseTrack& track, double speech_duration) {
  if (!(speech_duration > 0.0) || !std::isfinite(speech_duration)) {
    throw Error(Errc::InvalidDuration, "speech duration must be positive");
  }
  if (track.frames.empty()) throw Error(Errc::EmptyInput, "cannot align an empty track");
  // Tolerance keeps exact multiples of the frame period from gaining a frame.
  const auto target = static_cast<std::size_t>(
      std::max(1.0, std::ceil(speech_duration * track.fps - 1e-9)));
  TimedPoseTrack out;
  out.fps = track.fps;
  const std::size_t source = track.frames.size();
  if (target == source) {
    out.frames = track.frames;
    return out;
  }
  out.frames.reserve(target);
  for (std::size_t j = 0; j < target; ++j) {
    if (source == 1 || target == 1) {
      out.frames.push_back(track.frames.front());
      continue;
    }
    if (j + 1 == target) {
      out.frames.push_back(track.frames.back());
      continue;
    }
    const double pos = static_cast<double>(j) * static_cast<double>(source - 1) /
                       static_cast<double>(target - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const double frac = pos - static_cast<double>(lo);
    if (frac == 0.0 || lo + 1 >= source) {
      out.frames.push_back(track.frames[lo]);
    } else {
      out.frames.push_back(track.frames[lo] + frac * (track.frames[lo + 1] - track.frames[lo]));
    }
  }
  return out;
}

AttentionMatrix assemble_attention(const std::vector<Eigen::MatrixXd>& maps, const ChunkPlan& plan) {
  if (maps.size() != plan.chunks.size()) {
    throw Error(Errc::LengthMismatch, "one attention map per chunk is required");
  }
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;
  for (std::size_t i = 0; i < maps.size(); ++i) {
    if (maps[i].cols() != static_cast<Eigen::Index>(plan.chunks[i].size())) {
      throw Error(Errc::LengthMismatch, "attention map width differs from chunk word count");
    }
    rows += maps[i].rows();
    cols += maps[i].cols();
  }
  AttentionMatrix out;
  out.values = Eigen::MatrixXd::Zero(rows, cols);
  Eigen::Index r = 0;
  Eigen::Index c = 0;
  for (std::size_t i = 0; i < maps.size(); ++i) {
    out.values.block(r, c, maps[i].rows(), maps[i].cols()) = maps[i];
    r += maps[i].rows();
    c += maps[i].cols();
    out.words.insert(out.words.end(), plan.chunks[i].begin(), plan.chunks[i].end());
  }
  return out;
}

}  // namespace gesture
