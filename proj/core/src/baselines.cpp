// SPDX-License-Identifier: Apache-2.0
#include "gesture/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "gesture/error.hpp"
#include "gesture/track_io.hpp"

namespace gesture {
namespace {

using NGram = std::vector<Token>;

std::map<NGram, int> count_ngrams(std::span<const Token> tokens, std::size_t n) {
  std::map<NGram, int> counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    ++counts[NGram(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                   tokens.begin() + static_cast<std::ptrdiff_t>(i + n))];
  }
  return counts;
}

struct Window {
  std::size_t first_frame;
  std::size_t end_frame;
  std::vector<Token> words;
};

std::vector<Window> word_windows(const EncodedRecord& record, std::size_t chunk_len) {
  std::vector<Window> windows;
  const std::size_t count = record.words.size();
  if (count == 0 || record.poses.empty()) return windows;
  const std::size_t width = std::min(chunk_len, count);
  const std::size_t frames = record.poses.size();
  for (std::size_t i = 0; i + width <= count; ++i) {
    Window w;
    const std::size_t last = i + width - 1;
    w.first_frame = i == 0 ? 0 : static_cast<std::size_t>(std::floor(record.words[i].t_start * record.fps));
    w.end_frame = last + 1 == count ? frames
                                    : static_cast<std::size_t>(std::ceil(record.words[last].t_end * record.fps));
    w.first_frame = std::min(w.first_frame, frames - 1);
    w.end_frame = std::clamp(w.end_frame, w.first_frame + 1, frames);
    for (std::size_t k = i; k <= last; ++k) w.words.push_back(record.words[k].surface);
    windows.push_back(std::move(w));
  }
  return windows;
}

}  // namespace

double bleu_score(std::span<const Token> candidate, std::span<const Token> reference, int max_n) {
  if (reference.empty()) throw Error(Errc::EmptyReference, "reference has no tokens");
  if (max_n < 1) throw Error(Errc::InvalidConfig, "max_n must be >= 1");
  if (candidate.empty()) return 0.0;
  const std::size_t orders = std::min<std::size_t>(static_cast<std::size_t>(max_n), candidate.size());
  double log_sum = 0.0;
  for (std::size_t n = 1; n <= orders; ++n) {
    const auto cand = count_ngrams(candidate, n);
    const auto ref = count_ngrams(reference, n);
    int matched = 0;
    int total = 0;
    for (const auto& [gram, c] : cand) {
      total += c;
      const auto it = ref.find(gram);
      if (it != ref.end()) matched += std::min(c, it->second);
    }
    if (n == 1) {
      if (matched == 0) return 0.0;
      log_sum += std::log(static_cast<double>(matched) / total);
    } else {
      log_sum += std::log((matched + 1.0) / (total + 1.0));
    }
  }
  const double c = static_cast<double>(candidate.size());
  const double r = static_cast<double>(reference.size());
  const double bp = c > r ? 1.0 : std::exp(1.0 - r / c);
  return bp * std::exp(log_sum / static_cast<double>(orders));
}

TimedPoseTrack nn_baseline(std::span<const Token> query, std::span<const EncodedRecord> training, int chunk_len,
                           int crossfade) {
  if (training.empty()) throw Error(Errc::EmptyTrainingSet, "nn baseline needs training records");
  if (query.empty()) throw Error(Errc::EmptyInput, "empty query");
  if (chunk_len < 1 || crossfade < 0) throw Error(Errc::InvalidConfig, "chunk_len >= 1 and crossfade >= 0");

  std::vector<std::size_t> order(training.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return training[a].id < training[b].id; });
  std::vector<std::vector<Window>> windows(training.size());
  for (std::size_t r = 0; r < training.size(); ++r) {
    windows[r] = word_windows(training[r], static_cast<std::size_t>(chunk_len));
  }

  TimedPoseTrack out;
  out.fps = training[order.front()].fps;
  const auto step = static_cast<std::size_t>(chunk_len);
  for (std::size_t begin = 0; begin < query.size(); begin += step) {
    const auto chunk = query.subspan(begin, std::min(step, query.size() - begin));
    double best = -1.0;
    const EncodedRecord* best_record = nullptr;
    const Window* best_window = nullptr;
    for (std::size_t r : order) {
      for (const Window& w : windows[r]) {
        const double score = bleu_score(chunk, w.words);
        if (score > best) {
          best = score;
          best_record = &training[r];
          best_window = &w;
        }
      }
    }
    if (best_record == nullptr) throw Error(Errc::EmptyTrainingSet, "no training record has words and poses");

    const auto first = best_record->poses.begin() + static_cast<std::ptrdiff_t>(best_window->first_frame);
    const auto last = best_record->poses.begin() + static_cast<std::ptrdiff_t>(best_window->end_frame);
    const std::vector<GestureVector> piece(first, last);
    const std::size_t overlap =
        std::min({static_cast<std::size_t>(crossfade), out.frames.size(), piece.size()});
    const std::size_t base = out.frames.size() - overlap;
    for (std::size_t k = 0; k < overlap; ++k) {
      const double w = static_cast<double>(k + 1) / static_cast<double>(overlap + 1);
      out.frames[base + k] = (1.0 - w) * out.frames[base + k] + w * piece[k];
    }
    out.frames.insert(out.frames.end(), piece.begin() + static_cast<std::ptrdiff_t>(overlap), piece.end());
  }
  return out;
}

TimedPoseTrack random_baseline(std::span<const EncodedRecord> training, double speech_duration,
                               std::mt19937_64& rng) {
  if (training.empty()) throw Error(Errc::EmptyTrainingSet, "random baseline needs training records");
  std::uniform_int_distribution<std::size_t> pick(0, training.size() - 1);
  const EncodedRecord& record = training[pick(rng)];
  TimedPoseTrack track;
  track.fps = record.fps;
  track.frames = record.poses;
  return align_track(track, speech_duration);
}

TimedPoseTrack manual_baseline(const std::filesystem::path& path, double speech_duration) {
  TimedPoseTrack track;
  try {
    track = read_track_csv(path);
  } catch (const Error& e) {
    if (e.code() == Errc::MalformedFile) throw;
    throw Error(Errc::MalformedFile, e.what());
  }
  return align_track(track, speech_duration);
}

TrackMetrics eval_tracks(const TimedPoseTrack& generated, const TimedPoseTrack& reference) {
  if (generated.frames.size() != reference.frames.size()) {
    throw Error(Errc::LengthMismatch, std::to_string(generated.frames.size()) + " generated frames vs " +
                                          std::to_string(reference.frames.size()) + " reference frames");
  }
  if (generated.frames.empty()) throw Error(Errc::EmptyInput, "tracks have no frames");
  const Eigen::Index dim = generated.frames.front().size();
  const auto frames = static_cast<double>(generated.frames.size());
  TrackMetrics m;
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(dim);
  for (std::size_t f = 0; f < generated.frames.size(); ++f) {
    if (generated.frames[f].size() != dim || reference.frames[f].size() != dim) {
      throw Error(Errc::ShapeMismatch, "frame " + std::to_string(f) + " has the wrong dimension");
    }
    m.mse += (generated.frames[f] - reference.frames[f]).squaredNorm();
    mean += generated.frames[f];
    if (f > 0) m.mean_displacement += (generated.frames[f] - generated.frames[f - 1]).norm();
  }
  m.mse /= frames * static_cast<double>(dim);
  if (generated.frames.size() > 1) m.mean_displacement /= frames - 1.0;
  mean /= frames;
  m.variance = Eigen::VectorXd::Zero(dim);
  for (const GestureVector& p : generated.frames) m.variance += (p - mean).cwiseAbs2();
  m.variance /= frames;
  return m;
}

}  // namespace gesture
