// SPDX-License-Identifier: Apache-2.0
#include "gesture/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

#include <nlohmann/json.hpp>

#include "gesture/error.hpp"
#include "gesture/kinematics.hpp"

namespace gesture {

using nlohmann::json;

void write_records_jsonl(std::span<const DatasetRecord> records, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::IoFailure, "cannot write " + path.string());
  for (const DatasetRecord& r : records) {
    json j;
    j["id"] = r.id;
    j["fps"] = r.fps;
    j["frame_height"] = r.frame_height;
    json words = json::array();
    for (const TimedWord& w : r.words) {
      words.push_back({{"surface", w.surface}, {"t_start", w.t_start}, {"t_end", w.t_end}});
    }
    j["words"] = std::move(words);
    json frames = json::array();
    for (const RawPose& f : r.frames) {
      json joints = json::array();
      for (std::size_t i = 0; i < kNumJoints; ++i) {
        if (f.present[i]) {
          joints.push_back(json::array({f.joints[i].x, f.joints[i].y}));
        } else {
          joints.push_back(nullptr);
        }
      }
      frames.push_back(std::move(joints));
    }
    j["frames"] = std::move(frames);
    out << j.dump() << '\n';
  }
  if (!out) throw Error(Errc::IoFailure, "write failed for " + path.string());
}

std::vector<DatasetRecord> read_records_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoFailure, "cannot open " + path.string());
  std::vector<DatasetRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      DatasetRecord r;
      r.id = j.at("id").get<std::string>();
      r.fps = j.at("fps").get<double>();
      r.frame_height = j.at("frame_height").get<double>();
      for (const json& w : j.at("words")) {
        r.words.push_back({w.at("surface").get<std::string>(), w.at("t_start").get<double>(),
                           w.at("t_end").get<double>()});
      }
      for (const json& f : j.at("frames")) {
        if (f.size() != kNumJoints) throw LineError(Errc::MalformedLine, line_no, "frame needs 8 joints");
        RawPose pose;
        for (std::size_t i = 0; i < kNumJoints; ++i) {
          if (f[i].is_null()) continue;
          pose.joints[i] = {f[i].at(0).get<double>(), f[i].at(1).get<double>()};
          pose.present[i] = true;
        }
        r.frames.push_back(pose);
      }
      if (!(r.fps > 0.0)) throw LineError(Errc::MalformedLine, line_no, "fps must be > 0");
      for (std::size_t i = 1; i < r.words.size(); ++i) {
        if (r.words[i].t_start < r.words[i - 1].t_start) {
          throw LineError(Errc::MalformedLine, line_no, "word timestamps decrease");
        }
      }
      records.push_back(std::move(r));
    } catch (const json::exception& e) {
      throw LineError(Errc::MalformedLine, line_no, e.what());
    }
  }
  return records;
}

std::string_view rule_name(CurationRule rule) noexcept {
  switch (rule) {
    case CurationRule::AllJointsVisible: return "a:all_joints_visible";
    case CurationRule::UpperBodyHeight: return "b:upper_body_height";
    case CurationRule::FacingFront: return "c:facing_front";
    case CurationRule::MinDuration: return "d:min_duration";
    case CurationRule::MotionPresent: return "e:motion_present";
    case CurationRule::NoJitter: return "f:no_jitter";
  }
  return "?";
}

CurationEntry check_record(const DatasetRecord& record, const CurationThresholds& t) {
  CurationEntry entry;
  entry.id = record.id;
  auto reject = [&](CurationRule rule, double value) {
    entry.kept = false;
    entry.violated = rule;
    entry.value = value;
    return entry;
  };
  if (record.frames.empty()) return reject(CurationRule::MinDuration, 0.0);

  // (a)
  for (std::size_t f = 0; f < record.frames.size(); ++f) {
    const auto& present = record.frames[f].present;
    if (!std::all_of(present.begin(), present.end(), [](bool p) { return p; })) {
      return reject(CurationRule::AllJointsVisible, static_cast<double>(f));
    }
  }

  // (b), (c)
  double height_sum = 0.0;
  double width_sum = 0.0;
  for (const RawPose& p : record.frames) {
    const Point2 neck = p[Joint::Neck];
    const double head_part = std::max(0.0, neck.y - p[Joint::Head].y);
    const double wrist_part = std::max(0.0, std::max(p[Joint::LWrist].y, p[Joint::RWrist].y) - neck.y);
    height_sum += head_part + wrist_part;
    width_sum += std::hypot(p[Joint::LShoulder].x - p[Joint::RShoulder].x,
                            p[Joint::LShoulder].y - p[Joint::RShoulder].y);
  }
  const double frames = static_cast<double>(record.frames.size());
  const double height = height_sum / frames;
  if (!(height > t.min_height_ratio * record.frame_height)) {
    return reject(CurationRule::UpperBodyHeight, height / record.frame_height);
  }
  const double frontal = (width_sum / frames) / height;
  if (!(frontal > t.min_frontal_ratio)) return reject(CurationRule::FacingFront, frontal);

  // (d)
  const double duration = record.duration();
  if (duration < t.min_duration) return reject(CurationRule::MinDuration, duration);

  // (e), (f) in shoulder-length units.
  std::vector<double> steps;
  steps.reserve(record.frames.size());
  try {
    NormalizedPose prev = normalize_pose(record.frames.front());
    for (std::size_t f = 1; f < record.frames.size(); ++f) {
      const NormalizedPose cur = normalize_pose(record.frames[f]);
      double d = 0.0;
      for (std::size_t j = 0; j < kNumJoints; ++j) {
        d += std::hypot(cur.joints[j].x - prev.joints[j].x, cur.joints[j].y - prev.joints[j].y);
      }
      steps.push_back(d / static_cast<double>(kNumJoints));
      prev = cur;
    }
  } catch (const Error&) {
    return reject(CurationRule::NoJitter, std::numeric_limits<double>::infinity());
  }
  double motion = 0.0;
  for (double s : steps) motion += s;
  motion = steps.empty() ? 0.0 : motion / static_cast<double>(steps.size());
  if (!(motion > t.min_motion)) return reject(CurationRule::MotionPresent, motion);

  std::sort(steps.begin(), steps.end());
  const auto rank = static_cast<std::size_t>(std::ceil(0.99 * static_cast<double>(steps.size())));
  const double p99 = steps[std::max<std::size_t>(rank, 1) - 1];
  if (!(p99 < t.max_jitter)) return reject(CurationRule::NoJitter, p99);

  entry.kept = true;
  return entry;
}

CurationResult curate_shots(std::span<const DatasetRecord> records, const CurationThresholds& t) {
  CurationResult result;
  result.report.reserve(records.size());
  for (const DatasetRecord& r : records) {
    CurationEntry e = check_record(r, t);
    if (e.kept) result.kept.push_back(r);
    result.report.push_back(std::move(e));
  }
  return result;
}

// --- synthetic corpus -------------------------------------------------------

namespace {

const std::vector<Token> kFillers = {
    "the", "a",    "it",    "is",    "this", "that",  "so",   "and", "we",     "to",   "of",   "in",
    "really", "very", "was", "just", "like", "think", "know", "thing", "idea", "world", "people",
    "here", "now", "then", "my",  "our", "one",   "way",   "about", "with", "can",  "see"};

struct KeywordGroup {
  GestureKind kind;
  std::array<const char*, 2> words;
};

constexpr std::array<KeywordGroup, 6> kKeywords = {{
    {GestureKind::Big, {"big", "huge"}},
    {GestureKind::Small, {"small", "tiny"}},
    {GestureKind::You, {"you", "your"}},
    {GestureKind::Me, {"me", "i"}},
    {GestureKind::All, {"all", "everything"}},
    {GestureKind::Hold, {"hold", "hand"}},
}};

constexpr double kFps = 12.0;
constexpr double kPixelsPerUnit = 70.0;
constexpr double kNeckX = 320.0;
constexpr double kNeckY = 140.0;
constexpr double kFrameHeight = 200.0;

JointAngles rest_angles() {
  JointAngles a;
  a[Dof::LShoulderPitch] = -0.35;
  a[Dof::LShoulderRoll] = 0.12;
  a[Dof::LElbowRoll] = 1.1;
  a[Dof::LElbowYaw] = 0.3;
  a[Dof::RShoulderPitch] = -0.35;
  a[Dof::RShoulderRoll] = -0.12;
  a[Dof::RElbowRoll] = 1.1;
  a[Dof::RElbowYaw] = -0.3;
  return a;
}

void set_arms(JointAngles& a, double pitch, double roll, double bend, double yaw) {
  a[Dof::LShoulderPitch] = pitch;
  a[Dof::LShoulderRoll] = roll;
  a[Dof::LElbowRoll] = bend;
  a[Dof::LElbowYaw] = yaw;
  a[Dof::RShoulderPitch] = pitch;
  a[Dof::RShoulderRoll] = -roll;
  a[Dof::RElbowRoll] = bend;
  a[Dof::RElbowYaw] = -yaw;
}

// Target angles of a keyword gesture; `progress` in [0, 1] runs over the hold.
JointAngles prototype(GestureKind kind, double progress) {
  JointAngles a = rest_angles();
  switch (kind) {
    case GestureKind::Big: set_arms(a, -0.6, 1.25, 0.35, 0.0); break;
    case GestureKind::Small: set_arms(a, -0.95, -0.3, 1.55, -0.6); break;
    case GestureKind::You:
      a[Dof::RShoulderPitch] = -1.35;
      a[Dof::RShoulderRoll] = -0.15;
      a[Dof::RElbowRoll] = 0.15;
      a[Dof::RElbowYaw] = 0.0;
      break;
    case GestureKind::Me: set_arms(a, -0.25, -0.2, 1.9, -0.9); break;
    case GestureKind::All: set_arms(a, -0.9, 0.3 + 1.0 * progress, 0.4, 0.0); break;
    case GestureKind::Hold: set_arms(a, -0.8, 0.05, 1.3, -0.3); break;
    case GestureKind::Beat: break;
  }
  return a;
}

double smoothstep(double x) {
  x = std::clamp(x, 0.0, 1.0);
  return x * x * (3.0 - 2.0 * x);
}

}  // namespace

GestureKind keyword_kind(std::string_view token) {
  for (const KeywordGroup& g : kKeywords) {
    for (const char* w : g.words) {
      if (token == w) return g.kind;
    }
  }
  return GestureKind::Beat;
}

const std::vector<Token>& synthetic_vocabulary() {
  static const std::vector<Token> vocab = [] {
    std::vector<Token> v = kFillers;
    for (const KeywordGroup& g : kKeywords) {
      for (const char* w : g.words) v.emplace_back(w);
    }
    return v;
  }();
  return vocab;
}

std::vector<Token> synth_sentence(std::mt19937_64& rng, GestureKind keyword) {
  std::uniform_int_distribution<int> length(10, 14);
  std::uniform_int_distribution<std::size_t> filler(0, kFillers.size() - 1);
  std::uniform_int_distribution<int> which(0, 1);
  const int L = length(rng);
  std::uniform_int_distribution<int> position(2, L - 3);
  const int pos = position(rng);
  const int variant = which(rng);
  std::vector<Token> words;
  words.reserve(static_cast<std::size_t>(L));
  for (int i = 0; i < L; ++i) words.push_back(kFillers[filler(rng)]);
  for (const KeywordGroup& g : kKeywords) {
    if (g.kind == keyword) words[static_cast<std::size_t>(pos)] = g.words[static_cast<std::size_t>(variant)];
  }
  return words;
}

std::vector<Token> synth_sentence(std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> group(0, kKeywords.size() - 1);
  return synth_sentence(rng, kKeywords[group(rng)].kind);
}

DatasetRecord synth_record(const std::vector<Token>& words, std::mt19937_64& rng, std::string id) {
  std::uniform_real_distribution<double> word_length(0.45, 0.6);
  std::uniform_real_distribution<double> beat_amp(0.08, 0.16);
  std::normal_distribution<double> pixel_noise(0.0, 0.6);

  DatasetRecord r;
  r.id = std::move(id);
  r.fps = kFps;
  r.frame_height = kFrameHeight;
  double t = 0.4;
  for (const Token& w : words) {
    const double len = word_length(rng);
    r.words.push_back({w, t, t + len});
    t += len;
  }
  const double duration = t + 0.4;
  const double amp = beat_amp(rng);
  const auto frames = static_cast<std::size_t>(std::ceil(duration * kFps));
  const JointAngles rest = rest_angles();

  for (std::size_t f = 0; f < frames; ++f) {
    const double time = static_cast<double>(f) / kFps;
    JointAngles angles = rest;
    double keyword_weight = 0.0;
    for (const TimedWord& w : r.words) {
      const GestureKind kind = keyword_kind(w.surface);
      if (kind == GestureKind::Beat) continue;
      const double rise = smoothstep((time - (w.t_start - 0.3)) / 0.45);
      const double fall = 1.0 - smoothstep((time - (w.t_end + 0.35)) / 0.45);
      const double weight = std::min(rise, fall);
      if (weight <= 0.0) continue;
      const double progress = std::clamp((time - w.t_start) / (w.t_end + 0.35 - w.t_start), 0.0, 1.0);
      const JointAngles target = prototype(kind, progress);
      for (std::size_t i = 0; i < kNumDof; ++i) {
        angles.values[i] += weight * (target.values[i] - rest.values[i]);
      }
      keyword_weight = std::max(keyword_weight, weight);
    }
    // Beats: one downward stroke per filler word, faded out under keywords.
    double beat = 0.0;
    for (const TimedWord& w : r.words) {
      if (keyword_kind(w.surface) != GestureKind::Beat) continue;
      if (time >= w.t_start && time < w.t_end) {
        beat = std::sin(std::numbers::pi * (time - w.t_start) / (w.t_end - w.t_start));
      }
    }
    const double stroke = (1.0 - keyword_weight) * amp * beat;
    angles[Dof::RShoulderPitch] -= stroke;
    angles[Dof::LShoulderPitch] -= 0.6 * stroke;
    angles[Dof::RElbowRoll] += stroke;
    angles[Dof::HeadYaw] = 0.15 * std::sin(0.7 * time);

    const Pose3D p3 = forward_kinematics(angles);
    RawPose raw;
    for (std::size_t j = 0; j < kNumJoints; ++j) {
      raw.joints[j] = {kNeckX + kPixelsPerUnit * p3.joints[j].x() + pixel_noise(rng),
                       kNeckY - kPixelsPerUnit * p3.joints[j].y() + pixel_noise(rng)};
      raw.present[j] = true;
    }
    r.frames.push_back(raw);
  }
  return r;
}

std::vector<DatasetRecord> synth_corpus(std::uint64_t seed, std::size_t n_sentences) {
  if (n_sentences < 1) throw Error(Errc::InvalidConfig, "need at least one sentence");
  std::mt19937_64 rng(seed);
  std::vector<DatasetRecord> records;
  records.reserve(n_sentences);
  for (std::size_t i = 0; i < n_sentences; ++i) {
    char id[24];
    std::snprintf(id, sizeof id, "s%05zu", i);
    records.push_back(synth_record(synth_sentence(rng), rng, id));
  }
  return records;
}

}  // namespace gesture
