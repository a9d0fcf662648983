// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "gesture/record.hpp"
#include "gesture/text.hpp"

namespace gesture {

/// JSON Lines: one record per line, pixel coordinates with y down, absent
/// joints written as null.
void write_records_jsonl(std::span<const DatasetRecord> records, const std::filesystem::path& path);
/// Throws LineError(MalformedLine) or Error(IoFailure).
std::vector<DatasetRecord> read_records_jsonl(const std::filesystem::path& path);

enum class CurationRule {
  AllJointsVisible,  // (a)
  UpperBodyHeight,   // (b)
  FacingFront,       // (c)
  MinDuration,       // (d)
  MotionPresent,     // (e)
  NoJitter,          // (f)
};

std::string_view rule_name(CurationRule rule) noexcept;

struct CurationThresholds {
  double min_height_ratio = 0.5;   // upper-body height / frame height
  double min_frontal_ratio = 0.25;  // shoulder width / upper-body height
  double min_duration = 5.0;       // seconds
  double min_motion = 0.004;       // mean per-frame joint displacement, shoulder units
  double max_jitter = 0.35;        // 99th percentile of the same
};

struct CurationEntry {
  std::string id;
  bool kept = false;
  std::optional<CurationRule> violated;
  double value = 0.0;  // measured quantity for the violated rule
};

struct CurationResult {
  std::vector<DatasetRecord> kept;
  std::vector<CurationEntry> report;  // one per input, in input order
};

/// Checks rules (a)-(f) in order and reports the first violation.
CurationEntry check_record(const DatasetRecord& record, const CurationThresholds& t = {});
CurationResult curate_shots(std::span<const DatasetRecord> records, const CurationThresholds& t = {});

/// Keyword groups that drive the synthetic gesture prototypes.
enum class GestureKind { Beat, Big, Small, You, Me, All, Hold };

GestureKind keyword_kind(std::string_view token);

/// Every token the synthetic grammar can emit.
const std::vector<Token>& synthetic_vocabulary();

/// A template sentence with exactly one keyword.
std::vector<Token> synth_sentence(std::mt19937_64& rng);
std::vector<Token> synth_sentence(std::mt19937_64& rng, GestureKind keyword);

/// Renders a word list into a timed record with prototype gestures at 12 fps.
DatasetRecord synth_record(const std::vector<Token>& words, std::mt19937_64& rng, std::string id);

/// Deterministic desk-scale corpus of `n_sentences` records.
std::vector<DatasetRecord> synth_corpus(std::uint64_t seed, std::size_t n_sentences);

}  // namespace gesture
