// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "gesture/corpus.hpp"
#include "gesture/lift.hpp"
#include "gesture/seq2seq.hpp"
#include "gesture/synthesis.hpp"
#include "gesture/training.hpp"

namespace gesture {

struct Paths {
  std::string dataset;
  std::string embeddings;
  std::string checkpoint;
  std::string output_dir = ".";
};

/// Every tunable of the pipeline. Defaults follow the published settings;
/// sizes that were not published use the defaults of the module types.
struct Config {
  Hyperparams train;
  Seq2SeqConfig model;
  int pca_components = kDefaultComponents;
  double fps = kDefaultFps;
  double words_per_minute = kDefaultWordsPerMinute;
  CurationThresholds curation;
  LiftHyper lift;
  Paths paths;
  std::uint64_t seed = 0;

  /// Propagates `seed` into the nested hyperparameter blocks.
  void apply_seed(std::uint64_t value);
  /// Throws Error(InvalidConfig).
  void validate() const;
};

/// Keys absent from the JSON keep their defaults; unknown keys are rejected.
/// Throws Error(InvalidConfig).
Config config_from_json(const std::string& text);
std::string config_to_json(const Config& config);

/// Throws Error(IoFailure) or Error(InvalidConfig).
Config load_config(const std::filesystem::path& path);

}  // namespace gesture
