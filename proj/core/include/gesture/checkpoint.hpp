// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "gesture/lift.hpp"
#include "gesture/pca.hpp"
#include "gesture/seq2seq.hpp"

namespace gesture {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct EmbeddingRef {
  std::string path;
  std::uint64_t hash = 0;  // FNV-1a of the file bytes
  int dim = 0;
};

struct Checkpoint {
  std::string config_json;
  PcaModel pca;
  EmbeddingRef embeddings;
  std::optional<Seq2SeqModel> model;
  std::optional<LiftNet> lift;
};

/// Little-endian binary container: magic, version, then the sections in
/// field order. Doubles are stored as raw IEEE-754 bits.
void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path);

/// Throws Error(VersionMismatch), Error(MalformedFile) or Error(IoFailure).
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace gesture
