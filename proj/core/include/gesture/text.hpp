// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

namespace gesture {

inline constexpr int kWordDim = 300;

/// Lowercase word; punctuation removed except apostrophes between word
/// characters. Never empty, never contains whitespace.
using Token = std::string;

std::vector<Token> tokenize(std::string_view text);

std::string join_tokens(const std::vector<Token>& tokens);

class EmbeddingTable {
 public:
  explicit EmbeddingTable(int dim = kWordDim) : dim_(dim) {}

  int dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return entries_.size(); }
  bool contains(const Token& token) const { return entries_.count(token) != 0; }

  /// Inserts or replaces. Throws Error(DimensionMismatch) on wrong length.
  void insert(const Token& token, Eigen::VectorXd value);

  /// nullptr if absent.
  const Eigen::VectorXd* find(const Token& token) const;

  /// Tokens in insertion order.
  const std::vector<Token>& tokens() const noexcept { return order_; }

 private:
  int dim_;
  std::unordered_map<Token, Eigen::VectorXd> entries_;
  std::vector<Token> order_;
};

struct LoadedTable {
  EmbeddingTable table;
  std::size_t line_count = 0;
};

/// Text table: one token per line followed by `expected_dim` decimals.
/// A wrong field count raises LineError(MalformedLine). With
/// expected_dim == 0 the first line fixes the width and later lines that
/// disagree raise LineError(DimensionMismatch).
LoadedTable load_embedding_table(const std::filesystem::path& path, int expected_dim = kWordDim);

/// Writes the same text format with shortest round-trip decimals.
void save_embedding_table(const EmbeddingTable& table, const std::filesystem::path& path);

/// Unknown tokens map to an exact zero vector.
std::vector<Eigen::VectorXd> embed_tokens(const EmbeddingTable& table,
                                          const std::vector<Token>& tokens);

/// Columns are the embedded tokens.
Eigen::MatrixXd embed_matrix(const EmbeddingTable& table, const std::vector<Token>& tokens);

/// Seeded random unit-scale table for desk-scale runs.
EmbeddingTable make_synthetic_table(const std::vector<Token>& vocab, int dim, std::uint64_t seed);

/// FNV-1a over the file bytes; identifies the table a checkpoint was trained with.
std::uint64_t hash_file(const std::filesystem::path& path);

}  // namespace gesture
