// SPDX-License-Identifier: Apache-2.0
#include "gesture/text.hpp"

#include <fstream>
#include <random>
#include <sstream>

#include "gesture/error.hpp"
#include "gesture/numfmt.hpp"

namespace gesture {

namespace {

enum class CharClass { Word, Apostrophe, Separator };

struct CodePoint {
  char32_t value;
  std::string_view bytes;
};

// Decodes one UTF-8 sequence; invalid bytes are returned as U+FFFD.
CodePoint next_code_point(std::string_view text, std::size_t& pos) {
  const auto lead = static_cast<unsigned char>(text[pos]);
  std::size_t len = 1;
  char32_t cp = lead;
  if (lead >= 0xF0) {
    len = 4;
    cp = lead & 0x07;
  } else if (lead >= 0xE0) {
    len = 3;
    cp = lead & 0x0F;
  } else if (lead >= 0xC0) {
    len = 2;
    cp = lead & 0x1F;
  } else if (lead >= 0x80) {
    ++pos;
    return {0xFFFD, text.substr(pos - 1, 1)};
  }
  if (pos + len > text.size()) {
    ++pos;
    return {0xFFFD, text.substr(pos - 1, 1)};
  }
  for (std::size_t i = 1; i < len; ++i) {
    const auto cont = static_cast<unsigned char>(text[pos + i]);
    if ((cont & 0xC0) != 0x80) {
      ++pos;
      return {0xFFFD, text.substr(pos - 1, 1)};
    }
    cp = (cp << 6) | (cont & 0x3F);
  }
  CodePoint out{cp, text.substr(pos, len)};
  pos += len;
  return out;
}

CharClass classify(char32_t cp) {
  if (cp < 0x80) {
    const auto c = static_cast<unsigned char>(cp);
    if (std::isalnum(c)) return CharClass::Word;
    if (c == '\'') return CharClass::Apostrophe;
    return CharClass::Separator;
  }
  if (cp == 0x2019) return CharClass::Apostrophe;  // right single quotation mark
  // Latin-1 punctuation, general punctuation, CJK punctuation, replacement char.
  if ((cp >= 0x80 && cp <= 0xBF) || cp == 0xD7 || cp == 0xF7 ||
      (cp >= 0x2000 && cp <= 0x206F) || (cp >= 0x3000 && cp <= 0x303F) || cp == 0xFFFD) {
    return CharClass::Separator;
  }
  return CharClass::Word;
}

}  // namespace

std::vector<Token> tokenize(std::string_view text) {
  struct Unit {
    CharClass cls;
    std::string bytes;
  };
  std::vector<Unit> units;
  for (std::size_t pos = 0; pos < text.size();) {
    const CodePoint cp = next_code_point(text, pos);
    const CharClass cls = classify(cp.value);
    std::string bytes(cp.bytes);
    if (cp.value < 0x80 && cls == CharClass::Word) {
      bytes[0] = static_cast<char>(std::tolower(static_cast<unsigned char>(bytes[0])));
    }
    if (cls == CharClass::Apostrophe) bytes = "'";
    units.push_back({cls, std::move(bytes)});
  }

  std::vector<Token> tokens;
  std::string current;
  for (std::size_t i = 0; i < units.size(); ++i) {
    const Unit& u = units[i];
    if (u.cls == CharClass::Word) {
      current += u.bytes;
      continue;
    }
    if (u.cls == CharClass::Apostrophe && !current.empty() && i + 1 < units.size() &&
        units[i + 1].cls == CharClass::Word) {
      current += u.bytes;
      continue;
    }
    if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

std::string join_tokens(const std::vector<Token>& tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += ' ';
    out += tokens[i];
  }
  return out;
}

void EmbeddingTable::insert(const Token& token, Eigen::VectorXd value) {
  if (value.size() != dim_) {
    throw Error(Errc::DimensionMismatch, "embedding for '" + token + "' has length " +
                                             std::to_string(value.size()) + ", table dim " +
                                             std::to_string(dim_));
  }
  auto [it, inserted] = entries_.insert_or_assign(token, std::move(value));
  if (inserted) order_.push_back(token);
}

const Eigen::VectorXd* EmbeddingTable::find(const Token& token) const {
  auto it = entries_.find(token);
  return it == entries_.end() ? nullptr : &it->second;
}

LoadedTable load_embedding_table(const std::filesystem::path& path, int expected_dim) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoFailure, "cannot open embedding table " + path.string());

  int dim = expected_dim;
  LoadedTable out{EmbeddingTable(dim > 0 ? dim : kWordDim), 0};
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string_view> fields;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    fields.clear();
    std::string_view rest(line);
    while (!rest.empty()) {
      const auto start = rest.find_first_not_of(' ');
      if (start == std::string_view::npos) break;
      rest.remove_prefix(start);
      const auto stop = rest.find(' ');
      fields.push_back(rest.substr(0, stop));
      rest.remove_prefix(stop == std::string_view::npos ? rest.size() : stop);
    }
    if (fields.empty()) continue;

    const int numbers = static_cast<int>(fields.size()) - 1;
    if (dim == 0) {
      if (numbers < 1) throw LineError(Errc::MalformedLine, line_no, "no values after token");
      dim = numbers;
      out.table = EmbeddingTable(dim);
    } else if (numbers != dim) {
      throw LineError(expected_dim == 0 ? Errc::DimensionMismatch : Errc::MalformedLine, line_no,
                      "expected " + std::to_string(dim) + " values, got " +
                          std::to_string(numbers));
    }
    Eigen::VectorXd value(dim);
    for (int i = 0; i < dim; ++i) {
      auto parsed = parse_double(fields[static_cast<std::size_t>(i) + 1]);
      if (!parsed) {
        throw LineError(Errc::MalformedLine, line_no,
                        "non-numeric field '" + std::string(fields[i + 1]) + "'");
      }
      value(i) = *parsed;
    }
    out.table.insert(Token(fields[0]), std::move(value));
    ++out.line_count;
  }
  return out;
}

void save_embedding_table(const EmbeddingTable& table, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::IoFailure, "cannot write " + path.string());
  for (const Token& token : table.tokens()) {
    out << token;
    const Eigen::VectorXd& v = *table.find(token);
    for (Eigen::Index i = 0; i < v.size(); ++i) out << ' ' << format_double(v(i));
    out << '\n';
  }
  if (!out) throw Error(Errc::IoFailure, "write failed for " + path.string());
}

std::vector<Eigen::VectorXd> embed_tokens(const EmbeddingTable& table,
                                          const std::vector<Token>& tokens) {
  std::vector<Eigen::VectorXd> out;
  out.reserve(tokens.size());
  for (const Token& token : tokens) {
    const Eigen::VectorXd* v = table.find(token);
    out.push_back(v ? *v : Eigen::VectorXd::Zero(table.dim()));
  }
  return out;
}

Eigen::MatrixXd embed_matrix(const EmbeddingTable& table, const std::vector<Token>& tokens) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(table.dim(), static_cast<Eigen::Index>(tokens.size()));
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (const Eigen::VectorXd* v = table.find(tokens[i])) out.col(static_cast<Eigen::Index>(i)) = *v;
  }
  return out;
}

EmbeddingTable make_synthetic_table(const std::vector<Token>& vocab, int dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(static_cast<double>(dim)));
  EmbeddingTable table(dim);
  for (const Token& token : vocab) {
    Eigen::VectorXd v(dim);
    for (int i = 0; i < dim; ++i) v(i) = normal(rng);
    table.insert(token, std::move(v));
  }
  return table;
}

std::uint64_t hash_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoFailure, "cannot open " + path.string());
  std::uint64_t h = 1469598103934665603ull;
  char buf[1 << 14];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 1099511628211ull;
    }
  }
  return h;
}

}  // namespace gesture
