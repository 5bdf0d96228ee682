#include "predaspect/embeddings.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>

#include "predaspect/error.hpp"
#include "predaspect/text.hpp"

namespace predaspect {

std::string to_string(EmbeddingFormat format) {
  switch (format) {
    case EmbeddingFormat::kWord2VecBinary:
      return "word2vec-binary";
    case EmbeddingFormat::kGloveText:
      return "glove-text";
  }
  return "unknown";
}

EmbeddingFormat parse_embedding_format(std::string_view name) {
  if (name == "word2vec-binary" || name == "word2vec") return EmbeddingFormat::kWord2VecBinary;
  if (name == "glove-text" || name == "glove") return EmbeddingFormat::kGloveText;
  throw ConfigError("unknown embedding format '" + std::string(name) +
                    "' (expected word2vec-binary or glove-text)");
}

std::optional<std::span<const float>> EmbeddingTable::lookup(std::string_view token) const {
  auto it = index_.find(text::to_lower(token));
  if (it == index_.end()) return std::nullopt;
  return row(it->second);
}

std::span<const float> EmbeddingTable::row(std::size_t i) const {
  return std::span<const float>(values_).subspan(i * dimension_, dimension_);
}

EmbeddingTableBuilder::EmbeddingTableBuilder(std::size_t dimension, EmbeddingFormat format) {
  if (dimension == 0) throw DataError("embedding dimension must be positive");
  table_.dimension_ = dimension;
  table_.format_ = format;
}

void EmbeddingTableBuilder::reserve(std::size_t entries) {
  table_.keys_.reserve(entries);
  table_.values_.reserve(entries * table_.dimension_);
  table_.index_.reserve(entries);
}

bool EmbeddingTableBuilder::add(std::string_view token, std::span<const float> vector) {
  if (vector.size() != table_.dimension_) {
    throw DataError("vector for '" + std::string(token) + "' has " +
                    std::to_string(vector.size()) + " components, expected " +
                    std::to_string(table_.dimension_));
  }
  for (float v : vector) {
    if (!std::isfinite(v)) {
      throw DataError("vector for '" + std::string(token) + "' has a non-finite component");
    }
  }
  auto key = text::to_lower(token);
  auto [it, inserted] = table_.index_.try_emplace(key, table_.keys_.size());
  if (!inserted) {
    ++table_.duplicates_dropped_;
    return false;
  }
  table_.keys_.push_back(std::move(key));
  table_.values_.insert(table_.values_.end(), vector.begin(), vector.end());
  return true;
}

EmbeddingTable EmbeddingTableBuilder::build() && { return std::move(table_); }

namespace {

float float_from_le(const unsigned char* p) {
  std::uint32_t bits = static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
                       (static_cast<std::uint32_t>(p[2]) << 16) |
                       (static_cast<std::uint32_t>(p[3]) << 24);
  return std::bit_cast<float>(bits);
}

void float_to_le(float f, unsigned char* p) {
  const auto bits = std::bit_cast<std::uint32_t>(f);
  p[0] = static_cast<unsigned char>(bits & 0xFF);
  p[1] = static_cast<unsigned char>((bits >> 8) & 0xFF);
  p[2] = static_cast<unsigned char>((bits >> 16) & 0xFF);
  p[3] = static_cast<unsigned char>((bits >> 24) & 0xFF);
}

std::string checked_token(std::string token, const EmbeddingLoadOptions& options,
                          const std::filesystem::path& path, std::size_t entry) {
  if (text::is_valid_utf8(token)) return token;
  if (options.utf8 == Utf8Policy::kReplace) return text::replace_invalid_utf8(token);
  throw FormatError(path.string() + ": entry " + std::to_string(entry) +
                    " has a token that is not valid UTF-8");
}

std::size_t parse_size(std::string_view field, const std::string& what) {
  std::size_t value = 0;
  const char* end = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (ec != std::errc() || ptr != end) throw FormatError(what);
  return value;
}

}  // namespace

EmbeddingTable load_word2vec_binary(const std::filesystem::path& path,
                                    const EmbeddingLoadOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open embedding file " + path.string());

  std::string header;
  if (!std::getline(in, header)) throw FormatError(path.string() + ": missing header line");
  const auto fields = text::split_whitespace(header);
  if (fields.size() != 2) {
    throw FormatError(path.string() + ": malformed header '" + header +
                      "' (expected '<vocab_size> <dim>')");
  }
  const auto bad_header = path.string() + ": malformed header '" + header + "'";
  if (fields[1].starts_with('-')) throw FormatError(path.string() + ": dimension must be positive");
  const auto vocab = parse_size(fields[0], bad_header);
  const auto dim = parse_size(fields[1], bad_header);
  if (dim == 0) throw FormatError(path.string() + ": dimension must be positive");

  EmbeddingTableBuilder builder(dim, EmbeddingFormat::kWord2VecBinary);
  builder.reserve(vocab);
  std::vector<unsigned char> raw(dim * sizeof(float));
  std::vector<float> vec(dim);
  std::string token;
  for (std::size_t entry = 0; entry < vocab; ++entry) {
    token.clear();
    for (;;) {
      const int c = in.get();
      if (c == std::char_traits<char>::eof()) {
        throw FormatError(path.string() + ": truncated entry " + std::to_string(entry) + " of " +
                          std::to_string(vocab));
      }
      if (c == ' ') break;
      // The newline that optionally trails the previous vector.
      if (c == '\n' && token.empty()) continue;
      token.push_back(static_cast<char>(c));
    }
    if (token.empty()) {
      throw FormatError(path.string() + ": empty token at entry " + std::to_string(entry));
    }
    if (!in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()))) {
      throw FormatError(path.string() + ": truncated entry " + std::to_string(entry) + " ('" +
                        token + "')");
    }
    for (std::size_t k = 0; k < dim; ++k) vec[k] = float_from_le(raw.data() + 4 * k);
    builder.add(checked_token(std::move(token), options, path, entry), vec);
  }
  return std::move(builder).build();
}

void save_word2vec_binary(const EmbeddingTable& table, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write embedding file " + path.string());
  out << table.size() << ' ' << table.dimension() << '\n';
  std::vector<unsigned char> raw(table.dimension() * sizeof(float));
  for (std::size_t i = 0; i < table.size(); ++i) {
    out << table.keys()[i] << ' ';
    const auto row = table.row(i);
    for (std::size_t k = 0; k < row.size(); ++k) float_to_le(row[k], raw.data() + 4 * k);
    out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    out << '\n';
  }
  if (!out) throw IoError("failed writing embedding file " + path.string());
}

EmbeddingTable load_glove_text(const std::filesystem::path& path,
                               std::optional<std::size_t> expected_dim,
                               const EmbeddingLoadOptions& options) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open embedding file " + path.string());

  std::optional<EmbeddingTableBuilder> builder;
  std::vector<float> vec;
  std::string line;
  std::size_t line_no = 0;
  std::size_t entries = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto fields = text::split_whitespace(line);
    if (fields.empty()) continue;
    if (fields.size() < 2) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": entry has no vector");
    }
    const std::size_t dim = fields.size() - 1;
    if (!builder) {
      if (expected_dim && *expected_dim != dim) {
        throw FormatError(path.string() + ":" + std::to_string(line_no) + ": dimension " +
                          std::to_string(dim) + " differs from expected " +
                          std::to_string(*expected_dim));
      }
      builder.emplace(dim, EmbeddingFormat::kGloveText);
    } else if (dim != vec.size()) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) +
                        ": inconsistent dimension " + std::to_string(dim) + " (earlier lines have " +
                        std::to_string(vec.size()) + ")");
    }
    vec.resize(dim);
    for (std::size_t k = 0; k < dim; ++k) {
      const auto& f = fields[k + 1];
      const char* end = f.data() + f.size();
      auto [ptr, ec] = std::from_chars(f.data(), end, vec[k]);
      if (ec != std::errc() || ptr != end) {
        throw FormatError(path.string() + ":" + std::to_string(line_no) + ": unparsable float '" +
                          f + "'");
      }
    }
    builder->add(checked_token(fields[0], options, path, entries), vec);
    ++entries;
  }
  if (!builder) throw FormatError(path.string() + ": empty embedding table");
  return std::move(*builder).build();
}

EmbeddingTable load_embeddings(const std::filesystem::path& path, EmbeddingFormat format,
                               const EmbeddingLoadOptions& options) {
  if (!std::filesystem::exists(path)) {
    throw IoError("embedding file not found: " + path.string());
  }
  switch (format) {
    case EmbeddingFormat::kWord2VecBinary:
      return load_word2vec_binary(path, options);
    case EmbeddingFormat::kGloveText:
      return load_glove_text(path, std::nullopt, options);
  }
  throw ConfigError("unsupported embedding format");
}

}  // namespace predaspect
