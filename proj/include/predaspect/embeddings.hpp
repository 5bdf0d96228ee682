#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace predaspect {

enum class EmbeddingFormat { kWord2VecBinary, kGloveText };

std::string to_string(EmbeddingFormat format);
EmbeddingFormat parse_embedding_format(std::string_view name);

// How token bytes that are not valid UTF-8 are treated by the loaders.
enum class Utf8Policy { kReject, kReplace };

// Immutable lowercase-keyed map from token to a float vector of fixed
// dimension. Build one through EmbeddingTableBuilder or a loader; after that
// it is read-only and safe to share between threads.
class EmbeddingTable {
 public:
  std::size_t dimension() const noexcept { return dimension_; }
  std::size_t size() const noexcept { return keys_.size(); }
  bool empty() const noexcept { return keys_.empty(); }
  EmbeddingFormat source_format() const noexcept { return format_; }

  // Keys in load order (the first occurrence of each lowercased token).
  const std::vector<std::string>& keys() const noexcept { return keys_; }

  // Number of entries skipped because their lowercased key was already taken.
  std::size_t duplicates_dropped() const noexcept { return duplicates_dropped_; }

  // Looks up lowercase(token). No stemming: inflected forms are distinct keys.
  std::optional<std::span<const float>> lookup(std::string_view token) const;

  // Vector of the i-th key, in keys() order.
  std::span<const float> row(std::size_t i) const;

 private:
  friend class EmbeddingTableBuilder;

  std::size_t dimension_ = 0;
  EmbeddingFormat format_ = EmbeddingFormat::kWord2VecBinary;
  std::vector<std::string> keys_;
  std::vector<float> values_;
  std::unordered_map<std::string, std::size_t> index_;
  std::size_t duplicates_dropped_ = 0;
};

class EmbeddingTableBuilder {
 public:
  EmbeddingTableBuilder(std::size_t dimension, EmbeddingFormat format);

  void reserve(std::size_t entries);

  // Adds `vector` under lowercase(token). Returns false (and counts a dropped
  // duplicate) when the lowercased key is already present. Throws DataError
  // on a length mismatch or a non-finite component.
  bool add(std::string_view token, std::span<const float> vector);

  EmbeddingTable build() &&;

 private:
  EmbeddingTable table_;
};

struct EmbeddingLoadOptions {
  Utf8Policy utf8 = Utf8Policy::kReject;
};

EmbeddingTable load_word2vec_binary(const std::filesystem::path& path,
                                    const EmbeddingLoadOptions& options = {});

// Writes "<size> <dim>\n" then, per key, the token, a space, `dim`
// little-endian float32 values and a newline.
void save_word2vec_binary(const EmbeddingTable& table, const std::filesystem::path& path);

EmbeddingTable load_glove_text(const std::filesystem::path& path,
                               std::optional<std::size_t> expected_dim = std::nullopt,
                               const EmbeddingLoadOptions& options = {});

EmbeddingTable load_embeddings(const std::filesystem::path& path, EmbeddingFormat format,
                               const EmbeddingLoadOptions& options = {});

}  // namespace predaspect
