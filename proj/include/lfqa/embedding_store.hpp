#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace lfqa {

/// Row-major tokens x dim matrix of float32.
class TokenMatrix {
 public:
  TokenMatrix() = default;
  TokenMatrix(std::size_t rows, std::size_t dim) : rows_(rows), dim_(dim), data_(rows * dim) {}
  TokenMatrix(std::size_t rows, std::size_t dim, std::vector<float> data);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t dim() const noexcept { return dim_; }
  bool empty() const noexcept { return rows_ == 0; }

  std::span<const float> row(std::size_t r) const { return {data_.data() + r * dim_, dim_}; }
  std::span<float> row(std::size_t r) { return {data_.data() + r * dim_, dim_}; }
  const std::vector<float>& data() const noexcept { return data_; }

  bool operator==(const TokenMatrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t dim_ = 0;
  std::vector<float> data_;
};

struct SentenceEmbedding {
  std::string id;
  std::vector<float> vector;
};

struct TokenEmbeddings {
  std::string id;
  TokenMatrix matrix;
};

enum class StoreKind { Sentence, Token };

struct EmbeddingStoreHeader {
  StoreKind kind = StoreKind::Sentence;
  std::uint32_t version = 1;
  std::uint32_t dim = 0;
  std::uint64_t count = 0;
};

/// Immutable set of pooled vectors keyed by id, in file order.
class SentenceStore {
 public:
  SentenceStore() = default;
  explicit SentenceStore(std::vector<SentenceEmbedding> records);

  std::uint32_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return records_.size(); }
  bool empty() const noexcept { return records_.empty(); }
  const std::vector<SentenceEmbedding>& records() const noexcept { return records_; }
  const SentenceEmbedding* find(const std::string& id) const;

 private:
  std::uint32_t dim_ = 0;
  std::vector<SentenceEmbedding> records_;
  std::unordered_map<std::string, std::size_t> by_id_;
};

class TokenStore {
 public:
  TokenStore() = default;
  explicit TokenStore(std::vector<TokenEmbeddings> records);

  std::uint32_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return records_.size(); }
  const std::vector<TokenEmbeddings>& records() const noexcept { return records_; }
  const TokenMatrix* find(const std::string& id) const;

 private:
  std::uint32_t dim_ = 0;
  std::vector<TokenEmbeddings> records_;
  std::unordered_map<std::string, std::size_t> by_id_;
};

// Binary formats, little-endian:
//   header  magic[4] ("RBQE" sentence, "RBQT" token), u32 version = 1,
//           u32 dim, u64 count
//   RBQE    per record: u32 id_len, id bytes, dim x f32
//   RBQT    per record: u32 id_len, id bytes, u32 tokens, tokens x dim x f32
inline constexpr std::uint32_t kStoreVersion = 1;

EmbeddingStoreHeader read_store_header(const std::filesystem::path& path);
SentenceStore read_sentence_store(const std::filesystem::path& path);
void write_sentence_store(const std::vector<SentenceEmbedding>& records,
                          const std::filesystem::path& path);
TokenStore read_token_store(const std::filesystem::path& path);
void write_token_store(const std::vector<TokenEmbeddings>& records,
                       const std::filesystem::path& path);

/// FNV-1a over the file's bytes, hex encoded.
std::string file_checksum(const std::filesystem::path& path);

/// Component-wise mean over rows, accumulated in double.
std::vector<float> mean_pool(const TokenMatrix& matrix);

double dot(std::span<const float> u, std::span<const float> v);
double l2_norm(std::span<const float> u);
/// Throws on dimension mismatch or a zero-norm argument.
double cosine(std::span<const float> u, std::span<const float> v);

/// Deterministic unit vector keyed by a hash of (text, seed).
std::vector<float> stub_embed(std::string_view text, std::uint32_t dim, std::uint64_t seed);
/// One stub_embed row per whitespace token. Text without tokens yields an
/// empty matrix.
TokenMatrix stub_embed_tokens(std::string_view text, std::uint32_t dim, std::uint64_t seed);

}  // namespace lfqa
