#include "lfqa/embedding_store.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include <fmt/format.h>

#include "lfqa/error.hpp"
#include "lfqa/hashing.hpp"
#include "lfqa/text.hpp"

namespace lfqa {

TokenMatrix::TokenMatrix(std::size_t rows, std::size_t dim, std::vector<float> data)
    : rows_(rows), dim_(dim), data_(std::move(data)) {
  if (data_.size() != rows_ * dim_) {
    fail(ErrorCode::DimMismatch,
         fmt::format("token matrix data has {} values, expected {}x{}", data_.size(), rows_, dim_));
  }
}

SentenceStore::SentenceStore(std::vector<SentenceEmbedding> records) : records_(std::move(records)) {
  for (std::size_t i = 0; i < records_.size(); ++i) {
    const auto& r = records_[i];
    if (i == 0) dim_ = static_cast<std::uint32_t>(r.vector.size());
    if (r.vector.size() != dim_) {
      fail(ErrorCode::DimMismatch, fmt::format("record '{}' has dim {}, store dim is {}", r.id,
                                               r.vector.size(), dim_));
    }
    if (!by_id_.emplace(r.id, i).second) {
      fail(ErrorCode::DuplicateId, fmt::format("duplicate embedding id '{}'", r.id));
    }
  }
}

const SentenceEmbedding* SentenceStore::find(const std::string& id) const {
  auto it = by_id_.find(id);
  return it == by_id_.end() ? nullptr : &records_[it->second];
}

TokenStore::TokenStore(std::vector<TokenEmbeddings> records) : records_(std::move(records)) {
  for (std::size_t i = 0; i < records_.size(); ++i) {
    const auto& r = records_[i];
    if (i == 0) dim_ = static_cast<std::uint32_t>(r.matrix.dim());
    if (r.matrix.dim() != dim_) {
      fail(ErrorCode::DimMismatch, fmt::format("record '{}' has dim {}, store dim is {}", r.id,
                                               r.matrix.dim(), dim_));
    }
    if (r.matrix.empty()) fail(ErrorCode::Format, fmt::format("record '{}' has no tokens", r.id));
    if (!by_id_.emplace(r.id, i).second) {
      fail(ErrorCode::DuplicateId, fmt::format("duplicate embedding id '{}'", r.id));
    }
  }
}

const TokenMatrix* TokenStore::find(const std::string& id) const {
  auto it = by_id_.find(id);
  return it == by_id_.end() ? nullptr : &records_[it->second].matrix;
}

namespace {

constexpr char kSentenceMagic[4] = {'R', 'B', 'Q', 'E'};
constexpr char kTokenMagic[4] = {'R', 'B', 'Q', 'T'};

template <typename T>
T to_little(T value) {
  if constexpr (std::endian::native == std::endian::big) {
    auto bytes = std::bit_cast<std::array<unsigned char, sizeof(T)>>(value);
    std::reverse(bytes.begin(), bytes.end());
    return std::bit_cast<T>(bytes);
  }
  return value;
}

class BinaryWriter {
 public:
  explicit BinaryWriter(const std::filesystem::path& path)
      : path_(path), out_(path, std::ios::binary | std::ios::trunc) {
    if (!out_) fail(ErrorCode::Io, fmt::format("cannot write '{}'", path.string()));
  }

  template <typename T>
  void put(T value) {
    value = to_little(value);
    out_.write(reinterpret_cast<const char*>(&value), sizeof(T));
  }

  void put_bytes(std::string_view bytes) { out_.write(bytes.data(), static_cast<std::streamsize>(bytes.size())); }

  void put_floats(std::span<const float> values) {
    if constexpr (std::endian::native == std::endian::little) {
      out_.write(reinterpret_cast<const char*>(values.data()),
                 static_cast<std::streamsize>(values.size() * sizeof(float)));
    } else {
      for (float v : values) put(v);
    }
  }

  void finish() {
    out_.flush();
    if (!out_) fail(ErrorCode::Io, fmt::format("write failed for '{}'", path_.string()));
  }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
};

class BinaryReader {
 public:
  explicit BinaryReader(const std::filesystem::path& path) : path_(path), in_(path, std::ios::binary) {
    if (!in_) fail(ErrorCode::Io, fmt::format("cannot open embedding store '{}'", path.string()));
  }

  template <typename T>
  T get(const char* what) {
    T value;
    read(reinterpret_cast<char*>(&value), sizeof(T), what);
    return to_little(value);
  }

  std::string get_string(std::size_t length, const char* what) {
    std::string s(length, '\0');
    read(s.data(), length, what);
    return s;
  }

  void get_floats(std::span<float> out, const std::string& id) {
    read(reinterpret_cast<char*>(out.data()), out.size() * sizeof(float), "vector data");
    for (float& v : out) {
      v = to_little(v);
      if (!std::isfinite(v)) {
        fail(ErrorCode::Format,
             fmt::format("{}: non-finite value in record '{}'", path_.string(), id));
      }
    }
  }

  void expect_end() {
    if (in_.peek() != std::char_traits<char>::eof()) {
      fail(ErrorCode::Format,
           fmt::format("{}: trailing bytes after the declared record count", path_.string()));
    }
  }

  const std::filesystem::path& path() const { return path_; }

 private:
  void read(char* dst, std::size_t n, const char* what) {
    in_.read(dst, static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n) {
      fail(ErrorCode::Format,
           fmt::format("{}: truncated file while reading {}", path_.string(), what));
    }
  }

  std::filesystem::path path_;
  std::ifstream in_;
};

EmbeddingStoreHeader read_header(BinaryReader& reader) {
  const auto magic = reader.get_string(4, "magic");
  EmbeddingStoreHeader header;
  if (std::memcmp(magic.data(), kSentenceMagic, 4) == 0) {
    header.kind = StoreKind::Sentence;
  } else if (std::memcmp(magic.data(), kTokenMagic, 4) == 0) {
    header.kind = StoreKind::Token;
  } else {
    fail(ErrorCode::Format, fmt::format("{}: bad magic", reader.path().string()));
  }
  header.version = reader.get<std::uint32_t>("version");
  if (header.version != kStoreVersion) {
    fail(ErrorCode::Format, fmt::format("{}: unsupported version {} (expected {})",
                                        reader.path().string(), header.version, kStoreVersion));
  }
  header.dim = reader.get<std::uint32_t>("dim");
  header.count = reader.get<std::uint64_t>("count");
  if (header.dim == 0) fail(ErrorCode::Format, fmt::format("{}: dim is 0", reader.path().string()));
  return header;
}

void write_header(BinaryWriter& w, const char* magic, std::uint32_t dim, std::uint64_t count) {
  w.put_bytes(std::string_view(magic, 4));
  w.put<std::uint32_t>(kStoreVersion);
  w.put<std::uint32_t>(dim);
  w.put<std::uint64_t>(count);
}

void write_id(BinaryWriter& w, const std::string& id) {
  w.put<std::uint32_t>(static_cast<std::uint32_t>(id.size()));
  w.put_bytes(id);
}

// Guards against absurd lengths from corrupt files before allocating.
constexpr std::uint32_t kMaxIdLength = 1U << 20;

}  // namespace

EmbeddingStoreHeader read_store_header(const std::filesystem::path& path) {
  BinaryReader reader(path);
  return read_header(reader);
}

SentenceStore read_sentence_store(const std::filesystem::path& path) {
  BinaryReader reader(path);
  const auto header = read_header(reader);
  if (header.kind != StoreKind::Sentence) {
    fail(ErrorCode::Format, fmt::format("{}: expected a sentence store (RBQE)", path.string()));
  }
  std::vector<SentenceEmbedding> records;
  for (std::uint64_t i = 0; i < header.count; ++i) {
    const auto id_len = reader.get<std::uint32_t>("id length");
    if (id_len > kMaxIdLength) fail(ErrorCode::Format, fmt::format("{}: id too long", path.string()));
    SentenceEmbedding record;
    record.id = reader.get_string(id_len, "id");
    record.vector.resize(header.dim);
    reader.get_floats(record.vector, record.id);
    records.push_back(std::move(record));
  }
  reader.expect_end();
  return SentenceStore(std::move(records));
}

void write_sentence_store(const std::vector<SentenceEmbedding>& records,
                          const std::filesystem::path& path) {
  const std::uint32_t dim = records.empty() ? 0 : static_cast<std::uint32_t>(records[0].vector.size());
  for (const auto& r : records) {
    if (r.vector.size() != dim) fail(ErrorCode::DimMismatch, "records have non-uniform dimension");
  }
  BinaryWriter w(path);
  write_header(w, kSentenceMagic, dim, records.size());
  for (const auto& r : records) {
    write_id(w, r.id);
    w.put_floats(r.vector);
  }
  w.finish();
}

TokenStore read_token_store(const std::filesystem::path& path) {
  BinaryReader reader(path);
  const auto header = read_header(reader);
  if (header.kind != StoreKind::Token) {
    fail(ErrorCode::Format, fmt::format("{}: expected a token store (RBQT)", path.string()));
  }
  std::vector<TokenEmbeddings> records;
  for (std::uint64_t i = 0; i < header.count; ++i) {
    const auto id_len = reader.get<std::uint32_t>("id length");
    if (id_len > kMaxIdLength) fail(ErrorCode::Format, fmt::format("{}: id too long", path.string()));
    TokenEmbeddings record;
    record.id = reader.get_string(id_len, "id");
    const auto tokens = reader.get<std::uint32_t>("token count");
    if (tokens == 0) {
      fail(ErrorCode::Format, fmt::format("{}: record '{}' has no tokens", path.string(), record.id));
    }
    std::vector<float> data(static_cast<std::size_t>(tokens) * header.dim);
    reader.get_floats(data, record.id);
    record.matrix = TokenMatrix(tokens, header.dim, std::move(data));
    records.push_back(std::move(record));
  }
  reader.expect_end();
  return TokenStore(std::move(records));
}

void write_token_store(const std::vector<TokenEmbeddings>& records,
                       const std::filesystem::path& path) {
  const std::uint32_t dim = records.empty() ? 0 : static_cast<std::uint32_t>(records[0].matrix.dim());
  for (const auto& r : records) {
    if (r.matrix.dim() != dim) fail(ErrorCode::DimMismatch, "records have non-uniform dimension");
    if (r.matrix.empty()) fail(ErrorCode::InvalidArgument, fmt::format("record '{}' has no tokens", r.id));
  }
  BinaryWriter w(path);
  write_header(w, kTokenMagic, dim, records.size());
  for (const auto& r : records) {
    write_id(w, r.id);
    w.put<std::uint32_t>(static_cast<std::uint32_t>(r.matrix.rows()));
    w.put_floats(r.matrix.data());
  }
  w.finish();
}

std::string file_checksum(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, fmt::format("cannot open '{}'", path.string()));
  std::uint64_t h = 0xcbf29ce484222325ULL;
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    h = fnv1a64(std::string_view(buf.data(), static_cast<std::size_t>(in.gcount())), h);
  }
  return hex64(h);
}

std::vector<float> mean_pool(const TokenMatrix& matrix) {
  if (matrix.empty()) fail(ErrorCode::InvalidArgument, "mean_pool of an empty matrix");
  std::vector<double> acc(matrix.dim(), 0.0);
  for (std::size_t r = 0; r < matrix.rows(); ++r) {
    const auto row = matrix.row(r);
    for (std::size_t d = 0; d < row.size(); ++d) acc[d] += row[d];
  }
  std::vector<float> out(matrix.dim());
  const auto n = static_cast<double>(matrix.rows());
  for (std::size_t d = 0; d < out.size(); ++d) out[d] = static_cast<float>(acc[d] / n);
  return out;
}

double dot(std::span<const float> u, std::span<const float> v) {
  if (u.size() != v.size()) {
    fail(ErrorCode::DimMismatch, fmt::format("dimension mismatch: {} vs {}", u.size(), v.size()));
  }
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) s += static_cast<double>(u[i]) * v[i];
  return s;
}

double l2_norm(std::span<const float> u) { return std::sqrt(dot(u, u)); }

double cosine(std::span<const float> u, std::span<const float> v) {
  const double uv = dot(u, v);
  const double nu = l2_norm(u);
  const double nv = l2_norm(v);
  if (nu == 0.0 || nv == 0.0) fail(ErrorCode::InvalidArgument, "cosine of a zero-norm vector");
  return std::clamp(uv / (nu * nv), -1.0, 1.0);
}

std::vector<float> stub_embed(std::string_view text, std::uint32_t dim, std::uint64_t seed) {
  if (dim < 2) fail(ErrorCode::InvalidArgument, "stub embedding dim must be >= 2");
  PortableRng rng(mix64(fnv1a64(text) ^ mix64(seed)));
  std::vector<double> v(dim);
  double norm_sq = 0.0;
  while (norm_sq == 0.0) {
    norm_sq = 0.0;
    for (auto& x : v) {
      x = rng.unit() * 2.0 - 1.0;
      norm_sq += x * x;
    }
  }
  const double inv = 1.0 / std::sqrt(norm_sq);
  std::vector<float> out(dim);
  for (std::size_t i = 0; i < dim; ++i) out[i] = static_cast<float>(v[i] * inv);
  return out;
}

TokenMatrix stub_embed_tokens(std::string_view text, std::uint32_t dim, std::uint64_t seed) {
  const auto tokens = text::split_whitespace(text);
  TokenMatrix m(tokens.size(), dim);
  for (std::size_t r = 0; r < tokens.size(); ++r) {
    const auto v = stub_embed(tokens[r], dim, seed);
    std::copy(v.begin(), v.end(), m.row(r).begin());
  }
  return m;
}

}  // namespace lfqa
