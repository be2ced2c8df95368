#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "lfqa/embedding_store.hpp"

namespace lfqa {

struct Neighbor {
  std::string id;
  /// Squared L2 distance.
  double distance = 0.0;

  bool operator==(const Neighbor&) const = default;
};

/// Squared L2, accumulated in double.
double l2_distance_sq(std::span<const float> u, std::span<const float> v);

/// Exhaustive L2 index over pooled vectors. Immutable after construction and
/// safe to search from several threads at once.
class FlatIndex {
 public:
  explicit FlatIndex(const SentenceStore& store);

  std::uint32_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return ids_.size(); }
  const std::vector<std::string>& ids() const noexcept { return ids_; }
  std::span<const float> vector(std::size_t i) const { return {vectors_.data() + i * dim_, dim_}; }

  /// min(k, size()) neighbors by ascending distance, ties by ascending id.
  std::vector<Neighbor> search(std::span<const float> query, std::size_t k) const;

  /// Searches several queries, spread over `threads` workers (0 = hardware
  /// concurrency). Output is identical for any thread count.
  std::vector<std::vector<Neighbor>> search_batch(const std::vector<std::vector<float>>& queries,
                                                  std::size_t k, unsigned threads = 0) const;

 private:
  std::uint32_t dim_ = 0;
  std::vector<std::string> ids_;
  std::vector<float> vectors_;
};

/// Sidecar describing the store an index was built from.
struct IndexManifest {
  std::uint32_t dim = 0;
  std::uint64_t count = 0;
  std::string checksum;
};

IndexManifest build_index_manifest(const std::filesystem::path& store_path, const FlatIndex& index);
void write_index_manifest(const IndexManifest& manifest, const std::filesystem::path& path);
IndexManifest read_index_manifest(const std::filesystem::path& path);

}  // namespace lfqa
