#include "lfqa/vector_index.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <mutex>
#include <thread>

#include <fmt/format.h>
#include "json.hpp"

#include "lfqa/error.hpp"

namespace lfqa {

double l2_distance_sq(std::span<const float> u, std::span<const float> v) {
  if (u.size() != v.size()) {
    fail(ErrorCode::DimMismatch, fmt::format("dimension mismatch: {} vs {}", u.size(), v.size()));
  }
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double d = static_cast<double>(u[i]) - static_cast<double>(v[i]);
    s += d * d;
  }
  return s;
}

FlatIndex::FlatIndex(const SentenceStore& store) {
  if (store.empty()) fail(ErrorCode::InvalidArgument, "cannot build an index from an empty store");
  dim_ = store.dim();
  ids_.reserve(store.size());
  vectors_.reserve(store.size() * dim_);
  for (const auto& r : store.records()) {
    if (r.vector.size() != dim_) fail(ErrorCode::DimMismatch, "store has mixed dimensions");
    ids_.push_back(r.id);
    vectors_.insert(vectors_.end(), r.vector.begin(), r.vector.end());
  }
}

std::vector<Neighbor> FlatIndex::search(std::span<const float> query, std::size_t k) const {
  if (query.size() != dim_) {
    fail(ErrorCode::DimMismatch,
         fmt::format("query dim {} does not match index dim {}", query.size(), dim_));
  }
  if (k == 0) fail(ErrorCode::InvalidArgument, "k must be >= 1");

  struct Scored {
    double distance;
    std::size_t index;
  };
  std::vector<Scored> scored(ids_.size());
  for (std::size_t i = 0; i < ids_.size(); ++i) scored[i] = {l2_distance_sq(query, vector(i)), i};

  const auto before = [this](const Scored& a, const Scored& b) {
    if (a.distance != b.distance) return a.distance < b.distance;
    return ids_[a.index] < ids_[b.index];
  };
  const std::size_t take = std::min(k, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(take), scored.end(),
                    before);

  std::vector<Neighbor> out;
  out.reserve(take);
  for (std::size_t i = 0; i < take; ++i) out.push_back({ids_[scored[i].index], scored[i].distance});
  return out;
}

std::vector<std::vector<Neighbor>> FlatIndex::search_batch(
    const std::vector<std::vector<float>>& queries, std::size_t k, unsigned threads) const {
  std::vector<std::vector<Neighbor>> results(queries.size());
  if (threads == 0) threads = std::max(1U, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(1, queries.size())));

  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < queries.size(); i = next++) {
      try {
        results[i] = search(queries[i], k);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  std::vector<std::jthread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  pool.clear();
  if (error) std::rethrow_exception(error);
  return results;
}

IndexManifest build_index_manifest(const std::filesystem::path& store_path, const FlatIndex& index) {
  return {index.dim(), index.size(), file_checksum(store_path)};
}

void write_index_manifest(const IndexManifest& manifest, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::Io, fmt::format("cannot write '{}'", path.string()));
  nlohmann::json j = {{"dim", manifest.dim}, {"count", manifest.count}, {"checksum", manifest.checksum}};
  out << j.dump(2) << '\n';
}

IndexManifest read_index_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, fmt::format("cannot open '{}'", path.string()));
  try {
    auto j = nlohmann::json::parse(in);
    return {j.at("dim").get<std::uint32_t>(), j.at("count").get<std::uint64_t>(),
            j.at("checksum").get<std::string>()};
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Parse, fmt::format("{}: {}", path.string(), e.what()));
  }
}

}  // namespace lfqa
