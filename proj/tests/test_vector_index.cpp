#include "doctest.h"

#include <cmath>

#include "lfqa/error.hpp"
#include "lfqa/hashing.hpp"
#include "lfqa/vector_index.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace lfqa;

namespace {

std::vector<float> random_vector(PortableRng& rng, std::size_t dim) {
  std::vector<float> v(dim);
  for (auto& x : v) x = static_cast<float>(rng.unit() * 2.0 - 1.0);
  return v;
}

std::vector<SentenceEmbedding> random_records(std::size_t count, std::size_t dim, std::uint64_t seed) {
  PortableRng rng(seed);
  std::vector<SentenceEmbedding> out;
  for (std::size_t i = 0; i < count; ++i) {
    out.push_back({"v" + std::to_string(rng.next() % 100000) + "_" + std::to_string(i),
                   random_vector(rng, dim)});
  }
  return out;
}

}  // namespace

TEST_CASE("l2 distance") {
  const std::vector<float> u{0, 0}, v{3, 4};
  CHECK(l2_distance_sq(u, v) == 25.0);
  CHECK(l2_distance_sq(v, v) == 0.0);
  const std::vector<float> w{1, 2, 3};
  CHECK_THROWS_AS(l2_distance_sq(u, w), Error);

  PortableRng rng(1);
  const auto a = random_vector(rng, 768);
  const auto b = random_vector(rng, 768);
  long double s = 0;
  for (std::size_t i = 0; i < 768; ++i) {
    const long double d = static_cast<long double>(a[i]) - b[i];
    s += d * d;
  }
  CHECK(std::abs(l2_distance_sq(a, b) - static_cast<double>(s)) <= 1e-3 * static_cast<double>(s));
}

TEST_CASE("construction") {
  CHECK(FlatIndex(SentenceStore({{"a", {1, 0}}, {"b", {0, 1}}})).size() == 2);
  CHECK_THROWS_AS(FlatIndex(SentenceStore{}), Error);
  const FlatIndex big(SentenceStore(random_records(10000, 8, 2)));
  CHECK(big.size() == 10000);
  CHECK(big.dim() == 8);
}

TEST_CASE("self retrieval and clamping") {
  const auto records = random_records(50, 16, 3);
  const FlatIndex index{SentenceStore(records)};
  for (const auto& r : records) {
    const auto hits = index.search(r.vector, 3);
    CHECK(hits[0].id == r.id);
    CHECK(hits[0].distance == 0.0);
  }
  const auto all = index.search(records[0].vector, 500);
  CHECK(all.size() == 50);
  for (std::size_t i = 1; i < all.size(); ++i) CHECK(all[i - 1].distance <= all[i].distance);
  const std::vector<float> wrong(15, 0.0f);
  CHECK_THROWS_AS(index.search(wrong, 3), Error);
  CHECK_THROWS_AS(index.search(records[0].vector, 0), Error);
}

TEST_CASE("exactness against a naive scan") {
  const auto records = random_records(1000, 32, 4);
  std::vector<std::pair<std::string, std::vector<float>>> data;
  for (const auto& r : records) data.emplace_back(r.id, r.vector);
  const FlatIndex index{SentenceStore(records)};
  PortableRng rng(5);
  for (int q = 0; q < 100; ++q) {
    const auto query = random_vector(rng, 32);
    const auto expected = oracle::full_scan(data, query);
    const auto got = index.search(query, 16);
    REQUIRE(got.size() == 16);
    for (std::size_t i = 0; i < 16; ++i) {
      CHECK(got[i].id == expected[i].id);
      CHECK(got[i].distance == expected[i].distance);
    }
  }
}

TEST_CASE("ties break by id regardless of insertion order") {
  // Four vectors at the same distance from the origin.
  std::vector<SentenceEmbedding> records{{"d", {1, 0}}, {"b", {0, 1}}, {"c", {-1, 0}}, {"a", {0, -1}}};
  const std::vector<float> origin{0, 0};
  for (int rotation = 0; rotation < 4; ++rotation) {
    std::rotate(records.begin(), records.begin() + 1, records.end());
    const auto hits = FlatIndex(SentenceStore(records)).search(origin, 3);
    REQUIRE(hits.size() == 3);
    CHECK(hits[0].id == "a");
    CHECK(hits[1].id == "b");
    CHECK(hits[2].id == "c");
  }
}

TEST_CASE("permutation invariance and prefix property") {
  auto records = random_records(300, 12, 6);
  const FlatIndex first{SentenceStore(records)};
  PortableRng rng(7);
  for (std::size_t i = records.size(); i > 1; --i) std::swap(records[i - 1], records[rng.below(i)]);
  const FlatIndex second{SentenceStore(records)};
  for (int q = 0; q < 20; ++q) {
    const auto query = random_vector(rng, 12);
    const auto a = first.search(query, 20);
    CHECK(a == second.search(query, 20));
    const auto prefix = first.search(query, 7);
    CHECK(std::equal(prefix.begin(), prefix.end(), a.begin()));
  }
}

TEST_CASE("batch search matches single searches for any thread count") {
  const FlatIndex index{SentenceStore(random_records(400, 10, 8))};
  PortableRng rng(9);
  std::vector<std::vector<float>> queries;
  for (int i = 0; i < 37; ++i) queries.push_back(random_vector(rng, 10));
  std::vector<std::vector<Neighbor>> expected;
  for (const auto& q : queries) expected.push_back(index.search(q, 5));
  for (unsigned threads : {1u, 2u, 5u, 0u}) CHECK(index.search_batch(queries, 5, threads) == expected);
}

TEST_CASE("index manifest") {
  testing_support::TempDir dir;
  const auto records = random_records(12, 6, 10);
  write_sentence_store(records, dir / "s.rbqe");
  const FlatIndex index{read_sentence_store(dir / "s.rbqe")};
  const auto manifest = build_index_manifest(dir / "s.rbqe", index);
  CHECK(manifest.dim == 6);
  CHECK(manifest.count == 12);
  CHECK(manifest.checksum == file_checksum(dir / "s.rbqe"));
  write_index_manifest(manifest, dir / "m.json");
  const auto back = read_index_manifest(dir / "m.json");
  CHECK(back.dim == 6);
  CHECK(back.count == 12);
  CHECK(back.checksum == manifest.checksum);
}
