#include "doctest.h"

#include <set>

#include "json.hpp"
#include "lfqa/corpus.hpp"
#include "lfqa/error.hpp"
#include "lfqa/hashing.hpp"
#include "lfqa/synthetic.hpp"
#include "support.hpp"

using namespace lfqa;
using testing_support::TempDir;
using testing_support::write_file;

namespace {

std::string record(const std::string& id, const std::string& q, const std::string& a,
                   const std::string& source = "pubmedqa") {
  return nlohmann::json{{"id", id}, {"question", q}, {"answer", a}, {"source", source}}.dump() + "\n";
}

}  // namespace

TEST_CASE("ingest keeps file order") {
  TempDir dir;
  write_file(dir / "c.jsonl", record("b", "q1", "a1") + record("a", "q2", "a2") + record("c", "q3", "a3"));
  const auto result = ingest_jsonl(dir / "c.jsonl");
  REQUIRE(result.pairs.size() == 3);
  CHECK(result.pairs[0].id == "b");
  CHECK(result.pairs[1].id == "a");
  CHECK(result.pairs[2].question == "q3");
  CHECK(result.warnings.empty());
}

TEST_CASE("duplicate id names its line") {
  TempDir dir;
  write_file(dir / "c.jsonl", record("x", "q", "a") + record("x", "q2", "a2"));
  try {
    ingest_jsonl(dir / "c.jsonl");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DuplicateId);
    CHECK(std::string(e.what()).find(":2:") != std::string::npos);
  }
}

TEST_CASE("malformed lines warn or fail in strict mode") {
  TempDir dir;
  write_file(dir / "c.jsonl", record("a", "q", "a") + "{not json\n" + R"({"id":"b","question":"q"})" "\n" +
                                  record("c", "q", "a"));
  const auto lenient = ingest_jsonl(dir / "c.jsonl");
  CHECK(lenient.pairs.size() == 2);
  REQUIRE(lenient.warnings.size() == 2);
  CHECK(lenient.warnings[0].find(":2:") != std::string::npos);
  CHECK(lenient.warnings[1].find(":3:") != std::string::npos);

  CHECK_THROWS_AS(ingest_jsonl(dir / "c.jsonl", {true}), Error);
  CHECK_THROWS_AS(ingest_jsonl(dir / "missing.jsonl"), Error);
}

TEST_CASE("integer ids are accepted") {
  TempDir dir;
  write_file(dir / "c.jsonl", R"({"id": 17, "question": "q", "answer": "a"})" "\n");
  const auto result = ingest_jsonl(dir / "c.jsonl");
  REQUIRE(result.pairs.size() == 1);
  CHECK(result.pairs[0].id == "17");
}

TEST_CASE("synthetic file round trip and recount") {
  TempDir dir;
  const auto pairs = synthetic_corpus(100, 5);
  write_jsonl(pairs, dir / "c.jsonl");
  const auto back = ingest_jsonl(dir / "c.jsonl").pairs;
  REQUIRE(back.size() == 100);
  CHECK(back == pairs);

  // Recount by hand: whitespace tokens are runs of non-space bytes here.
  auto words = [](const std::string& s) {
    std::size_t n = 0;
    bool in = false;
    for (char ch : s) {
      const bool space = ch == ' ';
      if (!space && !in) ++n;
      in = !space;
    }
    return n;
  };
  double q = 0, a = 0;
  std::map<std::string, std::size_t> sources;
  for (const auto& p : back) {
    q += static_cast<double>(words(p.question));
    a += static_cast<double>(words(p.answer));
    sources[p.source]++;
  }
  const auto stats = corpus_stats(back);
  CHECK(stats.pair_count == 100);
  CHECK(stats.mean_question_tokens == doctest::Approx(q / 100).epsilon(1e-12));
  CHECK(stats.mean_answer_tokens == doctest::Approx(a / 100).epsilon(1e-12));
  CHECK(stats.per_source == sources);
}

TEST_CASE("corpus stats trivial cases") {
  const auto empty = corpus_stats({});
  CHECK(empty.pair_count == 0);
  CHECK(empty.mean_question_tokens == 0.0);
  CHECK(empty.mean_answer_tokens == 0.0);

  const auto one = corpus_stats({{"1", "a b", "c", "x"}});
  CHECK(one.mean_question_tokens == 2.0);
  CHECK(one.mean_answer_tokens == 1.0);
}

TEST_CASE("stats per-source counts add up") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto stats = corpus_stats(synthetic_corpus(50 + seed, seed));
    std::size_t total = 0;
    for (const auto& [src, n] : stats.per_source) total += n;
    CHECK(total == stats.pair_count);
  }
}

TEST_CASE("clean_text") {
  const AbbreviationTable table{{"MI", "myocardial infarction"}};
  CHECK(clean_text("  MI \t confirmed ", table) == "myocardial infarction confirmed");
  CHECK(clean_text("Already clean text.") == "Already clean text.");
  CHECK(clean_text("history of (MI).", table) == "history of (myocardial infarction).");
  CHECK(clean_text("MIX of things", table) == "MIX of things");
  // Decomposed e + combining acute composes to U+00E9.
  CHECK(clean_text("cafe\xCC\x81") == "caf\xC3\xA9");
}

TEST_CASE("control characters are removed byte for byte") {
  const std::string base = "fever and cough for three days";
  PortableRng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    std::string noisy = base;
    const char controls[] = {'\x01', '\x07', '\x1b', '\x7f', '\x02'};
    for (int i = 0; i < 3; ++i) {
      const auto pos = rng.below(noisy.size() + 1);
      noisy.insert(noisy.begin() + static_cast<std::ptrdiff_t>(pos), controls[rng.below(5)]);
    }
    std::string filtered;
    for (unsigned char ch : noisy) {
      if (ch >= 0x20 && ch != 0x7f) filtered += static_cast<char>(ch);
    }
    CHECK(clean_text(noisy) == filtered);
  }
}

TEST_CASE("clean_text is idempotent") {
  const AbbreviationTable table{{"MI", "myocardial infarction"}, {"BP", "blood pressure"}};
  const char* samples[] = {"  MI\t\tBP  ", "a\x01 b \n\n c", "(BP) rises; MI.", "", "   ",
                           "\xC3\xA9l\xC3\xA8ve \xE2\x80\x83 x", "e\xCC\x81\xCC\x81"};
  for (const char* s : samples) {
    const auto once = clean_text(s, table);
    CHECK(clean_text(once, table) == once);
  }
  for (const auto& p : synthetic_corpus(200, 3)) {
    const auto once = clean_text(p.answer, table);
    CHECK(clean_text(once, table) == once);
  }
}

TEST_CASE("abbreviation file") {
  TempDir dir;
  write_file(dir / "abbr.tsv", "# term\texpansion\n\nMI\tmyocardial infarction\nBP\t blood  pressure \n");
  const auto table = load_abbreviations(dir / "abbr.tsv");
  REQUIRE(table.size() == 2);
  CHECK(table.at("BP") == "blood pressure");
  write_file(dir / "bad.tsv", "MI myocardial infarction\n");
  CHECK_THROWS_AS(load_abbreviations(dir / "bad.tsv"), Error);
}

TEST_CASE("clean_corpus drops empty pairs with a warning") {
  std::vector<std::string> warnings;
  const auto cleaned = clean_corpus({{"1", " q ", " a ", ""}, {"2", "\x01", "a", ""}}, {}, &warnings);
  REQUIRE(cleaned.size() == 1);
  CHECK(cleaned[0].question == "q");
  CHECK(warnings.size() == 1);
}

TEST_CASE("split sizes") {
  const SplitRatios standard{0.70, 0.15, 0.15};
  CHECK(split_sizes(100, standard) == std::array<std::size_t, 3>{70, 15, 15});
  CHECK(split_sizes(1, standard) == std::array<std::size_t, 3>{0, 0, 1});
  CHECK(split_sizes(181488, standard) == std::array<std::size_t, 3>{127041, 27223, 27224});
  CHECK_THROWS_AS(split_sizes(10, {0.5, 0.5, 0.5}), Error);
  CHECK_THROWS_AS(split_corpus({}, standard, 1), Error);
}

TEST_CASE("split partitions the id set deterministically") {
  const auto pairs = synthetic_corpus(137, 9);
  std::set<std::string> all;
  for (const auto& p : pairs) all.insert(p.id);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto a = split_corpus(pairs, {}, seed);
    std::set<std::string> seen;
    std::size_t total = 0;
    for (auto part : {Partition::Train, Partition::Validation, Partition::Test}) {
      for (const auto& id : a.ids(part)) seen.insert(id);
      total += a.ids(part).size();
    }
    CHECK(total == pairs.size());
    CHECK(seen == all);

    auto reversed = pairs;
    std::reverse(reversed.begin(), reversed.end());
    const auto b = split_corpus(reversed, {}, seed);
    CHECK(a.train_ids == b.train_ids);
    CHECK(a.validation_ids == b.validation_ids);
    CHECK(a.test_ids == b.test_ids);
  }
  CHECK(split_corpus(pairs, {}, 1).train_ids != split_corpus(pairs, {}, 2).train_ids);
}

TEST_CASE("split manifest round trip") {
  TempDir dir;
  const auto split = split_corpus(synthetic_corpus(40, 1), {}, 7);
  write_split_manifest(split, dir / "split.jsonl");
  const auto back = read_split_manifest(dir / "split.jsonl");
  CHECK(back.size() == 40);
  for (const auto& id : split.test_ids) CHECK(back.at(id) == Partition::Test);
  for (const auto& id : split.train_ids) CHECK(back.at(id) == Partition::Train);
}
