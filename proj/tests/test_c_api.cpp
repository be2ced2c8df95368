#include "doctest.h"

#include <cmath>
#include <string>
#include <vector>

#include "json.hpp"
#include "lfqa/lfqa.h"
#include "support.hpp"

using nlohmann::json;
using testing_support::TempDir;

namespace {

// Takes ownership of an lfqa_string.
std::string take(lfqa_string* s) {
  std::string out(lfqa_string_data(s), lfqa_string_size(s));
  lfqa_string_free(s);
  return out;
}

}  // namespace

TEST_CASE("status strings and last error") {
  CHECK(std::string(lfqa_version()) == "0.1.0");
  CHECK(std::string(lfqa_status_string(LFQA_OK)) == "ok");
  CHECK(std::string(lfqa_status_string(LFQA_ERR_BUDGET)) != "unknown status");
  CHECK(std::string(lfqa_status_string(static_cast<lfqa_status>(99))) == "unknown status");

  lfqa_corpus* corpus = nullptr;
  CHECK(lfqa_corpus_ingest("/definitely/not/here.jsonl", nullptr, 0, &corpus) == LFQA_ERR_IO);
  CHECK(corpus == nullptr);
  CHECK(std::string(lfqa_last_error()).find("not/here") != std::string::npos);
  CHECK(lfqa_corpus_ingest(nullptr, nullptr, 0, &corpus) == LFQA_ERR_INVALID_ARGUMENT);
  CHECK(lfqa_corpus_size(nullptr) == 0);
}

TEST_CASE("corpus, embeddings and index through handles") {
  TempDir dir;
  lfqa_corpus* corpus = nullptr;
  REQUIRE(lfqa_corpus_synthetic(50, 3, &corpus) == LFQA_OK);
  CHECK(lfqa_corpus_size(corpus) == 50);
  REQUIRE(lfqa_corpus_write(corpus, (dir / "c.jsonl").c_str()) == LFQA_OK);

  lfqa_corpus* again = nullptr;
  REQUIRE(lfqa_corpus_ingest((dir / "c.jsonl").c_str(), nullptr, 1, &again) == LFQA_OK);
  CHECK(lfqa_corpus_size(again) == 50);
  lfqa_string* s = nullptr;
  REQUIRE(lfqa_corpus_stats(again, &s) == LFQA_OK);
  CHECK(json::parse(take(s)).at("pair_count") == 50);
  REQUIRE(lfqa_corpus_warnings(again, &s) == LFQA_OK);
  CHECK(take(s) == "[]");

  REQUIRE(lfqa_corpus_split(again, 0.7, 0.15, 0.15, 9, (dir / "split.jsonl").c_str(), &s) == LFQA_OK);
  const auto sizes = json::parse(take(s));
  CHECK(sizes.at("train") == 35);
  CHECK(sizes.at("test") == 8);
  CHECK(lfqa_corpus_split(again, 0.7, 0.7, 0.15, 9, nullptr, nullptr) == LFQA_ERR_INVALID_ARGUMENT);

  REQUIRE(lfqa_corpus_embed_stub(again, 16, 1, LFQA_TEXT_QA, (dir / "s.rbqe").c_str(),
                                 (dir / "t.rbqt").c_str()) == LFQA_OK);
  lfqa_index* index = nullptr;
  REQUIRE(lfqa_index_open((dir / "s.rbqe").c_str(), &index) == LFQA_OK);
  CHECK(lfqa_index_dim(index) == 16);
  CHECK(lfqa_index_size(index) == 50);
  REQUIRE(lfqa_index_write_manifest(index, (dir / "m.json").c_str()) == LFQA_OK);
  CHECK(json::parse(testing_support::read_file(dir / "m.json")).at("count") == 50);

  std::vector<float> q(16);
  REQUIRE(lfqa_stub_embed("fever", 16, 1, q.data(), q.size()) == LFQA_OK);
  std::vector<lfqa_neighbor> hits(100);
  size_t count = 0;
  REQUIRE(lfqa_index_search(index, q.data(), q.size(), 100, hits.data(), &count) == LFQA_OK);
  CHECK(count == 50);
  for (size_t i = 1; i < count; ++i) CHECK(hits[i - 1].distance <= hits[i].distance);
  CHECK(lfqa_index_search(index, q.data(), 8, 4, hits.data(), &count) == LFQA_ERR_DIM_MISMATCH);

  double c = 0;
  REQUIRE(lfqa_cosine(q.data(), q.data(), q.size(), &c) == LFQA_OK);
  CHECK(std::abs(c - 1.0) < 1e-6);
  CHECK(lfqa_stub_embed("x", 16, 1, q.data(), 4) == LFQA_ERR_INVALID_ARGUMENT);

  lfqa_index_free(index);
  lfqa_corpus_free(again);
  lfqa_corpus_free(corpus);
}

TEST_CASE("clean text") {
  TempDir dir;
  testing_support::write_file(dir / "a.tsv", "MI\tmyocardial infarction\n");
  lfqa_string* s = nullptr;
  REQUIRE(lfqa_clean_text("  MI \t confirmed ", (dir / "a.tsv").c_str(), &s) == LFQA_OK);
  CHECK(take(s) == "myocardial infarction confirmed");
}

TEST_CASE("prompt assembly") {
  lfqa_string* s = nullptr;
  REQUIRE(lfqa_assemble_prompt("Q?", R"([{"question":"A?","answer":"B."}])", 512, 0, nullptr, &s) == LFQA_OK);
  const auto bundle = json::parse(take(s));
  CHECK(bundle.at("rendered") == "Context: Question: A? Answer: B. Question: Q? Answer:");
  CHECK(bundle.at("token_count") == 8);
  CHECK(lfqa_assemble_prompt("a b c d", "[]", 2, 0, nullptr, &s) == LFQA_ERR_BUDGET);
  CHECK(lfqa_assemble_prompt("Q?", "{", 10, 0, nullptr, &s) == LFQA_ERR_PARSE);
}

TEST_CASE("metrics") {
  lfqa_metric_options options;
  lfqa_metric_options_default(&options);
  CHECK(options.meteor_gamma == 0.5);
  CHECK(options.meteor_theta == 3.0);
  lfqa_metric_row rows[2];
  REQUIRE(lfqa_evaluate_pair("the cat sat", "the cat sat", &options, &rows[0]) == LFQA_OK);
  CHECK(rows[0].bleu1 == 1.0);
  CHECK(rows[0].has_bertscore == 1);
  CHECK(std::abs(rows[0].meteor - (1.0 - 1.0 / 54.0)) < 1e-12);
  REQUIRE(lfqa_evaluate_pair("", "the cat sat", nullptr, &rows[1]) == LFQA_OK);
  CHECK(rows[1].degenerate == 1);
  CHECK(rows[1].has_bertscore == 0);
  CHECK(lfqa_evaluate_pair("x", "", nullptr, &rows[1]) == LFQA_ERR_INVALID_ARGUMENT);

  lfqa_metric_summary summary;
  REQUIRE(lfqa_aggregate(rows, 2, &summary) == LFQA_OK);
  CHECK(summary.count == 2);
  CHECK(summary.bleu1 == 0.5);
  CHECK(summary.bertscore_excluded == 1);
  CHECK(lfqa_aggregate(rows, 0, &summary) == LFQA_ERR_INVALID_ARGUMENT);
}

TEST_CASE("tables") {
  TempDir dir;
  lfqa_table* a = nullptr;
  lfqa_table* b = nullptr;
  REQUIRE(lfqa_table_create(&a) == LFQA_OK);
  REQUIRE(lfqa_table_create(&b) == LFQA_OK);
  REQUIRE(lfqa_table_add_row(a, "Base T5 + FAISS", 0.2065, 0.2618, 0.1132, 1, 0.1948) == LFQA_OK);
  REQUIRE(lfqa_table_add_row(b, "Finetuned T5 + FAISS", 0.2415, 0.2918, 0.2054, 1, 0.2264) == LFQA_OK);
  CHECK(lfqa_table_rows(a) == 1);

  lfqa_string* s = nullptr;
  REQUIRE(lfqa_table_render(b, LFQA_REPORT_MARKDOWN, &s) == LFQA_OK);
  CHECK(take(s).find("| Finetuned T5 + FAISS | 0.2415 | 0.2918 | 0.2054 | 0.2264 |") != std::string::npos);
  REQUIRE(lfqa_table_compare(a, b, LFQA_REPORT_MARKDOWN, &s) == LFQA_OK);
  CHECK(take(s).find("(+16.9%)") != std::string::npos);

  REQUIRE(lfqa_table_emit(a, LFQA_REPORT_CSV, (dir / "a.csv").c_str()) == LFQA_OK);
  lfqa_table* back = nullptr;
  REQUIRE(lfqa_table_read_csv((dir / "a.csv").c_str(), &back) == LFQA_OK);
  CHECK(lfqa_table_rows(back) == 1);

  lfqa_table* empty = nullptr;
  REQUIRE(lfqa_table_create(&empty) == LFQA_OK);
  CHECK(lfqa_table_render(empty, LFQA_REPORT_CSV, &s) == LFQA_ERR_INVALID_ARGUMENT);

  lfqa_table_free(a);
  lfqa_table_free(b);
  lfqa_table_free(back);
  lfqa_table_free(empty);
}

TEST_CASE("pipeline and experiment") {
  TempDir dir;
  lfqa_corpus* corpus = nullptr;
  REQUIRE(lfqa_corpus_synthetic(40, 2, &corpus) == LFQA_OK);
  REQUIRE(lfqa_corpus_write(corpus, (dir / "c.jsonl").c_str()) == LFQA_OK);
  lfqa_corpus_free(corpus);

  const std::string config = json{{"corpus", "c.jsonl"}, {"embedder", {{"dim", 16}, {"text_unit", "question"}}}}.dump();
  lfqa_pipeline* pipeline = nullptr;
  REQUIRE(lfqa_pipeline_open(config.c_str(), dir.path().c_str(), &pipeline) == LFQA_OK);

  const auto pairs = json::parse(testing_support::read_file(dir / "c.jsonl").substr(0, testing_support::read_file(dir / "c.jsonl").find('\n')));
  const std::string question = pairs.at("question");
  lfqa_string* s = nullptr;
  REQUIRE(lfqa_pipeline_retrieve(pipeline, question.c_str(), nullptr, 5, &s) == LFQA_OK);
  const auto hits = json::parse(take(s));
  CHECK(hits.size() == 5);
  CHECK(hits[0].at("id") == pairs.at("id"));
  CHECK(hits[0].at("distance") == 0.0);

  REQUIRE(lfqa_pipeline_rerank(pipeline, question.c_str(), nullptr, "colbert", 8, 3, &s) == LFQA_OK);
  CHECK(json::parse(take(s)).size() == 3);
  CHECK(lfqa_pipeline_rerank(pipeline, question.c_str(), nullptr, "nope", 8, 3, &s) == LFQA_ERR_INVALID_ARGUMENT);

  REQUIRE(lfqa_pipeline_answer(pipeline, question.c_str(), nullptr, "dense", &s) == LFQA_OK);
  const auto answer = json::parse(take(s));
  CHECK(answer.at("text") == pairs.at("answer"));
  CHECK(answer.at("model_tag") == "stub-echo");
  lfqa_pipeline_free(pipeline);

  lfqa_table* table = nullptr;
  REQUIRE(lfqa_experiment_run(config.c_str(), dir.path().c_str(), &table) == LFQA_OK);
  CHECK(lfqa_table_rows(table) == 4);
  lfqa_table_free(table);

  CHECK(lfqa_experiment_run(R"({"corpus":"c.jsonl","k":2,"n":3})", dir.path().c_str(), &table) ==
        LFQA_ERR_INVALID_ARGUMENT);
  CHECK(lfqa_pipeline_open("not json", nullptr, &pipeline) == LFQA_ERR_PARSE);
}
