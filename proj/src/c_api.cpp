#include "lfqa/lfqa.h"

#include <cstring>
#include <string>
#include <vector>

#include "lfqa/corpus.hpp"
#include "lfqa/embedding_store.hpp"
#include "lfqa/error.hpp"
#include "lfqa/generator_client.hpp"
#include "lfqa/harness.hpp"
#include "lfqa/metrics.hpp"
#include "lfqa/prompt.hpp"
#include "lfqa/report.hpp"
#include "lfqa/synthetic.hpp"
#include "lfqa/vector_index.hpp"

using nlohmann::json;

struct lfqa_string {
  std::string value;
};

struct lfqa_corpus {
  std::vector<lfqa::QaPair> pairs;
  std::vector<std::string> warnings;
};

struct lfqa_index {
  std::filesystem::path store_path;
  lfqa::FlatIndex index;
};

struct lfqa_pipeline {
  lfqa::Pipeline pipeline;
};

struct lfqa_table {
  lfqa::ResultsTable table;
};

namespace {

thread_local std::string g_last_error;

lfqa_status to_status(lfqa::ErrorCode code) {
  return static_cast<lfqa_status>(static_cast<int>(code));
}

template <typename Fn>
lfqa_status guarded(Fn&& fn) {
  try {
    fn();
    return LFQA_OK;
  } catch (const lfqa::Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const json::exception& e) {
    g_last_error = e.what();
    return LFQA_ERR_PARSE;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return LFQA_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown failure";
    return LFQA_ERR_INTERNAL;
  }
}

void require(const void* p, const char* what) {
  if (!p) lfqa::fail(lfqa::ErrorCode::InvalidArgument, std::string(what) + " is NULL");
}

void put(lfqa_string** out, std::string value) {
  require(out, "output string");
  *out = new lfqa_string{std::move(value)};
}

json ranked_to_json(const std::vector<lfqa::RankedContext>& ranked) {
  json out = json::array();
  for (const auto& c : ranked) {
    out.push_back({{"rank", c.rank},
                   {"id", c.qa.id},
                   {"score", c.score},
                   {"strategy", lfqa::strategy_name(c.strategy)},
                   {"question", c.qa.question},
                   {"answer", c.qa.answer}});
  }
  return out;
}

json bundle_to_json(const lfqa::PromptBundle& b) {
  return json{{"query", b.query},
              {"rendered", b.rendered},
              {"token_count", b.token_count},
              {"dropped_contexts", b.dropped_contexts},
              {"contexts", ranked_to_json(b.contexts)}};
}

lfqa::ExperimentConfig parse_config(const char* config_json, const char* base_dir) {
  require(config_json, "config_json");
  return lfqa::config_from_json(json::parse(config_json),
                                base_dir ? std::filesystem::path(base_dir) : std::filesystem::path{});
}

lfqa::MetricRow from_c(const lfqa_metric_row& r) {
  lfqa::MetricRow row;
  row.bleu1 = r.bleu1;
  row.rouge1 = r.rouge1;
  if (r.has_bertscore) row.bertscore_p = r.bertscore_p;
  row.meteor = r.meteor;
  row.degenerate = r.degenerate != 0;
  return row;
}

lfqa::ReportFormat from_c(lfqa_report_format f) {
  return f == LFQA_REPORT_CSV ? lfqa::ReportFormat::Csv : lfqa::ReportFormat::Markdown;
}

std::vector<lfqa::Candidate> query_candidates(const lfqa::Pipeline& p, const char* query,
                                              const char* query_id, std::size_t k) {
  require(query, "query");
  return p.retrieve(p.query_vector(query_id ? query_id : "", query), k);
}

}  // namespace

extern "C" {

const char* lfqa_version(void) { return "0.1.0"; }

const char* lfqa_status_string(lfqa_status status) {
  if (status == LFQA_OK) return "ok";
  if (status < LFQA_ERR_INVALID_ARGUMENT || status > LFQA_ERR_INTERNAL) return "unknown status";
  return lfqa::error_code_name(static_cast<lfqa::ErrorCode>(status)).data();
}

const char* lfqa_last_error(void) { return g_last_error.c_str(); }

const char* lfqa_string_data(const lfqa_string* s) { return s ? s->value.c_str() : ""; }
size_t lfqa_string_size(const lfqa_string* s) { return s ? s->value.size() : 0; }
void lfqa_string_free(lfqa_string* s) { delete s; }

lfqa_status lfqa_corpus_ingest(const char* path, const char* abbreviations_tsv, int strict,
                               lfqa_corpus** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    auto ingested = lfqa::ingest_jsonl(path, {strict != 0});
    const auto table = abbreviations_tsv ? lfqa::load_abbreviations(abbreviations_tsv)
                                         : lfqa::AbbreviationTable{};
    auto corpus = std::make_unique<lfqa_corpus>();
    corpus->warnings = std::move(ingested.warnings);
    corpus->pairs = lfqa::clean_corpus(ingested.pairs, table, &corpus->warnings);
    *out = corpus.release();
  });
}

lfqa_status lfqa_corpus_synthetic(size_t count, uint64_t seed, lfqa_corpus** out) {
  return guarded([&] {
    require(out, "out");
    *out = new lfqa_corpus{lfqa::synthetic_corpus(count, seed), {}};
  });
}

size_t lfqa_corpus_size(const lfqa_corpus* corpus) { return corpus ? corpus->pairs.size() : 0; }

lfqa_status lfqa_corpus_warnings(const lfqa_corpus* corpus, lfqa_string** out) {
  return guarded([&] {
    require(corpus, "corpus");
    put(out, json(corpus->warnings).dump());
  });
}

lfqa_status lfqa_corpus_stats(const lfqa_corpus* corpus, lfqa_string** out) {
  return guarded([&] {
    require(corpus, "corpus");
    const auto stats = lfqa::corpus_stats(corpus->pairs);
    put(out, json{{"pair_count", stats.pair_count},
                  {"mean_question_tokens", stats.mean_question_tokens},
                  {"mean_answer_tokens", stats.mean_answer_tokens},
                  {"per_source", stats.per_source}}
                 .dump());
  });
}

lfqa_status lfqa_corpus_write(const lfqa_corpus* corpus, const char* path) {
  return guarded([&] {
    require(corpus, "corpus");
    require(path, "path");
    lfqa::write_jsonl(corpus->pairs, path);
  });
}

lfqa_status lfqa_corpus_split(const lfqa_corpus* corpus, double train, double validation, double test,
                              uint64_t seed, const char* manifest_path, lfqa_string** summary) {
  return guarded([&] {
    require(corpus, "corpus");
    const auto split = lfqa::split_corpus(corpus->pairs, {train, validation, test}, seed);
    if (manifest_path) lfqa::write_split_manifest(split, manifest_path);
    if (summary) {
      put(summary, json{{"train", split.train_ids.size()},
                        {"validation", split.validation_ids.size()},
                        {"test", split.test_ids.size()},
                        {"seed", seed}}
                       .dump());
    }
  });
}

lfqa_status lfqa_corpus_embed_stub(const lfqa_corpus* corpus, uint32_t dim, uint64_t seed,
                                   lfqa_text_unit unit, const char* sentence_path,
                                   const char* token_path) {
  return guarded([&] {
    require(corpus, "corpus");
    require(sentence_path, "sentence_path");
    const auto text_unit = unit == LFQA_TEXT_QUESTION ? lfqa::TextUnit::Question
                                                      : lfqa::TextUnit::QuestionAnswer;
    std::vector<lfqa::SentenceEmbedding> sentences;
    std::vector<lfqa::TokenEmbeddings> tokens;
    for (const auto& p : corpus->pairs) {
      const auto text = lfqa::unit_text(p, text_unit);
      sentences.push_back({p.id, lfqa::stub_embed(text, dim, seed)});
      if (token_path) tokens.push_back({p.id, lfqa::stub_embed_tokens(lfqa::qa_text(p), dim, seed)});
    }
    lfqa::write_sentence_store(sentences, sentence_path);
    if (token_path) lfqa::write_token_store(tokens, token_path);
  });
}

void lfqa_corpus_free(lfqa_corpus* corpus) { delete corpus; }

lfqa_status lfqa_clean_text(const char* raw, const char* abbreviations_tsv, lfqa_string** out) {
  return guarded([&] {
    require(raw, "raw");
    const auto table = abbreviations_tsv ? lfqa::load_abbreviations(abbreviations_tsv)
                                         : lfqa::AbbreviationTable{};
    put(out, lfqa::clean_text(raw, table));
  });
}

lfqa_status lfqa_stub_embed(const char* text, uint32_t dim, uint64_t seed, float* out, size_t out_len) {
  return guarded([&] {
    require(text, "text");
    require(out, "out");
    if (out_len < dim) lfqa::fail(lfqa::ErrorCode::InvalidArgument, "output buffer smaller than dim");
    const auto v = lfqa::stub_embed(text, dim, seed);
    std::copy(v.begin(), v.end(), out);
  });
}

lfqa_status lfqa_cosine(const float* u, const float* v, size_t dim, double* out) {
  return guarded([&] {
    require(u, "u");
    require(v, "v");
    require(out, "out");
    *out = lfqa::cosine({u, dim}, {v, dim});
  });
}

lfqa_status lfqa_index_open(const char* sentence_store_path, lfqa_index** out) {
  return guarded([&] {
    require(sentence_store_path, "sentence_store_path");
    require(out, "out");
    const auto store = lfqa::read_sentence_store(sentence_store_path);
    *out = new lfqa_index{sentence_store_path, lfqa::FlatIndex(store)};
  });
}

uint32_t lfqa_index_dim(const lfqa_index* index) { return index ? index->index.dim() : 0; }
size_t lfqa_index_size(const lfqa_index* index) { return index ? index->index.size() : 0; }

lfqa_status lfqa_index_write_manifest(const lfqa_index* index, const char* path) {
  return guarded([&] {
    require(index, "index");
    require(path, "path");
    lfqa::write_index_manifest(lfqa::build_index_manifest(index->store_path, index->index), path);
  });
}

lfqa_status lfqa_index_search(const lfqa_index* index, const float* query, size_t dim, size_t k,
                              lfqa_neighbor* out, size_t* out_count) {
  return guarded([&] {
    require(index, "index");
    require(query, "query");
    require(out, "out");
    require(out_count, "out_count");
    const auto neighbors = index->index.search({query, dim}, k);
    // Ids point into the index's own id list so they outlive this call.
    const auto& ids = index->index.ids();
    for (std::size_t i = 0; i < neighbors.size(); ++i) {
      const auto it = std::find(ids.begin(), ids.end(), neighbors[i].id);
      out[i] = {it->c_str(), neighbors[i].distance};
    }
    *out_count = neighbors.size();
  });
}

void lfqa_index_free(lfqa_index* index) { delete index; }

lfqa_status lfqa_pipeline_open(const char* config_json, const char* base_dir, lfqa_pipeline** out) {
  return guarded([&] {
    require(out, "out");
    *out = new lfqa_pipeline{lfqa::Pipeline(parse_config(config_json, base_dir))};
  });
}

lfqa_status lfqa_pipeline_retrieve(const lfqa_pipeline* pipeline, const char* query,
                                   const char* query_id, size_t k, lfqa_string** out) {
  return guarded([&] {
    require(pipeline, "pipeline");
    json result = json::array();
    for (const auto& c : query_candidates(pipeline->pipeline, query, query_id, k)) {
      result.push_back({{"id", c.qa->id},
                        {"distance", c.dense_distance},
                        {"question", c.qa->question},
                        {"answer", c.qa->answer}});
    }
    put(out, result.dump());
  });
}

lfqa_status lfqa_pipeline_rerank(const lfqa_pipeline* pipeline, const char* query,
                                 const char* query_id, const char* strategy, size_t k, size_t n,
                                 lfqa_string** out) {
  return guarded([&] {
    require(pipeline, "pipeline");
    require(strategy, "strategy");
    const auto& p = pipeline->pipeline;
    const auto s = lfqa::parse_strategy(strategy);
    const auto candidates = query_candidates(p, query, query_id, k);
    const auto tokens = s == lfqa::Strategy::LateInteraction
                            ? p.query_tokens(query_id ? query_id : "", query)
                            : lfqa::TokenMatrix{};
    put(out, ranked_to_json(p.rerank(s, candidates, query, tokens, n)).dump());
  });
}

lfqa_status lfqa_pipeline_answer(const lfqa_pipeline* pipeline, const char* query,
                                 const char* query_id, const char* strategy, lfqa_string** out) {
  return guarded([&] {
    require(pipeline, "pipeline");
    require(strategy, "strategy");
    const auto& p = pipeline->pipeline;
    const auto s = lfqa::parse_strategy(strategy);
    const auto candidates = query_candidates(p, query, query_id, p.config().k);
    const auto tokens = s == lfqa::Strategy::LateInteraction
                            ? p.query_tokens(query_id ? query_id : "", query)
                            : lfqa::TokenMatrix{};
    const auto bundle = p.assemble(query, p.rerank(s, candidates, query, tokens, p.config().n));
    const auto response = p.generate(bundle);
    put(out, json{{"bundle", bundle_to_json(bundle)},
                  {"text", response.text},
                  {"model_tag", response.model_tag},
                  {"latency_ms", response.latency.count()}}
                 .dump());
  });
}

void lfqa_pipeline_free(lfqa_pipeline* pipeline) { delete pipeline; }

lfqa_status lfqa_assemble_prompt(const char* query, const char* contexts_json, size_t budget,
                                 int reverse_contexts, const char* tokenizer_endpoint,
                                 lfqa_string** out) {
  return guarded([&] {
    require(query, "query");
    require(contexts_json, "contexts_json");
    const json contexts = json::parse(contexts_json);
    if (!contexts.is_array()) lfqa::fail(lfqa::ErrorCode::Parse, "contexts must be a JSON array");
    std::vector<lfqa::RankedContext> ranked;
    for (std::size_t i = 0; i < contexts.size(); ++i) {
      const auto& c = contexts[i];
      lfqa::RankedContext r;
      r.qa.id = c.value("id", std::to_string(i + 1));
      r.qa.question = c.at("question").get<std::string>();
      r.qa.answer = c.at("answer").get<std::string>();
      r.rank = c.value("rank", i + 1);
      r.score = c.value("score", 0.0);
      if (auto s = c.find("strategy"); s != c.end()) r.strategy = lfqa::parse_strategy(s->get<std::string>());
      ranked.push_back(std::move(r));
    }
    lfqa::PromptOptions options;
    options.budget = budget;
    options.reverse_contexts = reverse_contexts != 0;
    if (tokenizer_endpoint) options.counter = lfqa::http_token_counter({tokenizer_endpoint});
    put(out, bundle_to_json(lfqa::assemble_prompt(query, std::move(ranked), options)).dump());
  });
}

lfqa_status lfqa_generate(const char* endpoint, long timeout_ms, int retries, const char* request_json,
                          lfqa_string** out) {
  return guarded([&] {
    require(endpoint, "endpoint");
    require(request_json, "request_json");
    lfqa::Endpoint e{endpoint, std::chrono::milliseconds(timeout_ms > 0 ? timeout_ms : 60000), retries};
    const auto response = lfqa::generate(e, lfqa::deserialize_request(request_json));
    put(out, json{{"text", response.text},
                  {"model_tag", response.model_tag},
                  {"latency_ms", response.latency.count()}}
                 .dump());
  });
}

void lfqa_metric_options_default(lfqa_metric_options* options) {
  if (!options) return;
  const lfqa::MeteorParams meteor;
  *options = {64, 0, meteor.gamma, meteor.theta, meteor.stem ? 1 : 0};
}

lfqa_status lfqa_evaluate_pair(const char* generated, const char* reference,
                               const lfqa_metric_options* options, lfqa_metric_row* out) {
  return guarded([&] {
    require(generated, "generated");
    require(reference, "reference");
    require(out, "out");
    lfqa_metric_options defaults;
    lfqa_metric_options_default(&defaults);
    const auto& o = options ? *options : defaults;
    const lfqa::StubEmbeddingProvider provider(o.embed_dim, o.embed_seed);
    const auto row = lfqa::evaluate_pair(generated, reference, provider,
                                         {o.meteor_gamma, o.meteor_theta, o.meteor_stem != 0});
    *out = {row.bleu1, row.rouge1, row.bertscore_p.value_or(0.0), row.bertscore_p ? 1 : 0,
            row.meteor, row.degenerate ? 1 : 0};
  });
}

lfqa_status lfqa_aggregate(const lfqa_metric_row* rows, size_t count, lfqa_metric_summary* out) {
  return guarded([&] {
    require(out, "out");
    if (count > 0) require(rows, "rows");
    std::vector<lfqa::MetricRow> converted;
    converted.reserve(count);
    for (std::size_t i = 0; i < count; ++i) converted.push_back(from_c(rows[i]));
    const auto s = lfqa::aggregate(converted);
    *out = {s.count, s.bleu1, s.rouge1, s.bertscore_p.value_or(0.0), s.bertscore_p ? 1 : 0,
            s.meteor, s.degenerate, s.bertscore_excluded};
  });
}

lfqa_status lfqa_experiment_run(const char* config_json, const char* base_dir, lfqa_table** out) {
  return guarded([&] {
    require(out, "out");
    auto result = lfqa::run_experiment(parse_config(config_json, base_dir));
    *out = new lfqa_table{std::move(result.table)};
  });
}

lfqa_status lfqa_table_create(lfqa_table** out) {
  return guarded([&] {
    require(out, "out");
    *out = new lfqa_table{};
  });
}

lfqa_status lfqa_table_add_row(lfqa_table* table, const char* label, double bleu1, double rouge1,
                               double bertscore, int has_bertscore, double meteor) {
  return guarded([&] {
    require(table, "table");
    require(label, "label");
    table->table.rows.push_back({label, bleu1, rouge1,
                                 has_bertscore ? std::optional<double>(bertscore) : std::nullopt,
                                 meteor});
  });
}

lfqa_status lfqa_table_read_csv(const char* path, lfqa_table** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new lfqa_table{lfqa::read_csv_report(path)};
  });
}

size_t lfqa_table_rows(const lfqa_table* table) { return table ? table->table.rows.size() : 0; }

lfqa_status lfqa_table_render(const lfqa_table* table, lfqa_report_format format, lfqa_string** out) {
  return guarded([&] {
    require(table, "table");
    put(out, lfqa::render_report(table->table, from_c(format)));
  });
}

lfqa_status lfqa_table_emit(const lfqa_table* table, lfqa_report_format format, const char* path) {
  return guarded([&] {
    require(table, "table");
    require(path, "path");
    lfqa::emit_report(table->table, from_c(format), path);
  });
}

lfqa_status lfqa_table_compare(const lfqa_table* a, const lfqa_table* b, lfqa_report_format format,
                               lfqa_string** out) {
  return guarded([&] {
    require(a, "a");
    require(b, "b");
    put(out, lfqa::render_deltas(lfqa::compare_runs(a->table, b->table), from_c(format)));
  });
}

void lfqa_table_free(lfqa_table* table) { delete table; }

}  // extern "C"
