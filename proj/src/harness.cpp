#include "lfqa/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <set>
#include <thread>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "lfqa/error.hpp"
#include "lfqa/hashing.hpp"

namespace lfqa {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string_view text_unit_name(TextUnit u) { return u == TextUnit::Question ? "question" : "qa"; }

TextUnit parse_text_unit(const std::string& s) {
  if (s == "question") return TextUnit::Question;
  if (s == "qa" || s == "question+answer") return TextUnit::QuestionAnswer;
  fail(ErrorCode::InvalidArgument, fmt::format("unknown text unit '{}'", s));
}

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  return (path.is_relative() && !base.empty()) ? base / path : path;
}

std::optional<fs::path> optional_path(const json& j, const char* key, const fs::path& base) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return resolve(base, it->get<std::string>());
}

// Missing and null keys both fall back to the default.
template <typename T>
T value_or(const json& j, const char* key, T fallback) {
  auto it = j.find(key);
  return it == j.end() || it->is_null() ? fallback : it->get<T>();
}

Endpoint endpoint_from_json(const json& j) {
  Endpoint e;
  e.url = j.at("endpoint").get<std::string>();
  e.timeout = std::chrono::milliseconds(value_or(j, "timeout_ms", static_cast<long long>(e.timeout.count())));
  e.retries = value_or(j, "retries", e.retries);
  return e;
}

json endpoint_to_json(const std::optional<Endpoint>& e) {
  if (!e) return nullptr;
  return json{{"endpoint", e->url}, {"timeout_ms", e->timeout.count()}, {"retries", e->retries}};
}

json path_json(const std::optional<fs::path>& p) { return p ? json(p->string()) : json(nullptr); }

}  // namespace

ExperimentConfig config_from_json(const json& j, const fs::path& base) {
  ExperimentConfig c;
  try {
    c.corpus = resolve(base, j.at("corpus").get<std::string>());
    c.abbreviations = optional_path(j, "abbreviations", base);
    c.heldout = optional_path(j, "heldout", base);
    c.sentence_store = optional_path(j, "sentence_store", base);
    c.token_store = optional_path(j, "token_store", base);
    c.query_store = optional_path(j, "query_store", base);
    c.query_token_store = optional_path(j, "query_token_store", base);
    c.seed = value_or(j, "seed", c.seed);

    if (auto s = j.find("split"); s != j.end() && !s->is_null()) {
      if (auto r = s->find("ratios"); r != s->end()) {
        const auto v = r->get<std::vector<double>>();
        if (v.size() != 3) fail(ErrorCode::InvalidArgument, "split.ratios needs three values");
        c.ratios = {v[0], v[1], v[2]};
      }
      if (auto p = s->find("partition"); p != s->end()) c.eval_partition = parse_partition(p->get<std::string>());
    }

    c.embedder.seed = c.seed;
    if (auto e = j.find("embedder"); e != j.end() && !e->is_null()) {
      c.embedder.dim = value_or(*e, "dim", c.embedder.dim);
      c.embedder.seed = value_or(*e, "seed", c.embedder.seed);
      if (auto u = e->find("text_unit"); u != e->end()) c.embedder.text_unit = parse_text_unit(u->get<std::string>());
    }
    if (auto p = j.find("index_partitions"); p != j.end() && !p->is_null()) {
      for (const auto& name : *p) c.index_partitions.push_back(parse_partition(name.get<std::string>()));
    }

    if (auto s = j.find("strategies"); s != j.end() && !s->is_null()) {
      c.strategies.clear();
      for (const auto& name : *s) c.strategies.push_back(parse_strategy(name.get<std::string>()));
    } else if (auto s1 = j.find("strategy"); s1 != j.end()) {
      c.strategies = {parse_strategy(s1->get<std::string>())};
    }
    c.k = value_or(j, "k", c.k);
    c.n = value_or(j, "n", c.n);
    c.budget = value_or(j, "budget", c.budget);
    c.reverse_contexts = value_or(j, "reverse_contexts", c.reverse_contexts);
    if (auto t = j.find("tokenizer"); t != j.end() && !t->is_null()) c.tokenizer = endpoint_from_json(*t);

    if (auto g = j.find("generator"); g != j.end() && !g->is_null()) {
      if (g->contains("endpoint") && !(*g)["endpoint"].is_null()) c.generator.endpoint = endpoint_from_json(*g);
      c.generator.label = value_or(*g, "label", c.generator.label);
      c.generator.beam_size = value_or(*g, "beam_size", c.generator.beam_size);
      c.generator.length_penalty = value_or(*g, "length_penalty", c.generator.length_penalty);
      c.generator.max_new_tokens = value_or(*g, "max_new_tokens", c.generator.max_new_tokens);
      c.generator.max_in_flight = value_or(*g, "max_in_flight", c.generator.max_in_flight);
    }
    if (auto s = j.find("scorer"); s != j.end() && !s->is_null()) {
      if (s->contains("endpoint") && !(*s)["endpoint"].is_null()) c.scorer.endpoint = endpoint_from_json(*s);
      c.scorer.max_in_flight = value_or(*s, "max_in_flight", c.scorer.max_in_flight);
    }
    if (auto b = j.find("bm25"); b != j.end() && !b->is_null()) {
      c.bm25.k1 = value_or(*b, "k1", c.bm25.k1);
      c.bm25.b = value_or(*b, "b", c.bm25.b);
      c.bm25_global_stats = value_or(*b, "global_stats", c.bm25_global_stats);
    }
    if (auto m = j.find("meteor"); m != j.end() && !m->is_null()) {
      c.meteor.gamma = value_or(*m, "gamma", c.meteor.gamma);
      c.meteor.theta = value_or(*m, "theta", c.meteor.theta);
      c.meteor.stem = value_or(*m, "stem", c.meteor.stem);
    }
    c.fail_fast = value_or(j, "fail_fast", c.fail_fast);
    c.max_queries = value_or(j, "max_queries", c.max_queries);
    c.workers = value_or(j, "workers", c.workers);
    if (auto o = j.find("out"); o != j.end() && !o->is_null()) c.out_dir = resolve(base, o->get<std::string>());
  } catch (const json::exception& e) {
    fail(ErrorCode::Parse, fmt::format("bad experiment config: {}", e.what()));
  }
  return c;
}

ExperimentConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, fmt::format("cannot open config '{}'", path.string()));
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    fail(ErrorCode::Parse, fmt::format("{}: {}", path.string(), e.what()));
  }
  return config_from_json(j, path.parent_path());
}

json config_to_json(const ExperimentConfig& c) {
  json strategies = json::array();
  for (Strategy s : c.strategies) strategies.push_back(strategy_name(s));
  json index_partitions = json::array();
  for (Partition p : c.index_partitions) index_partitions.push_back(partition_name(p));
  json generator = endpoint_to_json(c.generator.endpoint);
  if (generator.is_null()) generator = json::object();
  generator.update(json{{"label", c.generator.label},
                        {"beam_size", c.generator.beam_size},
                        {"length_penalty", c.generator.length_penalty},
                        {"max_new_tokens", c.generator.max_new_tokens},
                        {"max_in_flight", c.generator.max_in_flight}});
  json scorer = endpoint_to_json(c.scorer.endpoint);
  if (scorer.is_null()) scorer = json::object();
  scorer["max_in_flight"] = c.scorer.max_in_flight;
  return json{
      {"corpus", c.corpus.string()},
      {"abbreviations", path_json(c.abbreviations)},
      {"split", {{"ratios", {c.ratios.train, c.ratios.validation, c.ratios.test}},
                 {"partition", partition_name(c.eval_partition)}}},
      {"heldout", path_json(c.heldout)},
      {"sentence_store", path_json(c.sentence_store)},
      {"token_store", path_json(c.token_store)},
      {"query_store", path_json(c.query_store)},
      {"query_token_store", path_json(c.query_token_store)},
      {"embedder", {{"dim", c.embedder.dim}, {"seed", c.embedder.seed},
                    {"text_unit", text_unit_name(c.embedder.text_unit)}}},
      {"index_partitions", index_partitions},
      {"strategies", strategies},
      {"k", c.k},
      {"n", c.n},
      {"budget", c.budget},
      {"reverse_contexts", c.reverse_contexts},
      {"tokenizer", endpoint_to_json(c.tokenizer)},
      {"seed", c.seed},
      {"generator", generator},
      {"scorer", scorer},
      {"bm25", {{"k1", c.bm25.k1}, {"b", c.bm25.b}, {"global_stats", c.bm25_global_stats}}},
      {"meteor", {{"gamma", c.meteor.gamma}, {"theta", c.meteor.theta}, {"stem", c.meteor.stem}}},
      {"fail_fast", c.fail_fast},
      {"max_queries", c.max_queries},
      {"workers", c.workers},
      {"out", c.out_dir.string()},
  };
}

std::string config_hash(const ExperimentConfig& config) {
  json j = config_to_json(config);
  j.erase("out");
  j.erase("workers");
  for (const char* key : {"corpus", "abbreviations", "heldout", "sentence_store", "token_store",
                          "query_store", "query_token_store"}) {
    // Paths are hashed by file name so the same inputs hash alike from any
    // working directory; file contents are covered by the manifest checksums.
    if (j[key].is_string()) j[key] = fs::path(j[key].get<std::string>()).filename().string();
  }
  return hex64(fnv1a64(j.dump()));
}

void validate_config(const ExperimentConfig& c) {
  if (c.k < 1) fail(ErrorCode::InvalidArgument, "k must be >= 1");
  if (c.n < 1) fail(ErrorCode::InvalidArgument, "n must be >= 1");
  if (c.n > c.k) fail(ErrorCode::InvalidArgument, fmt::format("n ({}) must not exceed k ({})", c.n, c.k));
  if (c.budget < 1) fail(ErrorCode::InvalidArgument, "token budget must be >= 1");
  if (c.strategies.empty()) fail(ErrorCode::InvalidArgument, "no strategies configured");
  if (c.generator.beam_size < 1 || c.generator.max_new_tokens < 1) {
    fail(ErrorCode::InvalidArgument, "generator beam_size and max_new_tokens must be >= 1");
  }
  if (c.generator.max_in_flight < 1 || c.scorer.max_in_flight < 1) {
    fail(ErrorCode::InvalidArgument, "max_in_flight must be >= 1");
  }
  if (!c.heldout) split_sizes(1, c.ratios);  // ratio checks
  const auto require = [](const fs::path& p, const char* what) {
    if (!fs::exists(p)) fail(ErrorCode::Io, fmt::format("{} '{}' does not exist", what, p.string()));
  };
  require(c.corpus, "corpus");
  if (c.abbreviations) require(*c.abbreviations, "abbreviation table");
  if (c.heldout) require(*c.heldout, "held-out file");
  if (c.sentence_store) require(*c.sentence_store, "sentence store");
  if (c.token_store) require(*c.token_store, "token store");
  if (c.query_store) require(*c.query_store, "query store");
  if (c.query_token_store) require(*c.query_token_store, "query token store");
}

Pipeline::Pipeline(const ExperimentConfig& config) : config_(config) {
  validate_config(config_);
  const AbbreviationTable abbreviations =
      config_.abbreviations ? load_abbreviations(*config_.abbreviations) : AbbreviationTable{};

  auto ingested = ingest_jsonl(config_.corpus);
  warnings_ = std::move(ingested.warnings);
  corpus_ = clean_corpus(ingested.pairs, abbreviations, &warnings_);
  if (corpus_.empty()) fail(ErrorCode::InvalidArgument, "corpus is empty after cleaning");
  for (const auto& p : corpus_) by_id_.emplace(p.id, &p);

  if (config_.heldout) {
    auto held = ingest_jsonl(*config_.heldout);
    for (auto& w : held.warnings) warnings_.push_back(std::move(w));
    heldout_ = clean_corpus(held.pairs, abbreviations, &warnings_);
    if (heldout_.empty()) fail(ErrorCode::InvalidArgument, "held-out set is empty after cleaning");
    for (const auto& p : heldout_) {
      if (by_id_.count(p.id)) {
        fail(ErrorCode::DuplicateId,
             fmt::format("held-out id '{}' also appears in the corpus", p.id));
      }
    }
    for (const auto& p : heldout_) by_id_.emplace(p.id, &p);
  } else {
    split_ = split_corpus(corpus_, config_.ratios, config_.seed);
  }

  if (config_.sentence_store) {
    const SentenceStore store = read_sentence_store(*config_.sentence_store);
    for (const auto& r : store.records()) {
      if (!by_id_.count(r.id)) {
        fail(ErrorCode::NotFound, fmt::format("sentence store id '{}' is not in the corpus", r.id));
      }
    }
    index_ = std::make_unique<FlatIndex>(store);
  } else {
    std::set<std::string, std::less<>> allowed;
    const bool filtered = !config_.index_partitions.empty() && split_;
    if (filtered) {
      for (Partition p : config_.index_partitions) {
        for (const auto& id : split_->ids(p)) allowed.insert(id);
      }
    }
    std::vector<SentenceEmbedding> records;
    for (const auto& p : corpus_) {
      if (filtered && !allowed.count(p.id)) continue;
      records.push_back({p.id, stub_embed(unit_text(p, config_.embedder.text_unit),
                                          config_.embedder.dim, config_.embedder.seed)});
    }
    index_ = std::make_unique<FlatIndex>(SentenceStore(std::move(records)));
  }

  if (config_.token_store) token_store_ = read_token_store(*config_.token_store);
  if (config_.query_store) query_store_ = read_sentence_store(*config_.query_store);
  if (config_.query_token_store) query_token_store_ = read_token_store(*config_.query_token_store);
  if (config_.sentence_store && !config_.query_store) {
    warnings_.push_back("sentence store given without a query store; queries use stub embeddings");
  }

  if (config_.bm25_global_stats) {
    std::map<std::string, std::vector<std::string>> docs;
    for (const auto& p : corpus_) docs.emplace(p.id, bm25_document_tokens(p));
    global_bm25_ = bm25_build(docs);
  }

  if (config_.scorer.endpoint) {
    scorer_ = std::make_unique<HttpRelevanceScorer>(*config_.scorer.endpoint);
  } else {
    scorer_ = std::make_unique<OverlapRelevanceScorer>();
  }
  if (config_.generator.endpoint) {
    generator_ = std::make_unique<HttpGenerator>(*config_.generator.endpoint);
  } else {
    generator_ = std::make_unique<StubGenerator>();
  }
  metric_embeddings_ =
      std::make_unique<StubEmbeddingProvider>(config_.embedder.dim, config_.embedder.seed);
  if (config_.tokenizer) token_counter_ = http_token_counter(*config_.tokenizer);
}

const QaPair* Pipeline::find(const std::string& id) const {
  auto it = by_id_.find(id);
  return it == by_id_.end() ? nullptr : it->second;
}

std::vector<float> Pipeline::query_vector(const std::string& example_id,
                                          std::string_view question) const {
  if (query_store_) {
    const auto* r = query_store_->find(example_id);
    if (!r) fail(ErrorCode::NotFound, fmt::format("no query embedding for '{}'", example_id));
    return r->vector;
  }
  return stub_embed(question, index_->dim(), config_.embedder.seed);
}

TokenMatrix Pipeline::query_tokens(const std::string& example_id, std::string_view question) const {
  if (query_token_store_) {
    const auto* m = query_token_store_->find(example_id);
    if (!m) fail(ErrorCode::NotFound, fmt::format("no query token embeddings for '{}'", example_id));
    return *m;
  }
  const std::uint32_t dim = token_store_ ? token_store_->dim() : config_.embedder.dim;
  return stub_embed_tokens(question, dim, config_.embedder.seed);
}

std::vector<Candidate> Pipeline::retrieve(std::span<const float> query, std::size_t k) const {
  std::vector<Candidate> out;
  for (const auto& nb : index_->search(query, k)) {
    const QaPair* qa = find(nb.id);
    if (!qa) fail(ErrorCode::NotFound, fmt::format("indexed id '{}' is not in the corpus", nb.id));
    out.push_back({qa, nb.distance});
  }
  return out;
}

const TokenMatrix* Pipeline::candidate_tokens(const std::string& id) const {
  if (token_store_) return token_store_->find(id);
  std::lock_guard lock(token_cache_mutex_);
  auto it = token_cache_.find(id);
  if (it != token_cache_.end()) return &it->second;
  const QaPair* qa = find(id);
  if (!qa) return nullptr;
  auto m = stub_embed_tokens(qa_text(*qa), config_.embedder.dim, config_.embedder.seed);
  return &token_cache_.emplace(id, std::move(m)).first->second;
}

std::vector<RankedContext> Pipeline::rerank(Strategy strategy, const std::vector<Candidate>& candidates,
                                            std::string_view query_text,
                                            const TokenMatrix& query_tokens, std::size_t n) const {
  switch (strategy) {
    case Strategy::DenseL2:
      return rerank_dense(candidates, n);
    case Strategy::Bm25:
      return rerank_bm25(candidates, query_text, config_.bm25, n,
                         global_bm25_ ? &*global_bm25_ : nullptr);
    case Strategy::LateInteraction:
      return rerank_late_interaction(candidates, query_tokens,
                                     [this](const std::string& id) { return candidate_tokens(id); }, n);
    case Strategy::Seq2SeqRelevance:
      return rerank_seq2seq(candidates, query_text, *scorer_, n, config_.scorer.max_in_flight);
  }
  fail(ErrorCode::Internal, "unhandled strategy");
}

PromptBundle Pipeline::assemble(std::string_view query, std::vector<RankedContext> contexts) const {
  PromptOptions options;
  options.budget = config_.budget;
  options.reverse_contexts = config_.reverse_contexts;
  options.counter = token_counter_;
  return assemble_prompt(query, std::move(contexts), options);
}

GenerationResponse Pipeline::generate(const PromptBundle& bundle) const {
  GenerationRequest request{bundle.rendered, config_.generator.beam_size,
                            config_.generator.length_penalty, config_.generator.max_new_tokens};
  return generator_->generate(request, bundle);
}

MetricRow Pipeline::evaluate(std::string_view generated, std::string_view reference) const {
  return evaluate_pair(generated, reference, *metric_embeddings_, config_.meteor);
}

std::vector<QaPair> evaluation_set(const Pipeline& pipeline) {
  std::vector<QaPair> out;
  if (!pipeline.heldout().empty()) {
    out = pipeline.heldout();
  } else {
    for (const auto& id : pipeline.split()->ids(pipeline.config().eval_partition)) {
      out.push_back(*pipeline.find(id));
    }
  }
  std::sort(out.begin(), out.end(), [](const QaPair& a, const QaPair& b) { return a.id < b.id; });
  const auto limit = pipeline.config().max_queries;
  if (limit > 0 && out.size() > limit) out.resize(limit);
  return out;
}

namespace {

std::vector<ExampleResult> run_example(const Pipeline& pipeline, const QaPair& example) {
  const auto& config = pipeline.config();
  std::vector<ExampleResult> results;
  std::vector<Candidate> candidates;
  std::vector<std::string> candidate_ids;
  std::optional<TokenMatrix> query_tokens;
  std::string retrieval_error;
  try {
    candidates = pipeline.retrieve(pipeline.query_vector(example.id, example.question), config.k);
    for (const auto& c : candidates) candidate_ids.push_back(c.qa->id);
  } catch (const Error& e) {
    if (config.fail_fast) throw;
    retrieval_error = e.what();
  }

  for (Strategy strategy : config.strategies) {
    ExampleResult r;
    r.id = example.id;
    r.strategy = strategy;
    r.candidate_ids = candidate_ids;
    r.metrics.id = example.id;
    if (!retrieval_error.empty()) {
      r.error = retrieval_error;
      results.push_back(std::move(r));
      continue;
    }
    try {
      if (strategy == Strategy::LateInteraction && !query_tokens) {
        query_tokens = pipeline.query_tokens(example.id, example.question);
      }
      static const TokenMatrix kNoTokens;
      auto ranked = pipeline.rerank(strategy, candidates, example.question,
                                    query_tokens ? *query_tokens : kNoTokens, config.n);
      for (const auto& c : ranked) r.selected_ids.push_back(c.qa.id);
      const auto bundle = pipeline.assemble(example.question, std::move(ranked));
      r.prompt_tokens = bundle.token_count;
      r.dropped_contexts = bundle.dropped_contexts;
      const auto response = pipeline.generate(bundle);
      r.generated = response.text;
      r.model_tag = response.model_tag;
      r.metrics = pipeline.evaluate(response.text, example.answer);
      r.metrics.id = example.id;
    } catch (const Error& e) {
      if (config.fail_fast) {
        throw Error(e.code(), fmt::format("example '{}' ({}): {}", example.id,
                                          strategy_name(strategy), e.what()));
      }
      r.error = e.what();
    }
    results.push_back(std::move(r));
  }
  return results;
}

double round_for_output(double v) { return std::round(v * 1e10) / 1e10; }

json example_to_json(const ExampleResult& r) {
  json flags = r.metrics.flags;
  json j = {{"id", r.id},
            {"strategy", strategy_name(r.strategy)},
            {"candidates", r.candidate_ids},
            {"selected", r.selected_ids}};
  if (r.error) {
    j["error"] = *r.error;
    return j;
  }
  j.update(json{{"prompt_tokens", r.prompt_tokens},
                {"dropped_contexts", r.dropped_contexts},
                {"generated", r.generated},
                {"model_tag", r.model_tag},
                {"bleu1", round_for_output(r.metrics.bleu1)},
                {"rouge1", round_for_output(r.metrics.rouge1)},
                {"bertscore_p", r.metrics.bertscore_p ? json(round_for_output(*r.metrics.bertscore_p))
                                                      : json(nullptr)},
                {"meteor", round_for_output(r.metrics.meteor)},
                {"flags", flags}});
  return j;
}

void write_text(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::Io, fmt::format("cannot write '{}'", path.string()));
  out << content;
  if (!out) fail(ErrorCode::Io, fmt::format("write failed for '{}'", path.string()));
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config) {
  const std::string started = utc_timestamp();
  const Pipeline pipeline(config);
  const auto examples = evaluation_set(pipeline);
  if (examples.empty()) fail(ErrorCode::InvalidArgument, "evaluation set is empty");

  unsigned workers = config.workers ? config.workers : std::max(1U, std::thread::hardware_concurrency());
  if (config.generator.endpoint) {
    workers = std::min<unsigned>(workers, static_cast<unsigned>(config.generator.max_in_flight));
  }
  workers = std::min<unsigned>(workers, static_cast<unsigned>(examples.size()));

  std::vector<std::vector<ExampleResult>> per_example(examples.size());
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < examples.size() && !stop; i = next++) {
      try {
        per_example[i] = run_example(pipeline, examples[i]);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        stop = true;
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    for (unsigned t = 1; t < workers; ++t) pool.emplace_back(worker);
    worker();
  }
  if (first_error) std::rethrow_exception(first_error);

  ExperimentResult result;
  result.config_hash = config_hash(config);
  std::set<std::string> model_tags;
  for (Strategy strategy : config.strategies) {
    std::vector<MetricRow> rows;
    for (const auto& group : per_example) {
      for (const auto& r : group) {
        if (r.strategy != strategy) continue;
        result.examples.push_back(r);
        if (r.error) {
          ++result.failures;
          continue;
        }
        rows.push_back(r.metrics);
        if (!r.model_tag.empty()) model_tags.insert(r.model_tag);
      }
    }
    const std::string label = fmt::format("{} + {}", config.generator.label, strategy_label(strategy));
    if (rows.empty()) {
      fail(ErrorCode::Internal, fmt::format("every example failed for '{}'", label));
    }
    const auto summary = aggregate(rows);
    result.table.rows.push_back({label, summary.bleu1, summary.rouge1, summary.bertscore_p, summary.meteor});
  }

  auto& prov = result.table.provenance;
  prov.emplace_back("config_hash", result.config_hash);
  prov.emplace_back("seed", std::to_string(config.seed));
  prov.emplace_back("examples", std::to_string(examples.size()));
  prov.emplace_back("failures", std::to_string(result.failures));
  prov.emplace_back("k", std::to_string(config.k));
  prov.emplace_back("n", std::to_string(config.n));
  prov.emplace_back("token_budget", fmt::format("{} ({})", config.budget,
                                                config.tokenizer ? "external tokenizer " + config.tokenizer->url
                                                                 : std::string("whitespace tokens")));
  prov.emplace_back("generator", pipeline.generator().name());
  prov.emplace_back("model_tags", model_tags.empty() ? "none" : fmt::format("{}", fmt::join(model_tags, ", ")));
  prov.emplace_back("relevance_scorer", pipeline.scorer().name());
  prov.emplace_back("embeddings", config.sentence_store ? config.sentence_store->filename().string()
                                                        : pipeline.metric_embeddings().name());
  prov.emplace_back("bertscore_embeddings", pipeline.metric_embeddings().name());
  prov.emplace_back("legend",
                    "dense distances are squared L2; scores are macro-averages of per-example values; "
                    "BERTScore is precision with raw cosine");

  if (!config.out_dir.empty()) {
    json run_info = {{"started", started}, {"finished", utc_timestamp()}, {"warnings", pipeline.warnings()}};
    if (config.sentence_store) run_info["sentence_store_checksum"] = file_checksum(*config.sentence_store);
    run_info["corpus_checksum"] = file_checksum(config.corpus);
    write_artifacts(config, result, run_info);
  }
  return result;
}

void write_artifacts(const ExperimentConfig& config, const ExperimentResult& result,
                     const json& run_info) {
  fs::create_directories(config.out_dir);
  emit_report(result.table, ReportFormat::Markdown, config.out_dir / "results.md");
  emit_report(result.table, ReportFormat::Csv, config.out_dir / "results.csv");

  std::string jsonl;
  std::string csv = "id,strategy,bleu1,rouge1,bertscore_p,meteor,flags\n";
  std::string errors;
  for (const auto& r : result.examples) {
    jsonl += example_to_json(r).dump() + '\n';
    if (r.error) {
      errors += json{{"id", r.id}, {"strategy", strategy_name(r.strategy)}, {"error", *r.error}}.dump() + '\n';
      continue;
    }
    std::vector<std::string> flags = r.metrics.flags;
    csv += fmt::format("{},{},{:.10f},{:.10f},{},{:.10f},{}\n", r.id, strategy_name(r.strategy),
                       r.metrics.bleu1, r.metrics.rouge1,
                       r.metrics.bertscore_p ? fmt::format("{:.10f}", *r.metrics.bertscore_p) : "n/a",
                       r.metrics.meteor, fmt::join(flags, ";"));
  }
  write_text(config.out_dir / "examples.jsonl", jsonl);
  write_text(config.out_dir / "examples.csv", csv);
  write_text(config.out_dir / "errors.jsonl", errors);

  json manifest = {{"config", config_to_json(config)},
                   {"config_hash", result.config_hash},
                   {"failures", result.failures},
                   {"run", run_info}};
  write_text(config.out_dir / "manifest.json", manifest.dump(2) + '\n');
}

}  // namespace lfqa
