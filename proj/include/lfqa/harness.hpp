#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "lfqa/corpus.hpp"
#include "lfqa/embedding_store.hpp"
#include "lfqa/generator_client.hpp"
#include "lfqa/metrics.hpp"
#include "lfqa/prompt.hpp"
#include "lfqa/report.hpp"
#include "lfqa/rerankers.hpp"
#include "lfqa/vector_index.hpp"

namespace lfqa {

struct StubEmbedderConfig {
  std::uint32_t dim = 64;
  std::uint64_t seed = 0;
  TextUnit text_unit = TextUnit::QuestionAnswer;
};

struct GeneratorConfig {
  /// No endpoint means the echo stub.
  std::optional<Endpoint> endpoint;
  /// Prefix of every result-table label, e.g. "Finetuned T5".
  std::string label = "Stub";
  int beam_size = 4;
  double length_penalty = 1.0;
  int max_new_tokens = 256;
  std::size_t max_in_flight = 2;
};

struct ScorerConfig {
  /// No endpoint means the token-overlap stub.
  std::optional<Endpoint> endpoint;
  std::size_t max_in_flight = 4;
};

struct ExperimentConfig {
  std::filesystem::path corpus;
  std::optional<std::filesystem::path> abbreviations;

  // Evaluation set: a partition of the seeded split, or an explicit
  // held-out file. Exactly one is used.
  SplitRatios ratios;
  Partition eval_partition = Partition::Test;
  std::optional<std::filesystem::path> heldout;

  // Absent stores are replaced by stub embeddings computed on the fly.
  std::optional<std::filesystem::path> sentence_store;
  std::optional<std::filesystem::path> token_store;
  std::optional<std::filesystem::path> query_store;
  std::optional<std::filesystem::path> query_token_store;
  StubEmbedderConfig embedder;
  /// Partitions a stub sentence index covers; empty means the whole corpus.
  /// Ignored when sentence_store is given or a held-out file is used.
  std::vector<Partition> index_partitions;

  std::vector<Strategy> strategies{std::begin(kAllStrategies), std::end(kAllStrategies)};
  std::size_t k = 16;
  std::size_t n = 4;
  std::size_t budget = 512;
  bool reverse_contexts = false;
  std::optional<Endpoint> tokenizer;

  std::uint64_t seed = 42;
  GeneratorConfig generator;
  ScorerConfig scorer;
  Bm25Params bm25;
  bool bm25_global_stats = false;
  MeteorParams meteor;

  bool fail_fast = false;
  /// 0 = every example in the evaluation set.
  std::size_t max_queries = 0;
  /// 0 = hardware concurrency (capped by the generator's in-flight bound
  /// when a remote generator is used).
  unsigned workers = 0;
  std::filesystem::path out_dir;
};

/// Relative paths in `j` are resolved against `base_dir`.
ExperimentConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);
nlohmann::json config_to_json(const ExperimentConfig& config);

/// Hash of every setting that affects results (output directory and worker
/// count excluded).
std::string config_hash(const ExperimentConfig& config);

/// Throws InvalidArgument for n > k and similar, Io for missing files.
void validate_config(const ExperimentConfig& config);

/// Everything needed to answer a query: corpus, index, token embeddings,
/// scorer, generator and metric embeddings. Immutable after open() except
/// for an internal, thread-safe cache of stub token matrices.
class Pipeline {
 public:
  explicit Pipeline(const ExperimentConfig& config);

  const ExperimentConfig& config() const noexcept { return config_; }
  const std::vector<QaPair>& corpus() const noexcept { return corpus_; }
  const std::vector<std::string>& warnings() const noexcept { return warnings_; }
  const FlatIndex& index() const noexcept { return *index_; }
  const QaPair* find(const std::string& id) const;

  /// Held-out pairs, when configured.
  const std::vector<QaPair>& heldout() const noexcept { return heldout_; }
  /// Seeded split of the corpus; empty when a held-out file is used.
  const std::optional<SplitAssignment>& split() const noexcept { return split_; }

  std::vector<float> query_vector(const std::string& example_id, std::string_view question) const;
  TokenMatrix query_tokens(const std::string& example_id, std::string_view question) const;

  std::vector<Candidate> retrieve(std::span<const float> query, std::size_t k) const;
  std::vector<RankedContext> rerank(Strategy strategy, const std::vector<Candidate>& candidates,
                                    std::string_view query_text, const TokenMatrix& query_tokens,
                                    std::size_t n) const;
  PromptBundle assemble(std::string_view query, std::vector<RankedContext> contexts) const;
  GenerationResponse generate(const PromptBundle& bundle) const;
  MetricRow evaluate(std::string_view generated, std::string_view reference) const;

  const Generator& generator() const { return *generator_; }
  const RelevanceScorer& scorer() const { return *scorer_; }
  const EmbeddingProvider& metric_embeddings() const { return *metric_embeddings_; }

 private:
  const TokenMatrix* candidate_tokens(const std::string& id) const;

  ExperimentConfig config_;
  std::vector<QaPair> corpus_;
  std::vector<QaPair> heldout_;
  std::optional<SplitAssignment> split_;
  std::vector<std::string> warnings_;
  std::map<std::string, const QaPair*, std::less<>> by_id_;
  std::unique_ptr<FlatIndex> index_;
  std::optional<TokenStore> token_store_;
  std::optional<SentenceStore> query_store_;
  std::optional<TokenStore> query_token_store_;
  std::optional<Bm25Stats> global_bm25_;
  std::unique_ptr<RelevanceScorer> scorer_;
  std::unique_ptr<Generator> generator_;
  std::unique_ptr<EmbeddingProvider> metric_embeddings_;
  TokenCounter token_counter_;

  mutable std::mutex token_cache_mutex_;
  mutable std::map<std::string, TokenMatrix, std::less<>> token_cache_;
};

struct ExampleResult {
  std::string id;
  Strategy strategy = Strategy::DenseL2;
  std::vector<std::string> candidate_ids;
  std::vector<std::string> selected_ids;
  std::size_t prompt_tokens = 0;
  std::size_t dropped_contexts = 0;
  std::string generated;
  std::string model_tag;
  MetricRow metrics;
  /// Set when this example failed and was skipped.
  std::optional<std::string> error;
};

struct ExperimentResult {
  ResultsTable table;
  /// Sorted by strategy (configuration order) then example id.
  std::vector<ExampleResult> examples;
  std::size_t failures = 0;
  std::string config_hash;
};

/// Evaluation pairs for the config: the held-out file, or the configured
/// partition of the seeded split; sorted by id and truncated to max_queries.
std::vector<QaPair> evaluation_set(const Pipeline& pipeline);

/// Runs every configured strategy over the evaluation set. When out_dir is
/// set, writes results.md, results.csv, examples.jsonl, examples.csv,
/// errors.jsonl and manifest.json there.
ExperimentResult run_experiment(const ExperimentConfig& config);

/// Writes the per-example and report artifacts of a finished run.
void write_artifacts(const ExperimentConfig& config, const ExperimentResult& result,
                     const nlohmann::json& run_info);

}  // namespace lfqa
