#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lfqa/embedding_store.hpp"

namespace lfqa {

struct TokenizedText {
  std::string original;
  std::vector<std::string> tokens;
};

/// Lowercases and splits at white space, control characters, punctuation and
/// symbols (Unicode categories Z*, Cc, P*, S*); the separators are dropped.
TokenizedText tokenize(std::string_view text);

using Tokens = std::span<const std::string>;

/// Clipped unigram precision times the brevity penalty. Zero when the
/// candidate is empty or shares no word with the reference.
double bleu1(Tokens generated, Tokens reference);

/// Clipped unigram overlap over the reference length.
double rouge1_recall(Tokens generated, Tokens reference);

/// Mean over generated-token rows of the best cosine against any reference
/// row. Raw cosine; no idf weighting, no baseline rescaling.
double bertscore_precision(const TokenMatrix& generated, const TokenMatrix& reference);

struct MeteorParams {
  double gamma = 0.5;
  double theta = 3.0;
  /// Match on a light suffix-stripped form instead of the exact token.
  bool stem = false;
};

struct MeteorAlignment {
  std::size_t matches = 0;
  std::size_t chunks = 0;
  /// False when the chunk search hit its node budget; chunks is then the
  /// best alignment found rather than a proven minimum.
  bool proven_minimal = true;
};

/// One-to-one unigram alignment with the maximum number of matches and,
/// among those, the fewest chunks (runs contiguous in both sequences).
MeteorAlignment meteor_align(Tokens generated, Tokens reference, bool stem = false,
                             std::size_t node_budget = 200000);

double meteor(Tokens generated, Tokens reference, const MeteorParams& params = {});

/// Suffix stripper used by the optional METEOR stem matching.
std::string light_stem(std::string_view token);

class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  /// One row per token.
  virtual TokenMatrix embed_tokens(const std::vector<std::string>& tokens) const = 0;
  virtual std::string name() const = 0;
};

class StubEmbeddingProvider final : public EmbeddingProvider {
 public:
  StubEmbeddingProvider(std::uint32_t dim, std::uint64_t seed) : dim_(dim), seed_(seed) {}
  TokenMatrix embed_tokens(const std::vector<std::string>& tokens) const override;
  std::string name() const override;

 private:
  std::uint32_t dim_;
  std::uint64_t seed_;
};

struct MetricRow {
  std::string id;
  double bleu1 = 0.0;
  double rouge1 = 0.0;
  /// Empty when BERTScore could not be computed (flagged in `flags`).
  std::optional<double> bertscore_p;
  double meteor = 0.0;
  bool degenerate = false;
  std::vector<std::string> flags;
};

MetricRow evaluate_pair(std::string_view generated, std::string_view reference,
                        const EmbeddingProvider& embeddings, const MeteorParams& meteor_params = {});

struct MetricSummary {
  std::size_t count = 0;
  double bleu1 = 0.0;
  double rouge1 = 0.0;
  std::optional<double> bertscore_p;
  double meteor = 0.0;
  std::size_t degenerate = 0;
  std::size_t bertscore_excluded = 0;
};

/// Macro average over rows. Rows without a BERTScore value are excluded from
/// that column's mean only.
MetricSummary aggregate(std::span<const MetricRow> rows);

}  // namespace lfqa
