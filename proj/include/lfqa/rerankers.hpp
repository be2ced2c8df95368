#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "lfqa/corpus.hpp"
#include "lfqa/embedding_store.hpp"

namespace lfqa {

enum class Strategy { DenseL2, Bm25, LateInteraction, Seq2SeqRelevance };

inline constexpr Strategy kAllStrategies[] = {Strategy::DenseL2, Strategy::Bm25,
                                              Strategy::LateInteraction, Strategy::Seq2SeqRelevance};

/// Machine name: dense, bm25, late-interaction, seq2seq.
std::string_view strategy_name(Strategy s);
/// Column label used in result tables: FAISS, BM25, ColBERT, MonoT5.
std::string_view strategy_label(Strategy s);
/// Accepts machine names and table labels, case-insensitively.
Strategy parse_strategy(std::string_view name);

struct Candidate {
  const QaPair* qa = nullptr;
  /// Squared L2 distance from the dense stage.
  double dense_distance = 0.0;
};

struct RankedContext {
  QaPair qa;
  /// Larger is better for every strategy.
  double score = 0.0;
  std::size_t rank = 0;
  Strategy strategy = Strategy::DenseL2;
};

/// Sorts by descending score then ascending id, keeps the first n and
/// assigns ranks 1..n.
std::vector<RankedContext> rank_by_score(std::vector<RankedContext> scored, std::size_t n);

/// Dense baseline: score is the negated distance.
std::vector<RankedContext> rerank_dense(const std::vector<Candidate>& candidates, std::size_t n);

struct Bm25Params {
  double k1 = 1.5;
  double b = 0.75;
};

struct Bm25Stats {
  std::size_t doc_count = 0;
  double avg_doc_length = 0.0;
  std::unordered_map<std::string, std::size_t> doc_freq;
  std::unordered_map<std::string, std::vector<std::string>> doc_tokens;
  std::unordered_map<std::string, std::unordered_map<std::string, std::size_t>> term_freq;

  std::size_t df(const std::string& term) const;
};

Bm25Stats bm25_build(const std::map<std::string, std::vector<std::string>>& docs);

/// Sum over query tokens (repeats included) of
/// idf(t) * tf * (k1 + 1) / (tf + k1 * (1 - b + b * |d| / avgdl)),
/// idf(t) = ln(1 + (N - df + 0.5) / (df + 0.5)).
double bm25_score(const Bm25Stats& stats, const Bm25Params& params,
                  const std::vector<std::string>& query_tokens, const std::string& doc_id);

/// Tokens the lexical re-ranker sees for a pair: tokenize("question answer").
std::vector<std::string> bm25_document_tokens(const QaPair& pair);

/// Scores against statistics built from the candidate pool, or against
/// `global_stats` when given.
std::vector<RankedContext> rerank_bm25(const std::vector<Candidate>& candidates,
                                       std::string_view query_text, const Bm25Params& params,
                                       std::size_t n, const Bm25Stats* global_stats = nullptr);

/// Sum over query rows of the best cosine against any document row.
double maxsim_score(const TokenMatrix& query, const TokenMatrix& document);

/// Token matrices keyed by QaPair id.
using TokenLookup = std::function<const TokenMatrix*(const std::string& id)>;

std::vector<RankedContext> rerank_late_interaction(const std::vector<Candidate>& candidates,
                                                   const TokenMatrix& query_tokens,
                                                   const TokenLookup& lookup, std::size_t n);

/// External relevance model: probability in [0, 1] that `document` answers
/// `query`. Implementations must be callable from several threads.
class RelevanceScorer {
 public:
  virtual ~RelevanceScorer() = default;
  virtual double score(std::string_view query, std::string_view document) const = 0;
  virtual std::string name() const = 0;
};

/// Model-free scorer: fraction of distinct query tokens present in the
/// document.
class OverlapRelevanceScorer final : public RelevanceScorer {
 public:
  double score(std::string_view query, std::string_view document) const override;
  std::string name() const override { return "stub-overlap"; }
};

/// Scores every candidate's "question answer" text, at most `max_in_flight`
/// calls concurrently. Output order does not depend on completion order.
std::vector<RankedContext> rerank_seq2seq(const std::vector<Candidate>& candidates,
                                          std::string_view query_text,
                                          const RelevanceScorer& scorer, std::size_t n,
                                          std::size_t max_in_flight = 4);

}  // namespace lfqa
