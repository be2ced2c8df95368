#include "lfqa/rerankers.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <set>
#include <thread>

#include <fmt/format.h>

#include "lfqa/error.hpp"
#include "lfqa/metrics.hpp"

namespace lfqa {

std::string_view strategy_name(Strategy s) {
  switch (s) {
    case Strategy::DenseL2: return "dense";
    case Strategy::Bm25: return "bm25";
    case Strategy::LateInteraction: return "late-interaction";
    case Strategy::Seq2SeqRelevance: return "seq2seq";
  }
  return "dense";
}

std::string_view strategy_label(Strategy s) {
  switch (s) {
    case Strategy::DenseL2: return "FAISS";
    case Strategy::Bm25: return "BM25";
    case Strategy::LateInteraction: return "ColBERT";
    case Strategy::Seq2SeqRelevance: return "MonoT5";
  }
  return "FAISS";
}

Strategy parse_strategy(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  for (Strategy s : kAllStrategies) {
    std::string label(strategy_label(s));
    std::transform(label.begin(), label.end(), label.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (lower == strategy_name(s) || lower == label) return s;
  }
  if (lower == "dense-l2" || lower == "densel2") return Strategy::DenseL2;
  if (lower == "late" || lower == "maxsim") return Strategy::LateInteraction;
  if (lower == "seq2seq-relevance" || lower == "relevance") return Strategy::Seq2SeqRelevance;
  fail(ErrorCode::InvalidArgument, fmt::format("unknown strategy '{}'", name));
}

std::vector<RankedContext> rank_by_score(std::vector<RankedContext> scored, std::size_t n) {
  std::sort(scored.begin(), scored.end(), [](const RankedContext& a, const RankedContext& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.qa.id < b.qa.id;
  });
  if (scored.size() > n) scored.resize(n);
  for (std::size_t i = 0; i < scored.size(); ++i) scored[i].rank = i + 1;
  return scored;
}

std::vector<RankedContext> rerank_dense(const std::vector<Candidate>& candidates, std::size_t n) {
  std::vector<RankedContext> scored;
  scored.reserve(candidates.size());
  for (const auto& c : candidates) scored.push_back({*c.qa, -c.dense_distance, 0, Strategy::DenseL2});
  return rank_by_score(std::move(scored), n);
}

std::size_t Bm25Stats::df(const std::string& term) const {
  auto it = doc_freq.find(term);
  return it == doc_freq.end() ? 0 : it->second;
}

Bm25Stats bm25_build(const std::map<std::string, std::vector<std::string>>& docs) {
  if (docs.empty()) fail(ErrorCode::InvalidArgument, "BM25 needs at least one document");
  Bm25Stats stats;
  stats.doc_count = docs.size();
  std::size_t total_length = 0;
  for (const auto& [id, tokens] : docs) {
    total_length += tokens.size();
    auto& tf = stats.term_freq[id];
    for (const auto& t : tokens) ++tf[t];
    for (const auto& [term, _] : tf) ++stats.doc_freq[term];
    stats.doc_tokens.emplace(id, tokens);
  }
  stats.avg_doc_length = static_cast<double>(total_length) / static_cast<double>(docs.size());
  if (stats.avg_doc_length == 0.0) {
    fail(ErrorCode::InvalidArgument, "BM25 corpus has average document length 0");
  }
  return stats;
}

double bm25_score(const Bm25Stats& stats, const Bm25Params& params,
                  const std::vector<std::string>& query_tokens, const std::string& doc_id) {
  auto doc = stats.term_freq.find(doc_id);
  if (doc == stats.term_freq.end()) {
    fail(ErrorCode::NotFound, fmt::format("BM25: unknown document '{}'", doc_id));
  }
  const auto doc_length = static_cast<double>(stats.doc_tokens.at(doc_id).size());
  const auto n = static_cast<double>(stats.doc_count);
  const double length_norm = 1.0 - params.b + params.b * doc_length / stats.avg_doc_length;
  double score = 0.0;
  for (const auto& term : query_tokens) {
    auto it = doc->second.find(term);
    if (it == doc->second.end()) continue;
    const auto tf = static_cast<double>(it->second);
    const auto df = static_cast<double>(stats.df(term));
    const double idf = std::log(1.0 + (n - df + 0.5) / (df + 0.5));
    score += idf * tf * (params.k1 + 1.0) / (tf + params.k1 * length_norm);
  }
  return score;
}

std::vector<std::string> bm25_document_tokens(const QaPair& pair) {
  return tokenize(qa_text(pair)).tokens;
}

std::vector<RankedContext> rerank_bm25(const std::vector<Candidate>& candidates,
                                       std::string_view query_text, const Bm25Params& params,
                                       std::size_t n, const Bm25Stats* global_stats) {
  if (!(params.k1 > 0.0) || !(params.b >= 0.0 && params.b <= 1.0)) {
    fail(ErrorCode::InvalidArgument, "BM25 needs k1 > 0 and b in [0, 1]");
  }
  if (candidates.empty()) return {};
  Bm25Stats pool;
  if (!global_stats) {
    std::map<std::string, std::vector<std::string>> docs;
    for (const auto& c : candidates) docs.emplace(c.qa->id, bm25_document_tokens(*c.qa));
    pool = bm25_build(docs);
  }
  const Bm25Stats& stats = global_stats ? *global_stats : pool;
  const auto query = tokenize(query_text).tokens;

  std::vector<RankedContext> scored;
  scored.reserve(candidates.size());
  for (const auto& c : candidates) {
    scored.push_back({*c.qa, bm25_score(stats, params, query, c.qa->id), 0, Strategy::Bm25});
  }
  return rank_by_score(std::move(scored), n);
}

double maxsim_score(const TokenMatrix& query, const TokenMatrix& document) {
  if (query.empty() || document.empty()) {
    fail(ErrorCode::InvalidArgument, "MaxSim needs non-empty token matrices");
  }
  if (query.dim() != document.dim()) {
    fail(ErrorCode::DimMismatch,
         fmt::format("MaxSim dimension mismatch: {} vs {}", query.dim(), document.dim()));
  }
  double total = 0.0;
  for (std::size_t i = 0; i < query.rows(); ++i) {
    double best = -1.0;
    for (std::size_t j = 0; j < document.rows(); ++j) {
      best = std::max(best, cosine(query.row(i), document.row(j)));
    }
    total += best;
  }
  return total;
}

std::vector<RankedContext> rerank_late_interaction(const std::vector<Candidate>& candidates,
                                                   const TokenMatrix& query_tokens,
                                                   const TokenLookup& lookup, std::size_t n) {
  std::vector<RankedContext> scored;
  scored.reserve(candidates.size());
  for (const auto& c : candidates) {
    const TokenMatrix* doc = lookup(c.qa->id);
    if (!doc) {
      fail(ErrorCode::NotFound, fmt::format("no token embeddings for candidate '{}'", c.qa->id));
    }
    scored.push_back({*c.qa, maxsim_score(query_tokens, *doc), 0, Strategy::LateInteraction});
  }
  return rank_by_score(std::move(scored), n);
}

double OverlapRelevanceScorer::score(std::string_view query, std::string_view document) const {
  const auto q = tokenize(query).tokens;
  const auto d = tokenize(document).tokens;
  const std::set<std::string> query_terms(q.begin(), q.end());
  if (query_terms.empty()) return 0.0;
  const std::set<std::string> doc_terms(d.begin(), d.end());
  std::size_t hits = 0;
  for (const auto& t : query_terms) hits += doc_terms.count(t);
  return static_cast<double>(hits) / static_cast<double>(query_terms.size());
}

std::vector<RankedContext> rerank_seq2seq(const std::vector<Candidate>& candidates,
                                          std::string_view query_text,
                                          const RelevanceScorer& scorer, std::size_t n,
                                          std::size_t max_in_flight) {
  const std::size_t count = candidates.size();
  std::vector<double> scores(count, 0.0);
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        const double s = scorer.score(query_text, qa_text(*candidates[i].qa));
        if (!std::isfinite(s) || s < 0.0 || s > 1.0) {
          fail(ErrorCode::Contract,
               fmt::format("relevance scorer '{}' returned {} for '{}', outside [0, 1]",
                           scorer.name(), s, candidates[i].qa->id));
        }
        scores[i] = s;
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t workers = std::clamp<std::size_t>(max_in_flight, 1, std::max<std::size_t>(count, 1));
  {
    std::vector<std::jthread> pool;
    for (std::size_t t = 1; t < workers; ++t) pool.emplace_back(worker);
    worker();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  std::vector<RankedContext> scored;
  scored.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    scored.push_back({*candidates[i].qa, scores[i], 0, Strategy::Seq2SeqRelevance});
  }
  return rank_by_score(std::move(scored), n);
}

}  // namespace lfqa
