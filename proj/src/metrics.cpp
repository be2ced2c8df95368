#include "lfqa/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_map>

#include <fmt/format.h>

#include "lfqa/error.hpp"
#include "lfqa/text.hpp"

namespace lfqa {

TokenizedText tokenize(std::string_view input) {
  TokenizedText out{std::string(input), {}};
  std::string current;
  for (char32_t cp : text::decode_utf8(input)) {
    if (text::is_space(cp) || text::is_control(cp) || text::is_punct_or_symbol(cp)) {
      if (!current.empty()) out.tokens.push_back(std::move(current));
      current.clear();
      continue;
    }
    text::append_utf8(current, text::to_lower(cp));
  }
  if (!current.empty()) out.tokens.push_back(std::move(current));
  return out;
}

namespace {

std::unordered_map<std::string_view, std::size_t> counts(Tokens tokens) {
  std::unordered_map<std::string_view, std::size_t> c;
  for (const auto& t : tokens) ++c[t];
  return c;
}

std::size_t clipped_overlap(Tokens generated, Tokens reference) {
  const auto gen = counts(generated);
  const auto ref = counts(reference);
  std::size_t overlap = 0;
  for (const auto& [word, n] : gen) {
    auto it = ref.find(word);
    if (it != ref.end()) overlap += std::min(n, it->second);
  }
  return overlap;
}

void require_reference(Tokens reference) {
  if (reference.empty()) fail(ErrorCode::InvalidArgument, "reference has no tokens");
}

}  // namespace

double bleu1(Tokens generated, Tokens reference) {
  require_reference(reference);
  if (generated.empty()) return 0.0;
  const auto c = static_cast<double>(generated.size());
  const auto r = static_cast<double>(reference.size());
  const double p1 = static_cast<double>(clipped_overlap(generated, reference)) / c;
  if (p1 == 0.0) return 0.0;
  const double bp = c > r ? 1.0 : std::exp(1.0 - r / c);
  return bp * p1;
}

double rouge1_recall(Tokens generated, Tokens reference) {
  require_reference(reference);
  return static_cast<double>(clipped_overlap(generated, reference)) /
         static_cast<double>(reference.size());
}

double bertscore_precision(const TokenMatrix& generated, const TokenMatrix& reference) {
  if (generated.empty() || reference.empty()) {
    fail(ErrorCode::InvalidArgument, "BERTScore needs non-empty token matrices");
  }
  if (generated.dim() != reference.dim()) {
    fail(ErrorCode::DimMismatch, fmt::format("BERTScore dimension mismatch: {} vs {}",
                                             generated.dim(), reference.dim()));
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < generated.rows(); ++i) {
    double best = -1.0;
    for (std::size_t j = 0; j < reference.rows(); ++j) {
      best = std::max(best, cosine(generated.row(i), reference.row(j)));
    }
    sum += best;
  }
  return sum / static_cast<double>(generated.rows());
}

std::string light_stem(std::string_view token) {
  struct Rule {
    std::string_view suffix;
    std::string_view replacement;
  };
  static constexpr Rule kRules[] = {
      {"ational", "ate"}, {"ization", "ize"}, {"iveness", "ive"}, {"fulness", "ful"},
      {"ousness", "ous"}, {"ingly", ""},      {"edly", ""},       {"ings", ""},
      {"ies", "y"},       {"ied", "y"},       {"ing", ""},        {"ness", ""},
      {"ment", ""},       {"ly", ""},         {"ed", ""},         {"es", ""},
      {"s", ""},
  };
  constexpr std::size_t kMinStem = 3;
  for (const auto& rule : kRules) {
    if (token.size() >= rule.suffix.size() + kMinStem && token.ends_with(rule.suffix)) {
      if (rule.suffix == "s" && token.ends_with("ss")) break;
      return std::string(token.substr(0, token.size() - rule.suffix.size())) +
             std::string(rule.replacement);
    }
  }
  return std::string(token);
}

namespace {

class ChunkSearch {
 public:
  ChunkSearch(std::vector<int> gen, std::vector<int> ref, std::size_t key_count,
              std::size_t node_budget)
      : gen_(std::move(gen)), ref_(std::move(ref)), positions_(key_count),
        slack_(key_count, 0), used_(ref_.size(), 0), budget_(node_budget) {
    std::vector<std::size_t> gen_count(key_count, 0);
    for (int k : gen_) ++gen_count[static_cast<std::size_t>(k)];
    for (std::size_t j = 0; j < ref_.size(); ++j) positions_[static_cast<std::size_t>(ref_[j])].push_back(j);
    for (std::size_t k = 0; k < key_count; ++k) {
      const std::size_t m = std::min(gen_count[k], positions_[k].size());
      max_matches_ += m;
      slack_[k] = gen_count[k] - m;
    }
  }

  std::size_t max_matches() const { return max_matches_; }

  MeteorAlignment run() {
    if (max_matches_ == 0) return {};
    best_ = greedy_tiling_chunks();
    dfs(0, -1, 0, 0);
    return {max_matches_, best_, !exhausted_};
  }

 private:
  static constexpr long kNone = -1;

  std::size_t greedy_tiling_chunks() const {
    const std::size_t g = gen_.size();
    const std::size_t r = ref_.size();
    std::vector<char> gen_used(g, 0);
    std::vector<char> ref_used(r, 0);
    std::vector<long> match(g, kNone);
    std::vector<std::size_t> run((g + 1) * (r + 1));
    for (;;) {
      // Longest common run over unmatched positions, earliest on ties.
      std::size_t best_len = 0, best_i = 0, best_j = 0;
      for (std::size_t i = g; i-- > 0;) {
        for (std::size_t j = r; j-- > 0;) {
          std::size_t& cell = run[i * (r + 1) + j];
          cell = (!gen_used[i] && !ref_used[j] && gen_[i] == ref_[j]) ? 1 + run[(i + 1) * (r + 1) + j + 1] : 0;
          if (cell > best_len || (cell == best_len && cell > 0)) {
            best_len = cell;
            best_i = i;
            best_j = j;
          }
        }
      }
      if (best_len == 0) break;
      for (std::size_t t = 0; t < best_len; ++t) {
        gen_used[best_i + t] = 1;
        ref_used[best_j + t] = 1;
        match[best_i + t] = static_cast<long>(best_j + t);
      }
    }
    std::size_t chunks = 0;
    long prev_i = kNone, prev_j = kNone;
    for (std::size_t i = 0; i < g; ++i) {
      if (match[i] == kNone) continue;
      if (prev_i == kNone || prev_i != static_cast<long>(i) - 1 || prev_j != match[i] - 1) ++chunks;
      prev_i = static_cast<long>(i);
      prev_j = match[i];
    }
    return chunks;
  }

  bool can_continue(std::size_t i, long prev_j) const {
    if (prev_j == kNone) return false;
    const auto j = static_cast<std::size_t>(prev_j + 1);
    return j < ref_.size() && !used_[j] && ref_[j] == gen_[i];
  }

  // prev_j: reference position matched by generated position i-1, or kNone.
  void dfs(std::size_t i, long prev_j, std::size_t chunks, std::size_t matched) {
    if (exhausted_) return;
    if (++nodes_ > budget_) {
      exhausted_ = true;
      return;
    }
    if (matched == max_matches_) {
      best_ = std::min(best_, chunks);
      return;
    }
    if (i == gen_.size()) return;
    const bool continues = can_continue(i, prev_j);
    if (chunks + (continues ? 0 : 1) >= best_) return;

    const auto key = static_cast<std::size_t>(gen_[i]);
    if (continues) {
      const auto j = static_cast<std::size_t>(prev_j + 1);
      used_[j] = 1;
      dfs(i + 1, static_cast<long>(j), chunks, matched + 1);
      used_[j] = 0;
    }
    for (std::size_t j : positions_[key]) {
      if (used_[j] || (continues && static_cast<long>(j) == prev_j + 1)) continue;
      used_[j] = 1;
      dfs(i + 1, static_cast<long>(j), chunks + 1, matched + 1);
      used_[j] = 0;
      if (exhausted_) return;
    }
    if (slack_[key] > 0) {
      --slack_[key];
      dfs(i + 1, kNone, chunks, matched);
      ++slack_[key];
    }
  }

  std::vector<int> gen_;
  std::vector<int> ref_;
  std::vector<std::vector<std::size_t>> positions_;
  std::vector<std::size_t> slack_;
  std::vector<char> used_;
  std::size_t max_matches_ = 0;
  std::size_t best_ = 0;
  std::size_t nodes_ = 0;
  std::size_t budget_;
  bool exhausted_ = false;
};

}  // namespace

MeteorAlignment meteor_align(Tokens generated, Tokens reference, bool stem,
                             std::size_t node_budget) {
  std::map<std::string, int> keys;
  auto key_of = [&](const std::string& token) {
    auto k = stem ? light_stem(token) : token;
    return keys.emplace(std::move(k), static_cast<int>(keys.size())).first->second;
  };
  std::vector<int> gen, ref;
  gen.reserve(generated.size());
  ref.reserve(reference.size());
  for (const auto& t : generated) gen.push_back(key_of(t));
  for (const auto& t : reference) ref.push_back(key_of(t));
  ChunkSearch search(std::move(gen), std::move(ref), keys.size(), node_budget);
  return search.run();
}

double meteor(Tokens generated, Tokens reference, const MeteorParams& params) {
  require_reference(reference);
  if (!(params.gamma >= 0.0 && params.gamma <= 1.0) || !(params.theta > 0.0)) {
    fail(ErrorCode::InvalidArgument, "METEOR parameters need gamma in [0,1] and theta > 0");
  }
  if (generated.empty()) return 0.0;
  const auto alignment = meteor_align(generated, reference, params.stem);
  if (alignment.matches == 0) return 0.0;
  const auto m = static_cast<double>(alignment.matches);
  const double precision = m / static_cast<double>(generated.size());
  const double recall = m / static_cast<double>(reference.size());
  const double f_mean = 10.0 * precision * recall / (recall + 9.0 * precision);
  const double penalty =
      params.gamma * std::pow(static_cast<double>(alignment.chunks) / m, params.theta);
  return f_mean * (1.0 - penalty);
}

TokenMatrix StubEmbeddingProvider::embed_tokens(const std::vector<std::string>& tokens) const {
  TokenMatrix m(tokens.size(), dim_);
  for (std::size_t r = 0; r < tokens.size(); ++r) {
    const auto v = stub_embed(tokens[r], dim_, seed_);
    std::copy(v.begin(), v.end(), m.row(r).begin());
  }
  return m;
}

std::string StubEmbeddingProvider::name() const {
  return fmt::format("stub(dim={},seed={})", dim_, seed_);
}

MetricRow evaluate_pair(std::string_view generated, std::string_view reference,
                        const EmbeddingProvider& embeddings, const MeteorParams& meteor_params) {
  const auto gen = tokenize(generated);
  const auto ref = tokenize(reference);
  require_reference(ref.tokens);

  MetricRow row;
  row.bleu1 = bleu1(gen.tokens, ref.tokens);
  row.rouge1 = rouge1_recall(gen.tokens, ref.tokens);
  row.meteor = meteor(gen.tokens, ref.tokens, meteor_params);
  if (gen.tokens.empty()) {
    row.degenerate = true;
    row.flags.push_back("empty_generation");
    row.flags.push_back("bertscore_error");
    return row;
  }
  try {
    row.bertscore_p = bertscore_precision(embeddings.embed_tokens(gen.tokens),
                                          embeddings.embed_tokens(ref.tokens));
  } catch (const Error&) {
    row.flags.push_back("bertscore_error");
  }
  return row;
}

MetricSummary aggregate(std::span<const MetricRow> rows) {
  if (rows.empty()) fail(ErrorCode::InvalidArgument, "cannot aggregate zero rows");
  MetricSummary s;
  s.count = rows.size();
  double bert_sum = 0.0;
  std::size_t bert_n = 0;
  for (const auto& r : rows) {
    s.bleu1 += r.bleu1;
    s.rouge1 += r.rouge1;
    s.meteor += r.meteor;
    if (r.degenerate) ++s.degenerate;
    if (r.bertscore_p) {
      bert_sum += *r.bertscore_p;
      ++bert_n;
    } else {
      ++s.bertscore_excluded;
    }
  }
  const auto n = static_cast<double>(rows.size());
  s.bleu1 /= n;
  s.rouge1 /= n;
  s.meteor /= n;
  if (bert_n > 0) s.bertscore_p = bert_sum / static_cast<double>(bert_n);
  return s;
}

}  // namespace lfqa
