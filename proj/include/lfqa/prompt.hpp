#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lfqa/corpus.hpp"
#include "lfqa/rerankers.hpp"

namespace lfqa {

/// text -> token count. An empty function means whitespace tokens.
using TokenCounter = std::function<std::size_t(std::string_view)>;

std::size_t count_tokens(std::string_view text, const TokenCounter& counter = {});

/// "Question: {question} Answer: {answer}", verbatim.
std::string render_context(const QaPair& qa);

struct PromptOptions {
  /// Matches the generator's 512-token input window.
  std::size_t budget = 512;
  /// Emit contexts worst-first (rank n leftmost). Truncation still drops the
  /// lowest-ranked context first.
  bool reverse_contexts = false;
  TokenCounter counter;
};

struct PromptBundle {
  std::string query;
  /// Retained contexts in rank order.
  std::vector<RankedContext> contexts;
  std::string rendered;
  std::size_t token_count = 0;
  std::size_t dropped_contexts = 0;
};

/// "Context: {c1} {c2} ... {cn} Question: {query} Answer:", or
/// "Question: {query} Answer:" with no contexts. Whole contexts are dropped,
/// lowest rank first, until the prompt fits the budget.
PromptBundle assemble_prompt(std::string_view query, std::vector<RankedContext> contexts,
                             const PromptOptions& options = {});

struct ParsedPrompt {
  std::vector<std::pair<std::string, std::string>> contexts;
  std::string query;
};

/// Inverse of the rendering above for texts that do not themselves contain
/// the "Question: " / " Answer: " markers.
ParsedPrompt parse_prompt(std::string_view rendered);

}  // namespace lfqa
