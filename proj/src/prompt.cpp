#include "lfqa/prompt.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "lfqa/error.hpp"
#include "lfqa/text.hpp"

namespace lfqa {

std::size_t count_tokens(std::string_view text, const TokenCounter& counter) {
  return counter ? counter(text) : text::count_whitespace_tokens(text);
}

std::string render_context(const QaPair& qa) {
  return "Question: " + qa.question + " Answer: " + qa.answer;
}

namespace {

std::string render(std::string_view query, const std::vector<RankedContext>& contexts, bool reverse) {
  std::string out;
  if (!contexts.empty()) {
    out = "Context:";
    auto emit = [&out](const RankedContext& c) {
      out += ' ';
      out += render_context(c.qa);
    };
    if (reverse) {
      std::for_each(contexts.rbegin(), contexts.rend(), emit);
    } else {
      std::for_each(contexts.begin(), contexts.end(), emit);
    }
    out += ' ';
  }
  out += "Question: ";
  out += query;
  out += " Answer:";
  return out;
}

}  // namespace

PromptBundle assemble_prompt(std::string_view query, std::vector<RankedContext> contexts,
                             const PromptOptions& options) {
  std::stable_sort(contexts.begin(), contexts.end(),
                   [](const RankedContext& a, const RankedContext& b) { return a.rank < b.rank; });

  const std::string bare = render(query, {}, false);
  const std::size_t bare_tokens = count_tokens(bare, options.counter);
  if (bare_tokens > options.budget) {
    fail(ErrorCode::Budget, fmt::format("query alone needs {} tokens, budget is {}", bare_tokens,
                                        options.budget));
  }

  PromptBundle bundle;
  bundle.query = std::string(query);
  for (;;) {
    bundle.rendered = render(query, contexts, options.reverse_contexts);
    bundle.token_count = count_tokens(bundle.rendered, options.counter);
    if (bundle.token_count <= options.budget || contexts.empty()) break;
    contexts.pop_back();
    ++bundle.dropped_contexts;
  }
  bundle.contexts = std::move(contexts);
  return bundle;
}

ParsedPrompt parse_prompt(std::string_view rendered) {
  constexpr std::string_view kContext = "Context: ";
  constexpr std::string_view kQuestion = "Question: ";
  constexpr std::string_view kAnswer = " Answer: ";
  constexpr std::string_view kTail = " Answer:";

  if (!rendered.ends_with(kTail)) fail(ErrorCode::Parse, "prompt does not end with ' Answer:'");
  rendered.remove_suffix(kTail.size());

  ParsedPrompt parsed;
  if (!rendered.starts_with(kContext)) {
    if (!rendered.starts_with(kQuestion)) fail(ErrorCode::Parse, "prompt has no 'Question: '");
    parsed.query = std::string(rendered.substr(kQuestion.size()));
    return parsed;
  }
  rendered.remove_prefix(kContext.size());
  const auto last_question = rendered.rfind(std::string(" ") + std::string(kQuestion));
  if (last_question == std::string_view::npos) fail(ErrorCode::Parse, "prompt has no query");
  parsed.query = std::string(rendered.substr(last_question + 1 + kQuestion.size()));
  std::string_view body = rendered.substr(0, last_question);

  while (!body.empty()) {
    if (!body.starts_with(kQuestion)) fail(ErrorCode::Parse, "malformed context block");
    body.remove_prefix(kQuestion.size());
    const auto answer_at = body.find(kAnswer);
    if (answer_at == std::string_view::npos) fail(ErrorCode::Parse, "context without answer");
    std::string question(body.substr(0, answer_at));
    body.remove_prefix(answer_at + kAnswer.size());
    const auto next = body.find(std::string(" ") + std::string(kQuestion));
    std::string answer(body.substr(0, next));
    parsed.contexts.emplace_back(std::move(question), std::move(answer));
    if (next == std::string_view::npos) break;
    body.remove_prefix(next + 1);
  }
  return parsed;
}

}  // namespace lfqa
