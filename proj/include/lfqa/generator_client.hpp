#pragma once

#include <chrono>
#include <string>
#include <string_view>
#include <vector>

#include "lfqa/http_json.hpp"
#include "lfqa/prompt.hpp"
#include "lfqa/rerankers.hpp"

namespace lfqa {

/// Decoding contract sent with every prompt: beam search of width 4 with
/// length normalization.
struct GenerationRequest {
  std::string prompt;
  int beam_size = 4;
  double length_penalty = 1.0;
  int max_new_tokens = 256;

  bool operator==(const GenerationRequest&) const = default;
};

/// Wire body of POST /generate:
/// {"prompt", "beam_size", "length_penalty", "max_new_tokens"}.
nlohmann::json to_json(const GenerationRequest& request);
GenerationRequest request_from_json(const nlohmann::json& body);
std::string serialize_request(const GenerationRequest& request);
GenerationRequest deserialize_request(std::string_view wire);

struct GenerationResponse {
  std::string text;
  std::chrono::milliseconds latency{0};
  std::string model_tag;
};

/// POST /generate -> {"text", "model_tag"}.
GenerationResponse generate(const Endpoint& endpoint, const GenerationRequest& request);

/// Echoes the answer of the rank-1 context.
GenerationResponse stub_generate(const GenerationRequest& request,
                                 const std::vector<RankedContext>& contexts);

class Generator {
 public:
  virtual ~Generator() = default;
  virtual GenerationResponse generate(const GenerationRequest& request,
                                      const PromptBundle& bundle) const = 0;
  virtual std::string name() const = 0;
};

class HttpGenerator final : public Generator {
 public:
  explicit HttpGenerator(Endpoint endpoint) : endpoint_(std::move(endpoint)) {}
  GenerationResponse generate(const GenerationRequest& request,
                              const PromptBundle& bundle) const override;
  std::string name() const override { return endpoint_.url; }

 private:
  Endpoint endpoint_;
};

class StubGenerator final : public Generator {
 public:
  GenerationResponse generate(const GenerationRequest& request,
                              const PromptBundle& bundle) const override;
  std::string name() const override { return "stub-echo"; }
};

/// POST /score {"query", "document"} -> {"score"}.
class HttpRelevanceScorer final : public RelevanceScorer {
 public:
  explicit HttpRelevanceScorer(Endpoint endpoint) : endpoint_(std::move(endpoint)) {}
  double score(std::string_view query, std::string_view document) const override;
  std::string name() const override { return endpoint_.url; }

 private:
  Endpoint endpoint_;
};

/// POST /tokenize {"text"} -> {"count"}.
TokenCounter http_token_counter(Endpoint endpoint);

}  // namespace lfqa
