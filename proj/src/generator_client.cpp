#include "lfqa/generator_client.hpp"

#include <fmt/format.h>

#include "lfqa/error.hpp"

namespace lfqa {

using nlohmann::json;

nlohmann::json to_json(const GenerationRequest& request) {
  return json{{"prompt", request.prompt},
              {"beam_size", request.beam_size},
              {"length_penalty", request.length_penalty},
              {"max_new_tokens", request.max_new_tokens}};
}

GenerationRequest request_from_json(const nlohmann::json& body) {
  GenerationRequest request;
  try {
    request.prompt = body.at("prompt").get<std::string>();
    request.beam_size = body.value("beam_size", request.beam_size);
    request.length_penalty = body.value("length_penalty", request.length_penalty);
    request.max_new_tokens = body.value("max_new_tokens", request.max_new_tokens);
  } catch (const json::exception& e) {
    fail(ErrorCode::Parse, fmt::format("bad generation request: {}", e.what()));
  }
  if (request.beam_size < 1) fail(ErrorCode::InvalidArgument, "beam_size must be >= 1");
  if (request.max_new_tokens < 1) fail(ErrorCode::InvalidArgument, "max_new_tokens must be >= 1");
  return request;
}

std::string serialize_request(const GenerationRequest& request) { return to_json(request).dump(); }

GenerationRequest deserialize_request(std::string_view wire) {
  json body;
  try {
    body = json::parse(wire);
  } catch (const json::exception& e) {
    fail(ErrorCode::Parse, fmt::format("bad generation request: {}", e.what()));
  }
  return request_from_json(body);
}

GenerationResponse generate(const Endpoint& endpoint, const GenerationRequest& request) {
  if (request.beam_size < 1 || request.max_new_tokens < 1) {
    fail(ErrorCode::InvalidArgument, "beam_size and max_new_tokens must be >= 1");
  }
  const auto start = std::chrono::steady_clock::now();
  const json reply = post_json(endpoint, "/generate", to_json(request));
  GenerationResponse response;
  response.latency = std::chrono::duration_cast<std::chrono::milliseconds>(
      std::chrono::steady_clock::now() - start);
  if (!reply.is_object() || !reply.contains("text") || !reply["text"].is_string()) {
    fail(ErrorCode::Contract, fmt::format("{}/generate reply has no 'text' string", endpoint.url));
  }
  response.text = reply["text"].get<std::string>();
  if (response.text.empty()) {
    fail(ErrorCode::Contract, fmt::format("{}/generate returned empty text", endpoint.url));
  }
  if (auto tag = reply.find("model_tag"); tag != reply.end() && tag->is_string()) {
    response.model_tag = tag->get<std::string>();
  }
  return response;
}

GenerationResponse stub_generate(const GenerationRequest& request,
                                 const std::vector<RankedContext>& contexts) {
  (void)request;
  const RankedContext* top = nullptr;
  for (const auto& c : contexts) {
    if (!top || c.rank < top->rank) top = &c;
  }
  if (!top) fail(ErrorCode::InvalidArgument, "stub generator needs at least one context");
  return {top->qa.answer, std::chrono::milliseconds{0}, "stub-echo"};
}

GenerationResponse HttpGenerator::generate(const GenerationRequest& request,
                                           const PromptBundle& bundle) const {
  (void)bundle;
  return lfqa::generate(endpoint_, request);
}

GenerationResponse StubGenerator::generate(const GenerationRequest& request,
                                           const PromptBundle& bundle) const {
  return stub_generate(request, bundle.contexts);
}

double HttpRelevanceScorer::score(std::string_view query, std::string_view document) const {
  const json reply = post_json(endpoint_, "/score", json{{"query", query}, {"document", document}});
  if (!reply.is_object() || !reply.contains("score") || !reply["score"].is_number()) {
    fail(ErrorCode::Contract, fmt::format("{}/score reply has no numeric 'score'", endpoint_.url));
  }
  return reply["score"].get<double>();
}

TokenCounter http_token_counter(Endpoint endpoint) {
  return [endpoint = std::move(endpoint)](std::string_view text) -> std::size_t {
    const json reply = post_json(endpoint, "/tokenize", json{{"text", text}});
    if (!reply.is_object() || !reply.contains("count") || !reply["count"].is_number_integer() ||
        reply["count"].get<long long>() < 0) {
      fail(ErrorCode::Contract,
           fmt::format("{}/tokenize reply has no non-negative integer 'count'", endpoint.url));
    }
    return reply["count"].get<std::size_t>();
  };
}

}  // namespace lfqa
