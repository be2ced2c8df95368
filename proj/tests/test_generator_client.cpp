#include "doctest.h"

#include <atomic>

#include "json.hpp"
#include "lfqa/error.hpp"
#include "lfqa/generator_client.hpp"
#include "loopback.hpp"

using namespace lfqa;
using nlohmann::json;
using testing_support::Loopback;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::Internal;
}

Endpoint endpoint(const std::string& url, int timeout_ms = 5000, int retries = 0) {
  return {url, std::chrono::milliseconds(timeout_ms), retries};
}

}  // namespace

TEST_CASE("request serialization is lossless") {
  const GenerationRequest defaults{"Question: Q? Answer:"};
  CHECK(defaults.beam_size == 4);
  CHECK(defaults.length_penalty == 1.0);
  CHECK(defaults.max_new_tokens == 256);
  CHECK(deserialize_request(serialize_request(defaults)) == defaults);

  const GenerationRequest odd{"tab\tquote\" ünïcode \xF0\x9F\x98\x80", 7, 0.1 + 0.2, 3};
  CHECK(deserialize_request(serialize_request(odd)) == odd);

  const auto wire = json::parse(serialize_request(defaults));
  CHECK(wire.size() == 4);
  CHECK(wire.at("beam_size") == 4);

  CHECK(deserialize_request(R"({"prompt":"p"})") == GenerationRequest{"p"});
  CHECK(code_of([] { deserialize_request("{"); }) == ErrorCode::Parse);
  CHECK(code_of([] { deserialize_request(R"({"beam_size":4})"); }) == ErrorCode::Parse);
  CHECK(code_of([] { deserialize_request(R"({"prompt":"p","beam_size":0})"); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("generate over loopback") {
  Loopback service;
  service.server().Post("/generate", [&](const httplib::Request& req, httplib::Response& res) {
    service.record(req.body);
    res.set_content(json{{"text", "ok"}, {"model_tag", "flan-t5-base"}}.dump(), "application/json");
  });
  service.start();

  const GenerationRequest request{"Context: Question: A? Answer: B. Question: Q? Answer:"};
  const auto response = generate(endpoint(service.url()), request);
  CHECK(response.text == "ok");
  CHECK(response.model_tag == "flan-t5-base");

  const auto bodies = service.bodies();
  REQUIRE(bodies.size() == 1);
  const auto payload = json::parse(bodies[0]);
  CHECK(payload.at("beam_size") == 4);
  CHECK(payload.at("length_penalty") == 1.0);
  CHECK(payload.at("max_new_tokens") == 256);
  CHECK(payload.at("prompt") == request.prompt);
  CHECK(request_from_json(payload) == request);
}

TEST_CASE("endpoint path prefix") {
  Loopback service;
  service.server().Post("/v1/generate", [](const httplib::Request&, httplib::Response& res) {
    res.set_content(R"({"text":"prefixed"})", "application/json");
  });
  service.start();
  CHECK(generate(endpoint(service.url() + "/v1/"), {"p"}).text == "prefixed");
}

TEST_CASE("transport failures") {
  const std::string dead = "http://127.0.0.1:" + std::to_string(testing_support::unused_port());
  try {
    generate(endpoint(dead, 1000), {"p"});
    FAIL("expected a connection error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Connection);
    CHECK(std::string(e.what()).find(dead) != std::string::npos);
  }
  CHECK(code_of([] { generate(endpoint("https://example.invalid"), {"p"}); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([] { generate(endpoint("nonsense"), {"p"}); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("service misbehaviour") {
  Loopback service;
  service.server().Post("/generate", [](const httplib::Request& req, httplib::Response& res) {
    const auto prompt = json::parse(req.body).at("prompt").get<std::string>();
    if (prompt == "status") {
      res.status = 500;
      res.set_content("boom", "text/plain");
    } else if (prompt == "empty") {
      res.set_content(R"({"text":""})", "application/json");
    } else if (prompt == "garbage") {
      res.set_content("not json", "text/plain");
    } else if (prompt == "missing") {
      res.set_content(R"({"answer":"x"})", "application/json");
    } else if (prompt == "slow") {
      std::this_thread::sleep_for(std::chrono::milliseconds(600));
      res.set_content(R"({"text":"late"})", "application/json");
    }
  });
  service.start();
  const auto e = endpoint(service.url(), 200);
  CHECK(code_of([&] { generate(e, {"status"}); }) == ErrorCode::Remote);
  CHECK(code_of([&] { generate(e, {"empty"}); }) == ErrorCode::Contract);
  CHECK(code_of([&] { generate(e, {"garbage"}); }) == ErrorCode::Contract);
  CHECK(code_of([&] { generate(e, {"missing"}); }) == ErrorCode::Contract);
  CHECK(code_of([&] { generate(e, {"slow"}); }) == ErrorCode::Timeout);
}

TEST_CASE("timeouts are retried") {
  Loopback service;
  std::atomic<int> calls{0};
  service.server().Post("/generate", [&](const httplib::Request&, httplib::Response& res) {
    if (calls++ == 0) std::this_thread::sleep_for(std::chrono::milliseconds(600));
    res.set_content(R"({"text":"second"})", "application/json");
  });
  service.start();
  CHECK(generate(endpoint(service.url(), 200, 1), {"p"}).text == "second");
  CHECK(calls.load() == 2);
}

TEST_CASE("stub generation") {
  RankedContext second;
  second.qa = {"2", "Q2", "other", ""};
  second.rank = 2;
  RankedContext first;
  first.qa = {"1", "A?", "B.", ""};
  first.rank = 1;
  const auto response = stub_generate({"p"}, {second, first});
  CHECK(response.text == "B.");
  CHECK(response.model_tag == "stub-echo");
  CHECK(stub_generate({"p"}, {second, first}).text == response.text);
  CHECK(code_of([] { stub_generate({"p"}, {}); }) == ErrorCode::InvalidArgument);

  PromptBundle bundle;
  bundle.contexts = {first, second};
  CHECK(StubGenerator().generate({"p"}, bundle).text == "B.");
}

TEST_CASE("score and tokenize contracts") {
  Loopback service;
  service.server().Post("/score", [&](const httplib::Request& req, httplib::Response& res) {
    service.record(req.body);
    const auto body = json::parse(req.body);
    const double s = body.at("document").get<std::string>().find("fever") != std::string::npos ? 0.9 : 0.1;
    res.set_content(json{{"score", s}}.dump(), "application/json");
  });
  service.server().Post("/tokenize", [](const httplib::Request& req, httplib::Response& res) {
    const auto text = json::parse(req.body).at("text").get<std::string>();
    res.set_content(json{{"count", text.size()}}.dump(), "application/json");
  });
  service.start();

  const HttpRelevanceScorer scorer(endpoint(service.url()));
  CHECK(scorer.score("q", "fever high") == 0.9);
  CHECK(scorer.score("q", "nothing") == 0.1);
  const auto sent = json::parse(service.bodies().at(0));
  CHECK(sent.at("query") == "q");
  CHECK(sent.at("document") == "fever high");

  const auto counter = http_token_counter(endpoint(service.url()));
  CHECK(counter("abcd") == 4);
}
