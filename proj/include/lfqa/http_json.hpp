#pragma once

#include <chrono>
#include <string>
#include <string_view>

#include "json.hpp"

namespace lfqa {

/// A model service reachable over HTTP, e.g. "http://127.0.0.1:8080" or
/// "http://host:9000/prefix".
struct Endpoint {
  std::string url;
  std::chrono::milliseconds timeout{60000};
  /// Extra attempts after a connection failure or timeout.
  int retries = 0;
};

/// POSTs `body` as JSON to url + path and parses the JSON reply. Failures are
/// raised as Connection, Timeout, Remote (non-2xx) or Contract (bad body)
/// errors naming the endpoint.
nlohmann::json post_json(const Endpoint& endpoint, std::string_view path,
                         const nlohmann::json& body);

}  // namespace lfqa
