#include "lfqa/http_json.hpp"

#include <httplib.h>
#include <fmt/format.h>

#include "lfqa/error.hpp"

namespace lfqa {

namespace {

struct ParsedUrl {
  std::string scheme_host_port;
  std::string prefix;
};

ParsedUrl parse_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos || url.substr(0, scheme_end) != "http") {
    fail(ErrorCode::InvalidArgument, fmt::format("endpoint '{}' must be an http:// URL", url));
  }
  const auto path_start = url.find('/', scheme_end + 3);
  ParsedUrl parsed;
  parsed.scheme_host_port = url.substr(0, path_start);
  if (path_start != std::string::npos) parsed.prefix = url.substr(path_start);
  while (!parsed.prefix.empty() && parsed.prefix.back() == '/') parsed.prefix.pop_back();
  if (parsed.scheme_host_port.size() <= scheme_end + 3) {
    fail(ErrorCode::InvalidArgument, fmt::format("endpoint '{}' has no host", url));
  }
  return parsed;
}

}  // namespace

nlohmann::json post_json(const Endpoint& endpoint, std::string_view path,
                         const nlohmann::json& body) {
  const auto url = parse_url(endpoint.url);
  const std::string target = url.prefix + std::string(path);
  const std::string payload = body.dump();

  for (int attempt = 0;; ++attempt) {
    httplib::Client client(url.scheme_host_port);
    client.set_connection_timeout(endpoint.timeout);
    client.set_read_timeout(endpoint.timeout);
    client.set_write_timeout(endpoint.timeout);
    auto result = client.Post(target, payload, "application/json");
    if (!result) {
      const auto err = result.error();
      const bool timed_out = err == httplib::Error::ConnectionTimeout || err == httplib::Error::Read;
      if (attempt < endpoint.retries) continue;
      fail(timed_out ? ErrorCode::Timeout : ErrorCode::Connection,
           fmt::format("{} {}{}: {}", timed_out ? "timed out waiting for" : "cannot reach",
                       endpoint.url, path, httplib::to_string(err)));
    }
    if (result->status < 200 || result->status >= 300) {
      fail(ErrorCode::Remote, fmt::format("{}{} returned HTTP {}: {}", endpoint.url, path,
                                          result->status, result->body.substr(0, 200)));
    }
    try {
      return nlohmann::json::parse(result->body);
    } catch (const nlohmann::json::exception&) {
      fail(ErrorCode::Contract,
           fmt::format("{}{} returned a body that is not JSON", endpoint.url, path));
    }
  }
}

}  // namespace lfqa
