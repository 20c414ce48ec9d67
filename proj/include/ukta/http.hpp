#pragma once

// Shared HTTP plumbing for the upstream clients (tagger, remote embeddings).
// Plain http:// only: the vendored client is built without TLS.

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <httplib.h>
// <resolv.h> (pulled in by httplib) defines _res, which Eigen uses as an
// identifier; httplib's own uses are already expanded at this point.
#ifdef _res
#undef _res
#endif

#include "ukta/error.hpp"

namespace ukta {

struct HttpEndpoint {
  std::string origin;  // scheme://host[:port]
  std::string path;    // starts with '/'
};

inline HttpEndpoint parse_http_url(std::string_view url) {
  constexpr std::string_view scheme = "http://";
  if (url.substr(0, scheme.size()) != scheme)
    throw Error(ErrorCode::Precondition, "endpoint must be an http:// URL", std::string(url));
  const auto rest = url.substr(scheme.size());
  const auto slash = rest.find('/');
  HttpEndpoint e;
  e.origin = std::string(url.substr(0, scheme.size() + std::min(slash, rest.size())));
  e.path = slash == std::string_view::npos ? "/" : std::string(rest.substr(slash));
  if (e.origin.size() == scheme.size())
    throw Error(ErrorCode::Precondition, "endpoint has no host", std::string(url));
  return e;
}

enum class HttpFailure { None, Unreachable, Timeout, BadStatus };

struct HttpOutcome {
  HttpFailure failure = HttpFailure::None;
  int status = 0;
  std::string body;
  int attempts = 0;
};

// POSTs a JSON body, retrying connection failures, timeouts and 5xx
// responses up to `retries` extra times. 4xx responses are not retried.
inline HttpOutcome post_json(const HttpEndpoint& endpoint, const std::string& body,
                             const std::vector<std::pair<std::string, std::string>>& headers,
                             int timeout_ms, int retries) {
  httplib::Headers h;
  for (const auto& [k, v] : headers) h.emplace(k, v);
  HttpOutcome out;
  for (int attempt = 0; attempt <= retries; ++attempt) {
    httplib::Client client(endpoint.origin);
    const auto sec = timeout_ms / 1000, usec = (timeout_ms % 1000) * 1000;
    client.set_connection_timeout(sec, usec);
    client.set_read_timeout(sec, usec);
    client.set_write_timeout(sec, usec);
    out.attempts = attempt + 1;
    auto res = client.Post(endpoint.path, h, body, "application/json");
    if (!res) {
      const auto err = res.error();
      out.failure = err == httplib::Error::Read || err == httplib::Error::ConnectionTimeout
                        ? HttpFailure::Timeout
                        : HttpFailure::Unreachable;
      out.status = 0;
      out.body.clear();
      continue;
    }
    out.status = res->status;
    out.body = res->body;
    if (res->status >= 200 && res->status < 300) {
      out.failure = HttpFailure::None;
      return out;
    }
    out.failure = HttpFailure::BadStatus;
    if (res->status < 500) return out;
  }
  return out;
}

}  // namespace ukta
