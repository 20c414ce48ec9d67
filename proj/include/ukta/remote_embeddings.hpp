#pragma once

// Embedding provider backed by an HTTP service:
//   POST {"sentences": [text, ...]} -> {"vectors": [[double, ...], ...]}
// Vectors are passed through unmodified; only their count, dimension and
// finiteness are checked.

#include <cmath>
#include <cstdlib>
#include <string>

#include <json.hpp>

#include "ukta/embeddings.hpp"
#include "ukta/error.hpp"
#include "ukta/http.hpp"

namespace ukta {

class RemoteEmbedding final : public EmbeddingProvider {
 public:
  RemoteEmbedding(std::string endpoint, std::size_t dim, int timeout_ms = 30000, int retries = 2)
      : url_(std::move(endpoint)),
        endpoint_(parse_http_url(url_)),
        dim_(dim),
        timeout_ms_(timeout_ms),
        retries_(retries) {
    if (dim_ == 0) throw Error(ErrorCode::Precondition, "embedding dim must be > 0");
  }

  std::string kind() const override { return "remote"; }
  std::size_t dim() const override { return dim_; }
  const std::string& url() const { return url_; }

  std::vector<Vec> embed(std::span<const EmbedItem> items) const override {
    if (items.empty()) return {};
    nlohmann::json texts = nlohmann::json::array();
    for (const auto& it : items) texts.push_back(it.text);
    const nlohmann::json request = {{"sentences", texts}};
    const auto out = post_json(endpoint_, request.dump(), {}, timeout_ms_, retries_);
    if (out.failure != HttpFailure::None)
      fail(out.failure == HttpFailure::BadStatus ? "HTTP " + std::to_string(out.status)
                                                 : "service unreachable or timed out");
    nlohmann::json payload;
    try {
      payload = nlohmann::json::parse(out.body);
    } catch (const nlohmann::json::parse_error&) {
      fail("body is not JSON");
    }
    if (!payload.is_object() || !payload.contains("vectors") || !payload["vectors"].is_array())
      fail("missing 'vectors' array");
    const auto& vs = payload["vectors"];
    if (vs.size() != items.size())
      fail("expected " + std::to_string(items.size()) + " vectors, got " + std::to_string(vs.size()));
    std::vector<Vec> result;
    result.reserve(vs.size());
    for (const auto& v : vs) {
      if (!v.is_array() || v.size() != dim_) fail("vector dimension differs from " + std::to_string(dim_));
      Vec x;
      x.reserve(dim_);
      for (const auto& c : v) {
        if (!c.is_number() || !std::isfinite(c.get<double>())) fail("non-numeric vector component");
        x.push_back(c.get<double>());
      }
      result.push_back(std::move(x));
    }
    return result;
  }

 private:
  [[noreturn]] void fail(const std::string& why) const {
    throw Error(ErrorCode::ProviderUnavailable, "embedding service: " + why, url_);
  }

  std::string url_;
  HttpEndpoint endpoint_;
  std::size_t dim_;
  int timeout_ms_;
  int retries_;
};

}  // namespace ukta
