#pragma once

// HTTP service over immutable registry/model snapshots. Handlers are plain
// member functions returning an HttpResponse so they can be tested without
// a socket; mount() wires them into an httplib::Server.
//
//   GET  /api/health
//   POST /api/analyze   {"text"} | {"pretagged", "format"?} | {"essay"}
//   POST /api/score     same body; 409 without a model
//   GET  /api/registry
//   GET  /api/export/{json|csv|txt}?id=<bundle id>

#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include <json.hpp>

#include "ukta/bundle.hpp"
#include "ukta/embeddings.hpp"
#include "ukta/error.hpp"
#include "ukta/http.hpp"
#include "ukta/pretagged.hpp"
#include "ukta/registry.hpp"
#include "ukta/tagger.hpp"

namespace ukta {

struct HttpResponse {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
};

inline int http_status(ErrorCode c) {
  switch (c) {
    case ErrorCode::MalformedRecord:
    case ErrorCode::EmptySentence:
    case ErrorCode::Precondition:
    case ErrorCode::EmptyEssay:
    case ErrorCode::LengthMismatch:
    case ErrorCode::ShapeMismatch: return 400;
    case ErrorCode::RegistryMismatch: return 409;
    case ErrorCode::UnknownTag: return 422;
    case ErrorCode::Unreachable:
    case ErrorCode::Timeout:
    case ErrorCode::InvalidResponse:
    case ErrorCode::ProviderUnavailable: return 502;
    case ErrorCode::Io: return 500;
    default: return 422;
  }
}

inline HttpResponse error_response(int status, std::string_view code, std::string_view message,
                                   std::string_view location = {}) {
  nlohmann::ordered_json j;
  j["code"] = code;
  j["message"] = message;
  if (!location.empty()) j["location"] = location;
  return {status, "application/json", j.dump() + "\n"};
}

inline HttpResponse error_response(const Error& e) {
  return error_response(http_status(e.code()), to_string(e.code()), e.what(), e.location());
}

struct ServiceConfig {
  FeatureRegistry registry = default_registry();
  std::shared_ptr<const EmbeddingProvider> provider = std::make_shared<HashEmbedding>(64);
  std::optional<LoadedModel> model;
  std::optional<TaggerConfig> tagger;
  std::size_t cache_capacity = 256;
};

class Service {
 public:
  explicit Service(ServiceConfig cfg) : cfg_(std::move(cfg)) {
    registry_json_ = registry_to_json(cfg_.registry).dump(2) + "\n";
  }

  bool has_model() const { return cfg_.model.has_value(); }

  HttpResponse health() const {
    nlohmann::ordered_json j;
    j["status"] = "ok";
    j["version"] = kToolVersion;
    j["model"] = has_model();
    j["registry_fingerprint"] = registry_fingerprint(cfg_.registry);
    return {200, "application/json", j.dump() + "\n"};
  }

  HttpResponse registry() const { return {200, "application/json", registry_json_}; }

  // Analyzes (and with `score`, scores) the essay described by a request body.
  HttpResponse analyze(std::string_view body, bool score) {
    if (score && !has_model())
      return error_response(409, "NoModel", "no model checkpoint is loaded; use /api/analyze");
    try {
      const Essay essay = essay_from_request(body);
      auto bundle = std::make_shared<const AnalysisBundle>(
          make_bundle(essay, cfg_.registry, *cfg_.provider, score ? &*cfg_.model : nullptr));
      remember(bundle);
      return {200, std::string(content_type(ExportFormat::Json)), export_json(*bundle)};
    } catch (const Error& e) {
      return error_response(e);
    }
  }

  HttpResponse export_bundle(std::string_view format, std::string_view id) const {
    const auto fmt = parse_export_format(format);
    if (!fmt) return error_response(404, "NotFound", "unknown export format", format);
    if (id.empty()) return error_response(400, "Precondition", "missing 'id' query parameter");
    std::shared_ptr<const AnalysisBundle> bundle;
    {
      std::lock_guard lock(mu_);
      if (auto it = cache_.find(std::string(id)); it != cache_.end()) bundle = it->second;
    }
    if (!bundle)
      return error_response(404, "NotFound", "no bundle with this id; analyze the essay first", id);
    return {200, std::string(content_type(*fmt)), ukta::export_bundle(*bundle, *fmt)};
  }

  void mount(httplib::Server& server) {
    auto send = [](httplib::Response& res, const HttpResponse& r) {
      res.status = r.status;
      res.set_header("Access-Control-Allow-Origin", "*");
      res.set_content(r.body, r.content_type);
    };
    server.Get("/api/health", [=, this](const httplib::Request&, httplib::Response& res) {
      send(res, health());
    });
    server.Get("/api/registry", [=, this](const httplib::Request&, httplib::Response& res) {
      send(res, registry());
    });
    server.Post("/api/analyze", [=, this](const httplib::Request& req, httplib::Response& res) {
      send(res, analyze(req.body, false));
    });
    server.Post("/api/score", [=, this](const httplib::Request& req, httplib::Response& res) {
      send(res, analyze(req.body, true));
    });
    server.Get(R"(/api/export/([A-Za-z]+))",
               [=, this](const httplib::Request& req, httplib::Response& res) {
                 send(res, export_bundle(req.matches[1].str(), req.get_param_value("id")));
               });
    server.Options(R"(/api/.*)", [](const httplib::Request&, httplib::Response& res) {
      res.set_header("Access-Control-Allow-Origin", "*");
      res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
      res.set_header("Access-Control-Allow-Headers", "Content-Type");
      res.status = 204;
    });
    server.set_error_handler([=](const httplib::Request&, httplib::Response& res) {
      if (res.body.empty()) send(res, error_response(res.status, "NotFound", "no such endpoint"));
    });
  }

 private:
  Essay essay_from_request(std::string_view body) const {
    nlohmann::ordered_json j;
    try {
      j = nlohmann::ordered_json::parse(body);
    } catch (const nlohmann::json::parse_error& ex) {
      throw Error(ErrorCode::MalformedRecord, std::string("request body is not JSON: ") + ex.what());
    }
    if (!j.is_object()) throw Error(ErrorCode::MalformedRecord, "request body must be an object");
    const int given = static_cast<int>(j.contains("text")) + static_cast<int>(j.contains("pretagged")) +
                      static_cast<int>(j.contains("essay"));
    if (given != 1)
      throw Error(ErrorCode::MalformedRecord, "give exactly one of 'text', 'pretagged', 'essay'");
    if (j.contains("essay")) return essay_from_json(j["essay"]);
    auto str = [&](const char* key) {
      if (!j[key].is_string())
        throw Error(ErrorCode::MalformedRecord, std::string("'") + key + "' must be a string", key);
      return j[key].get<std::string>();
    };
    if (j.contains("pretagged")) {
      const std::string format = j.contains("format") ? str("format") : "tsv";
      if (format != "tsv" && format != "json")
        throw Error(ErrorCode::MalformedRecord, "format must be 'tsv' or 'json'", "format");
      return parse_pretagged(str("pretagged"), format == "tsv" ? TextFormat::Tsv : TextFormat::Json);
    }
    const std::string text = str("text");
    if (!cfg_.tagger) throw Error(ErrorCode::Unreachable, "no tagger endpoint configured");
    return tag_text(text, *cfg_.tagger);
  }

  void remember(std::shared_ptr<const AnalysisBundle> b) {
    std::lock_guard lock(mu_);
    if (cache_.emplace(b->id, b).second) {
      order_.push_back(b->id);
      while (order_.size() > cfg_.cache_capacity) {
        cache_.erase(order_.front());
        order_.pop_front();
      }
    }
  }

  ServiceConfig cfg_;
  std::string registry_json_;
  mutable std::mutex mu_;
  std::map<std::string, std::shared_ptr<const AnalysisBundle>> cache_;
  std::deque<std::string> order_;
};

}  // namespace ukta
