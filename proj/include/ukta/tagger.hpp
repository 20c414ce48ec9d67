#pragma once

// Client for an external morpheme analyzer. Wire format:
//   POST {"text": raw}
//   -> {"sentences": [{"wordpieces": [{"raw", "morphemes": [{"surface", "lemma"?, "tag"}]}]}]}
// Every tag is validated against the inventory and the wordpieces must
// partition the input by whitespace; otherwise no Essay is returned.

#include <cstdio>
#include <cstdlib>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ukta/error.hpp"
#include "ukta/http.hpp"
#include "ukta/pos.hpp"
#include "ukta/pretagged.hpp"
#include "ukta/rng.hpp"
#include "ukta/text.hpp"

namespace ukta {

struct TaggerConfig {
  std::string endpoint;
  std::optional<std::string> api_key;
  int timeout_ms = 10000;
  int retries = 2;

  void validate() const {
    if (endpoint.empty()) throw Error(ErrorCode::Precondition, "no tagger endpoint configured");
    if (timeout_ms <= 0) throw Error(ErrorCode::Precondition, "tagger timeout must be > 0");
    if (retries < 0) throw Error(ErrorCode::Precondition, "tagger retries must be >= 0");
  }
};

// UKTA_TAGGER_ENDPOINT and UKTA_TAGGER_KEY override the given config.
inline TaggerConfig apply_tagger_env(TaggerConfig cfg) {
  if (const char* e = std::getenv("UKTA_TAGGER_ENDPOINT"); e && *e) cfg.endpoint = e;
  if (const char* k = std::getenv("UKTA_TAGGER_KEY"); k && *k) cfg.api_key = k;
  return cfg;
}

namespace detail {

struct RawToken {
  std::string text;
  std::size_t paragraph = 0;
};

inline bool is_ws(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; }

// Whitespace tokens of the raw text; a blank line starts a new paragraph.
inline std::vector<RawToken> raw_tokens(std::string_view raw) {
  std::vector<RawToken> out;
  std::size_t paragraph = 0, newlines = 0, i = 0;
  while (i < raw.size()) {
    if (is_ws(raw[i])) {
      newlines += raw[i] == '\n';
      ++i;
      continue;
    }
    if (newlines >= 2 && !out.empty()) ++paragraph;
    newlines = 0;
    const auto start = i;
    while (i < raw.size() && !is_ws(raw[i])) ++i;
    out.push_back({std::string(raw.substr(start, i - start)), paragraph});
  }
  return out;
}

[[noreturn]] inline void bad_response(const std::string& why, const std::string& where = {}) {
  throw Error(ErrorCode::InvalidResponse, "tagger response: " + why, where);
}

inline const nlohmann::json& array_member(const nlohmann::json& j, const char* key,
                                          const std::string& where) {
  if (!j.is_object() || !j.contains(key) || !j.at(key).is_array() || j.at(key).empty())
    bad_response(std::string("'") + key + "' must be a non-empty array", where);
  return j.at(key);
}

inline std::string text_member(const nlohmann::json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key) || !j.at(key).is_string())
    bad_response(std::string("'") + key + "' must be a string", where);
  return j.at(key).get<std::string>();
}

}  // namespace detail

// Builds an Essay from a tagger payload for the given raw text.
inline Essay essay_from_tagger_response(std::string_view raw, const nlohmann::json& payload) {
  const auto tokens = detail::raw_tokens(raw);
  const auto& sentences = detail::array_member(payload, "sentences", "/");
  Essay e;
  e.id = "text-" + [&] {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(fnv1a64(raw.data(), raw.size())));
    return std::string(buf);
  }();
  std::size_t next = 0;
  for (std::size_t si = 0; si < sentences.size(); ++si) {
    const std::string sloc = "/sentences/" + std::to_string(si);
    Sentence sent;
    std::size_t paragraph = 0;
    const auto& wps = detail::array_member(sentences[si], "wordpieces", sloc);
    for (std::size_t wi = 0; wi < wps.size(); ++wi) {
      const std::string wloc = sloc + "/wordpieces/" + std::to_string(wi);
      Wordpiece wp;
      wp.raw = detail::text_member(wps[wi], "raw", wloc);
      if (next >= tokens.size() || tokens[next].text != wp.raw)
        detail::bad_response("wordpieces do not partition the input text", wloc);
      if (wi == 0) paragraph = tokens[next].paragraph;
      ++next;
      const auto& ms = detail::array_member(wps[wi], "morphemes", wloc);
      for (std::size_t mi = 0; mi < ms.size(); ++mi) {
        const std::string mloc = wloc + "/morphemes/" + std::to_string(mi);
        Morpheme m;
        m.surface = detail::text_member(ms[mi], "surface", mloc);
        m.lemma = ms[mi].contains("lemma") ? detail::text_member(ms[mi], "lemma", mloc) : m.surface;
        const auto code = detail::text_member(ms[mi], "tag", mloc);
        const auto tag = parse_tag(code);
        if (!tag) detail::bad_response("unknown tag '" + code + "'", mloc);
        if (m.surface.empty() || m.lemma.empty()) detail::bad_response("empty morpheme", mloc);
        m.tag = *tag;
        wp.morphemes.push_back(std::move(m));
      }
      sent.wordpieces.push_back(std::move(wp));
    }
    while (e.paragraphs.size() <= paragraph) e.paragraphs.emplace_back();
    e.paragraphs[paragraph].sentences.push_back(std::move(sent));
  }
  if (next != tokens.size()) detail::bad_response("wordpieces do not cover the input text");
  std::erase_if(e.paragraphs, [](const Paragraph& p) { return p.sentences.empty(); });
  e.renumber();
  return e;
}

// Tags raw text through the configured service.
inline Essay tag_text(std::string_view raw, const TaggerConfig& cfg) {
  if (detail::raw_tokens(raw).empty())
    throw Error(ErrorCode::Precondition, "raw text is empty");
  cfg.validate();
  const auto endpoint = parse_http_url(cfg.endpoint);
  std::vector<std::pair<std::string, std::string>> headers;
  if (cfg.api_key) headers.emplace_back("Authorization", "Bearer " + *cfg.api_key);
  const nlohmann::json request = {{"text", std::string(raw)}};
  const auto out = post_json(endpoint, request.dump(), headers, cfg.timeout_ms, cfg.retries);
  switch (out.failure) {
    case HttpFailure::Unreachable:
      throw Error(ErrorCode::Unreachable, "tagger unreachable after " +
                                              std::to_string(out.attempts) + " attempt(s)",
                  cfg.endpoint);
    case HttpFailure::Timeout:
      throw Error(ErrorCode::Timeout, "tagger did not answer within " +
                                          std::to_string(cfg.timeout_ms) + " ms",
                  cfg.endpoint);
    case HttpFailure::BadStatus:
      throw Error(ErrorCode::InvalidResponse, "tagger returned HTTP " + std::to_string(out.status),
                  cfg.endpoint);
    case HttpFailure::None: break;
  }
  nlohmann::json payload;
  try {
    payload = nlohmann::json::parse(out.body);
  } catch (const nlohmann::json::parse_error&) {
    detail::bad_response("body is not JSON");
  }
  return essay_from_tagger_response(raw, payload);
}

}  // namespace ukta
