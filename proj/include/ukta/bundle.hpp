#pragma once

// AnalysisBundle and its three exporters (JSON, CSV, TXT). The CLI and the
// HTTP service both go through these functions, so their outputs are
// byte-identical for identical inputs.

#include <charconv>
#include <cstdio>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ukta/analysis.hpp"
#include "ukta/basic.hpp"
#include "ukta/embeddings.hpp"
#include "ukta/error.hpp"
#include "ukta/pretagged.hpp"
#include "ukta/registry.hpp"
#include "ukta/rng.hpp"
#include "ukta/scorer.hpp"

#ifndef UKTA_VERSION
#define UKTA_VERSION "0.0.0"
#endif

namespace ukta {

inline constexpr std::string_view kToolVersion = UKTA_VERSION;

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

inline std::string content_hash(std::string_view text) { return hex64(fnv1a64(text.data(), text.size())); }

// Shortest decimal that round-trips to the same double.
inline std::string format_double(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot read file", path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write file", path);
  out << text;
  if (!out) throw Error(ErrorCode::Io, "write failed", path);
}

// ---------------------------------------------------------------- models

// A checkpoint together with a content identity used in bundle ids.
struct LoadedModel {
  Model model;
  std::string id;
};

inline std::string model_to_text(const Model& m) { return model_to_json(m).dump(2) + "\n"; }

inline LoadedModel load_model(std::string_view checkpoint_text, const std::string& where = {}) {
  nlohmann::ordered_json j;
  try {
    j = nlohmann::ordered_json::parse(checkpoint_text);
  } catch (const nlohmann::json::parse_error& ex) {
    throw Error(ErrorCode::MalformedRecord, std::string("checkpoint is not JSON: ") + ex.what(), where);
  }
  LoadedModel lm{model_from_json(j), ""};
  lm.id = content_hash(checkpoint_text);
  return lm;
}

inline LoadedModel load_model_file(const std::string& path) {
  return load_model(read_text_file(path), path);
}

// ---------------------------------------------------------------- bundle

struct FeatureRow {
  std::string name;
  Family family = Family::Basic;
  double value = 0.0;
  bool available = false;
};

struct AnalysisBundle {
  std::string id;  // content hash of (essay, registry, embedding, model)
  std::string tool_version;
  std::string registry_fingerprint;
  std::string embedding_kind;
  std::size_t embedding_dim = 0;
  std::optional<std::string> model_id;
  Essay essay;
  LengthStats length;
  std::vector<FeatureRow> features;
  std::vector<MorphemeOccurrence> morphemes;
  Analysis analysis;
  std::optional<RubricReport> rubric;
};

inline AnalysisBundle make_bundle(const Essay& essay, const FeatureRegistry& registry,
                                  const EmbeddingProvider& provider,
                                  const LoadedModel* model = nullptr) {
  AnalysisBundle b;
  b.tool_version = std::string(kToolVersion);
  b.registry_fingerprint = registry_fingerprint(registry);
  b.embedding_kind = provider.kind();
  b.embedding_dim = provider.dim();
  b.essay = essay;
  b.length = length_stats(essay);
  b.analysis = analyze(essay, registry, provider);
  for (std::size_t i = 0; i < registry.size(); ++i)
    b.features.push_back({registry.entries[i].name, registry.entries[i].family,
                          b.analysis.features.values[i],
                          static_cast<bool>(b.analysis.features.available[i])});
  b.morphemes = occurrence_table(essay);
  if (model) {
    if (model->model.embedding_kind != provider.kind() ||
        model->model.config.embed_dim != provider.dim())
      throw Error(ErrorCode::RegistryMismatch,
                  "model was trained with embedding " + model->model.embedding_kind + "/" +
                      std::to_string(model->model.config.embed_dim));
    const Sample s = make_sample(essay, b.analysis.features, provider);
    b.rubric = predict(model->model, s, registry, 10);
    b.model_id = model->id;
  }
  std::string key = serialize(essay, TextFormat::Json);
  key += '\n' + b.registry_fingerprint + '\n' + b.embedding_kind + '/' +
         std::to_string(b.embedding_dim) + '\n' + b.model_id.value_or("-");
  b.id = content_hash(key);
  return b;
}

inline nlohmann::ordered_json bundle_to_json(const AnalysisBundle& b) {
  using J = nlohmann::ordered_json;
  J j;
  j["format"] = "ukta-bundle";
  j["tool_version"] = b.tool_version;
  j["id"] = b.id;
  j["registry_fingerprint"] = b.registry_fingerprint;
  j["embedding"] = {{"kind", b.embedding_kind}, {"dim", b.embedding_dim}};
  j["model"] = b.model_id ? J(*b.model_id) : J(nullptr);
  j["essay"] = essay_to_json(b.essay);
  j["summary"] = {{"paragraphs", b.length.total_paragraphs},
                  {"sentences", b.length.total_sentences},
                  {"wordpieces", b.length.total_wordpieces},
                  {"morphemes", b.length.total_morphemes}};
  J features = J::array();
  for (const auto& f : b.features)
    features.push_back({{"name", f.name},
                        {"family", std::string(to_string(f.family))},
                        {"value", f.available ? J(f.value) : J(nullptr)},
                        {"available", f.available}});
  j["features"] = std::move(features);
  J morphemes = J::array();
  for (const auto& m : b.morphemes)
    morphemes.push_back({{"lemma", m.lemma},
                         {"tag", std::string(to_string(m.tag))},
                         {"count", m.count},
                         {"sentences", m.sentences}});
  j["morphemes"] = std::move(morphemes);
  J keywords = J::array();
  for (const auto& k : b.analysis.keywords) keywords.push_back({{"phrase", k.phrase}, {"score", k.score}});
  J cohesion;
  cohesion["keywords"] = std::move(keywords);
  if (b.analysis.topic) {
    const auto& t = *b.analysis.topic;
    cohesion["topic"] = {{"topic_sentence", t.topic_sentence},
                         {"avg_sen_similarity", t.avg_sen_similarity},
                         {"adjacent_similarity", t.adjacent_similarity},
                         {"topic_similarity", t.topic_similarity}};
  } else {
    cohesion["topic"] = nullptr;
  }
  j["cohesion"] = std::move(cohesion);
  if (b.rubric) {
    const auto& r = *b.rubric;
    J rubric;
    J scores = J::array();
    for (std::size_t k = 0; k < kRubricCount; ++k)
      scores.push_back({{"rubric", std::string(kRubricNames[k])}, {"score", r.scores[k]}, {"raw", r.raw[k]}});
    rubric["scores"] = std::move(scores);
    J top = J::array();
    for (std::size_t i = 0; i < r.top_features.size(); ++i) {
      const auto& t = r.top_features[i];
      top.push_back({{"rank", i + 1},
                     {"index", t.index},
                     {"name", t.name},
                     {"family", std::string(to_string(t.family))},
                     {"weight", t.weight},
                     {"value", t.available ? J(t.value) : J(nullptr)},
                     {"available", t.available}});
    }
    rubric["top_features"] = std::move(top);
    rubric["attention"] = r.attention;
    j["rubric"] = std::move(rubric);
  } else {
    j["rubric"] = nullptr;
  }
  return j;
}

inline std::string export_json(const AnalysisBundle& b) { return bundle_to_json(b).dump(2) + "\n"; }

namespace detail {

// RFC 4180 quoting (fields with a comma, quote or line break); lines end
// in LF as the interface contract requires.
inline std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace detail

// One row per registry entry: name,family,value,available. Unavailable
// features have an empty value field.
inline std::string export_csv(const AnalysisBundle& b) {
  std::string out = "name,family,value,available\n";
  for (const auto& f : b.features) {
    out += detail::csv_field(f.name);
    out += ',';
    out += to_string(f.family);
    out += ',';
    if (f.available) out += format_double(f.value);
    out += f.available ? ",true\n" : ",false\n";
  }
  return out;
}

inline std::string export_txt(const AnalysisBundle& b) {
  std::ostringstream o;
  auto num = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return std::string(buf);
  };
  o << "UKTA analysis summary\n";
  o << "id: " << b.id << "\n";
  o << "essay: " << b.essay.id << "\n";
  o << "tool version: " << b.tool_version << "\n";
  o << "registry: " << b.registry_fingerprint << " (" << b.features.size() << " features)\n";
  o << "embedding: " << b.embedding_kind << " (dim " << b.embedding_dim << ")\n";
  o << "paragraphs: " << b.length.total_paragraphs << ", sentences: " << b.length.total_sentences
    << ", wordpieces: " << b.length.total_wordpieces << ", morphemes: " << b.length.total_morphemes
    << "\n";

  o << "\n[Sentences]\n";
  for (const auto* s : b.essay.sentences()) {
    o << "  " << s->index << ":";
    for (const auto& w : s->wordpieces) {
      o << " ";
      for (std::size_t m = 0; m < w.morphemes.size(); ++m)
        o << (m ? "+" : "") << w.morphemes[m].lemma << "/" << to_string(w.morphemes[m].tag);
    }
    o << "\n";
  }

  o << "\n[Morphemes] lemma/tag, count, sentences\n";
  for (const auto& m : b.morphemes) {
    o << "  " << m.lemma << "/" << to_string(m.tag) << "\t" << m.count << "\t";
    for (std::size_t i = 0; i < m.sentences.size(); ++i) o << (i ? "," : "") << m.sentences[i];
    o << "\n";
  }

  o << "\n[Keywords]\n";
  if (b.analysis.keywords.empty()) o << "  (none)\n";
  for (const auto& k : b.analysis.keywords) o << "  " << k.phrase << "\t" << num(k.score) << "\n";
  if (b.analysis.topic)
    o << "  topic sentence: " << b.analysis.topic->topic_sentence
      << ", avg similarity: " << num(b.analysis.topic->avg_sen_similarity) << "\n";

  if (b.rubric) {
    o << "\n[Rubric scores] model " << b.model_id.value_or("") << "\n";
    for (std::size_t k = 0; k < kRubricCount; ++k)
      o << "  " << kRubricNames[k] << "\t" << b.rubric->scores[k] << "\t(" << num(b.rubric->raw[k])
        << ")\n";
    o << "\n[Top features] rank, name, family, weight, value\n";
    for (std::size_t i = 0; i < b.rubric->top_features.size(); ++i) {
      const auto& t = b.rubric->top_features[i];
      o << "  " << i + 1 << "\t" << t.name << "\t" << to_string(t.family) << "\t"
        << format_double(t.weight) << "\t" << (t.available ? format_double(t.value) : "n/a")
        << "\n";
    }
  }

  for (auto fam : {Family::Basic, Family::Diversity, Family::Cohesion}) {
    o << "\n[Features: " << to_string(fam) << "]\n";
    for (const auto& f : b.features)
      if (f.family == fam)
        o << "  " << f.name << "\t" << (f.available ? format_double(f.value) : "n/a") << "\n";
  }
  return o.str();
}

enum class ExportFormat { Json, Csv, Txt };

inline std::optional<ExportFormat> parse_export_format(std::string_view s) {
  if (s == "json") return ExportFormat::Json;
  if (s == "csv") return ExportFormat::Csv;
  if (s == "txt") return ExportFormat::Txt;
  return std::nullopt;
}

inline std::string export_bundle(const AnalysisBundle& b, ExportFormat f) {
  switch (f) {
    case ExportFormat::Json: return export_json(b);
    case ExportFormat::Csv: return export_csv(b);
    case ExportFormat::Txt: return export_txt(b);
  }
  return {};
}

inline std::string_view content_type(ExportFormat f) {
  switch (f) {
    case ExportFormat::Json: return "application/json";
    case ExportFormat::Csv: return "text/csv; charset=utf-8";
    case ExportFormat::Txt: return "text/plain; charset=utf-8";
  }
  return "application/octet-stream";
}

// File names used by `ukta analyze --out DIR`.
inline std::string_view export_file_name(ExportFormat f) {
  switch (f) {
    case ExportFormat::Json: return "bundle.json";
    case ExportFormat::Csv: return "features.csv";
    case ExportFormat::Txt: return "summary.txt";
  }
  return "";
}

// The essay stored in a bundle JSON document (for re-ingestion).
inline Essay essay_from_bundle(std::string_view bundle_text) {
  nlohmann::ordered_json j;
  try {
    j = nlohmann::ordered_json::parse(bundle_text);
  } catch (const nlohmann::json::parse_error& ex) {
    throw Error(ErrorCode::MalformedRecord, std::string("bundle is not JSON: ") + ex.what());
  }
  if (!j.is_object() || j.value("format", "") != "ukta-bundle" || !j.contains("essay"))
    throw Error(ErrorCode::MalformedRecord, "not a ukta bundle", "/format");
  return essay_from_json(j["essay"]);
}

}  // namespace ukta
