#pragma once

#include <array>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ukta/diversity.hpp"
#include "ukta/error.hpp"
#include "ukta/pos.hpp"
#include "ukta/rng.hpp"

namespace ukta {

enum class Family { Basic, Diversity, Cohesion };

enum class Metric {
  Count,
  Density,
  TotalMorphemes,
  TotalWordpieces,
  TotalSentences,
  TotalParagraphs,
  MorphemesPerSentenceMean,
  MorphemesPerSentenceMax,
  WordpiecesPerSentenceMean,
  WordpiecesPerSentenceMax,
  SentencesPerParagraphMean,
  Ndw,
  Ttr,
  Rttr,
  Cttr,
  Msttr,
  Mattr,
  Mtld,
  Hdd,
  Vocd,
  Overlap,
  AvgSenSimilarity,
  AdjacentSenSimilarity,
  TopicSimilarity,
};

struct MetricInfo {
  Metric metric;
  std::string_view id;
  Family family;
  bool takes_filter;
};

inline constexpr std::array<MetricInfo, 24> kMetrics = {{
    {Metric::Count, "count", Family::Basic, true},
    {Metric::Density, "density", Family::Basic, true},
    {Metric::TotalMorphemes, "total_morphemes", Family::Basic, false},
    {Metric::TotalWordpieces, "total_wordpieces", Family::Basic, false},
    {Metric::TotalSentences, "total_sentences", Family::Basic, false},
    {Metric::TotalParagraphs, "total_paragraphs", Family::Basic, false},
    {Metric::MorphemesPerSentenceMean, "morphemes_per_sentence_mean", Family::Basic, false},
    {Metric::MorphemesPerSentenceMax, "morphemes_per_sentence_max", Family::Basic, false},
    {Metric::WordpiecesPerSentenceMean, "wordpieces_per_sentence_mean", Family::Basic, false},
    {Metric::WordpiecesPerSentenceMax, "wordpieces_per_sentence_max", Family::Basic, false},
    {Metric::SentencesPerParagraphMean, "sentences_per_paragraph_mean", Family::Basic, false},
    {Metric::Ndw, "ndw", Family::Diversity, true},
    {Metric::Ttr, "ttr", Family::Diversity, true},
    {Metric::Rttr, "rttr", Family::Diversity, true},
    {Metric::Cttr, "cttr", Family::Diversity, true},
    {Metric::Msttr, "msttr", Family::Diversity, true},
    {Metric::Mattr, "mattr", Family::Diversity, true},
    {Metric::Mtld, "mtld", Family::Diversity, true},
    {Metric::Hdd, "hdd", Family::Diversity, true},
    {Metric::Vocd, "vocd", Family::Diversity, true},
    {Metric::Overlap, "overlap", Family::Cohesion, false},
    {Metric::AvgSenSimilarity, "avg_sen_similarity", Family::Cohesion, false},
    {Metric::AdjacentSenSimilarity, "adjacent_sen_similarity", Family::Cohesion, false},
    {Metric::TopicSimilarity, "topic_similarity", Family::Cohesion, false},
}};

inline const MetricInfo& info(Metric m) {
  for (const auto& i : kMetrics)
    if (i.metric == m) return i;
  throw Error(ErrorCode::Precondition, "unregistered metric");
}

inline std::string_view to_string(Family f) {
  switch (f) {
    case Family::Basic: return "basic";
    case Family::Diversity: return "diversity";
    case Family::Cohesion: return "cohesion";
  }
  return "?";
}

inline std::optional<Family> parse_family(std::string_view s) {
  if (s == "basic") return Family::Basic;
  if (s == "diversity") return Family::Diversity;
  if (s == "cohesion") return Family::Cohesion;
  return std::nullopt;
}

// Denominator for densities.
enum class Basis { All, Content, Function };

// Lemma classes used by overlap features.
enum class LemmaClass { All, Content, Function };
enum class OverlapScope { Sentence, Paragraph };
enum class OverlapMode { Count, Binary };

inline std::string_view to_string(Basis b) {
  switch (b) {
    case Basis::All: return "all";
    case Basis::Content: return "content";
    case Basis::Function: return "function";
  }
  return "?";
}
inline std::string_view to_string(LemmaClass c) {
  switch (c) {
    case LemmaClass::All: return "all";
    case LemmaClass::Content: return "content";
    case LemmaClass::Function: return "function";
  }
  return "?";
}
inline std::string_view to_string(OverlapScope s) {
  return s == OverlapScope::Sentence ? "sentence" : "paragraph";
}
inline std::string_view to_string(OverlapMode m) {
  return m == OverlapMode::Count ? "count" : "binary";
}

struct OverlapSpec {
  OverlapScope scope = OverlapScope::Sentence;
  LemmaClass lemmas = LemmaClass::All;
  OverlapMode mode = OverlapMode::Count;
  bool normed = true;

  bool operator==(const OverlapSpec&) const = default;
};

struct FeatureEntry {
  std::string name;
  Family family = Family::Basic;
  std::optional<std::string> pos_filter;  // tag-class name, see tagclass::lookup
  Metric metric = Metric::Count;
  // metric-specific parameters
  Basis basis = Basis::All;
  OverlapSpec overlap;
  std::optional<std::size_t> window_n;
  std::optional<double> mtld_threshold;
  std::optional<std::size_t> hdd_sample;
  MtldVariant mtld_variant = MtldVariant::Bidirectional;

  TagSet tags() const {
    if (!pos_filter) return TagSet::all();
    return *tagclass::lookup(*pos_filter);
  }
};

struct FeatureRegistry {
  std::vector<FeatureEntry> entries;
  DiversityParams diversity;
  std::size_t keyword_count = 5;

  std::size_t size() const { return entries.size(); }

  std::optional<std::size_t> index_of(std::string_view name) const {
    for (std::size_t i = 0; i < entries.size(); ++i)
      if (entries[i].name == name) return i;
    return std::nullopt;
  }
};

// Values aligned with a registry; entries that could not be computed carry
// 0.0 and available = false.
struct FeatureVector {
  std::vector<double> values;
  std::vector<bool> available;

  std::size_t size() const { return values.size(); }
  bool operator==(const FeatureVector&) const = default;
};

inline nlohmann::ordered_json registry_to_json(const FeatureRegistry& r) {
  using J = nlohmann::ordered_json;
  J out;
  out["version"] = 1;
  out["diversity"] = {{"window_n", r.diversity.window_n},
                      {"mtld_threshold", r.diversity.mtld_threshold},
                      {"hdd_sample", r.diversity.hdd_sample},
                      {"vocd_min_n", r.diversity.vocd_min_n},
                      {"vocd_max_n", r.diversity.vocd_max_n},
                      {"vocd_trials", r.diversity.vocd_trials},
                      {"rng_seed", r.diversity.rng_seed}};
  out["keyword_count"] = r.keyword_count;
  J features = J::array();
  for (const auto& e : r.entries) {
    J f;
    f["name"] = e.name;
    f["family"] = std::string(to_string(e.family));
    f["pos_filter"] = e.pos_filter ? J(*e.pos_filter) : J(nullptr);
    f["metric"] = std::string(info(e.metric).id);
    J params = J::object();
    if (e.metric == Metric::Density) params["basis"] = std::string(to_string(e.basis));
    if (e.metric == Metric::Overlap) {
      params["scope"] = std::string(to_string(e.overlap.scope));
      params["lemmas"] = std::string(to_string(e.overlap.lemmas));
      params["mode"] = std::string(to_string(e.overlap.mode));
      params["normed"] = e.overlap.normed;
    }
    if (e.window_n) params["window_n"] = *e.window_n;
    if (e.mtld_threshold) params["mtld_threshold"] = *e.mtld_threshold;
    if (e.hdd_sample) params["hdd_sample"] = *e.hdd_sample;
    if (e.metric == Metric::Mtld && e.mtld_variant == MtldVariant::Literal)
      params["variant"] = "literal";
    f["params"] = params;
    features.push_back(f);
  }
  out["features"] = features;
  return out;
}

namespace detail {

template <typename Enum, std::size_t N>
Enum parse_choice(const nlohmann::ordered_json& params, const char* key, Enum fallback,
                  const std::array<std::pair<std::string_view, Enum>, N>& choices,
                  const std::string& where) {
  if (!params.contains(key)) return fallback;
  const auto& v = params[key];
  if (v.is_string())
    for (const auto& [name, value] : choices)
      if (v.get<std::string>() == name) return value;
  throw Error(ErrorCode::MalformedRecord, std::string("bad value for '") + key + "'", where);
}

}  // namespace detail

inline FeatureRegistry registry_from_json(const nlohmann::ordered_json& j) {
  FeatureRegistry r;
  const nlohmann::ordered_json* features = &j;
  if (j.is_object()) {
    if (j.contains("diversity")) {
      const auto& d = j["diversity"];
      r.diversity.window_n = d.value("window_n", r.diversity.window_n);
      r.diversity.mtld_threshold = d.value("mtld_threshold", r.diversity.mtld_threshold);
      r.diversity.hdd_sample = d.value("hdd_sample", r.diversity.hdd_sample);
      r.diversity.vocd_min_n = d.value("vocd_min_n", r.diversity.vocd_min_n);
      r.diversity.vocd_max_n = d.value("vocd_max_n", r.diversity.vocd_max_n);
      r.diversity.vocd_trials = d.value("vocd_trials", r.diversity.vocd_trials);
      r.diversity.rng_seed = d.value("rng_seed", r.diversity.rng_seed);
      if (!r.diversity.valid())
        throw Error(ErrorCode::MalformedRecord, "invalid diversity parameters", "/diversity");
    }
    r.keyword_count = j.value("keyword_count", r.keyword_count);
    if (!j.contains("features"))
      throw Error(ErrorCode::MalformedRecord, "registry needs 'features'", "/");
    features = &j["features"];
  }
  if (!features->is_array())
    throw Error(ErrorCode::MalformedRecord, "feature list must be an array", "/features");

  std::set<std::string> names;
  for (std::size_t i = 0; i < features->size(); ++i) {
    const auto& f = (*features)[i];
    const std::string where = "/features/" + std::to_string(i);
    if (!f.is_object() || !f.contains("name") || !f.contains("metric") || !f["name"].is_string() ||
        !f["metric"].is_string())
      throw Error(ErrorCode::MalformedRecord, "feature needs name and metric", where);
    FeatureEntry e;
    e.name = f["name"].get<std::string>();
    if (!names.insert(e.name).second)
      throw Error(ErrorCode::MalformedRecord, "duplicate feature name '" + e.name + "'", where);
    const auto metric_id = f["metric"].get<std::string>();
    const MetricInfo* mi = nullptr;
    for (const auto& m : kMetrics)
      if (m.id == metric_id) mi = &m;
    if (!mi) throw Error(ErrorCode::MalformedRecord, "unknown metric '" + metric_id + "'", where);
    e.metric = mi->metric;
    e.family = mi->family;
    if (f.contains("family")) {
      auto fam = f["family"].is_string() ? parse_family(f["family"].get<std::string>())
                                         : std::nullopt;
      if (!fam || *fam != mi->family)
        throw Error(ErrorCode::MalformedRecord, "family does not match metric", where);
    }
    if (f.contains("pos_filter") && !f["pos_filter"].is_null()) {
      if (!mi->takes_filter)
        throw Error(ErrorCode::MalformedRecord, "metric takes no pos_filter", where);
      auto cls = f["pos_filter"].get<std::string>();
      if (!tagclass::lookup(cls))
        throw Error(ErrorCode::MalformedRecord, "unknown tag class '" + cls + "'", where);
      e.pos_filter = cls;
    }
    const auto params = f.contains("params") ? f["params"] : nlohmann::ordered_json::object();
    using P = std::pair<std::string_view, Basis>;
    e.basis = detail::parse_choice(params, "basis", Basis::All,
                                   std::array{P{"all", Basis::All}, P{"content", Basis::Content},
                                              P{"function", Basis::Function}},
                                   where);
    using S = std::pair<std::string_view, OverlapScope>;
    e.overlap.scope = detail::parse_choice(
        params, "scope", OverlapScope::Sentence,
        std::array{S{"sentence", OverlapScope::Sentence}, S{"paragraph", OverlapScope::Paragraph}},
        where);
    using L = std::pair<std::string_view, LemmaClass>;
    e.overlap.lemmas = detail::parse_choice(
        params, "lemmas", LemmaClass::All,
        std::array{L{"all", LemmaClass::All}, L{"content", LemmaClass::Content},
                   L{"function", LemmaClass::Function}},
        where);
    using M = std::pair<std::string_view, OverlapMode>;
    e.overlap.mode = detail::parse_choice(
        params, "mode", OverlapMode::Count,
        std::array{M{"count", OverlapMode::Count}, M{"binary", OverlapMode::Binary}}, where);
    e.overlap.normed = params.value("normed", true);
    if (params.contains("window_n")) e.window_n = params["window_n"].get<std::size_t>();
    if (params.contains("mtld_threshold"))
      e.mtld_threshold = params["mtld_threshold"].get<double>();
    if (params.contains("hdd_sample")) e.hdd_sample = params["hdd_sample"].get<std::size_t>();
    using V = std::pair<std::string_view, MtldVariant>;
    e.mtld_variant = detail::parse_choice(
        params, "variant", MtldVariant::Bidirectional,
        std::array{V{"bidirectional", MtldVariant::Bidirectional},
                   V{"literal", MtldVariant::Literal}},
        where);
    r.entries.push_back(std::move(e));
  }
  return r;
}

// Stable 64-bit fingerprint of the canonical registry JSON, as 16 hex digits.
inline std::string registry_fingerprint(const FeatureRegistry& r) {
  const auto text = registry_to_json(r).dump();
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a64(text.data(), text.size())));
  return buf;
}

namespace detail {

inline std::string density_name(std::string_view cls, Basis basis) {
  std::string name(cls);
  if (cls == "CL" || cls == "FL") {
    if (basis != Basis::All) name += basis == Basis::Content ? "CL" : "FL";
  } else {
    name += basis == Basis::All ? "L" : (basis == Basis::Content ? "CL" : "FL");
  }
  return name + "_Den";
}

}  // namespace detail

// Default feature set: basic counts/densities/lengths, nine diversity
// measures over the global lemma stream and 23 tag classes, and sentence /
// paragraph overlap plus embedding similarity for cohesion.
inline FeatureRegistry default_registry() {
  FeatureRegistry r;
  auto add = [&](FeatureEntry e) { r.entries.push_back(std::move(e)); };
  auto simple = [&](std::string name, Metric m) {
    FeatureEntry e;
    e.name = std::move(name);
    e.metric = m;
    e.family = info(m).family;
    add(std::move(e));
  };

  simple("Morph_Cnt", Metric::TotalMorphemes);
  simple("WP_Cnt", Metric::TotalWordpieces);
  simple("Sen_Cnt", Metric::TotalSentences);
  simple("Para_Cnt", Metric::TotalParagraphs);
  simple("MorphPerSen_Mean", Metric::MorphemesPerSentenceMean);
  simple("MorphPerSen_Max", Metric::MorphemesPerSentenceMax);
  simple("WPPerSen_Mean", Metric::WordpiecesPerSentenceMean);
  simple("WPPerSen_Max", Metric::WordpiecesPerSentenceMax);
  simple("SenPerPara_Mean", Metric::SentencesPerParagraphMean);

  for (std::string_view cls : {"CL", "FL", "NN", "V", "M", "IC", "J", "E", "X", "S"}) {
    FeatureEntry e;
    e.name = std::string(cls) + "_Cnt";
    e.metric = Metric::Count;
    e.pos_filter = std::string(cls);
    add(std::move(e));
  }

  auto density = [&](std::string_view cls, Basis basis) {
    FeatureEntry e;
    e.name = detail::density_name(cls, basis);
    e.metric = Metric::Density;
    e.pos_filter = std::string(cls);
    e.basis = basis;
    add(std::move(e));
  };
  for (std::string_view cls : {"CL", "FL", "NN", "NNG", "NNP", "NNB", "NP", "NR", "V", "VV", "VA",
                               "VX", "VCP", "MM", "MA", "IC", "J", "E", "X", "XR", "S", "SL"})
    density(cls, Basis::All);
  for (std::string_view cls : {"NN", "V", "MM", "MA", "IC", "XR"}) density(cls, Basis::Content);
  for (std::string_view cls : {"J", "E", "X"}) density(cls, Basis::Function);

  constexpr std::array<std::pair<std::string_view, Metric>, 9> kDiversity = {{
      {"NDW", Metric::Ndw},
      {"TTR", Metric::Ttr},
      {"RTTR", Metric::Rttr},
      {"CTTR", Metric::Cttr},
      {"MSTTR", Metric::Msttr},
      {"MATTR", Metric::Mattr},
      {"MTLD", Metric::Mtld},
      {"HDD", Metric::Hdd},
      {"VOCDD", Metric::Vocd},
  }};
  // Global stream: every morpheme except signs.
  for (const auto& [suffix, metric] : kDiversity) {
    FeatureEntry e;
    e.name = std::string(suffix);
    e.family = Family::Diversity;
    e.metric = metric;
    e.pos_filter = "LEX";
    add(std::move(e));
  }
  for (std::string_view cls : {"CL", "FL", "NN", "NNG", "NNP", "NNB", "NP", "NR", "V", "VV", "VA",
                               "VX", "MM", "MA", "MAG", "IC", "J", "JK", "JX", "E", "EC", "EF",
                               "X"}) {
    for (const auto& [suffix, metric] : kDiversity) {
      FeatureEntry e;
      e.name = std::string(cls) + "_" + std::string(suffix);
      e.family = Family::Diversity;
      e.metric = metric;
      e.pos_filter = std::string(cls);
      add(std::move(e));
    }
  }

  for (auto scope : {OverlapScope::Sentence, OverlapScope::Paragraph}) {
    for (auto mode : {OverlapMode::Count, OverlapMode::Binary}) {
      for (auto lemmas : {LemmaClass::All, LemmaClass::Content, LemmaClass::Function}) {
        for (bool normed : {false, true}) {
          FeatureEntry e;
          std::string prefix = mode == OverlapMode::Count ? "A" : "AB";
          prefix += scope == OverlapScope::Sentence ? "SO" : "PO";
          const char* cls = lemmas == LemmaClass::All       ? "AL"
                            : lemmas == LemmaClass::Content ? "CL"
                                                            : "FL";
          e.name = prefix + "_" + cls + (normed ? "N" : "");
          e.family = Family::Cohesion;
          e.metric = Metric::Overlap;
          e.overlap = {scope, lemmas, mode, normed};
          add(std::move(e));
        }
      }
    }
  }
  simple("AvgSenSimilarity", Metric::AvgSenSimilarity);
  simple("AdjSenSimilarity", Metric::AdjacentSenSimilarity);
  simple("TopicSimilarity", Metric::TopicSimilarity);
  return r;
}

}  // namespace ukta
