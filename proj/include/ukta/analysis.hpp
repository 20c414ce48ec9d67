#pragma once

#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "ukta/basic.hpp"
#include "ukta/cohesion.hpp"
#include "ukta/diversity.hpp"
#include "ukta/embeddings.hpp"
#include "ukta/error.hpp"
#include "ukta/registry.hpp"
#include "ukta/text.hpp"

namespace ukta {

// Results of one feature family, keyed by registry name; nullopt marks an
// undefined value (e.g. HD-D on a text shorter than its sample size).
using FamilyValues = std::unordered_map<std::string, std::optional<double>>;

inline TokenSeq lemma_stream(const Essay& essay, const TagSet& filter, LemmaInterner& interner) {
  TokenSeq seq;
  essay.for_each_morpheme([&](const Morpheme& m) {
    if (filter.contains(m.tag)) seq.tokens.push_back(interner.intern(m.lemma));
  });
  return seq;
}

inline FamilyValues compute_basic(const Essay& essay, const FeatureRegistry& registry) {
  FamilyValues out;
  const auto stats = length_stats(essay);
  for (const auto& e : registry.entries) {
    if (e.family != Family::Basic) continue;
    std::optional<double> v;
    switch (e.metric) {
      case Metric::Count: v = static_cast<double>(count_class(essay, e.tags())); break;
      case Metric::Density: v = density(essay, e.tags(), e.basis); break;
      case Metric::TotalMorphemes: v = static_cast<double>(stats.total_morphemes); break;
      case Metric::TotalWordpieces: v = static_cast<double>(stats.total_wordpieces); break;
      case Metric::TotalSentences: v = static_cast<double>(stats.total_sentences); break;
      case Metric::TotalParagraphs: v = static_cast<double>(stats.total_paragraphs); break;
      case Metric::MorphemesPerSentenceMean: v = stats.morphemes_per_sentence_mean; break;
      case Metric::MorphemesPerSentenceMax:
        v = static_cast<double>(stats.morphemes_per_sentence_max);
        break;
      case Metric::WordpiecesPerSentenceMean: v = stats.wordpieces_per_sentence_mean; break;
      case Metric::WordpiecesPerSentenceMax:
        v = static_cast<double>(stats.wordpieces_per_sentence_max);
        break;
      case Metric::SentencesPerParagraphMean: v = stats.sentences_per_paragraph_mean; break;
      default:
        throw Error(ErrorCode::RegistryMismatch, "metric is not a basic feature", e.name);
    }
    out.emplace(e.name, v);
  }
  return out;
}

inline FamilyValues compute_diversity(const Essay& essay, const FeatureRegistry& registry) {
  FamilyValues out;
  LemmaInterner interner;
  std::map<std::string, TokenSeq> streams;
  for (const auto& e : registry.entries) {
    if (e.family != Family::Diversity) continue;
    const std::string key = e.pos_filter.value_or("*");
    auto it = streams.find(key);
    if (it == streams.end()) it = streams.emplace(key, lemma_stream(essay, e.tags(), interner)).first;
    const TokenSeq& seq = it->second;
    const auto& p = registry.diversity;
    std::optional<double> v;
    switch (e.metric) {
      case Metric::Ndw:
        if (auto n = ndw(seq)) v = static_cast<double>(*n);
        break;
      case Metric::Ttr: v = ttr(seq); break;
      case Metric::Rttr: v = rttr(seq); break;
      case Metric::Cttr: v = cttr(seq); break;
      case Metric::Msttr: v = msttr(seq, e.window_n.value_or(p.window_n)); break;
      case Metric::Mattr: v = mattr(seq, e.window_n.value_or(p.window_n)); break;
      case Metric::Mtld:
        v = mtld(seq, e.mtld_threshold.value_or(p.mtld_threshold), e.mtld_variant);
        break;
      case Metric::Hdd: v = hdd(seq, e.hdd_sample.value_or(p.hdd_sample)); break;
      case Metric::Vocd: v = vocd(seq, p); break;
      default:
        throw Error(ErrorCode::RegistryMismatch, "metric is not a diversity feature", e.name);
    }
    out.emplace(e.name, v);
  }
  return out;
}

// Cohesion features. `topic` receives the topic report when the essay has
// at least two sentences and some content lemma.
inline FamilyValues compute_cohesion(const Essay& essay, const FeatureRegistry& registry,
                                     const EmbeddingProvider& provider,
                                     std::optional<TopicReport>* topic = nullptr) {
  FamilyValues out;
  std::optional<TopicReport> report;
  bool need_topic = topic != nullptr;
  for (const auto& e : registry.entries)
    need_topic = need_topic || (e.family == Family::Cohesion && e.metric != Metric::Overlap);
  if (need_topic && essay.sentence_count() >= 2) {
    try {
      report = topic_consistency(essay, provider, registry.keyword_count);
    } catch (const Error& ex) {
      if (ex.code() != ErrorCode::NoCandidates && ex.code() != ErrorCode::UndefinedFeature) throw;
    }
  }
  for (const auto& e : registry.entries) {
    if (e.family != Family::Cohesion) continue;
    std::optional<double> v;
    switch (e.metric) {
      case Metric::Overlap: {
        auto o = adjacent_overlap(essay, e.overlap.scope, e.overlap.lemmas, e.overlap.mode);
        if (o) v = e.overlap.normed ? o->normed : o->raw;
        break;
      }
      case Metric::AvgSenSimilarity:
        if (report) v = report->avg_sen_similarity;
        break;
      case Metric::AdjacentSenSimilarity:
        if (report) v = report->adjacent_similarity;
        break;
      case Metric::TopicSimilarity:
        if (report) v = report->topic_similarity;
        break;
      default:
        throw Error(ErrorCode::RegistryMismatch, "metric is not a cohesion feature", e.name);
    }
    out.emplace(e.name, v);
  }
  if (topic) *topic = std::move(report);
  return out;
}

// Lays family results out in registry order. Every registered entry must
// be present in its family's results.
inline FeatureVector assemble(const Essay& /*essay*/, const FeatureRegistry& registry,
                              const FamilyValues& basic, const FamilyValues& diversity,
                              const FamilyValues& cohesion) {
  FeatureVector fv;
  fv.values.reserve(registry.size());
  fv.available.reserve(registry.size());
  for (const auto& e : registry.entries) {
    const FamilyValues& family = e.family == Family::Basic       ? basic
                                 : e.family == Family::Diversity ? diversity
                                                                 : cohesion;
    auto it = family.find(e.name);
    if (it == family.end())
      throw Error(ErrorCode::RegistryMismatch,
                  std::string(to_string(e.family)) + " results omit a registered feature", e.name);
    fv.values.push_back(it->second.value_or(0.0));
    fv.available.push_back(it->second.has_value());
  }
  return fv;
}

struct Analysis {
  FeatureVector features;
  std::vector<Keyword> keywords;
  std::optional<TopicReport> topic;
};

inline Analysis analyze(const Essay& essay, const FeatureRegistry& registry,
                        const EmbeddingProvider& provider) {
  Analysis a;
  const auto basic = compute_basic(essay, registry);
  const auto diversity = compute_diversity(essay, registry);
  const auto cohesion = compute_cohesion(essay, registry, provider, &a.topic);
  a.features = assemble(essay, registry, basic, diversity, cohesion);
  if (a.topic) {
    a.keywords = a.topic->keywords;
  } else {
    try {
      a.keywords = extract_keywords(essay, provider, registry.keyword_count);
    } catch (const Error& ex) {
      if (ex.code() != ErrorCode::NoCandidates) throw;
    }
  }
  return a;
}

}  // namespace ukta
