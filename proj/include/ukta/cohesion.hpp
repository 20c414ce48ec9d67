#pragma once

#include <algorithm>
#include <iterator>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "ukta/embeddings.hpp"
#include "ukta/error.hpp"
#include "ukta/pos.hpp"
#include "ukta/registry.hpp"
#include "ukta/text.hpp"

namespace ukta {

struct OverlapValue {
  double raw = 0.0;
  double normed = 0.0;  // raw / number of adjacent pairs
};

inline TagSet lemma_class_tags(LemmaClass c) {
  switch (c) {
    case LemmaClass::Content: return tagclass::content();
    case LemmaClass::Function: return tagclass::function();
    case LemmaClass::All: break;
  }
  return tagclass::lexical();
}

using LemmaSet = std::set<std::string>;

// Adjacent overlap over arbitrary units. Count mode sums the number of
// shared lemma types per adjacent pair; binary mode counts pairs sharing
// at least one. Undefined for fewer than two units.
inline std::optional<OverlapValue> adjacent_overlap(const std::vector<LemmaSet>& units,
                                                    OverlapMode mode) {
  if (units.size() < 2) return std::nullopt;
  OverlapValue v;
  for (std::size_t i = 0; i + 1 < units.size(); ++i) {
    std::size_t shared = 0;
    auto a = units[i].begin(), b = units[i + 1].begin();
    while (a != units[i].end() && b != units[i + 1].end()) {
      if (*a < *b) {
        ++a;
      } else if (*b < *a) {
        ++b;
      } else {
        ++shared;
        ++a;
        ++b;
      }
    }
    v.raw += mode == OverlapMode::Count ? static_cast<double>(shared) : (shared > 0 ? 1.0 : 0.0);
  }
  v.normed = v.raw / static_cast<double>(units.size() - 1);
  return v;
}

inline std::vector<LemmaSet> overlap_units(const Essay& essay, OverlapScope scope,
                                           LemmaClass cls) {
  const TagSet tags = lemma_class_tags(cls);
  std::vector<LemmaSet> units;
  auto collect = [&](const Sentence& s, LemmaSet& into) {
    s.for_each_morpheme([&](const Morpheme& m) {
      if (tags.contains(m.tag)) into.insert(m.lemma);
    });
  };
  for (const auto& p : essay.paragraphs) {
    if (scope == OverlapScope::Paragraph) units.emplace_back();
    for (const auto& s : p.sentences) {
      if (scope == OverlapScope::Sentence) units.emplace_back();
      collect(s, units.back());
    }
  }
  return units;
}

inline std::optional<OverlapValue> adjacent_overlap(const Essay& essay, OverlapScope scope,
                                                    LemmaClass cls, OverlapMode mode) {
  return adjacent_overlap(overlap_units(essay, scope, cls), mode);
}

struct Keyword {
  std::string phrase;  // content lemmas joined by a space
  double score = 0.0;  // cosine to the document embedding
};

struct TopicReport {
  std::vector<Keyword> keywords;
  std::size_t topic_sentence = 0;
  double avg_sen_similarity = 0.0;  // topic sentence vs every other sentence
  double adjacent_similarity = 0.0;  // mean over consecutive sentence pairs
  double topic_similarity = 0.0;     // topic sentence vs keyword centroid
};

namespace detail {

struct Candidate {
  EmbedItem item;
  std::string key;
};

// Content-lemma unigrams and within-sentence bigrams, first-occurrence order.
inline std::vector<Candidate> keyword_candidates(const Essay& essay) {
  std::vector<Candidate> out;
  std::unordered_map<std::string, bool> seen;
  const TagSet content = tagclass::content();
  auto push = [&](std::vector<std::pair<std::string, MajorClass>> lemmas) {
    Candidate c;
    for (std::size_t i = 0; i < lemmas.size(); ++i) {
      if (i > 0) c.item.text += ' ';
      c.item.text += lemmas[i].first;
      c.key += lemmas[i].first;
      c.key += '\x1f';
      c.key += static_cast<char>('0' + static_cast<int>(lemmas[i].second));
      c.key += '\x1e';
    }
    c.item.lemmas = std::move(lemmas);
    if (seen.emplace(c.key, true).second) out.push_back(std::move(c));
  };
  for (const auto* s : essay.sentences()) {
    std::vector<std::pair<std::string, MajorClass>> seq;
    s->for_each_morpheme([&](const Morpheme& m) {
      if (content.contains(m.tag)) seq.emplace_back(m.lemma, pos_category(m.tag));
    });
    for (std::size_t i = 0; i < seq.size(); ++i) {
      push({seq[i]});
      if (i + 1 < seq.size()) push({seq[i], seq[i + 1]});
    }
  }
  return out;
}

struct RankedKeywords {
  std::vector<Keyword> keywords;
  std::vector<Vec> vectors;
};

inline RankedKeywords rank_keywords(const Essay& essay, const EmbeddingProvider& provider,
                                    std::size_t k) {
  auto candidates = keyword_candidates(essay);
  if (candidates.empty())
    throw Error(ErrorCode::NoCandidates, "essay has no content lemmas");
  std::vector<EmbedItem> items;
  for (const auto& c : candidates) items.push_back(c.item);
  const auto vectors = provider.embed(items);
  const Vec doc = embed_text(essay, provider);
  std::vector<std::size_t> order(candidates.size());
  std::vector<double> scores(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    order[i] = i;
    scores[i] = cosine(vectors[i], doc);
  }
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  RankedKeywords out;
  for (std::size_t r = 0; r < std::min(k, order.size()); ++r) {
    out.keywords.push_back({candidates[order[r]].item.text, scores[order[r]]});
    out.vectors.push_back(vectors[order[r]]);
  }
  return out;
}

}  // namespace detail

// Top-k content n-grams (n <= 2) by cosine to the document embedding.
inline std::vector<Keyword> extract_keywords(const Essay& essay, const EmbeddingProvider& provider,
                                             std::size_t k) {
  return detail::rank_keywords(essay, provider, k).keywords;
}

// Picks the sentence closest to the keyword centroid (earliest on ties) and
// measures how similar the remaining sentences are to it.
inline TopicReport topic_consistency(const Essay& essay, const EmbeddingProvider& provider,
                                     std::size_t k = 5) {
  const auto sentence_vecs = embed_sentences(essay, provider);
  if (sentence_vecs.size() < 2)
    throw Error(ErrorCode::UndefinedFeature, "topic consistency needs two or more sentences");
  auto ranked = detail::rank_keywords(essay, provider, k);
  const Vec centroid = mean_embedding(ranked.vectors);

  TopicReport report;
  report.keywords = std::move(ranked.keywords);
  double best = -2.0;
  for (std::size_t i = 0; i < sentence_vecs.size(); ++i) {
    const double c = cosine(sentence_vecs[i], centroid);
    if (c > best) {
      best = c;
      report.topic_sentence = i;
    }
  }
  report.topic_similarity = best;
  double sum = 0.0;
  for (std::size_t i = 0; i < sentence_vecs.size(); ++i)
    if (i != report.topic_sentence) sum += cosine(sentence_vecs[report.topic_sentence], sentence_vecs[i]);
  report.avg_sen_similarity = sum / static_cast<double>(sentence_vecs.size() - 1);
  double adj = 0.0;
  for (std::size_t i = 0; i + 1 < sentence_vecs.size(); ++i)
    adj += cosine(sentence_vecs[i], sentence_vecs[i + 1]);
  report.adjacent_similarity = adj / static_cast<double>(sentence_vecs.size() - 1);
  return report;
}

}  // namespace ukta
