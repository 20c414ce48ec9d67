#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ukta/pos.hpp"
#include "ukta/registry.hpp"
#include "ukta/text.hpp"

namespace ukta {

inline std::size_t count_class(const Essay& essay, const TagSet& cls) {
  std::size_t n = 0;
  essay.for_each_morpheme([&](const Morpheme& m) {
    if (cls.contains(m.tag)) ++n;
  });
  return n;
}

inline TagSet basis_tags(Basis basis) {
  switch (basis) {
    case Basis::Content: return tagclass::content();
    case Basis::Function: return tagclass::function();
    case Basis::All: break;
  }
  return TagSet::all();
}

// count(cls) / count(basis). Undefined (nullopt) when the basis is empty.
inline std::optional<double> density(const Essay& essay, const TagSet& cls, Basis basis) {
  const auto denom = count_class(essay, basis_tags(basis));
  if (denom == 0) return std::nullopt;
  return static_cast<double>(count_class(essay, cls & basis_tags(basis))) /
         static_cast<double>(denom);
}

struct LengthStats {
  std::size_t total_morphemes = 0;
  std::size_t total_wordpieces = 0;
  std::size_t total_sentences = 0;
  std::size_t total_paragraphs = 0;
  double morphemes_per_sentence_mean = 0.0;
  std::size_t morphemes_per_sentence_max = 0;
  double wordpieces_per_sentence_mean = 0.0;
  std::size_t wordpieces_per_sentence_max = 0;
  double sentences_per_paragraph_mean = 0.0;
};

inline LengthStats length_stats(const Essay& essay) {
  LengthStats s;
  s.total_paragraphs = essay.paragraphs.size();
  for (const auto& p : essay.paragraphs) {
    for (const auto& sent : p.sentences) {
      ++s.total_sentences;
      const auto morphs = sent.morpheme_count();
      s.total_morphemes += morphs;
      s.total_wordpieces += sent.wordpieces.size();
      s.morphemes_per_sentence_max = std::max(s.morphemes_per_sentence_max, morphs);
      s.wordpieces_per_sentence_max =
          std::max(s.wordpieces_per_sentence_max, sent.wordpieces.size());
    }
  }
  if (s.total_sentences > 0) {
    const auto n = static_cast<double>(s.total_sentences);
    s.morphemes_per_sentence_mean = static_cast<double>(s.total_morphemes) / n;
    s.wordpieces_per_sentence_mean = static_cast<double>(s.total_wordpieces) / n;
  }
  if (s.total_paragraphs > 0)
    s.sentences_per_paragraph_mean =
        static_cast<double>(s.total_sentences) / static_cast<double>(s.total_paragraphs);
  return s;
}

// Sorted, de-duplicated indices of the sentences containing `lemma`.
inline std::vector<std::size_t> occurrence_index(const Essay& essay, std::string_view lemma) {
  std::vector<std::size_t> out;
  for (const auto* s : essay.sentences()) {
    bool hit = false;
    s->for_each_morpheme([&](const Morpheme& m) { hit = hit || m.lemma == lemma; });
    if (hit) out.push_back(s->index);
  }
  return out;
}

struct MorphemeOccurrence {
  std::string lemma;
  PosTag tag{};
  std::size_t count = 0;
  std::vector<std::size_t> sentences;
};

// Every (lemma, tag) pair in first-occurrence order with the sentences it
// appears in.
inline std::vector<MorphemeOccurrence> occurrence_table(const Essay& essay) {
  std::vector<MorphemeOccurrence> table;
  std::unordered_map<std::string, std::size_t> slot;
  for (const auto* s : essay.sentences()) {
    s->for_each_morpheme([&](const Morpheme& m) {
      std::string key = m.lemma;
      key += '/';
      key += to_string(m.tag);
      auto [it, inserted] = slot.try_emplace(key, table.size());
      if (inserted) table.push_back({m.lemma, m.tag, 0, {}});
      auto& row = table[it->second];
      ++row.count;
      if (row.sentences.empty() || row.sentences.back() != s->index)
        row.sentences.push_back(s->index);
    });
  }
  return table;
}

}  // namespace ukta
