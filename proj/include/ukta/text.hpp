#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ukta/pos.hpp"
#include "ukta/rubric.hpp"

namespace ukta {

struct Morpheme {
  std::string surface;
  std::string lemma;  // dictionary form; type identity for diversity metrics
  PosTag tag{};

  bool operator==(const Morpheme&) const = default;
};

// A whitespace-delimited unit as written (eojeol).
struct Wordpiece {
  std::string raw;
  std::vector<Morpheme> morphemes;

  bool operator==(const Wordpiece&) const = default;
};

struct Sentence {
  std::size_t index = 0;  // global, contiguous across the essay
  std::vector<Wordpiece> wordpieces;

  std::size_t morpheme_count() const {
    std::size_t n = 0;
    for (const auto& w : wordpieces) n += w.morphemes.size();
    return n;
  }

  template <typename F>
  void for_each_morpheme(F&& f) const {
    for (const auto& w : wordpieces)
      for (const auto& m : w.morphemes) f(m);
  }

  bool operator==(const Sentence&) const = default;
};

struct Paragraph {
  std::size_t ordinal = 0;
  std::vector<Sentence> sentences;

  bool operator==(const Paragraph&) const = default;
};

struct EssayMeta {
  std::optional<std::string> topic;
  std::optional<std::string> grade;

  bool operator==(const EssayMeta&) const = default;
};

struct Essay {
  std::string id;
  std::vector<Paragraph> paragraphs;
  EssayMeta meta;
  std::optional<RubricScores> labels;

  std::size_t sentence_count() const {
    std::size_t n = 0;
    for (const auto& p : paragraphs) n += p.sentences.size();
    return n;
  }

  std::size_t morpheme_count() const {
    std::size_t n = 0;
    for (const auto& p : paragraphs)
      for (const auto& s : p.sentences) n += s.morpheme_count();
    return n;
  }

  // Sentences in document order.
  std::vector<const Sentence*> sentences() const {
    std::vector<const Sentence*> out;
    for (const auto& p : paragraphs)
      for (const auto& s : p.sentences) out.push_back(&s);
    return out;
  }

  template <typename F>
  void for_each_morpheme(F&& f) const {
    for (const auto& p : paragraphs)
      for (const auto& s : p.sentences) s.for_each_morpheme(f);
  }

  // Re-number paragraph ordinals and sentence indices contiguously.
  void renumber() {
    std::size_t next = 0;
    for (std::size_t p = 0; p < paragraphs.size(); ++p) {
      paragraphs[p].ordinal = p;
      for (auto& s : paragraphs[p].sentences) s.index = next++;
    }
  }

  bool operator==(const Essay&) const = default;
};

}  // namespace ukta
