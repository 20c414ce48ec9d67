#pragma once

#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "ukta/pretagged.hpp"
#include "ukta/text.hpp"

namespace ukta::testing {

inline std::string data_path(const std::string& name) {
  return std::string(UKTA_TEST_DATA_DIR) + "/" + name;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline Essay appendix_correct() {
  return parse_pretagged(read_file(data_path("appendix_correct.tsv")), TextFormat::Tsv);
}

inline Essay appendix_erroneous() {
  return parse_pretagged(read_file(data_path("appendix_erroneous.tsv")), TextFormat::Tsv);
}

// Builds an essay from sentences written as "lemma/TAG lemma/TAG ...", one
// morpheme per wordpiece; paragraphs are separated by a "|" sentence.
inline Essay essay_from(const std::vector<std::string>& sentences) {
  std::string tsv;
  bool first = true;
  for (const auto& s : sentences) {
    if (s == "|") {
      tsv += "\n";
      continue;
    }
    if (!first) tsv += "\n";
    first = false;
    std::istringstream in(s);
    std::string item;
    while (in >> item) {
      auto slash = item.rfind('/');
      tsv += item.substr(0, slash) + "\t" + item + "\n";
    }
  }
  return parse_pretagged(tsv, TextFormat::Tsv);
}

// Random essays for round-trip and invariance properties. `lemma_only`
// keeps surface == lemma so the TSV form is lossless.
inline Essay random_essay(std::mt19937_64& rng, bool lemma_only, std::size_t max_paragraphs = 3,
                          std::size_t max_sentences = 4, std::size_t max_wordpieces = 6) {
  static const std::vector<std::string> syllables = {"가", "나", "다", "라", "마", "바", "사",
                                                     "아", "자", "하", "는", "을", "+", "/"};
  auto pick = [&](std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); };
  auto word = [&] {
    std::string w;
    const auto len = 1 + pick(3);
    for (std::size_t i = 0; i < len; ++i) w += syllables[pick(syllables.size())];
    return w;
  };
  Essay e;
  e.id = "rand" + std::to_string(pick(100000));
  if (pick(2)) e.meta.topic = "topic" + std::to_string(pick(5));
  if (pick(3) == 0) e.meta.grade = "g" + std::to_string(pick(12));
  if (pick(2)) {
    RubricScores s{};
    for (auto& v : s) v = static_cast<int>(pick(4));
    e.labels = s;
  }
  const auto paragraphs = 1 + pick(max_paragraphs);
  for (std::size_t p = 0; p < paragraphs; ++p) {
    Paragraph para;
    const auto sents = 1 + pick(max_sentences);
    for (std::size_t s = 0; s < sents; ++s) {
      Sentence sent;
      const auto wps = 1 + pick(max_wordpieces);
      for (std::size_t w = 0; w < wps; ++w) {
        Wordpiece wp;
        const auto morphs = 1 + pick(3);
        for (std::size_t m = 0; m < morphs; ++m) {
          Morpheme morph;
          morph.lemma = word();
          morph.surface = lemma_only || pick(2) ? morph.lemma : word();
          morph.tag = static_cast<PosTag>(pick(kTagCount));
          wp.raw += morph.surface;
          wp.morphemes.push_back(morph);
        }
        sent.wordpieces.push_back(std::move(wp));
      }
      para.sentences.push_back(std::move(sent));
    }
    e.paragraphs.push_back(std::move(para));
  }
  e.renumber();
  return e;
}

}  // namespace ukta::testing
