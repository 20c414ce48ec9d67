#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ukta/error.hpp"
#include "ukta/pos.hpp"
#include "ukta/rng.hpp"
#include "ukta/text.hpp"

namespace ukta {

using Vec = std::vector<double>;

// Unit to embed: the surface text (for services that tokenize themselves)
// and the lemma bag (for the built-in hashed provider).
struct EmbedItem {
  std::string text;
  std::vector<std::pair<std::string, MajorClass>> lemmas;
};

class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual std::string kind() const = 0;
  virtual std::size_t dim() const = 0;
  // One vector per item, in order.
  virtual std::vector<Vec> embed(std::span<const EmbedItem> items) const = 0;
};

inline double norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

inline void normalize(Vec& v) {
  const double n = norm(v);
  if (n > 0.0)
    for (double& x : v) x /= n;
}

// Clamped to [-1, 1]; 0 when either vector is zero.
inline double cosine(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size())
    throw Error(ErrorCode::ShapeMismatch, "cosine of vectors with different dims");
  double dot = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) dot += a[i] * b[i];
  const double d = norm(a) * norm(b);
  if (d == 0.0) return 0.0;
  return std::clamp(dot / d, -1.0, 1.0);
}

// Hashed bag-of-morphemes. Each (lemma, major class) maps to a fixed
// pseudo-random vector in [-1, 1]^dim; an item embeds to the normalized sum.
class HashEmbedding final : public EmbeddingProvider {
 public:
  static constexpr std::uint64_t kDefaultKey = 0x554B544145424431ULL;

  explicit HashEmbedding(std::size_t dim = 64, std::uint64_t key = kDefaultKey)
      : dim_(dim), key_(key) {
    if (dim < 8) throw Error(ErrorCode::Precondition, "embedding dim must be >= 8");
  }

  std::string kind() const override { return "builtin-hash"; }
  std::size_t dim() const override { return dim_; }

  Vec lemma_vector(std::string_view lemma, MajorClass cls) const {
    std::uint64_t h = fnv1a64(lemma.data(), lemma.size(), key_);
    const auto c = static_cast<unsigned char>(cls);
    h = fnv1a64(&c, 1, h);
    Vec v(dim_);
    for (std::size_t i = 0; i < dim_; ++i) {
      const std::uint64_t bits = splitmix64(h ^ splitmix64(i));
      v[i] = static_cast<double>(bits >> 11) * 0x1.0p-52 - 1.0;
    }
    return v;
  }

  std::vector<Vec> embed(std::span<const EmbedItem> items) const override {
    std::vector<Vec> out;
    out.reserve(items.size());
    for (const auto& item : items) {
      Vec sum(dim_, 0.0);
      for (const auto& [lemma, cls] : item.lemmas) {
        auto v = lemma_vector(lemma, cls);
        for (std::size_t i = 0; i < dim_; ++i) sum[i] += v[i];
      }
      normalize(sum);
      out.push_back(std::move(sum));
    }
    return out;
  }

 private:
  std::size_t dim_;
  std::uint64_t key_;
};

// Lemma bag of a sentence: content lemmas, falling back to all lexical
// lemmas and then to every morpheme so no sentence embeds to nothing.
inline EmbedItem embed_item(const Sentence& sentence) {
  EmbedItem item;
  for (std::size_t i = 0; i < sentence.wordpieces.size(); ++i) {
    if (i > 0) item.text += ' ';
    item.text += sentence.wordpieces[i].raw;
  }
  for (const auto& filter : {tagclass::content(), tagclass::lexical(), TagSet::all()}) {
    sentence.for_each_morpheme([&](const Morpheme& m) {
      if (filter.contains(m.tag)) item.lemmas.emplace_back(m.lemma, pos_category(m.tag));
    });
    if (!item.lemmas.empty()) break;
  }
  return item;
}

inline Vec embed_sentence(const Sentence& sentence, const EmbeddingProvider& provider) {
  if (sentence.wordpieces.empty())
    throw Error(ErrorCode::Precondition, "cannot embed an empty sentence");
  const EmbedItem item = embed_item(sentence);
  return std::move(provider.embed(std::span(&item, 1)).front());
}

inline std::vector<Vec> embed_sentences(const Essay& essay, const EmbeddingProvider& provider) {
  std::vector<EmbedItem> items;
  for (const auto* s : essay.sentences()) items.push_back(embed_item(*s));
  if (items.empty()) throw Error(ErrorCode::EmptyEssay, "essay has no sentences");
  return provider.embed(items);
}

// Mean of the sentence vectors, re-normalized.
inline Vec mean_embedding(std::span<const Vec> vectors) {
  if (vectors.empty()) throw Error(ErrorCode::EmptyEssay, "nothing to average");
  Vec mean(vectors.front().size(), 0.0);
  for (const auto& v : vectors) {
    if (v.size() != mean.size())
      throw Error(ErrorCode::ShapeMismatch, "embedding dims differ");
    for (std::size_t i = 0; i < v.size(); ++i) mean[i] += v[i];
  }
  for (double& x : mean) x /= static_cast<double>(vectors.size());
  normalize(mean);
  return mean;
}

inline Vec embed_text(const Essay& essay, const EmbeddingProvider& provider) {
  return mean_embedding(embed_sentences(essay, provider));
}

}  // namespace ukta
