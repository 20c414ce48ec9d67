#pragma once

// Metrics (accuracy, QWK Eq. 9), Table-1-shaped reports, topic-stratified
// splits, the synthetic corpus generator and the baseline-vs-full ablation.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "ukta/analysis.hpp"
#include "ukta/error.hpp"
#include "ukta/registry.hpp"
#include "ukta/rng.hpp"
#include "ukta/rubric.hpp"
#include "ukta/scorer.hpp"
#include "ukta/text.hpp"

namespace ukta {

// ---------------------------------------------------------------- metrics

inline double accuracy(std::span<const int> pred, std::span<const int> gold) {
  if (pred.size() != gold.size())
    throw Error(ErrorCode::LengthMismatch, "prediction and gold lists differ in length");
  if (pred.empty()) throw Error(ErrorCode::LengthMismatch, "no ratings to compare");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) hits += pred[i] == gold[i];
  return static_cast<double>(hits) / static_cast<double>(pred.size());
}

// Observed and expected K x K tables for ratings in [min_rating, max_rating];
// rows index the first rater (pred), columns the second (gold).
struct ContingencyTable {
  int min_rating = 0;
  int k = 0;
  Eigen::MatrixXd observed;
  Eigen::MatrixXd expected;  // outer(row marginals, column marginals) / total
  Eigen::MatrixXd weights;   // (i - j)^2 / (K - 1)^2

  static ContingencyTable build(std::span<const int> pred, std::span<const int> gold,
                                int min_rating, int max_rating) {
    if (pred.size() != gold.size())
      throw Error(ErrorCode::LengthMismatch, "prediction and gold lists differ in length");
    if (pred.empty()) throw Error(ErrorCode::LengthMismatch, "no ratings to compare");
    if (max_rating <= min_rating)
      throw Error(ErrorCode::Precondition, "rating range needs at least two values");
    ContingencyTable t;
    t.min_rating = min_rating;
    t.k = max_rating - min_rating + 1;
    t.observed = Eigen::MatrixXd::Zero(t.k, t.k);
    for (std::size_t i = 0; i < pred.size(); ++i) {
      const int a = pred[i] - min_rating, b = gold[i] - min_rating;
      if (a < 0 || a >= t.k || b < 0 || b >= t.k)
        throw Error(ErrorCode::Precondition, "rating outside [" + std::to_string(min_rating) +
                                                 ", " + std::to_string(max_rating) + "]",
                    "item " + std::to_string(i));
      t.observed(a, b) += 1.0;
    }
    const double total = static_cast<double>(pred.size());
    t.expected = t.observed.rowwise().sum() * t.observed.colwise().sum() / total;
    t.weights.resize(t.k, t.k);
    const double norm = static_cast<double>((t.k - 1) * (t.k - 1));
    for (int i = 0; i < t.k; ++i)
      for (int j = 0; j < t.k; ++j) t.weights(i, j) = static_cast<double>((i - j) * (i - j)) / norm;
    return t;
  }
};

struct QwkResult {
  double value = 1.0;
  bool degenerate = false;  // sum(w E) = 0: both raters used one identical rating
};

// Eq. (9): 1 - sum(w O) / sum(w E).
inline QwkResult qwk(std::span<const int> pred, std::span<const int> gold, int min_rating = 0,
                     int max_rating = kMaxRubricScore) {
  const auto t = ContingencyTable::build(pred, gold, min_rating, max_rating);
  const double wo = t.weights.cwiseProduct(t.observed).sum();
  const double we = t.weights.cwiseProduct(t.expected).sum();
  if (we == 0.0) return {1.0, true};
  if (wo == 0.0) return {1.0, false};
  return {1.0 - wo / we, false};
}

// ---------------------------------------------------------------- reports

struct RubricRow {
  std::string rubric;
  double accuracy = 0.0;
  double qwk = 0.0;
  bool degenerate = false;
};

struct EvaluationReport {
  std::string model;  // "full", "baseline", ...
  std::size_t essays = 0;
  std::vector<RubricRow> rows;  // one per rubric, kRubricNames order
  RubricRow average;            // macro average of the rows
};

inline EvaluationReport evaluate_predictions(std::span<const RubricScores> pred,
                                             std::span<const RubricScores> gold,
                                             std::string model = "model") {
  if (pred.size() != gold.size())
    throw Error(ErrorCode::LengthMismatch, "prediction and gold lists differ in length");
  if (pred.empty()) throw Error(ErrorCode::NoLabels, "no labelled essays to evaluate");
  EvaluationReport r;
  r.model = std::move(model);
  r.essays = pred.size();
  r.average.rubric = "Average";
  for (std::size_t k = 0; k < kRubricCount; ++k) {
    std::vector<int> p, g;
    for (std::size_t i = 0; i < pred.size(); ++i) {
      p.push_back(pred[i][k]);
      g.push_back(gold[i][k]);
    }
    const auto q = qwk(p, g);
    r.rows.push_back({std::string(kRubricNames[k]), accuracy(p, g), q.value, q.degenerate});
    r.average.accuracy += r.rows.back().accuracy;
    r.average.qwk += q.value;
  }
  r.average.accuracy /= static_cast<double>(kRubricCount);
  r.average.qwk /= static_cast<double>(kRubricCount);
  return r;
}

inline std::vector<RubricScores> predict_scores(const Model& model, std::span<const Sample> samples,
                                                const FeatureRegistry& registry) {
  std::vector<RubricScores> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(predict(model, s, registry, 0).scores);
  return out;
}

inline EvaluationReport evaluate_model(const Model& model, std::span<const Sample> test,
                                       const FeatureRegistry& registry, std::string name) {
  std::vector<RubricScores> gold;
  for (const auto& s : test) {
    if (!s.labels) throw Error(ErrorCode::NoLabels, "test essay has no labels", s.id);
    gold.push_back(*s.labels);
  }
  return evaluate_predictions(predict_scores(model, test, registry), gold, std::move(name));
}

inline nlohmann::ordered_json report_to_json(const EvaluationReport& r) {
  using J = nlohmann::ordered_json;
  auto row = [](const RubricRow& x) {
    J j;
    j["rubric"] = x.rubric;
    j["accuracy"] = x.accuracy;
    j["qwk"] = x.qwk;
    if (x.degenerate) j["degenerate"] = true;
    return j;
  };
  J j;
  j["model"] = r.model;
  j["essays"] = r.essays;
  J rows = J::array();
  for (const auto& x : r.rows) rows.push_back(row(x));
  j["rows"] = std::move(rows);
  j["average"] = row(r.average);
  return j;
}

namespace detail {

inline std::string fixed3(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

inline std::string pad(std::string s, std::size_t width) {
  // Rubric names are ASCII, so byte length equals display width.
  if (s.size() < width) s.append(width - s.size(), ' ');
  return s;
}

}  // namespace detail

// Aligned text table with one (Accuracy, QWK) column pair per report, in
// the layout of the paper's Table 1.
inline std::string reports_to_text(std::span<const EvaluationReport> reports) {
  if (reports.empty()) return {};
  constexpr std::size_t kName = 27;
  std::vector<std::size_t> width;
  for (const auto& r : reports) width.push_back(std::max<std::size_t>(8, r.model.size() + 4));
  std::string out = detail::pad("Rubric", kName);
  for (std::size_t i = 0; i < reports.size(); ++i) {
    out += " | " + detail::pad(reports[i].model + " Acc", width[i]);
    out += " " + detail::pad(reports[i].model + " QWK", width[i]);
  }
  while (out.back() == ' ') out.pop_back();
  out += "\n" + std::string(kName, '-');
  for (std::size_t i = 0; i < reports.size(); ++i) out += "-+-" + std::string(2 * width[i] + 1, '-');
  out += "\n";
  auto line = [&](std::size_t row) {
    const bool avg = row == kRubricCount;
    std::string s = detail::pad(avg ? "Average" : reports[0].rows[row].rubric, kName);
    for (std::size_t i = 0; i < reports.size(); ++i) {
      const auto& x = avg ? reports[i].average : reports[i].rows[row];
      s += " | " + detail::pad(detail::fixed3(x.accuracy), width[i]);
      s += " " + detail::pad(detail::fixed3(x.qwk), width[i]);
    }
    while (s.back() == ' ') s.pop_back();
    return s + "\n";
  };
  for (std::size_t k = 0; k < kRubricCount; ++k) out += line(k);
  out += line(kRubricCount);
  return out;
}

inline std::string report_to_text(const EvaluationReport& r) {
  return reports_to_text(std::span<const EvaluationReport>(&r, 1));
}

// ---------------------------------------------------------------- splits

struct Split {
  std::vector<std::size_t> train, val, test;
};

// Shuffles each topic group with a seeded stream and deals it out in the
// given proportions, so every topic appears in each part in proportion.
inline Split stratified_split(std::span<const std::string> topics, double train_frac,
                              double val_frac, std::uint64_t seed) {
  if (!(train_frac > 0.0) || val_frac < 0.0 || train_frac + val_frac > 1.0)
    throw Error(ErrorCode::Precondition, "split fractions must be positive and sum to <= 1");
  std::map<std::string, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < topics.size(); ++i) groups[topics[i]].push_back(i);
  Split s;
  for (auto& [topic, idx] : groups) {
    auto rng = CounterRng::keyed({seed, fnv1a64(topic.data(), topic.size())});
    for (std::size_t i = idx.size(); i > 1; --i)
      std::swap(idx[i - 1], idx[static_cast<std::size_t>(rng.below(i))]);
    const auto n = static_cast<double>(idx.size());
    const auto n_train = static_cast<std::size_t>(std::llround(n * train_frac));
    const auto n_val =
        std::min(idx.size() - n_train, static_cast<std::size_t>(std::llround(n * val_frac)));
    for (std::size_t i = 0; i < idx.size(); ++i)
      (i < n_train ? s.train : i < n_train + n_val ? s.val : s.test).push_back(idx[i]);
  }
  for (auto* part : {&s.train, &s.val, &s.test}) std::sort(part->begin(), part->end());
  return s;
}

// ---------------------------------------------------------------- synthetic

// Planted levels, each in 0..3. Every rubric label is a function of one of
// them, and every level is recoverable from one registry feature.
struct PlantedLevels {
  int length = 0;      // sentence count band            -> Sen_Cnt
  int paragraphs = 0;  // paragraph count = level + 1    -> Para_Cnt
  int nouns = 0;       // noun type/token ratio band     -> NNG_TTR
  int modifiers = 0;   // adverb share of content words  -> MACL_Den
  int particles = 0;   // distinct particles 2^level     -> J_NDW
  int endings = 0;     // distinct endings 2^level       -> E_NDW

  bool operator==(const PlantedLevels&) const = default;
};

struct SyntheticConfig {
  std::size_t essays = 600;
  std::size_t topics = 6;
  double label_noise = 0.03;  // chance that a label is moved one step
  std::optional<PlantedLevels> fixed_levels;
};

struct SyntheticEssay {
  Essay essay;
  PlantedLevels levels;
};

inline constexpr std::array<std::size_t, 4> kSentenceBandLow = {4, 6, 9, 12};
inline constexpr std::array<std::size_t, 4> kSentenceBandHigh = {5, 8, 11, 14};
inline constexpr std::array<double, 4> kNounTtr = {0.25, 0.5, 0.75, 1.0};
inline constexpr std::array<double, 4> kModifierShare = {0.0, 0.125, 0.25, 0.375};

inline RubricScores labels_from_levels(const PlantedLevels& l) {
  return {l.particles,   // Grammar
          l.nouns,       // Vocabulary
          l.modifiers,   // Sentence Expression
          l.paragraphs,  // Inter-paragraph Structure
          l.particles,   // In-paragraph Structure
          l.endings,     // Structure Consistency
          l.length,      // Length
          l.modifiers,   // Topic Clarity
          l.nouns,       // Originality
          l.endings};    // Narrative
}

// Recovers the planted levels from measured features (band midpoints).
inline PlantedLevels levels_from_features(const FeatureRegistry& registry, const FeatureVector& fv) {
  auto value = [&](std::string_view name) {
    const auto i = registry.index_of(name);
    if (!i) throw Error(ErrorCode::RegistryMismatch, "registry lacks the feature", std::string(name));
    return fv.available[*i] ? fv.values[*i] : 0.0;
  };
  auto band = [](double v, std::array<double, 3> cuts) {
    int level = 0;
    for (double c : cuts) level += v >= c;
    return level;
  };
  PlantedLevels l;
  l.length = band(value("Sen_Cnt"), {5.5, 8.5, 11.5});
  l.paragraphs = band(value("Para_Cnt"), {1.5, 2.5, 3.5});
  l.nouns = band(value("NNG_TTR"), {0.375, 0.625, 0.875});
  l.modifiers = band(value("MACL_Den"), {0.0625, 0.1875, 0.3125});
  l.particles = band(value("J_NDW"), {1.5, 3.0, 6.0});
  l.endings = band(value("E_NDW"), {1.5, 3.0, 6.0});
  return l;
}

inline RubricScores label_function(const FeatureRegistry& registry, const FeatureVector& fv) {
  return labels_from_levels(levels_from_features(registry, fv));
}

namespace detail {

inline std::string hangul(std::size_t index) {
  const auto cp = static_cast<std::uint32_t>(0xAC00 + index % 11172);
  std::string s;
  s += static_cast<char>(0xE0 | (cp >> 12));
  s += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
  s += static_cast<char>(0x80 | (cp & 0x3F));
  return s;
}

// Two-syllable pseudo-word; `base` separates the pools of different classes.
inline std::string pseudo_word(std::size_t base, std::size_t i) {
  return hangul(base + 2 * i) + hangul(base + 2 * i + 1);
}

struct Lex {
  std::string lemma;
  PosTag tag;
};

inline const std::vector<Lex>& particle_pool() {
  static const std::vector<Lex> pool = {{"이", PosTag::JKS},  {"을", PosTag::JKO},
                                        {"에", PosTag::JKB},  {"는", PosTag::JX},
                                        {"와", PosTag::JC},   {"의", PosTag::JKG},
                                        {"도", PosTag::JX},   {"에서", PosTag::JKB}};
  return pool;
}

inline const std::vector<Lex>& ending_pool() {
  static const std::vector<Lex> pool = {{"다", PosTag::EF},  {"고", PosTag::EC},
                                        {"었", PosTag::EP},  {"지만", PosTag::EC},
                                        {"는", PosTag::ETM}, {"요", PosTag::EF},
                                        {"겠", PosTag::EP},  {"면서", PosTag::EC}};
  return pool;
}

template <typename T>
void shuffle(std::vector<T>& v, CounterRng& rng) {
  for (std::size_t i = v.size(); i > 1; --i)
    std::swap(v[i - 1], v[static_cast<std::size_t>(rng.below(i))]);
}

inline int noisy(int label, double noise, CounterRng& rng) {
  if (rng.uniform() >= noise) return label;
  int moved = label + (rng.below(2) == 0 ? -1 : 1);
  if (moved < 0 || moved > kMaxRubricScore) moved = label + (label == 0 ? 1 : -1);
  return moved;
}

}  // namespace detail

// One essay per index; each is a pure function of (seed, index).
inline SyntheticEssay generate_essay(const SyntheticConfig& cfg, std::uint64_t seed,
                                     std::size_t index) {
  using detail::Lex;
  auto rng = CounterRng::keyed({seed, 0x53594E54, index});  // "SYNT"
  SyntheticEssay out;
  PlantedLevels& l = out.levels;
  if (cfg.fixed_levels) {
    l = *cfg.fixed_levels;
  } else {
    for (int* v : {&l.length, &l.paragraphs, &l.nouns, &l.modifiers, &l.particles, &l.endings})
      *v = static_cast<int>(rng.below(4));
  }
  const std::size_t topic = cfg.topics > 0 ? index % cfg.topics : 0;
  const std::size_t sentences =
      kSentenceBandLow[l.length] +
      rng.below(kSentenceBandHigh[l.length] - kSentenceBandLow[l.length] + 1);

  // Nouns: 2 or 3 per sentence, with exactly round(ttr * n) types drawn
  // from the topic's pool, every type used at least once.
  std::vector<std::size_t> nouns_per_sentence(sentences);
  std::size_t noun_tokens = 0;
  for (auto& n : nouns_per_sentence) noun_tokens += n = 2 + rng.below(2);
  const auto noun_types = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(kNounTtr[l.nouns] * static_cast<double>(noun_tokens))));
  std::vector<std::size_t> pool(400);
  for (std::size_t i = 0; i < pool.size(); ++i) pool[i] = i;
  detail::shuffle(pool, rng);
  std::vector<std::string> noun_seq;
  for (std::size_t i = 0; i < noun_tokens; ++i) {
    const std::size_t type = i < noun_types ? i : rng.below(noun_types);
    noun_seq.push_back(detail::pseudo_word(1000 + topic * 800, pool[type]));
  }
  detail::shuffle(noun_seq, rng);

  // Adverbs: M / (base + M) ~ planted share of content words.
  const double share = kModifierShare[l.modifiers];
  const std::size_t base_content = noun_tokens + sentences;  // nouns + one verb each
  const auto adverbs = static_cast<std::size_t>(
      std::llround(share * static_cast<double>(base_content) / (1.0 - share)));
  std::vector<std::size_t> adverbs_per_sentence(sentences, 0);
  for (std::size_t i = 0; i < adverbs; ++i) ++adverbs_per_sentence[rng.below(sentences)];

  // Particles and endings cycle through the first 2^level pool entries so
  // every one of them occurs.
  const std::size_t n_particles = std::size_t{1} << l.particles;
  const std::size_t n_endings = std::size_t{1} << l.endings;
  std::size_t next_particle = rng.below(n_particles), next_ending = rng.below(n_endings);

  Essay& e = out.essay;
  e.id = "syn-" + std::to_string(seed) + "-" + std::to_string(index);
  e.meta.topic = "topic-" + std::to_string(topic);
  const std::size_t paragraphs = static_cast<std::size_t>(l.paragraphs) + 1;
  e.paragraphs.resize(paragraphs);
  std::size_t noun_i = 0;
  for (std::size_t s = 0; s < sentences; ++s) {
    Sentence sent;
    auto add = [&](std::vector<Lex> parts) {
      Wordpiece wp;
      for (auto& p : parts) {
        wp.raw += p.lemma;
        wp.morphemes.push_back({p.lemma, p.lemma, p.tag});
      }
      sent.wordpieces.push_back(std::move(wp));
    };
    for (std::size_t k = 0; k < nouns_per_sentence[s]; ++k) {
      const auto& particle = detail::particle_pool()[next_particle++ % n_particles];
      add({{noun_seq[noun_i++], PosTag::NNG}, particle});
    }
    for (std::size_t k = 0; k < adverbs_per_sentence[s]; ++k)
      add({{detail::pseudo_word(200, rng.below(60)), PosTag::MAG}});
    // Verb + two endings, then the full stop.
    const auto& e1 = detail::ending_pool()[next_ending++ % n_endings];
    const auto& e2 = detail::ending_pool()[next_ending++ % n_endings];
    add({{detail::pseudo_word(600, rng.below(80)), PosTag::VV}, e1, e2, {".", PosTag::SF}});
    // Sentences are dealt to paragraphs in contiguous, near-equal blocks.
    e.paragraphs[s * paragraphs / sentences].sentences.push_back(std::move(sent));
  }
  e.renumber();
  RubricScores labels = labels_from_levels(l);
  for (auto& v : labels) v = detail::noisy(v, cfg.label_noise, rng);
  e.labels = labels;
  return out;
}

inline std::vector<SyntheticEssay> generate_synthetic(const SyntheticConfig& cfg,
                                                      std::uint64_t seed) {
  std::vector<SyntheticEssay> out;
  out.reserve(cfg.essays);
  for (std::size_t i = 0; i < cfg.essays; ++i) out.push_back(generate_essay(cfg, seed, i));
  return out;
}

// ---------------------------------------------------------------- ablation

struct AblationConfig {
  std::size_t essays = 600;
  std::vector<std::uint64_t> seeds = {1, 2, 3};
  double train_frac = 0.7;
  double val_frac = 0.15;
  ScorerConfig scorer;  // shared by both models; essay_branch is set per model
};

struct AblationRun {
  std::uint64_t seed = 0;
  EvaluationReport baseline, full;
};

template <typename T>
std::vector<T> pick(std::span<const T> items, std::span<const std::size_t> idx) {
  std::vector<T> out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(items[i]);
  return out;
}

// For each seed: generate a corpus, split it by topic, train the baseline
// (sentence encoder only) and the full model with the same seed, and
// evaluate both on the held-out test part.
inline std::vector<AblationRun> run_ablation(
    const AblationConfig& cfg, const FeatureRegistry& registry, const EmbeddingProvider& provider,
    const std::function<void(const std::string&)>& log = {}) {
  std::vector<AblationRun> runs;
  for (auto seed : cfg.seeds) {
    SyntheticConfig sc;
    sc.essays = cfg.essays;
    const auto corpus = generate_synthetic(sc, seed);
    std::vector<Sample> samples;
    std::vector<std::string> topics;
    for (const auto& s : corpus) {
      samples.push_back(make_sample(s.essay, registry, provider));
      topics.push_back(samples.back().topic);
    }
    const auto split = stratified_split(topics, cfg.train_frac, cfg.val_frac, seed);
    const std::span<const Sample> all(samples);
    const auto train = pick(all, split.train), val = pick(all, split.val),
               test = pick(all, split.test);
    AblationRun run;
    run.seed = seed;
    for (bool full : {false, true}) {
      ScorerConfig c = cfg.scorer;
      c.essay_branch = full;
      const auto model = fit_model(train, val, registry, provider, c, seed);
      auto report = evaluate_model(model, test, registry, full ? "full" : "baseline");
      if (log)
        log("seed " + std::to_string(seed) + " " + report.model + ": acc " +
            detail::fixed3(report.average.accuracy) + " qwk " + detail::fixed3(report.average.qwk) +
            " (best epoch " + std::to_string(model.log.best_epoch) + ")");
      (full ? run.full : run.baseline) = std::move(report);
    }
    runs.push_back(std::move(run));
  }
  return runs;
}

}  // namespace ukta
