#include <random>
#include <set>

#include <gtest/gtest.h>

#include "ukta/embeddings.hpp"
#include "ukta/evaluation.hpp"
#include "ukta/pretagged.hpp"

namespace ukta {
namespace {

// Unnormalized form: weights (i - j)^2 without the (K - 1)^2 factor.
double qwk_unnormalized(const std::vector<int>& a, const std::vector<int>& b, int k) {
  std::vector<std::vector<double>> o(k, std::vector<double>(k, 0.0));
  std::vector<double> ra(k, 0.0), rb(k, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    o[a[i]][b[i]] += 1;
    ra[a[i]] += 1;
    rb[b[i]] += 1;
  }
  double wo = 0, we = 0;
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) {
      wo += (i - j) * (i - j) * o[i][j];
      we += (i - j) * (i - j) * ra[i] * rb[j] / static_cast<double>(a.size());
    }
  return we == 0 ? 1.0 : 1.0 - wo / we;
}

TEST(Accuracy, CountsExactMatches) {
  EXPECT_DOUBLE_EQ(accuracy(std::vector{1, 2, 3, 0}, std::vector{1, 2, 0, 0}), 0.75);
  EXPECT_THROW(accuracy(std::vector{1, 2}, std::vector{1}), Error);
}

TEST(Qwk, PerfectAgreementIsOne) {
  std::vector<int> v = {0, 1, 2, 3, 3, 1};
  EXPECT_DOUBLE_EQ(qwk(v, v).value, 1.0);
  EXPECT_FALSE(qwk(v, v).degenerate);
}

TEST(Qwk, SpecExample) {
  const auto r = qwk(std::vector{1, 2, 2}, std::vector{1, 2, 3}, 1, 3);
  EXPECT_NEAR(r.value, 2.0 / 3.0, 1e-12);
  // The same ratings on the 0..3 scale give the same value.
  EXPECT_NEAR(qwk(std::vector{1, 2, 2}, std::vector{1, 2, 3}).value, 2.0 / 3.0, 1e-12);
}

TEST(Qwk, DegenerateMarginalsAreFlagged) {
  const auto r = qwk(std::vector{2, 2, 2}, std::vector{2, 2, 2});
  EXPECT_DOUBLE_EQ(r.value, 1.0);
  EXPECT_TRUE(r.degenerate);
  // Constant but different raters: sum wE = sum wO > 0 -> 0.
  EXPECT_DOUBLE_EQ(qwk(std::vector{1, 1}, std::vector{3, 3}).value, 0.0);
}

TEST(Qwk, RejectsBadInput) {
  EXPECT_THROW(qwk(std::vector{1}, std::vector{1, 2}), Error);
  EXPECT_THROW(qwk(std::vector{4}, std::vector{1}), Error);
  EXPECT_THROW(qwk(std::vector<int>{}, std::vector<int>{}), Error);
}

TEST(Qwk, SymmetricShiftInvariantAndMatchesUnnormalizedForm) {
  std::mt19937_64 rng(1);
  for (int t = 0; t < 1000; ++t) {
    const int k = 2 + static_cast<int>(rng() % 5);
    const std::size_t n = 1 + rng() % 40;
    std::vector<int> a(n), b(n), a2(n), b2(n);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = static_cast<int>(rng() % k);
      b[i] = static_cast<int>(rng() % k);
      a2[i] = a[i] + 5;
      b2[i] = b[i] + 5;
    }
    const double v = qwk(a, b, 0, k - 1).value;
    EXPECT_NEAR(v, qwk(b, a, 0, k - 1).value, 1e-12);
    EXPECT_NEAR(v, qwk(a2, b2, 5, k + 4).value, 1e-12);
    EXPECT_NEAR(v, qwk_unnormalized(a, b, k), 1e-12);
    EXPECT_LE(v, 1.0 + 1e-12);
  }
}

TEST(ContingencyTable, ExpectedHasObservedMarginals) {
  auto t = ContingencyTable::build(std::vector{0, 1, 1, 3}, std::vector{0, 2, 1, 1}, 0, 3);
  EXPECT_EQ(t.k, 4);
  EXPECT_DOUBLE_EQ(t.observed.sum(), 4.0);
  EXPECT_TRUE(t.expected.rowwise().sum().isApprox(t.observed.rowwise().sum()));
  EXPECT_TRUE(t.expected.colwise().sum().isApprox(t.observed.colwise().sum()));
  EXPECT_DOUBLE_EQ(t.weights(0, 3), 1.0);
  EXPECT_DOUBLE_EQ(t.weights(1, 2), 1.0 / 9.0);
}

TEST(Report, RowsAverageAndText) {
  std::vector<RubricScores> gold(4), pred(4);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t k = 0; k < kRubricCount; ++k) {
      gold[i][k] = static_cast<int>((i + k) % 4);
      pred[i][k] = k == 0 && i == 0 ? 3 : gold[i][k];
    }
  auto r = evaluate_predictions(pred, gold, "full");
  ASSERT_EQ(r.rows.size(), kRubricCount);
  EXPECT_DOUBLE_EQ(r.rows[0].accuracy, 0.75);
  EXPECT_DOUBLE_EQ(r.rows[1].qwk, 1.0);
  EXPECT_NEAR(r.average.accuracy, (0.75 + 9.0) / 10.0, 1e-12);
  const auto j = report_to_json(r);
  EXPECT_EQ(j["rows"].size(), kRubricCount);
  EXPECT_EQ(j["rows"][3]["rubric"], "Inter-paragraph Structure");
  const auto text = report_to_text(r);
  std::size_t lines = 0;
  for (char c : text) lines += c == '\n';
  EXPECT_EQ(lines, 2 + kRubricCount + 1);
  EXPECT_NE(text.find("Average"), std::string::npos);
  EXPECT_NE(text.find("0.750"), std::string::npos);
}

TEST(Split, StratifiedByTopicDeterministicAndDisjoint) {
  std::vector<std::string> topics;
  for (int i = 0; i < 600; ++i) topics.push_back("t" + std::to_string(i % 6));
  const auto s = stratified_split(topics, 0.7, 0.15, 3);
  EXPECT_EQ(s.train.size() + s.val.size() + s.test.size(), 600u);
  std::set<std::size_t> all(s.train.begin(), s.train.end());
  all.insert(s.val.begin(), s.val.end());
  all.insert(s.test.begin(), s.test.end());
  EXPECT_EQ(all.size(), 600u);
  std::map<std::string, int> test_topics;
  for (auto i : s.test) ++test_topics[topics[i]];
  EXPECT_EQ(test_topics.size(), 6u);
  for (auto& [t, n] : test_topics) EXPECT_EQ(n, 15);
  const auto again = stratified_split(topics, 0.7, 0.15, 3);
  EXPECT_EQ(again.test, s.test);
  EXPECT_NE(stratified_split(topics, 0.7, 0.15, 4).test, s.test);
  EXPECT_THROW(stratified_split(topics, 0.9, 0.2, 1), Error);
}

TEST(Synthetic, DeterministicPerSeed) {
  SyntheticConfig cfg;
  cfg.essays = 20;
  const auto a = generate_synthetic(cfg, 5), b = generate_synthetic(cfg, 5);
  const auto c = generate_synthetic(cfg, 6);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].essay, b[i].essay);
    EXPECT_EQ(a[i].essay.labels, b[i].essay.labels);
  }
  std::size_t same = 0;
  for (std::size_t i = 0; i < a.size(); ++i) same += a[i].essay == c[i].essay;
  EXPECT_LT(same, a.size());
}

TEST(Synthetic, MeasuredLabelFunctionMatchesEmittedLabels) {
  const auto registry = default_registry();
  const HashEmbedding provider(64);
  SyntheticConfig cfg;
  cfg.essays = 200;
  const auto corpus = generate_synthetic(cfg, 11);
  std::size_t agree = 0, total = 0, levels_exact = 0;
  for (const auto& s : corpus) {
    const auto fv = analyze(s.essay, registry, provider).features;
    levels_exact += levels_from_features(registry, fv) == s.levels;
    const auto f = label_function(registry, fv);
    for (std::size_t k = 0; k < kRubricCount; ++k) {
      agree += f[k] == (*s.essay.labels)[k];
      ++total;
    }
  }
  EXPECT_EQ(levels_exact, corpus.size());
  EXPECT_GE(static_cast<double>(agree) / static_cast<double>(total), 0.95);
  EXPECT_LT(agree, total);  // the noise budget is in effect
}

TEST(Synthetic, PlantedNounDiversityRaisesRttr) {
  const auto registry = default_registry();
  const HashEmbedding provider(64);
  const auto rttr = *registry.index_of("NNG_RTTR");
  SyntheticConfig cfg;
  cfg.essays = 30;
  PlantedLevels low{2, 1, 0, 1, 1, 1}, high = low;
  high.nouns = 3;
  cfg.fixed_levels = low;
  const auto lo = generate_synthetic(cfg, 1);
  cfg.fixed_levels = high;
  const auto hi = generate_synthetic(cfg, 1);
  for (std::size_t i = 0; i < lo.size(); ++i) {
    const auto a = analyze(lo[i].essay, registry, provider).features;
    const auto b = analyze(hi[i].essay, registry, provider).features;
    EXPECT_LT(a.values[rttr], b.values[rttr]);
  }
}

TEST(Synthetic, EssaysAreWellFormedAndTopicsCycle) {
  SyntheticConfig cfg;
  cfg.essays = 12;
  for (const auto& s : generate_synthetic(cfg, 2)) {
    EXPECT_EQ(s.essay.paragraphs.size(), static_cast<std::size_t>(s.levels.paragraphs) + 1);
    EXPECT_GE(s.essay.sentence_count(), kSentenceBandLow[s.levels.length]);
    EXPECT_LE(s.essay.sentence_count(), kSentenceBandHigh[s.levels.length]);
    for (const auto& p : s.essay.paragraphs) EXPECT_FALSE(p.sentences.empty());
    ASSERT_TRUE(s.essay.labels);
    EXPECT_TRUE(s.essay.meta.topic);
    EXPECT_EQ(parse_pretagged(serialize(s.essay, TextFormat::Json), TextFormat::Json), s.essay);
  }
}

TEST(Ablation, SmallRunProducesBothReports) {
  const auto registry = default_registry();
  const HashEmbedding provider(16);
  AblationConfig cfg;
  cfg.essays = 60;
  cfg.seeds = {7};
  cfg.scorer.epochs = 3;
  cfg.scorer.hidden = 4;
  cfg.scorer.essay_dim = 8;
  std::vector<std::string> log;
  const auto runs = run_ablation(cfg, registry, provider, [&](const std::string& m) { log.push_back(m); });
  ASSERT_EQ(runs.size(), 1u);
  EXPECT_EQ(runs[0].baseline.model, "baseline");
  EXPECT_EQ(runs[0].full.model, "full");
  EXPECT_EQ(runs[0].full.rows.size(), kRubricCount);
  EXPECT_EQ(log.size(), 2u);
  const std::vector<EvaluationReport> both = {runs[0].baseline, runs[0].full};
  EXPECT_NE(reports_to_text(both).find("baseline QWK"), std::string::npos);
}

}  // namespace
}  // namespace ukta
