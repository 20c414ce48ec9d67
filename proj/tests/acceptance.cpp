// Acceptance suite: one test per [PRIMARY] criterion of the spec, with the
// spec's tolerances and runtime budgets. Kept separate from the unit tests
// so `ctest -R acceptance` answers "does the build meet the spec?".

#include <chrono>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "mock_server.hpp"
#include "oracles.hpp"
#include "support.hpp"
#include "ukta/bundle.hpp"
#include "ukta/diversity.hpp"
#include "ukta/evaluation.hpp"
#include "ukta/service.hpp"

namespace ukta {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

double feature(const FeatureRegistry& r, const FeatureVector& fv, std::string_view name) {
  const auto i = r.index_of(name);
  EXPECT_TRUE(i.has_value()) << name;
  EXPECT_TRUE(fv.available[*i]) << name;
  return fv.values[*i];
}

// ------------------------------------------------------------ golden

TEST(Acceptance, AppendixGoldenValues) {
  const auto t0 = Clock::now();
  const auto r = default_registry();
  const HashEmbedding provider(64);
  const auto good = analyze(testing::appendix_correct(), r, provider).features;
  EXPECT_NEAR(feature(r, good, "NDW"), 10.0, 1e-9);
  EXPECT_NEAR(feature(r, good, "TTR"), 10.0 / 11.0, 1e-9);
  EXPECT_NEAR(feature(r, good, "RTTR"), 10.0 / std::sqrt(11.0), 1e-9);
  EXPECT_NEAR(feature(r, good, "CTTR"), 10.0 / std::sqrt(22.0), 1e-9);
  EXPECT_NEAR(feature(r, good, "NNL_Den"), 3.0 / 11.0, 1e-9);
  EXPECT_NEAR(feature(r, good, "EFL_Den"), 1.0 / 2.0, 1e-9);
  const auto bad = analyze(testing::appendix_erroneous(), r, provider).features;
  EXPECT_NEAR(feature(r, bad, "NDW"), 9.0, 1e-9);
  EXPECT_NEAR(feature(r, bad, "TTR"), 9.0 / 11.0, 1e-9);
  EXPECT_NEAR(feature(r, bad, "CTTR"), 9.0 / std::sqrt(22.0), 1e-9);
  EXPECT_NEAR(feature(r, bad, "NNL_Den"), 4.0 / 11.0, 1e-9);
  EXPECT_NEAR(feature(r, bad, "EFL_Den"), 1.0 / 3.0, 1e-9);
  EXPECT_LT(seconds_since(t0), 1.0);
}

// ------------------------------------------------------------ diversity

TEST(Acceptance, DiversityMatchesBruteForceOracles) {
  std::mt19937_64 rng(2024);
  double max_err = 0.0;
  for (int i = 0; i < 500; ++i) {
    const auto s = oracle::random_seq(rng, 1, 60, 2 + rng() % 20);
    const std::size_t n = 1 + rng() % 30;
    const auto got = msttr(s, n);
    const auto want = oracle::msttr(s.tokens, n);
    ASSERT_EQ(got.has_value(), want.has_value());
    if (got) max_err = std::max(max_err, std::abs(*got - *want));
    max_err = std::max(max_err, std::abs(*mattr(s, n) - oracle::mattr(s.tokens, n)));
  }
  for (int i = 0; i < 500; ++i) {
    const auto s = oracle::random_seq(rng, 1, 12, 2 + rng() % 6);
    const std::size_t sample = 1 + rng() % s.size();
    max_err = std::max(max_err, std::abs(*hdd(s, sample) - oracle::hdd_exhaustive(s.tokens, sample)));
  }
  EXPECT_LE(max_err, 1e-9);
}

TEST(Acceptance, MtldOfRepeatedTokenIsTwo) {
  EXPECT_DOUBLE_EQ(*mtld(TokenSeq{{0, 0, 0, 0}}, 0.72), 2.0);
}

TEST(Acceptance, VocdSeedDeterministicAndNearGridOracle) {
  std::mt19937_64 rng(31);
  DiversityParams p;
  for (int i = 0; i < 20; ++i) {
    const auto s = oracle::random_seq(rng, 50, 300, 2 + rng() % 100);
    const auto d = vocd(s, p);
    ASSERT_TRUE(d);
    EXPECT_EQ(*d, *vocd(s, p));
    const double grid = oracle::vocd_grid_argmin(vocd_mean_ttrs(s, p), p.vocd_min_n);
    EXPECT_NEAR(*d, grid, 0.01);
  }
}

// ------------------------------------------------------------ gradient

TEST(Acceptance, GradientCheck) {
  const auto t0 = Clock::now();
  ScorerConfig c;
  c.features = 6;
  c.hidden = 3;
  c.embed_dim = 4;
  c.essay_dim = 4;
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g(0.0, 1.0);
  auto p = init_params(c, 5);
  p.visit([&](std::string_view, MatrixXd& m) { m = m.unaryExpr([&](double) { return 0.5 * g(rng); }); });
  ScorerInput in;
  in.features = VectorXd::NullaryExpr(6, [&] { return g(rng); });
  in.sentences = MatrixXd::NullaryExpr(4, 2, [&] { return g(rng); });  // N = 2
  VectorXd target(10);
  for (auto& x : target) x = static_cast<double>(rng() % 4) / 3.0;

  ForwardCache cache;
  forward(p, c, in, nullptr, &cache);
  auto grad = p.zeros_like();
  backward(p, c, in, cache, target, 1.0, grad);
  std::vector<MatrixXd*> analytic;
  grad.visit([&](std::string_view, MatrixXd& m) { analytic.push_back(&m); });

  const double eps = 1e-4;
  double max_rel = 0.0;
  std::size_t t = 0, checked = 0;
  p.visit([&](std::string_view, MatrixXd& w) {
    for (Eigen::Index i = 0; i < w.size(); ++i) {
      const double orig = w.data()[i];
      w.data()[i] = orig + eps;
      const double up = sample_loss(forward(p, c, in), target);
      w.data()[i] = orig - eps;
      const double down = sample_loss(forward(p, c, in), target);
      w.data()[i] = orig;
      const double numeric = (up - down) / (2 * eps);
      const double a = analytic[t]->data()[i];
      const double scale = std::max(std::abs(a), std::abs(numeric));
      if (scale > 1e-10) max_rel = std::max(max_rel, std::abs(a - numeric) / scale);
      ++checked;
    }
    ++t;
  });
  EXPECT_EQ(checked, p.parameter_count());
  EXPECT_LT(max_rel, 1e-4);
  EXPECT_LT(seconds_since(t0), 30.0);
}

// ------------------------------------------------------------ training

TEST(Acceptance, OverfitTwentyEssays) {
  const auto t0 = Clock::now();
  const auto registry = default_registry();
  const HashEmbedding provider(64);
  SyntheticConfig sc;
  sc.essays = 20;
  std::vector<Sample> samples;
  for (const auto& s : generate_synthetic(sc, 1)) samples.push_back(make_sample(s.essay, registry, provider));
  ScorerConfig c;  // paper defaults
  c.epochs = 2000;
  c.patience = 0;
  const auto a = fit_model(samples, {}, registry, provider, c, 1);
  const auto examples = make_examples(samples, a.scaler);
  const double mse = mean_loss(a.params, a.config, examples);
  EXPECT_LT(mse, 1e-3) << "best epoch " << a.log.best_epoch;
  EXPECT_LE(a.log.train_loss.size(), 2000u);
  const auto b = fit_model(samples, {}, registry, provider, c, 1);
  EXPECT_EQ(model_to_text(a), model_to_text(b));
  EXPECT_LT(seconds_since(t0), 120.0);
}

TEST(Acceptance, AblationFullModelBeatsBaseline) {
  const auto t0 = Clock::now();
  const auto registry = default_registry();
  const HashEmbedding provider(64);
  AblationConfig cfg;  // 600 essays, seeds 1..3
  const auto runs = run_ablation(cfg, registry, provider, [](const std::string& line) {
    std::printf("  %s\n", line.c_str());
  });
  ASSERT_EQ(runs.size(), 3u);
  int qwk_wins = 0;
  for (const auto& r : runs) {
    EXPECT_EQ(r.full.essays, 90u);
    EXPECT_GE(r.full.average.accuracy, r.baseline.average.accuracy) << "seed " << r.seed;
    EXPECT_GE(r.full.average.qwk, r.baseline.average.qwk) << "seed " << r.seed;
    qwk_wins += r.full.average.qwk - r.baseline.average.qwk >= 0.02;
  }
  EXPECT_GE(qwk_wins, 2);
  EXPECT_LT(seconds_since(t0), 600.0);
}

// ------------------------------------------------------------ QWK

TEST(Acceptance, Qwk) {
  const std::vector<int> gold = {0, 1, 2, 3, 1, 2};
  EXPECT_EQ(qwk(gold, gold).value, 1.0);
  EXPECT_NEAR(qwk(std::vector<int>{1, 2, 2}, std::vector<int>{1, 2, 3}).value, 2.0 / 3.0, 1e-12);
  std::mt19937_64 rng(99);
  for (int i = 0; i < 1000; ++i) {
    const std::size_t n = 2 + rng() % 30;
    std::vector<int> a(n), b(n), a1(n), b1(n);
    for (std::size_t j = 0; j < n; ++j) {
      a[j] = static_cast<int>(rng() % 4);
      b[j] = static_cast<int>(rng() % 4);
      a1[j] = a[j] + 1;
      b1[j] = b[j] + 1;
    }
    const auto ab = qwk(a, b), ba = qwk(b, a);
    EXPECT_NEAR(ab.value, ba.value, 1e-12);
    EXPECT_NEAR(qwk(a1, b1, 1, 4).value, ab.value, 1e-12);
  }
}

// ------------------------------------------------------------ interface

TEST(Acceptance, InterfaceRoundTrips) {
  const std::string fixture = testing::data_path("appendix_correct.tsv");
  testing::TempDir dir("acceptance");
  ASSERT_EQ(testing::run_cli("analyze --pretagged '" + fixture + "' --out '" + (dir / "cli") + "'"), 0);

  Service service(ServiceConfig{});
  testing::MockServer m;
  service.mount(m.server);
  m.start();
  httplib::Client client("127.0.0.1", m.port());
  const auto body = nlohmann::json({{"pretagged", testing::read_file(fixture)}, {"format", "tsv"}}).dump();
  auto res = client.Post("/api/analyze", body, "application/json");
  ASSERT_TRUE(res);
  ASSERT_EQ(res->status, 200);
  const auto bundle = nlohmann::json::parse(res->body);
  double ttr = NAN;
  for (const auto& f : bundle["features"])
    if (f["name"] == "TTR") ttr = f["value"].get<double>();
  EXPECT_NEAR(ttr, 0.9090909090909091, 1e-9);

  const auto id = bundle["id"].get<std::string>();
  for (const auto& [fmt, file] : {std::pair{"json", "bundle.json"}, {"csv", "features.csv"}, {"txt", "summary.txt"}}) {
    auto exported = client.Get(std::string("/api/export/") + fmt + "?id=" + id);
    ASSERT_TRUE(exported);
    EXPECT_EQ(exported->status, 200);
    EXPECT_EQ(exported->body, testing::read_file(dir / ("cli/" + std::string(file)))) << fmt;
  }

  std::mt19937_64 rng(4242);
  for (int i = 0; i < 100; ++i) {
    const auto e = testing::random_essay(rng, true);
    for (auto fmt : {TextFormat::Tsv, TextFormat::Json}) {
      const auto text = serialize(e, fmt);
      EXPECT_EQ(serialize(parse_pretagged(text, fmt), fmt), text);
      EXPECT_EQ(parse_pretagged(text, fmt), e);
    }
  }
}

// ------------------------------------------------------------ explainability

TEST(Acceptance, Explainability) {
  const auto registry = default_registry();
  const HashEmbedding provider(64);
  SyntheticConfig sc;
  sc.essays = 30;
  std::vector<Sample> samples;
  for (const auto& s : generate_synthetic(sc, 8)) samples.push_back(make_sample(s.essay, registry, provider));
  ScorerConfig c;
  c.epochs = 20;
  const auto model = fit_model(samples, {}, registry, provider, c, 8);
  for (const auto& essay : {testing::appendix_correct(), generate_synthetic(sc, 9)[0].essay}) {
    const auto fv = analyze(essay, registry, provider).features;
    const auto report = predict(model, make_sample(essay, fv, provider), registry);
    double sum = 0.0;
    for (double a : report.attention) sum += a;
    EXPECT_NEAR(sum, 1.0, 1e-9);
    ASSERT_EQ(report.top_features.size(), 10u);
    for (std::size_t i = 0; i < 10; ++i) {
      const auto& t = report.top_features[i];
      EXPECT_EQ(t.name, registry.entries[t.index].name);
      EXPECT_EQ(t.weight, report.attention[t.index]);
      EXPECT_EQ(t.value, fv.values[t.index]);
      EXPECT_EQ(t.available, fv.available[t.index]);
      if (i > 0) {
        const auto& prev = report.top_features[i - 1];
        EXPECT_TRUE(prev.weight > t.weight || (prev.weight == t.weight && prev.index < t.index));
      }
    }
    // Nothing outside the list outranks its last entry.
    const auto& last = report.top_features.back();
    for (std::size_t j = 0; j < registry.size(); ++j) {
      bool listed = false;
      for (const auto& t : report.top_features) listed |= t.index == j;
      if (!listed)
        EXPECT_TRUE(report.attention[j] < last.weight || (report.attention[j] == last.weight && j > last.index));
    }
  }
}

}  // namespace
}  // namespace ukta
