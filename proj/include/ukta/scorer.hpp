#pragma once

// Attention-gated rubric scorer (paper §3.3, Fig. 2(c)).
//
//   f'  = (f - mu) / sigma                       standard scaler, Eq. (7)
//   A   = softmax(W_a f' + b_a)                  feature attention
//   f_A = A (.) f'                               Eq. (8)
//   v_e = tanh(W_e [f_A; f'] + b_e)              essay-level dense branch
//   h   = [GRU_fwd(e_1..e_N); GRU_bwd(e_N..e_1)] sentence encoder
//   y   = 3 * sigmoid(W_o dropout([h; v_e]) + b_o)
//
// The baseline model drops the essay branch (y from h only). Gradients are
// derived by hand; Eigen supplies the dense linear algebra.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "ukta/analysis.hpp"
#include "ukta/embeddings.hpp"
#include "ukta/error.hpp"
#include "ukta/registry.hpp"
#include "ukta/rng.hpp"
#include "ukta/rubric.hpp"

namespace ukta {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// ---------------------------------------------------------------- scaler

struct Scaler {
  std::vector<double> mean;
  std::vector<double> stddev;  // population standard deviation

  std::size_t size() const { return mean.size(); }
  bool zero_variance(std::size_t i) const { return !(stddev[i] > 0.0); }

  // Zero-variance and unavailable features map to 0 (the training mean).
  VectorXd transform(const FeatureVector& fv) const {
    if (fv.size() != size())
      throw Error(ErrorCode::ShapeMismatch, "feature vector has " + std::to_string(fv.size()) +
                                                " entries, scaler expects " +
                                                std::to_string(size()));
    VectorXd out(static_cast<Eigen::Index>(size()));
    for (std::size_t i = 0; i < size(); ++i) {
      const bool usable = fv.available[i] && !zero_variance(i);
      out[static_cast<Eigen::Index>(i)] = usable ? (fv.values[i] - mean[i]) / stddev[i] : 0.0;
    }
    return out;
  }
};

// Welford's single pass over the available values of each feature.
inline Scaler fit_scaler(std::span<const FeatureVector> train) {
  if (train.size() < 2)
    throw Error(ErrorCode::InsufficientData, "scaler needs at least two training vectors");
  const std::size_t f = train.front().size();
  Scaler s;
  s.mean.assign(f, 0.0);
  s.stddev.assign(f, 0.0);
  std::vector<double> m2(f, 0.0);
  std::vector<std::size_t> n(f, 0);
  for (const auto& fv : train) {
    if (fv.size() != f) throw Error(ErrorCode::ShapeMismatch, "training vectors differ in length");
    for (std::size_t i = 0; i < f; ++i) {
      if (!fv.available[i]) continue;
      ++n[i];
      const double delta = fv.values[i] - s.mean[i];
      s.mean[i] += delta / static_cast<double>(n[i]);
      m2[i] += delta * (fv.values[i] - s.mean[i]);
    }
  }
  for (std::size_t i = 0; i < f; ++i)
    s.stddev[i] = n[i] > 0 ? std::sqrt(m2[i] / static_cast<double>(n[i])) : 0.0;
  return s;
}

// ---------------------------------------------------------------- config

enum class AttentionMode {
  Conditioned,  // logits = W_a f' + b_a (per-sample weights)
  GlobalBias,   // logits = b_a (one learned weighting for every essay)
};

inline std::string_view to_string(AttentionMode m) {
  return m == AttentionMode::Conditioned ? "conditioned" : "global";
}

struct ScorerConfig {
  std::size_t features = 0;        // F
  std::size_t embed_dim = 64;      // E
  std::size_t hidden = 32;         // h per direction
  std::size_t essay_dim = 64;      // d_e
  bool essay_branch = true;        // false = baseline (sentence-only) model
  AttentionMode attention = AttentionMode::Conditioned;
  double dropout = 0.5;
  double lr = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  std::size_t epochs = 100;
  std::size_t patience = 10;       // 0 disables early stopping
  std::size_t batch_size = 16;

  std::size_t head_inputs() const { return 2 * hidden + (essay_branch ? essay_dim : 0); }

  void validate() const {
    if (features == 0 || embed_dim == 0 || hidden == 0 || (essay_branch && essay_dim == 0) ||
        batch_size == 0 || !(dropout >= 0.0 && dropout < 1.0) || !(lr > 0.0))
      throw Error(ErrorCode::Precondition, "invalid scorer configuration");
  }
};

// ---------------------------------------------------------------- params

struct GruParams {
  MatrixXd W;  // 3h x E, gate rows stacked [z; r; n]
  MatrixXd U;  // 3h x h
  MatrixXd b;  // 3h x 1
};

struct ModelParams {
  MatrixXd W_a, b_a;  // F x F, F x 1
  MatrixXd W_e, b_e;  // d_e x 2F, d_e x 1
  GruParams fwd, bwd;
  MatrixXd W_o, b_o;  // 10 x (2h [+ d_e]), 10 x 1

  // Calls f(name, tensor) for every trainable tensor in a fixed order;
  // tensors the configuration does not use are empty and skipped.
  template <typename F>
  void visit(F&& f) {
    visit_impl(*this, f);
  }
  template <typename F>
  void visit(F&& f) const {
    visit_impl(*this, f);
  }

  ModelParams zeros_like() const {
    ModelParams z = *this;
    z.visit([](std::string_view, MatrixXd& m) { m.setZero(); });
    return z;
  }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    visit([&](std::string_view, const MatrixXd& m) { n += static_cast<std::size_t>(m.size()); });
    return n;
  }

 private:
  template <typename Self, typename F>
  static void visit_impl(Self& p, F& f) {
    auto go = [&](std::string_view name, auto& m) {
      if (m.size() > 0) f(name, m);
    };
    go("attention.W", p.W_a);
    go("attention.b", p.b_a);
    go("essay.W", p.W_e);
    go("essay.b", p.b_e);
    go("gru_fwd.W", p.fwd.W);
    go("gru_fwd.U", p.fwd.U);
    go("gru_fwd.b", p.fwd.b);
    go("gru_bwd.W", p.bwd.W);
    go("gru_bwd.U", p.bwd.U);
    go("gru_bwd.b", p.bwd.b);
    go("head.W", p.W_o);
    go("head.b", p.b_o);
  }
};

namespace detail {

inline void fill_uniform(MatrixXd& m, double bound, CounterRng& rng) {
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = (2.0 * rng.uniform() - 1.0) * bound;
}

inline double glorot(std::size_t fan_in, std::size_t fan_out) {
  return std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
}

inline double sigmoid(double x) {
  return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

inline VectorXd sigmoid(const VectorXd& x) { return x.unaryExpr([](double v) { return sigmoid(v); }); }

inline VectorXd softmax(const VectorXd& logits) {
  const double m = logits.maxCoeff();
  VectorXd e = (logits.array() - m).exp().matrix();
  return e / e.sum();
}

}  // namespace detail

// Glorot-uniform weights (GRU: U(-1/sqrt(h), 1/sqrt(h)) as in common
// recurrent-layer practice), zero biases; fully determined by `seed`.
inline ModelParams init_params(const ScorerConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  const auto F = static_cast<Eigen::Index>(cfg.features);
  const auto E = static_cast<Eigen::Index>(cfg.embed_dim);
  const auto H = static_cast<Eigen::Index>(cfg.hidden);
  const auto D = static_cast<Eigen::Index>(cfg.essay_dim);
  const auto O = static_cast<Eigen::Index>(kRubricCount);
  auto rng = CounterRng::keyed({seed, 0x494E4954});  // "INIT"
  ModelParams p;
  if (cfg.essay_branch) {
    if (cfg.attention == AttentionMode::Conditioned) {
      p.W_a.resize(F, F);
      detail::fill_uniform(p.W_a, detail::glorot(cfg.features, cfg.features), rng);
    }
    p.b_a = MatrixXd::Zero(F, 1);
    p.W_e.resize(D, 2 * F);
    detail::fill_uniform(p.W_e, detail::glorot(2 * cfg.features, cfg.essay_dim), rng);
    p.b_e = MatrixXd::Zero(D, 1);
  }
  const double gru_bound = 1.0 / std::sqrt(static_cast<double>(cfg.hidden));
  for (GruParams* g : {&p.fwd, &p.bwd}) {
    g->W.resize(3 * H, E);
    g->U.resize(3 * H, H);
    detail::fill_uniform(g->W, gru_bound, rng);
    detail::fill_uniform(g->U, gru_bound, rng);
    g->b = MatrixXd::Zero(3 * H, 1);
  }
  const auto in = static_cast<Eigen::Index>(cfg.head_inputs());
  p.W_o.resize(O, in);
  detail::fill_uniform(p.W_o, detail::glorot(cfg.head_inputs(), kRubricCount), rng);
  p.b_o = MatrixXd::Zero(O, 1);
  return p;
}

// ---------------------------------------------------------------- forward

// One essay as the network sees it.
struct ScorerInput {
  VectorXd features;   // scaled f', length F
  MatrixXd sentences;  // E x N, one column per sentence embedding
};

struct GruStep {
  VectorXd h_prev, z, r, n, c;  // c = U_n h_prev
};

struct ForwardCache {
  VectorXd attention;  // A
  VectorXd essay_in;   // [f_A; f']
  VectorXd v_e;
  std::vector<GruStep> fwd, bwd;
  VectorXd head_in;    // [h; v_e] after dropout
  VectorXd mask;       // dropout multipliers (empty in eval mode)
  VectorXd s;          // sigmoid outputs, y = 3 s
};

namespace detail {

inline VectorXd gru_step(const GruParams& g, const VectorXd& x, const VectorXd& h,
                         GruStep* cache) {
  const Eigen::Index H = h.size();
  const VectorXd wx = g.W * x + g.b;
  const VectorXd uh_zr = g.U.topRows(2 * H) * h;
  VectorXd z = sigmoid(VectorXd(wx.head(H) + uh_zr.head(H)));
  VectorXd r = sigmoid(VectorXd(wx.segment(H, H) + uh_zr.tail(H)));
  VectorXd c = g.U.bottomRows(H) * h;
  VectorXd n = (wx.tail(H) + r.cwiseProduct(c)).array().tanh().matrix();
  VectorXd out = (1.0 - z.array()).matrix().cwiseProduct(n) + z.cwiseProduct(h);
  if (cache) *cache = {h, std::move(z), std::move(r), std::move(n), std::move(c)};
  return out;
}

inline VectorXd gru_run(const GruParams& g, const MatrixXd& xs, bool reverse,
                        std::vector<GruStep>* cache) {
  const auto H = g.U.cols();
  VectorXd h = VectorXd::Zero(H);
  const auto N = xs.cols();
  if (cache) cache->resize(static_cast<std::size_t>(N));
  for (Eigen::Index t = 0; t < N; ++t) {
    const Eigen::Index col = reverse ? N - 1 - t : t;
    h = gru_step(g, xs.col(col), h, cache ? &(*cache)[static_cast<std::size_t>(t)] : nullptr);
  }
  return h;
}

// Backpropagates dh (gradient on the final hidden state) through the
// cached steps, accumulating into `grad`.
inline void gru_backward(const GruParams& g, const MatrixXd& xs, bool reverse,
                         const std::vector<GruStep>& steps, VectorXd dh, GruParams& grad) {
  const auto H = g.U.cols();
  const auto N = xs.cols();
  for (Eigen::Index t = N - 1; t >= 0; --t) {
    const GruStep& s = steps[static_cast<std::size_t>(t)];
    const Eigen::Index col = reverse ? N - 1 - t : t;
    const auto x = xs.col(col);
    const VectorXd dn = dh.cwiseProduct((1.0 - s.z.array()).matrix());
    const VectorXd dz = dh.cwiseProduct(s.h_prev - s.n);
    VectorXd dh_prev = dh.cwiseProduct(s.z);
    VectorXd dgate(3 * H);
    const VectorXd dgn = dn.cwiseProduct((1.0 - s.n.array().square()).matrix());
    const VectorXd dr = dgn.cwiseProduct(s.c);
    const VectorXd dc = dgn.cwiseProduct(s.r);
    dgate.head(H) = dz.cwiseProduct(s.z.cwiseProduct((1.0 - s.z.array()).matrix()));
    dgate.segment(H, H) = dr.cwiseProduct(s.r.cwiseProduct((1.0 - s.r.array()).matrix()));
    dgate.tail(H) = dgn;
    grad.W.noalias() += dgate * x.transpose();
    grad.b += dgate;
    grad.U.topRows(2 * H).noalias() += dgate.head(2 * H) * s.h_prev.transpose();
    grad.U.bottomRows(H).noalias() += dc * s.h_prev.transpose();
    dh_prev.noalias() += g.U.topRows(2 * H).transpose() * dgate.head(2 * H);
    dh_prev.noalias() += g.U.bottomRows(H).transpose() * dc;
    dh = std::move(dh_prev);
  }
}

}  // namespace detail

inline void check_input(const ScorerConfig& cfg, const ScorerInput& in) {
  if (in.sentences.cols() == 0) throw Error(ErrorCode::EmptyEssay, "essay has no sentences");
  if (static_cast<std::size_t>(in.sentences.rows()) != cfg.embed_dim)
    throw Error(ErrorCode::ShapeMismatch,
                "sentence embeddings have dim " + std::to_string(in.sentences.rows()) +
                    ", model expects " + std::to_string(cfg.embed_dim));
  if (static_cast<std::size_t>(in.features.size()) != cfg.features)
    throw Error(ErrorCode::ShapeMismatch,
                "feature vector has " + std::to_string(in.features.size()) +
                    " entries, model expects " + std::to_string(cfg.features));
}

// Attention over the scaled features; exposed for explanation and tests.
inline VectorXd attention_weights(const ModelParams& p, const ScorerConfig& cfg,
                                  const VectorXd& f) {
  if (!cfg.essay_branch) return {};
  VectorXd logits = p.b_a;
  if (cfg.attention == AttentionMode::Conditioned) logits.noalias() += p.W_a * f;
  return detail::softmax(logits);
}

// Final hidden states of both directions, [->h; <-h].
inline VectorXd encode_sentences(const ModelParams& p, const MatrixXd& sentences) {
  if (sentences.cols() == 0) throw Error(ErrorCode::EmptyEssay, "essay has no sentences");
  const auto H = p.fwd.U.cols();
  VectorXd h(2 * H);
  h.head(H) = detail::gru_run(p.fwd, sentences, false, nullptr);
  h.tail(H) = detail::gru_run(p.bwd, sentences, true, nullptr);
  return h;
}

// Returns the sigmoid outputs s (raw score = 3 s). `mask` holds inverted
// dropout multipliers for [h; v_e]; nullptr means eval mode.
inline VectorXd forward(const ModelParams& p, const ScorerConfig& cfg, const ScorerInput& in,
                        const VectorXd* mask = nullptr, ForwardCache* cache = nullptr) {
  check_input(cfg, in);
  const auto H = static_cast<Eigen::Index>(cfg.hidden);
  const auto F = static_cast<Eigen::Index>(cfg.features);
  VectorXd u(static_cast<Eigen::Index>(cfg.head_inputs()));
  u.head(H) = detail::gru_run(p.fwd, in.sentences, false, cache ? &cache->fwd : nullptr);
  u.segment(H, H) = detail::gru_run(p.bwd, in.sentences, true, cache ? &cache->bwd : nullptr);
  if (cfg.essay_branch) {
    VectorXd a = attention_weights(p, cfg, in.features);
    VectorXd xe(2 * F);
    xe.head(F) = a.cwiseProduct(in.features);
    xe.tail(F) = in.features;
    VectorXd ve = (p.W_e * xe + p.b_e).array().tanh().matrix();
    u.tail(static_cast<Eigen::Index>(cfg.essay_dim)) = ve;
    if (cache) {
      cache->attention = std::move(a);
      cache->essay_in = std::move(xe);
      cache->v_e = std::move(ve);
    }
  }
  if (mask) {
    if (mask->size() != u.size()) throw Error(ErrorCode::ShapeMismatch, "dropout mask size");
    u = u.cwiseProduct(*mask);
  }
  VectorXd s = detail::sigmoid(VectorXd(p.W_o * u + p.b_o));
  if (cache) {
    cache->head_in = u;
    cache->mask = mask ? *mask : VectorXd();
    cache->s = s;
  }
  return s;
}

// Per-essay loss: mean over the 10 rubrics of (s_k - t_k)^2 with targets
// t = label / 3, i.e. the MSE of raw/3 against labels/3.
inline double sample_loss(const VectorXd& s, const VectorXd& target) {
  return (s - target).squaredNorm() / static_cast<double>(s.size());
}

// Accumulates scale * d(sample_loss)/d(params) into `grad`.
inline void backward(const ModelParams& p, const ScorerConfig& cfg, const ScorerInput& in,
                     const ForwardCache& c, const VectorXd& target, double scale,
                     ModelParams& grad) {
  const auto H = static_cast<Eigen::Index>(cfg.hidden);
  const auto F = static_cast<Eigen::Index>(cfg.features);
  const double k = 2.0 / static_cast<double>(c.s.size()) * scale;
  const VectorXd dlogit =
      (k * (c.s - target).array() * c.s.array() * (1.0 - c.s.array())).matrix();
  grad.W_o.noalias() += dlogit * c.head_in.transpose();
  grad.b_o += dlogit;
  VectorXd du = p.W_o.transpose() * dlogit;
  if (c.mask.size() > 0) du = du.cwiseProduct(c.mask);

  if (cfg.essay_branch) {
    const auto De = static_cast<Eigen::Index>(cfg.essay_dim);
    const VectorXd dpre =
        du.tail(De).cwiseProduct((1.0 - c.v_e.array().square()).matrix());
    grad.W_e.noalias() += dpre * c.essay_in.transpose();
    grad.b_e += dpre;
    const VectorXd dfa = (p.W_e.leftCols(F).transpose() * dpre);
    const VectorXd da = dfa.cwiseProduct(in.features);
    const double dot = c.attention.dot(da);
    const VectorXd dlog = c.attention.cwiseProduct((da.array() - dot).matrix());
    if (cfg.attention == AttentionMode::Conditioned)
      grad.W_a.noalias() += dlog * in.features.transpose();
    grad.b_a += dlog;
  }
  detail::gru_backward(p.fwd, in.sentences, false, c.fwd, du.head(H), grad.fwd);
  detail::gru_backward(p.bwd, in.sentences, true, c.bwd, du.segment(H, H), grad.bwd);
}

inline VectorXd dropout_mask(std::size_t size, double rate, CounterRng& rng) {
  VectorXd m(static_cast<Eigen::Index>(size));
  const double keep = 1.0 / (1.0 - rate);
  for (Eigen::Index i = 0; i < m.size(); ++i) m[i] = rng.uniform() < rate ? 0.0 : keep;
  return m;
}

// ---------------------------------------------------------------- training

struct TrainExample {
  ScorerInput input;
  VectorXd target;  // labels / 3
};

struct TrainLog {
  std::vector<double> train_loss;  // eval-mode MSE on the training set, per epoch
  std::vector<double> val_loss;    // eval-mode MSE on the validation set (if any)
  std::size_t best_epoch = 0;      // 1-based epoch whose params were kept
  bool early_stopped = false;
};

inline double mean_loss(const ModelParams& p, const ScorerConfig& cfg,
                        std::span<const TrainExample> data) {
  double sum = 0.0;
  for (const auto& ex : data) sum += sample_loss(forward(p, cfg, ex.input), ex.target);
  return data.empty() ? 0.0 : sum / static_cast<double>(data.size());
}

class Adam {
 public:
  Adam(const ModelParams& shape, const ScorerConfig& cfg)
      : m_(shape.zeros_like()), v_(shape.zeros_like()), cfg_(cfg) {}

  void step(ModelParams& params, ModelParams& grad) {
    ++t_;
    const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    std::vector<MatrixXd*> ps, gs, ms, vs;
    params.visit([&](std::string_view, MatrixXd& x) { ps.push_back(&x); });
    grad.visit([&](std::string_view, MatrixXd& x) { gs.push_back(&x); });
    m_.visit([&](std::string_view, MatrixXd& x) { ms.push_back(&x); });
    v_.visit([&](std::string_view, MatrixXd& x) { vs.push_back(&x); });
    for (std::size_t i = 0; i < ps.size(); ++i) {
      auto g = gs[i]->array();
      ms[i]->array() = cfg_.beta1 * ms[i]->array() + (1.0 - cfg_.beta1) * g;
      vs[i]->array() = cfg_.beta2 * vs[i]->array() + (1.0 - cfg_.beta2) * g.square();
      ps[i]->array() -= cfg_.lr * (ms[i]->array() / c1) /
                        ((vs[i]->array() / c2).sqrt() + cfg_.adam_eps);
    }
  }

 private:
  ModelParams m_, v_;
  ScorerConfig cfg_;
  std::uint64_t t_ = 0;
};

struct TrainResult {
  ModelParams params;
  TrainLog log;
};

// Mini-batch Adam on the MSE loss with seeded shuffling and dropout.
// Keeps the parameters of the epoch with the lowest validation loss
// (training loss when `val` is empty); stops after `patience` epochs
// without improvement.
inline TrainResult train_params(std::span<const TrainExample> train,
                                std::span<const TrainExample> val, const ScorerConfig& cfg,
                                std::uint64_t seed, std::optional<ModelParams> start = {}) {
  cfg.validate();
  if (train.empty()) throw Error(ErrorCode::NoLabels, "no labelled training essays");
  for (const auto& ex : train) check_input(cfg, ex.input);
  ModelParams params = start ? std::move(*start) : init_params(cfg, seed);
  Adam adam(params, cfg);
  TrainResult out;
  out.params = params;
  double best = std::numeric_limits<double>::infinity();
  std::size_t since_best = 0;
  std::vector<std::size_t> order(train.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  ForwardCache cache;
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    auto shuffle = CounterRng::keyed({seed, 0x53485546, epoch});  // "SHUF"
    for (std::size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1], order[static_cast<std::size_t>(shuffle.below(i))]);
    for (std::size_t start_i = 0; start_i < order.size(); start_i += cfg.batch_size) {
      const std::size_t end_i = std::min(order.size(), start_i + cfg.batch_size);
      ModelParams grad = params.zeros_like();
      const double scale = 1.0 / static_cast<double>(end_i - start_i);
      for (std::size_t b = start_i; b < end_i; ++b) {
        const auto& ex = train[order[b]];
        std::optional<VectorXd> mask;
        if (cfg.dropout > 0.0) {
          auto drop = CounterRng::keyed({seed, 0x44524F50, epoch, order[b]});  // "DROP"
          mask = dropout_mask(cfg.head_inputs(), cfg.dropout, drop);
        }
        forward(params, cfg, ex.input, mask ? &*mask : nullptr, &cache);
        backward(params, cfg, ex.input, cache, ex.target, scale, grad);
      }
      adam.step(params, grad);
    }
    const double train_loss = mean_loss(params, cfg, train);
    out.log.train_loss.push_back(train_loss);
    double monitor = train_loss;
    if (!val.empty()) {
      monitor = mean_loss(params, cfg, val);
      out.log.val_loss.push_back(monitor);
    }
    if (!std::isfinite(train_loss) || !std::isfinite(monitor))
      throw Error(ErrorCode::DivergedLoss, "loss became non-finite", "epoch " + std::to_string(epoch));
    if (monitor < best) {
      best = monitor;
      since_best = 0;
      out.params = params;
      out.log.best_epoch = epoch;
    } else if (cfg.patience > 0 && ++since_best >= cfg.patience) {
      out.log.early_stopped = true;
      break;
    }
  }
  return out;
}

// ---------------------------------------------------------------- model

// A labelled or unlabelled essay reduced to model inputs.
struct Sample {
  std::string id;
  std::string topic;
  FeatureVector features;
  MatrixXd sentences;  // E x N
  std::optional<RubricScores> labels;
};

inline MatrixXd sentence_matrix(const std::vector<Vec>& vectors) {
  if (vectors.empty()) throw Error(ErrorCode::EmptyEssay, "essay has no sentences");
  MatrixXd m(static_cast<Eigen::Index>(vectors.front().size()),
             static_cast<Eigen::Index>(vectors.size()));
  for (std::size_t j = 0; j < vectors.size(); ++j) {
    if (vectors[j].size() != vectors.front().size())
      throw Error(ErrorCode::ShapeMismatch, "sentence embeddings differ in dim");
    m.col(static_cast<Eigen::Index>(j)) =
        Eigen::Map<const VectorXd>(vectors[j].data(), static_cast<Eigen::Index>(vectors[j].size()));
  }
  return m;
}

inline Sample make_sample(const Essay& essay, const FeatureVector& features,
                          const EmbeddingProvider& provider) {
  Sample s;
  s.id = essay.id;
  s.topic = essay.meta.topic.value_or("");
  s.features = features;
  s.sentences = sentence_matrix(embed_sentences(essay, provider));
  s.labels = essay.labels;
  return s;
}

inline Sample make_sample(const Essay& essay, const FeatureRegistry& registry,
                          const EmbeddingProvider& provider) {
  return make_sample(essay, analyze(essay, registry, provider).features, provider);
}

struct Model {
  ScorerConfig config;
  Scaler scaler;
  ModelParams params;
  std::string registry_fingerprint;
  std::string embedding_kind;
  std::uint64_t seed = 0;
  TrainLog log;
};

inline VectorXd label_targets(const RubricScores& labels) {
  VectorXd t(static_cast<Eigen::Index>(kRubricCount));
  for (std::size_t k = 0; k < kRubricCount; ++k)
    t[static_cast<Eigen::Index>(k)] = labels[k] / static_cast<double>(kMaxRubricScore);
  return t;
}

inline std::vector<TrainExample> make_examples(std::span<const Sample> samples,
                                               const Scaler& scaler) {
  std::vector<TrainExample> out;
  out.reserve(samples.size());
  for (const auto& s : samples) {
    if (!s.labels) throw Error(ErrorCode::NoLabels, "essay has no rubric labels", s.id);
    out.push_back({{scaler.transform(s.features), s.sentences}, label_targets(*s.labels)});
  }
  return out;
}

// Fits the scaler on `train` only, then trains. `cfg.features` and
// `cfg.embed_dim` are taken from the data.
inline Model fit_model(std::span<const Sample> train, std::span<const Sample> val,
                       const FeatureRegistry& registry, const EmbeddingProvider& provider,
                       ScorerConfig cfg, std::uint64_t seed) {
  if (train.empty()) throw Error(ErrorCode::NoLabels, "empty training set");
  std::vector<FeatureVector> fvs;
  for (const auto& s : train) fvs.push_back(s.features);
  Model m;
  m.scaler = fit_scaler(fvs);
  cfg.features = m.scaler.size();
  if (cfg.features != registry.size())
    throw Error(ErrorCode::RegistryMismatch, "feature vectors do not match the registry");
  cfg.embed_dim = static_cast<std::size_t>(train.front().sentences.rows());
  const auto train_ex = make_examples(train, m.scaler);
  const auto val_ex = make_examples(val, m.scaler);
  auto result = train_params(train_ex, val_ex, cfg, seed);
  m.config = cfg;
  m.params = std::move(result.params);
  m.log = std::move(result.log);
  m.registry_fingerprint = registry_fingerprint(registry);
  m.embedding_kind = provider.kind();
  m.seed = seed;
  return m;
}

// ---------------------------------------------------------------- predict

struct TopFeature {
  std::size_t index = 0;
  std::string name;
  Family family = Family::Basic;
  double weight = 0.0;
  double value = 0.0;  // the essay's raw (unscaled) feature value
  bool available = true;
};

struct RubricReport {
  std::array<double, kRubricCount> raw{};  // in (0, 3)
  RubricScores scores{};
  std::vector<double> attention;  // full weight vector (empty for the baseline)
  std::vector<TopFeature> top_features;
};

// Round-half-up then clamp to the rubric range.
inline int round_score(double raw) {
  return std::clamp(static_cast<int>(std::floor(raw + 0.5)), 0, kMaxRubricScore);
}

// The k largest weights, ties broken by the lower registry index.
inline std::vector<std::size_t> top_k_indices(std::span<const double> weights, std::size_t k) {
  std::vector<std::size_t> idx(weights.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  k = std::min(k, idx.size());
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(),
                    [&](std::size_t a, std::size_t b) {
                      return weights[a] != weights[b] ? weights[a] > weights[b] : a < b;
                    });
  idx.resize(k);
  return idx;
}

inline void check_registry(const Model& model, const FeatureRegistry& registry) {
  if (registry.size() != model.config.features ||
      registry_fingerprint(registry) != model.registry_fingerprint)
    throw Error(ErrorCode::RegistryMismatch,
                "model was trained with registry " + model.registry_fingerprint + ", got " +
                    registry_fingerprint(registry));
}

inline RubricReport predict(const Model& model, const FeatureVector& features,
                            const MatrixXd& sentences, const FeatureRegistry& registry,
                            std::size_t k = 10) {
  check_registry(model, registry);
  ScorerInput in{model.scaler.transform(features), sentences};
  const VectorXd s = forward(model.params, model.config, in);
  RubricReport r;
  for (std::size_t i = 0; i < kRubricCount; ++i) {
    r.raw[i] = 3.0 * s[static_cast<Eigen::Index>(i)];
    r.scores[i] = round_score(r.raw[i]);
  }
  const VectorXd a = attention_weights(model.params, model.config, in.features);
  r.attention.assign(a.data(), a.data() + a.size());
  for (auto i : top_k_indices(r.attention, k)) {
    const auto& e = registry.entries[i];
    r.top_features.push_back(
        {i, e.name, e.family, r.attention[i], features.values[i], features.available[i]});
  }
  return r;
}

inline RubricReport predict(const Model& model, const Sample& sample,
                            const FeatureRegistry& registry, std::size_t k = 10) {
  return predict(model, sample.features, sample.sentences, registry, k);
}

// ---------------------------------------------------------------- checkpoint

namespace detail {

inline nlohmann::ordered_json matrix_to_json(const MatrixXd& m) {
  nlohmann::ordered_json j;
  j["rows"] = m.rows();
  j["cols"] = m.cols();
  auto data = nlohmann::ordered_json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index c = 0; c < m.cols(); ++c) data.push_back(m(i, c));
  j["data"] = std::move(data);
  return j;
}

inline MatrixXd matrix_from_json(const nlohmann::ordered_json& j, const std::string& where) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto& data = j.at("data");
  if (!data.is_array() || static_cast<Eigen::Index>(data.size()) != rows * cols)
    throw Error(ErrorCode::MalformedRecord, "tensor data has the wrong size", where);
  MatrixXd m(rows, cols);
  std::size_t k = 0;
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index c = 0; c < cols; ++c) m(i, c) = data[k++].get<double>();
  return m;
}

}  // namespace detail

inline constexpr int kCheckpointVersion = 1;

inline nlohmann::ordered_json model_to_json(const Model& m) {
  using J = nlohmann::ordered_json;
  J j;
  j["format"] = "ukta-model";
  j["version"] = kCheckpointVersion;
  j["registry_fingerprint"] = m.registry_fingerprint;
  j["embedding"] = {{"kind", m.embedding_kind}, {"dim", m.config.embed_dim}};
  j["seed"] = m.seed;
  const auto& c = m.config;
  j["hyper"] = {{"features", c.features},
                {"hidden", c.hidden},
                {"essay_dim", c.essay_dim},
                {"essay_branch", c.essay_branch},
                {"attention", to_string(c.attention)},
                {"dropout", c.dropout},
                {"lr", c.lr},
                {"beta1", c.beta1},
                {"beta2", c.beta2},
                {"adam_eps", c.adam_eps},
                {"epochs", c.epochs},
                {"patience", c.patience},
                {"batch_size", c.batch_size}};
  j["scaler"] = {{"mean", m.scaler.mean}, {"std", m.scaler.stddev}};
  J tensors = J::object();
  m.params.visit([&](std::string_view name, const MatrixXd& t) {
    tensors[std::string(name)] = detail::matrix_to_json(t);
  });
  j["tensors"] = std::move(tensors);
  j["log"] = {{"train_loss", m.log.train_loss},
              {"val_loss", m.log.val_loss},
              {"best_epoch", m.log.best_epoch},
              {"early_stopped", m.log.early_stopped}};
  return j;
}

inline Model model_from_json(const nlohmann::ordered_json& j) {
  try {
    if (j.value("format", "") != "ukta-model" || j.value("version", 0) != kCheckpointVersion)
      throw Error(ErrorCode::MalformedRecord, "not a ukta model checkpoint (version 1)", "/format");
    Model m;
    m.registry_fingerprint = j.at("registry_fingerprint").get<std::string>();
    m.embedding_kind = j.at("embedding").at("kind").get<std::string>();
    m.seed = j.at("seed").get<std::uint64_t>();
    const auto& h = j.at("hyper");
    auto& c = m.config;
    c.features = h.at("features").get<std::size_t>();
    c.embed_dim = j.at("embedding").at("dim").get<std::size_t>();
    c.hidden = h.at("hidden").get<std::size_t>();
    c.essay_dim = h.at("essay_dim").get<std::size_t>();
    c.essay_branch = h.at("essay_branch").get<bool>();
    const auto mode = h.at("attention").get<std::string>();
    if (mode != "conditioned" && mode != "global")
      throw Error(ErrorCode::MalformedRecord, "unknown attention mode '" + mode + "'", "/hyper");
    c.attention = mode == "conditioned" ? AttentionMode::Conditioned : AttentionMode::GlobalBias;
    c.dropout = h.at("dropout").get<double>();
    c.lr = h.at("lr").get<double>();
    c.beta1 = h.at("beta1").get<double>();
    c.beta2 = h.at("beta2").get<double>();
    c.adam_eps = h.at("adam_eps").get<double>();
    c.epochs = h.at("epochs").get<std::size_t>();
    c.patience = h.at("patience").get<std::size_t>();
    c.batch_size = h.at("batch_size").get<std::size_t>();
    c.validate();
    m.scaler.mean = j.at("scaler").at("mean").get<std::vector<double>>();
    m.scaler.stddev = j.at("scaler").at("std").get<std::vector<double>>();
    if (m.scaler.size() != c.features || m.scaler.stddev.size() != c.features)
      throw Error(ErrorCode::ShapeMismatch, "scaler size does not match the model", "/scaler");
    // Shapes come from a fresh initialisation; the checkpoint must match them.
    m.params = init_params(c, 0);
    const auto& tensors = j.at("tensors");
    std::size_t seen = 0;
    m.params.visit([&](std::string_view name, MatrixXd& t) {
      const std::string key(name);
      if (!tensors.contains(key))
        throw Error(ErrorCode::MalformedRecord, "checkpoint lacks tensor " + key, "/tensors");
      MatrixXd loaded = detail::matrix_from_json(tensors[key], "/tensors/" + key);
      if (loaded.rows() != t.rows() || loaded.cols() != t.cols())
        throw Error(ErrorCode::ShapeMismatch, "tensor " + key + " has the wrong shape",
                    "/tensors/" + key);
      t = std::move(loaded);
      ++seen;
    });
    if (seen != tensors.size())
      throw Error(ErrorCode::MalformedRecord, "checkpoint has unexpected tensors", "/tensors");
    if (j.contains("log")) {
      const auto& l = j["log"];
      m.log.train_loss = l.value("train_loss", std::vector<double>{});
      m.log.val_loss = l.value("val_loss", std::vector<double>{});
      m.log.best_epoch = l.value("best_epoch", std::size_t{0});
      m.log.early_stopped = l.value("early_stopped", false);
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::MalformedRecord, std::string("bad checkpoint: ") + e.what());
  }
}

}  // namespace ukta
