#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ukta/rng.hpp"

namespace ukta {

using TypeId = std::uint32_t;

// Sequence of interned lemma types. Metrics only compare ids, so any
// bijective relabelling yields identical results.
struct TokenSeq {
  std::vector<TypeId> tokens;

  std::size_t size() const { return tokens.size(); }
  bool empty() const { return tokens.empty(); }
  TypeId max_id() const {
    return tokens.empty() ? 0 : *std::max_element(tokens.begin(), tokens.end());
  }
};

class LemmaInterner {
 public:
  TypeId intern(std::string_view lemma) {
    auto [it, inserted] = ids_.try_emplace(std::string(lemma), static_cast<TypeId>(ids_.size()));
    return it->second;
  }
  std::size_t size() const { return ids_.size(); }

 private:
  std::unordered_map<std::string, TypeId> ids_;
};

struct DiversityParams {
  std::size_t window_n = 25;      // MSTTR / MATTR segment length
  double mtld_threshold = 0.72;   // TTR factor cut-off
  std::size_t hdd_sample = 42;    // HD-D sample size S
  std::size_t vocd_min_n = 35;
  std::size_t vocd_max_n = 50;
  std::size_t vocd_trials = 100;
  std::uint64_t rng_seed = 42;

  bool valid() const {
    return window_n >= 1 && mtld_threshold > 0.0 && mtld_threshold < 1.0 && hdd_sample >= 1 &&
           vocd_trials >= 1 && vocd_min_n >= 1 && vocd_min_n <= vocd_max_n;
  }
};

enum class MtldVariant {
  Bidirectional,  // forward/backward mean with partial-factor correction
  Literal,        // forward scan, full factors only: N / K
};

namespace detail {

inline std::size_t distinct(std::span<const TypeId> tokens) {
  std::vector<TypeId> v(tokens.begin(), tokens.end());
  std::sort(v.begin(), v.end());
  return static_cast<std::size_t>(std::unique(v.begin(), v.end()) - v.begin());
}

}  // namespace detail

inline std::optional<std::size_t> ndw(const TokenSeq& seq) {
  if (seq.empty()) return std::nullopt;
  return detail::distinct(seq.tokens);
}

inline std::optional<double> ttr(const TokenSeq& seq) {
  if (seq.empty()) return std::nullopt;
  return static_cast<double>(*ndw(seq)) / static_cast<double>(seq.size());
}

inline std::optional<double> rttr(const TokenSeq& seq) {
  if (seq.empty()) return std::nullopt;
  return static_cast<double>(*ndw(seq)) / std::sqrt(static_cast<double>(seq.size()));
}

inline std::optional<double> cttr(const TokenSeq& seq) {
  if (seq.empty()) return std::nullopt;
  return static_cast<double>(*ndw(seq)) / std::sqrt(2.0 * static_cast<double>(seq.size()));
}

// Mean TTR over floor(N/n) full, non-overlapping segments; the trailing
// partial segment is dropped.
inline std::optional<double> msttr(const TokenSeq& seq, std::size_t n) {
  if (n == 0 || seq.size() < n) return std::nullopt;
  const std::size_t k = seq.size() / n;
  std::vector<std::uint32_t> seen(static_cast<std::size_t>(seq.max_id()) + 1, 0);
  double sum = 0.0;
  for (std::size_t seg = 0; seg < k; ++seg) {
    std::size_t types = 0;
    for (std::size_t i = seg * n; i < (seg + 1) * n; ++i) {
      auto& s = seen[seq.tokens[i]];
      if (s != seg + 1) {
        s = static_cast<std::uint32_t>(seg + 1);
        ++types;
      }
    }
    sum += static_cast<double>(types) / static_cast<double>(n);
  }
  return sum / static_cast<double>(k);
}

// Moving-average TTR over the N-n+1 windows of length n; equals TTR when
// the text is shorter than one window.
inline std::optional<double> mattr(const TokenSeq& seq, std::size_t n) {
  if (seq.empty() || n == 0) return std::nullopt;
  if (seq.size() <= n) return ttr(seq);
  std::vector<std::size_t> count(static_cast<std::size_t>(seq.max_id()) + 1, 0);
  std::size_t types = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (count[seq.tokens[i]]++ == 0) ++types;
  std::size_t total = types;
  for (std::size_t i = n; i < seq.size(); ++i) {
    if (--count[seq.tokens[i - n]] == 0) --types;
    if (count[seq.tokens[i]]++ == 0) ++types;
    total += types;
  }
  const std::size_t windows = seq.size() - n + 1;
  return static_cast<double>(total) / (static_cast<double>(windows) * static_cast<double>(n));
}

namespace detail {

struct FactorScan {
  std::size_t full = 0;
  double partial = 0.0;
};

template <typename It>
FactorScan mtld_scan(It first, It last, TypeId max_id, double threshold) {
  FactorScan out;
  std::vector<std::uint32_t> stamp(static_cast<std::size_t>(max_id) + 1, 0);
  std::uint32_t factor = 1;
  std::size_t tokens = 0, types = 0;
  for (; first != last; ++first) {
    ++tokens;
    if (stamp[*first] != factor) {
      stamp[*first] = factor;
      ++types;
    }
    if (static_cast<double>(types) / static_cast<double>(tokens) <= threshold) {
      ++out.full;
      ++factor;
      tokens = types = 0;
    }
  }
  if (tokens > 0) {
    const double rest = static_cast<double>(types) / static_cast<double>(tokens);
    out.partial = (1.0 - rest) / (1.0 - threshold);
  }
  return out;
}

}  // namespace detail

inline std::optional<double> mtld(const TokenSeq& seq, double threshold,
                                  MtldVariant variant = MtldVariant::Bidirectional) {
  if (seq.empty() || !(threshold > 0.0 && threshold < 1.0)) return std::nullopt;
  const auto n = static_cast<double>(seq.size());
  const auto max_id = seq.max_id();
  auto fwd = detail::mtld_scan(seq.tokens.begin(), seq.tokens.end(), max_id, threshold);
  if (variant == MtldVariant::Literal) {
    if (fwd.full == 0) return std::nullopt;
    return n / static_cast<double>(fwd.full);
  }
  auto bwd = detail::mtld_scan(seq.tokens.rbegin(), seq.tokens.rend(), max_id, threshold);
  const double kf = static_cast<double>(fwd.full) + fwd.partial;
  const double kb = static_cast<double>(bwd.full) + bwd.partial;
  if (kf <= 0.0 || kb <= 0.0) return std::nullopt;
  return 0.5 * (n / kf + n / kb);
}

// HD-D: (1/S) * sum over types of P(type drawn at least once in a sample of
// S tokens without replacement). C(N-f, S)/C(N, S) is accumulated in log
// space as sum_i log(1 - f/(N-i)).
inline std::optional<double> hdd(const TokenSeq& seq, std::size_t sample) {
  const std::size_t n = seq.size();
  if (sample == 0 || n < sample) return std::nullopt;
  std::vector<std::size_t> freq(static_cast<std::size_t>(seq.max_id()) + 1, 0);
  for (auto t : seq.tokens) ++freq[t];
  // Summing in frequency order keeps the result bit-identical under
  // relabelling of type ids.
  std::sort(freq.begin(), freq.end());
  double sum = 0.0;
  for (auto f : freq) {
    if (f == 0) continue;
    if (n - f < sample) {
      sum += 1.0;
      continue;
    }
    double log_miss = 0.0;
    for (std::size_t i = 0; i < sample; ++i)
      log_miss += std::log1p(-static_cast<double>(f) / static_cast<double>(n - i));
    sum += -std::expm1(log_miss);
  }
  return sum / static_cast<double>(sample);
}

namespace detail {

inline double vocd_objective(std::span<const double> mean_ttr, std::size_t min_n, double d) {
  double err = 0.0;
  for (std::size_t i = 0; i < mean_ttr.size(); ++i) {
    const double n = static_cast<double>(min_n + i);
    const double r = mean_ttr[i] - d / (d + n);
    err += r * r;
  }
  return err;
}

}  // namespace detail

inline constexpr double kVocdGridMin = 0.01;
inline constexpr double kVocdGridMax = 200.0;
inline constexpr double kVocdGridStep = 0.01;

// Mean TTR of `trials` random subsamples for each size n in
// [vocd_min_n, vocd_max_n]. Each (seed, n, trial) draws from its own
// counter-keyed stream.
inline std::vector<double> vocd_mean_ttrs(const TokenSeq& seq, const DiversityParams& p) {
  std::vector<double> means;
  const std::size_t size = seq.size();
  std::vector<std::size_t> index(size);
  std::iota(index.begin(), index.end(), std::size_t{0});
  std::vector<std::uint64_t> stamp(static_cast<std::size_t>(seq.max_id()) + 1, 0);
  std::uint64_t mark = 0;
  std::vector<std::pair<std::size_t, std::size_t>> swaps;
  for (std::size_t n = p.vocd_min_n; n <= p.vocd_max_n; ++n) {
    double ttr_sum = 0.0;
    for (std::size_t trial = 0; trial < p.vocd_trials; ++trial) {
      auto rng = CounterRng::keyed({p.rng_seed, n, trial});
      ++mark;
      std::size_t types = 0;
      swaps.clear();
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.below(size - i));
        std::swap(index[i], index[j]);
        swaps.emplace_back(i, j);
        auto& s = stamp[seq.tokens[index[i]]];
        if (s != mark) {
          s = mark;
          ++types;
        }
      }
      for (auto it = swaps.rbegin(); it != swaps.rend(); ++it)
        std::swap(index[it->first], index[it->second]);
      ttr_sum += static_cast<double>(types) / static_cast<double>(n);
    }
    means.push_back(ttr_sum / static_cast<double>(p.vocd_trials));
  }
  return means;
}

// Least-squares fit of D in TTR(n) = D/(D+n): a grid scan over
// [0.01, 200] in steps of 0.01 followed by golden-section refinement inside
// the neighbouring grid cells.
inline double fit_vocd_d(std::span<const double> mean_ttr, std::size_t min_n) {
  const auto steps = static_cast<std::size_t>(
      std::llround((kVocdGridMax - kVocdGridMin) / kVocdGridStep));
  std::size_t best_i = 0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i <= steps; ++i) {
    const double d = kVocdGridMin + static_cast<double>(i) * kVocdGridStep;
    const double err = detail::vocd_objective(mean_ttr, min_n, d);
    if (err < best) {
      best = err;
      best_i = i;
    }
  }
  const double center = kVocdGridMin + static_cast<double>(best_i) * kVocdGridStep;
  double lo = std::max(kVocdGridMin, center - kVocdGridStep);
  double hi = std::min(kVocdGridMax, center + kVocdGridStep);
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = hi - phi * (hi - lo), b = lo + phi * (hi - lo);
  double fa = detail::vocd_objective(mean_ttr, min_n, a);
  double fb = detail::vocd_objective(mean_ttr, min_n, b);
  for (int it = 0; it < 60; ++it) {
    if (fa < fb) {
      hi = b;
      b = a;
      fb = fa;
      a = hi - phi * (hi - lo);
      fa = detail::vocd_objective(mean_ttr, min_n, a);
    } else {
      lo = a;
      a = b;
      fa = fb;
      b = lo + phi * (hi - lo);
      fb = detail::vocd_objective(mean_ttr, min_n, b);
    }
  }
  const double refined = 0.5 * (lo + hi);
  return detail::vocd_objective(mean_ttr, min_n, refined) <= best ? refined : center;
}

inline std::optional<double> vocd(const TokenSeq& seq, const DiversityParams& p) {
  if (seq.size() < p.vocd_max_n || !p.valid()) return std::nullopt;
  auto means = vocd_mean_ttrs(seq, p);
  return fit_vocd_d(means, p.vocd_min_n);
}

}  // namespace ukta
