#pragma once

// Deliberately naive reference implementations used as test oracles. They
// share no code with include/ukta/diversity.hpp.

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <set>
#include <vector>

#include "ukta/diversity.hpp"

namespace ukta::oracle {

inline TokenSeq random_seq(std::mt19937_64& rng, std::size_t min_len, std::size_t max_len,
                           std::size_t vocab) {
  std::uniform_int_distribution<std::size_t> len(min_len, max_len);
  std::uniform_int_distribution<TypeId> id(0, static_cast<TypeId>(vocab - 1));
  TokenSeq s;
  for (std::size_t i = len(rng); i > 0; --i) s.tokens.push_back(id(rng));
  return s;
}

inline std::size_t types_in(const std::vector<TypeId>& v, std::size_t from, std::size_t to) {
  return std::set<TypeId>(v.begin() + static_cast<std::ptrdiff_t>(from),
                          v.begin() + static_cast<std::ptrdiff_t>(to))
      .size();
}

inline std::optional<double> msttr(const std::vector<TypeId>& v, std::size_t n) {
  if (v.size() < n) return std::nullopt;
  double sum = 0.0;
  std::size_t segments = 0;
  for (std::size_t start = 0; start + n <= v.size(); start += n, ++segments)
    sum += static_cast<double>(types_in(v, start, start + n)) / static_cast<double>(n);
  return sum / static_cast<double>(segments);
}

inline double mattr(const std::vector<TypeId>& v, std::size_t n) {
  if (v.size() <= n) return static_cast<double>(types_in(v, 0, v.size())) / static_cast<double>(v.size());
  double sum = 0.0;
  std::size_t windows = 0;
  for (std::size_t start = 0; start + n <= v.size(); ++start, ++windows)
    sum += static_cast<double>(types_in(v, start, start + n)) / static_cast<double>(n);
  return sum / static_cast<double>(windows);
}

// Factor count of one directional MTLD scan, with the partial factor.
inline double mtld_factors(const std::vector<TypeId>& v, double theta) {
  double factors = 0.0;
  std::size_t start = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double t = static_cast<double>(types_in(v, start, i + 1)) / static_cast<double>(i + 1 - start);
    if (t <= theta) {
      factors += 1.0;
      start = i + 1;
    }
  }
  if (start < v.size()) {
    const double t = static_cast<double>(types_in(v, start, v.size())) /
                     static_cast<double>(v.size() - start);
    factors += (1.0 - t) / (1.0 - theta);
  }
  return factors;
}

inline std::optional<double> mtld(const std::vector<TypeId>& v, double theta) {
  const double f = mtld_factors(v, theta);
  const double b = mtld_factors(std::vector<TypeId>(v.rbegin(), v.rend()), theta);
  if (f <= 0.0 || b <= 0.0) return std::nullopt;
  const double n = static_cast<double>(v.size());
  return 0.5 * (n / f + n / b);
}

// Enumerates every S-subset of positions (N <= ~20) and averages, per type,
// the indicator that the type appears in the subset.
inline double hdd_exhaustive(const std::vector<TypeId>& v, std::size_t s) {
  const std::size_t n = v.size();
  std::set<TypeId> types(v.begin(), v.end());
  double subsets = 0.0, hits = 0.0;
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    if (static_cast<std::size_t>(__builtin_popcount(mask)) != s) continue;
    subsets += 1.0;
    std::set<TypeId> seen;
    for (std::size_t i = 0; i < n; ++i)
      if (mask & (1u << i)) seen.insert(v[i]);
    hits += static_cast<double>(seen.size());
  }
  return hits / subsets / static_cast<double>(s);
}

// E[TTR] of a without-replacement subsample of size n.
inline double expected_subsample_ttr(const std::vector<TypeId>& v, std::size_t n) {
  std::vector<std::size_t> freq;
  for (auto t : v) {
    if (t >= freq.size()) freq.resize(t + 1, 0);
    ++freq[t];
  }
  const std::size_t total = v.size();
  double expected_types = 0.0;
  for (auto f : freq) {
    if (f == 0) continue;
    double miss = 1.0;  // C(N-f, n) / C(N, n)
    for (std::size_t i = 0; i < n; ++i)
      miss *= total - i >= f ? static_cast<double>(total - f - i) / static_cast<double>(total - i) : 0.0;
    if (total - f < n) miss = 0.0;
    expected_types += 1.0 - miss;
  }
  return expected_types / static_cast<double>(n);
}

// Plain grid search D = k/100, k = 1..20000, first minimum wins.
inline double vocd_grid_argmin(const std::vector<double>& mean_ttr, std::size_t min_n) {
  double best_d = 0.0, best = std::numeric_limits<double>::infinity();
  for (int k = 1; k <= 20000; ++k) {
    const double d = k / 100.0;
    double err = 0.0;
    for (std::size_t i = 0; i < mean_ttr.size(); ++i) {
      const double r = mean_ttr[i] - d / (d + static_cast<double>(min_n + i));
      err += r * r;
    }
    if (err < best) {
      best = err;
      best_d = d;
    }
  }
  return best_d;
}

}  // namespace ukta::oracle
