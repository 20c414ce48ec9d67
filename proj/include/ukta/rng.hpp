#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>

namespace ukta {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Counter-based stream: the i-th draw of a stream is a pure function of
// (key, i), so any (seed, n, trial) stream can be replayed independently.
class CounterRng {
 public:
  explicit constexpr CounterRng(std::uint64_t key) : key_(key) {}

  static constexpr CounterRng keyed(std::initializer_list<std::uint64_t> parts) {
    std::uint64_t k = 0x243F6A8885A308D3ULL;
    for (auto p : parts) k = splitmix64(k ^ splitmix64(p));
    return CounterRng(k);
  }

  constexpr std::uint64_t next() { return splitmix64(key_ ^ splitmix64(counter_++)); }

  // Uniform integer in [0, bound), rejection-sampled so it is unbiased.
  constexpr std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
    std::uint64_t x = next();
    while (x >= limit) x = next();
    return x % bound;
  }

  // Uniform double in [0, 1) with 53 random bits.
  constexpr double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

inline std::uint64_t fnv1a64(const void* data, std::size_t n,
                            std::uint64_t h = 0xcbf29ce484222325ULL) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace ukta
