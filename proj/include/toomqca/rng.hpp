#pragma once

// Counter-based random numbers. Every draw is a pure function of a key
// (seed, time, op_id, draw index), so any location's fault decision can be
// recomputed independently of iteration order or thread assignment.

#include <cmath>
#include <cstdint>
#include <limits>

namespace toomqca {

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t hash_key(std::uint64_t seed, std::uint64_t a,
                                 std::uint64_t b = 0, std::uint64_t c = 0) {
  std::uint64_t h = splitmix64(seed ^ 0x5851f42d4c957f2dULL);
  h = splitmix64(h ^ a);
  h = splitmix64(h ^ (b * 0xd6e8feb86659fd93ULL));
  h = splitmix64(h ^ (c * 0xa0761d6478bd642fULL));
  return h;
}

// Threshold t such that (u < t) has probability p for uniform 64-bit u.
// p >= 1 is handled by the callers as "always".
inline std::uint64_t probability_threshold(double p) {
  if (p <= 0.0) return 0;
  if (p >= 1.0) return std::numeric_limits<std::uint64_t>::max();
  return static_cast<std::uint64_t>(std::ldexp(p, 64));
}

inline double to_unit(std::uint64_t u) {
  return static_cast<double>(u >> 11) * 0x1.0p-53;
}

// A sequential stream derived from one key. Used where a single location
// needs several draws (effect payloads) or for event-driven schedulers where
// the key is the event index.
class KeyedStream {
 public:
  KeyedStream(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0)
      : base_(hash_key(seed, a, b)) {}

  std::uint64_t next() { return splitmix64(base_ + 0x9e3779b97f4a7c15ULL * ++counter_); }

  double uniform() { return to_unit(next()); }

  // Uniform integer in [0, bound) without modulo bias worth caring about at
  // these bound sizes (Lemire multiply-shift).
  std::uint64_t below(std::uint64_t bound) {
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>(next()) * bound) >> 64);
  }

  bool bernoulli(double p) {
    if (p >= 1.0) return true;
    return next() < probability_threshold(p);
  }

  double exponential(double rate) {
    // 1 - u keeps the argument of log strictly positive.
    return -std::log1p(-uniform()) / rate;
  }

  // Number of failures before the next success of a Bernoulli(p) sequence.
  std::uint64_t geometric(double p) {
    if (p >= 1.0) return 0;
    const double u = uniform();
    return static_cast<std::uint64_t>(std::floor(std::log1p(-u) / std::log1p(-p)));
  }

 private:
  std::uint64_t base_;
  std::uint64_t counter_ = 0;
};

inline bool keyed_bernoulli(std::uint64_t seed, std::uint64_t time, std::uint64_t op_id,
                            double p) {
  if (p <= 0.0) return false;
  if (p >= 1.0) return true;
  return hash_key(seed, time, op_id) < probability_threshold(p);
}

}  // namespace toomqca
