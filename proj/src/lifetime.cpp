#include "toomqca/lifetime.hpp"

#include <bit>

#include "toomqca/data_layer.hpp"
#include "toomqca/errors.hpp"
#include "toomqca/parallel.hpp"
#include "toomqca/rng.hpp"
#include "toomqca/schedule.hpp"
#include "toomqca/structure.hpp"

namespace toomqca {

std::string to_string(LifetimeRule r) { return r == LifetimeRule::PlainToom ? "plain" : "qca"; }

LifetimeRule lifetime_rule_from_string(const std::string& s) {
  if (s == "plain") return LifetimeRule::PlainToom;
  if (s == "qca") return LifetimeRule::Qca;
  throw ConfigError("unknown lifetime rule '" + s + "' (expected plain or qca)");
}

int k_max_levels(int L, int M) {
  if (M < 2) throw ConfigError("k_max needs M >= 2");
  int k = 0;
  long long size = M;
  while (size <= L) {
    ++k;
    size *= M;
  }
  return k;
}

namespace {

class PackedTorus {
 public:
  explicit PackedTorus(int L)
      : L_(L), W_(L <= 64 ? 1 : L / 64), bits_(static_cast<std::size_t>(L) * L_words()),
        next_(bits_.size()), east_(W_) {
    mask_ = L >= 64 ? ~0ULL : (1ULL << L) - 1;
  }

  void step() {
    for (int i = 0; i < L_; ++i) {
      const std::uint64_t* a = row(bits_, i);
      const std::uint64_t* b = row(bits_, i + 1 == L_ ? 0 : i + 1);
      if (W_ == 1) {
        east_[0] = ((a[0] >> 1) | (a[0] << (L_ - 1))) & mask_;
      } else {
        for (int w = 0; w < W_; ++w) east_[w] = (a[w] >> 1) | (a[(w + 1) % W_] << 63);
      }
      std::uint64_t* dst = row(next_, i);
      for (int w = 0; w < W_; ++w) {
        const std::uint64_t c = east_[w];
        dst[w] = (a[w] & b[w]) | (a[w] & c) | (b[w] & c);
      }
    }
    bits_.swap(next_);
  }

  void flip(std::uint64_t pos) {
    const auto i = static_cast<int>(pos / L_);
    const auto j = static_cast<int>(pos % L_);
    row(bits_, i)[j / 64] ^= 1ULL << (j % 64);
  }

  std::uint64_t ones() const {
    std::uint64_t c = 0;
    for (auto w : bits_) c += static_cast<std::uint64_t>(std::popcount(w));
    return c;
  }

 private:
  int L_words() const { return L_ <= 64 ? 1 : L_ / 64; }
  std::uint64_t* row(std::vector<std::uint64_t>& v, int i) {
    return v.data() + static_cast<std::size_t>(i) * W_;
  }
  const std::uint64_t* row(const std::vector<std::uint64_t>& v, int i) const {
    return v.data() + static_cast<std::size_t>(i) * W_;
  }

  int L_;
  int W_;
  std::uint64_t mask_;
  std::vector<std::uint64_t> bits_, next_, east_;
};

class ByteTorus {
 public:
  explicit ByteTorus(int L) : L_(L), bits_(static_cast<std::size_t>(L) * L, 0), next_(bits_.size()) {}
  void step() {
    toom_step<std::uint8_t>(bits_, next_, L_);
    bits_.swap(next_);
  }
  void flip(std::uint64_t pos) { bits_[pos] ^= 1; }
  std::uint64_t ones() const {
    std::uint64_t c = 0;
    for (auto b : bits_) c += b;
    return c;
  }

 private:
  int L_;
  std::vector<std::uint8_t> bits_, next_;
};

template <typename Torus>
std::uint64_t run_lifetime(Torus& torus, int L, double p, std::uint64_t cap, std::uint64_t seed) {
  const std::uint64_t N = static_cast<std::uint64_t>(L) * L;
  KeyedStream rng(seed, 0x11fe);
  for (std::uint64_t t = 0; t < cap; ++t) {
    torus.step();
    if (p > 0.0) {
      for (std::uint64_t pos = rng.geometric(p); pos < N; pos += 1 + rng.geometric(p)) {
        torus.flip(pos);
      }
    }
    if (2 * torus.ones() >= N) return t + 1;
  }
  return cap;
}

}  // namespace

std::uint64_t plain_toom_lifetime(int L, double p, std::uint64_t cap, std::uint64_t seed) {
  if (L < 2) throw ConfigError("lifetime needs L >= 2");
  if (L <= 64 || L % 64 == 0) {
    PackedTorus torus(L);
    return run_lifetime(torus, L, p, cap, seed);
  }
  ByteTorus torus(L);
  return run_lifetime(torus, L, p, cap, seed);
}

std::uint64_t qca_lifetime(int L, double p, std::uint64_t cap, std::uint64_t seed,
                           const ScheduleParams& params) {
  LatticeState lat = new_lattice(L, params);
  CycleConfig cfg;
  cfg.table = ScheduleTable::builtin("repetition");
  CycleRunner runner(cfg, lat);
  NoiseParams noise;
  noise.p = p;
  noise.seed = seed;
  for (std::uint64_t t = 0; t < cap; ++t) {
    runner.step(lat, noise);
    if (logical_readout(lat) != Logical::Zero) return t + 1;
  }
  return cap;
}

LifetimeResult lifetime_experiment(const LifetimeConfig& cfg) {
  struct Task {
    int L;
    double p;
    std::uint64_t trial;
  };
  std::vector<Task> tasks;
  for (int L : cfg.L) {
    for (double p : cfg.p) {
      for (std::uint64_t k = 0; k < cfg.trials; ++k) tasks.push_back({L, p, k});
    }
  }
  LifetimeResult res;
  res.rows.resize(tasks.size());
  parallel_for(tasks.size(), [&](std::size_t k) {
    const Task& t = tasks[k];
    const std::uint64_t seed = hash_key(cfg.seed, static_cast<std::uint64_t>(t.L), t.trial);
    const std::uint64_t life = cfg.rule == LifetimeRule::PlainToom
                                   ? plain_toom_lifetime(t.L, t.p, cfg.cap, seed)
                                   : qca_lifetime(t.L, t.p, cfg.cap, seed, cfg.params);
    res.rows[k] = {t.L, t.p, t.trial, life, life >= cfg.cap};
  });
  std::size_t at = 0;
  for (int L : cfg.L) {
    for (double p : cfg.p) {
      LifetimeSummary s;
      s.L = L;
      s.p = p;
      s.trials = cfg.trials;
      std::vector<double> values;
      for (std::uint64_t k = 0; k < cfg.trials; ++k, ++at) {
        values.push_back(static_cast<double>(res.rows[at].lifetime));
        s.censored += res.rows[at].censored;
      }
      s.median = median_with_ci(values, static_cast<double>(cfg.cap));
      s.k_max = k_max_levels(L, cfg.params.M);
      res.summaries.push_back(s);
    }
  }
  return res;
}

}  // namespace toomqca
