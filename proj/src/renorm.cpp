#include "toomqca/renorm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "toomqca/errors.hpp"
#include "toomqca/parallel.hpp"
#include "toomqca/rng.hpp"
#include "toomqca/structure.hpp"

namespace toomqca {

using Real = boost::multiprecision::cpp_bin_float_50;

std::vector<ExRecId> influence_neighborhood(const ExRecId& id, const ExRecGeometry& geo) {
  if (geo.params.M < geo.params.T0()) {
    throw ConfigError("unsupported geometry: influence neighbourhood needs M >= T0");
  }
  const int B = geo.blocks();
  return {id, {id.level, wrap(id.I + 1, B), id.J, id.m}, {id.level, id.I, wrap(id.J + 1, B), id.m}};
}

namespace {

struct EventGeometry {
  long geometric = -1;
  std::vector<long> candidates;  // sorted exRec indices touched by the support
};

std::vector<EventGeometry> event_geometry(const FaultPath& path, const ExRecGeometry& geo) {
  const int M = geo.params.M;
  const int T0 = geo.params.T0();
  const int B = geo.blocks();
  std::vector<EventGeometry> out(path.events.size());
  for (std::size_t e = 0; e < path.events.size(); ++e) {
    const Location& loc = path.events[e].location;
    const std::int64_t dt = loc.time - geo.t_start;
    if (dt < 0 || dt >= static_cast<std::int64_t>(geo.slices) * T0) continue;
    const int m = static_cast<int>(dt / T0);
    auto idx = [&](Site s) {
      return static_cast<long>(geo.index({1, wrap(s.i, geo.n) / M % B, wrap(s.j, geo.n) / M % B, m}));
    };
    out[e].geometric = idx(location_owner(loc.op_id, geo.n));
    out[e].candidates.push_back(out[e].geometric);
    for (const Site& s : loc.support) out[e].candidates.push_back(idx(s));
    std::sort(out[e].candidates.begin(), out[e].candidates.end());
    out[e].candidates.erase(std::unique(out[e].candidates.begin(), out[e].candidates.end()),
                            out[e].candidates.end());
  }
  return out;
}

bool is_bad(std::size_t k, std::span<const int> health, const std::vector<int>& faults, int t) {
  return health[k] + faults[k] > t;
}

long assigned(const EventGeometry& ev, const std::vector<bool>& bad) {
  if (ev.geometric < 0 || bad[ev.geometric]) return ev.geometric;
  for (long c : ev.candidates) {
    if (bad[c]) return c;
  }
  return ev.geometric;
}

}  // namespace

ExRecPartition partition_exrecs(const FaultPath& path, const ExRecGeometry& geo,
                                std::span<const int> health, int t_EC_S, PartitionOrder order) {
  if (health.size() != geo.count()) throw ConfigError("health vector does not match exRec count");
  const auto evs = event_geometry(path, geo);
  const std::size_t E = geo.count();
  ExRecPartition part;
  part.bad.assign(E, false);
  part.geometric.resize(evs.size());
  for (std::size_t e = 0; e < evs.size(); ++e) part.geometric[e] = evs[e].geometric;

  auto count_faults = [&](const std::vector<bool>& bad, std::vector<long>& owner) {
    std::vector<int> f(E, 0);
    owner.resize(evs.size());
    for (std::size_t e = 0; e < evs.size(); ++e) {
      owner[e] = assigned(evs[e], bad);
      if (owner[e] >= 0) ++f[owner[e]];
    }
    return f;
  };

  // Badness is judged on the geometric assignment; truncation then only
  // moves events from good exRecs into bad ones, so it cannot flip anyone.
  std::vector<long> owner;
  const std::vector<int> geometric_faults = count_faults(part.bad, owner);
  std::vector<int> faults = geometric_faults;
  constexpr int kMaxRounds = 1 << 16;
  while (part.rounds < kMaxRounds) {
    ++part.rounds;
    bool changed = false;
    if (order == PartitionOrder::Simultaneous) {
      std::vector<bool> next = part.bad;
      for (std::size_t k = 0; k < E; ++k) {
        if (!next[k] && is_bad(k, health, geometric_faults, t_EC_S)) next[k] = changed = true;
      }
      part.bad = std::move(next);
      faults = count_faults(part.bad, owner);
    } else {
      for (std::size_t kk = E; kk-- > 0;) {
        if (part.bad[kk] || !is_bad(kk, health, geometric_faults, t_EC_S)) continue;
        part.bad[kk] = changed = true;
        faults = count_faults(part.bad, owner);
      }
    }
    for (std::size_t k = 0; k < E; ++k) {
      if (!part.bad[k] && is_bad(k, health, faults, t_EC_S)) {
        throw InvariantViolation("truncation made a good exRec bad");
      }
    }
    if (!changed) break;
  }
  if (part.rounds >= kMaxRounds) throw InvariantViolation("truncation did not reach a fixpoint");
  part.owner = std::move(owner);
  part.faults = std::move(faults);
  return part;
}

ExRecReport classify_exrec(const ExRecId& id, const ExRecPartition& part,
                           const ExRecGeometry& geo, std::span<const int> health, int t_EC_S) {
  ExRecReport rep;
  rep.id = id;
  const std::size_t self = geo.index(id);
  for (const auto& q : influence_neighborhood(id, geo)) {
    const std::size_t k = geo.index(q);
    rep.h = std::max(rep.h, health[k]);
    rep.r += part.faults[k];
  }
  rep.good = rep.h + rep.r <= t_EC_S;
  rep.direct_bad = health[self] + part.faults[self] > t_EC_S;
  for (std::size_t e = 0; e < part.owner.size(); ++e) {
    if (part.owner[e] == static_cast<long>(self) && part.geometric[e] != part.owner[e]) {
      rep.truncated_locations.push_back(e);
    }
  }
  return rep;
}

void block_health(const LatticeState& lattice, const ExRecGeometry& geo, int m,
                  std::span<int> health, int limit) {
  const int M = geo.params.M;
  const int B = geo.blocks();
  const auto singular = singular_sites(lattice, lattice.global_time());
  std::vector<std::vector<Site>> per_block(static_cast<std::size_t>(B) * B);
  for (const Site& s : singular) per_block[static_cast<std::size_t>(s.i / M) * B + s.j / M].push_back(s);
  for (int I = 0; I < B; ++I) {
    for (int J = 0; J < B; ++J) {
      const auto& sites = per_block[static_cast<std::size_t>(I) * B + J];
      health[geo.index({1, I, J, m})] = sites.empty() ? 0 : cluster_count(sites, lattice.n(), limit);
    }
  }
}

bool verify_good_correct(const ExRecId& id, const LatticeState& output, int t_EC_S) {
  const int M = output.params().M;
  const Region block{id.I * M, id.J * M, M, M};
  const auto sites = singular_sites(output, output.global_time(), block);
  return cluster_count(sites, output.n(), t_EC_S) <= t_EC_S;
}

namespace {

StructureState random_singular(KeyedStream& rng, const StructureState& ideal,
                               const ScheduleParams& p) {
  while (true) {
    StructureState s{static_cast<int>(rng.below(p.T0())), static_cast<int>(rng.below(p.M)),
                     static_cast<int>(rng.below(p.M))};
    if (s != ideal) return s;
  }
}

// Scrambles a random non-empty subset of the 3x3 box at `corner`.
void inject_cluster(LatticeState& lat, Site corner, KeyedStream& rng) {
  const auto& p = lat.params();
  const int n = lat.n();
  const std::uint64_t mask = 1 + rng.below(511);
  for (int b = 0; b < 9; ++b) {
    if (!(mask >> b & 1)) continue;
    const Site s{wrap(corner.i + b / 3, n), wrap(corner.j + b % 3, n)};
    lat.set_structure(s, random_singular(rng, ideal_structure(lat.global_time(), s.i, s.j, p), p));
  }
}

}  // namespace

ClosenessResult closeness_sweep(const ClosenessConfig& cfg) {
  const ScheduleParams& p = cfg.params;
  const int M = p.M;
  const int T0 = p.T0();
  const int n = cfg.blocks * M;
  if (M < 3) throw ConfigError("blocks must be at least 3x3");
  const ExRecGeometry geo{p, n, 0, 1};
  const auto nbhd = influence_neighborhood({1, 0, 0, 0}, geo);
  std::vector<int> worst(cfg.samples, 0);
  CycleConfig structure_only;
  structure_only.rule = StepRule::Structure;

  parallel_for(cfg.samples, [&](std::size_t k) {
    KeyedStream rng(cfg.seed, 0x13, k);
    LatticeState lat = new_lattice(n, p);
    const int total = static_cast<int>(rng.below(cfg.t_EC_S + 1));
    const int h = static_cast<int>(rng.below(total + 1));
    const int r = total - h;
    for (int c = 0; c < h; ++c) {
      const ExRecId& b = nbhd[rng.below(nbhd.size())];
      const Site corner{b.I * M + static_cast<int>(rng.below(M - 2)),
                        b.J * M + static_cast<int>(rng.below(M - 2))};
      inject_cluster(lat, corner, rng);
    }
    NoiseParams noise;
    noise.mode = NoiseMode::Adversarial;
    const EffectContext ctx = EffectContext::of(lat);
    for (int f = 0; f < r; ++f) {
      const ExRecId& b = nbhd[rng.below(nbhd.size())];
      const Site s{b.I * M + static_cast<int>(rng.below(M)), b.J * M + static_cast<int>(rng.below(M))};
      Location loc{static_cast<std::int64_t>(rng.below(T0)),
                   location_op_id(LocationKind::Structure, s, n),
                   LocationKind::Structure,
                   {s, neighbor(s, Direction::North, n), neighbor(s, Direction::East, n)}};
      noise.events.push_back(draw_effect(loc, ctx, hash_key(cfg.seed, k, f)));
    }
    CycleRunner runner(structure_only, lat);
    for (int step = 0; step < T0; ++step) runner.step(lat, noise);
    const Region block{0, 0, M, M};
    worst[k] = cluster_count(singular_sites(lat, lat.global_time(), block), n, cfg.t_EC_S);
  });

  ClosenessResult res;
  res.samples = cfg.samples;
  bool failed = false;
  for (std::size_t k = 0; k < worst.size(); ++k) {
    res.worst_output_clusters = std::max(res.worst_output_clusters, worst[k]);
    if (worst[k] <= cfg.t_EC_S) {
      ++res.passed;
    } else if (!failed) {
      failed = true;
      res.first_failure = k;
    }
  }
  return res;
}

LevelNoiseEstimate estimate_level_noise(const LevelNoiseConfig& cfg) {
  const ScheduleParams& p = cfg.params;
  const int n = cfg.blocks * p.M;
  const int T0 = p.T0();
  const ExRecGeometry geo{p, n, 0, cfg.slices};
  CycleConfig structure_only;
  structure_only.rule = StepRule::Structure;
  LevelNoiseEstimate est;
  est.t_EC_S = cfg.t_EC_S;

  struct Tally {
    std::uint64_t exrecs = 0, direct_bad = 0, bad = 0;
  };
  for (double prob : cfg.p_grid) {
    LevelNoisePoint pt;
    pt.p = prob;
    pt.eta = eta_from_p(prob);
    while (pt.trials < cfg.max_trials && pt.direct_bad < cfg.min_events) {
      const std::uint64_t batch = std::min(cfg.batch, cfg.max_trials - pt.trials);
      std::vector<Tally> tallies(batch);
      const std::uint64_t first = pt.trials;
      parallel_for(batch, [&](std::size_t b) {
        const std::uint64_t trial = first + b;
        LatticeState lat = new_lattice(n, p);
        CycleRunner runner(structure_only, lat);
        NoiseParams noise;
        noise.p = prob;
        noise.data = false;
        // Same seed for every p: fault sets are nested across the grid.
        noise.seed = hash_key(cfg.seed, trial);
        std::vector<int> health(geo.count(), 0);
        FaultPath path;
        for (int m = 0; m < cfg.slices; ++m) {
          block_health(lat, geo, m, health, cfg.t_EC_S + 1);
          for (int s = 0; s < T0; ++s) path.append(runner.step(lat, noise));
        }
        const auto part = partition_exrecs(path, geo, health, cfg.t_EC_S);
        Tally& t = tallies[b];
        for (std::size_t k = 0; k < geo.count(); ++k) {
          const auto rep = classify_exrec(geo.id(k), part, geo, health, cfg.t_EC_S);
          ++t.exrecs;
          t.direct_bad += rep.direct_bad;
          t.bad += !rep.good;
        }
      });
      for (const Tally& t : tallies) {
        pt.exrecs += t.exrecs;
        pt.direct_bad += t.direct_bad;
        pt.bad += t.bad;
      }
      pt.trials += batch;
      if (prob <= 0.0) break;
    }
    pt.P_direct_bad = wilson_interval(pt.direct_bad, pt.exrecs);
    pt.P_bad = wilson_interval(pt.bad, pt.exrecs);
    pt.one_sided = pt.direct_bad == 0;
    if (pt.one_sided) pt.P_direct_bad.lo = 0.0;
    pt.retained = pt.direct_bad >= cfg.min_events;
    est.points.push_back(pt);
  }

  std::vector<double> xs, ys, ws;
  for (const auto& pt : est.points) {
    if (!pt.retained) continue;
    const double P = pt.P_direct_bad.value;
    xs.push_back(std::log(pt.eta));
    ys.push_back(std::log(P));
    ws.push_back(static_cast<double>(pt.direct_bad) / std::max(1e-12, 1.0 - P));
  }
  est.probability_fit = weighted_fit(xs, ys, ws);
  est.strength_slope = est.probability_fit.slope / 2.0;
  est.strength_slope_se = est.probability_fit.slope_se / 2.0;
  double sw = 0.0, sa = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    sw += ws[k];
    sa += ws[k] * (0.5 * ys[k] - (cfg.t_EC_S + 1) * xs[k]);
  }
  est.A_tilde = sw > 0 ? std::exp(sa / sw) : 0.0;
  return est;
}

double rooted_strength(const LevelNoiseEstimate& est, double eta) {
  return std::pow(est.A_tilde * std::pow(eta, est.t_EC_S + 1), 1.0 / est.R);
}

std::uint64_t c_bound_experiment(const CBoundConfig& cfg) {
  const ScheduleParams& p = cfg.params;
  const int n = cfg.blocks * p.M;
  const int T0 = p.T0();
  if (cfg.inject_tau < 0 || cfg.inject_tau >= T0) throw ConfigError("inject_tau outside the cycle");
  std::vector<std::uint64_t> counts(cfg.trials, 0);
  parallel_for(cfg.trials, [&](std::size_t k) {
    KeyedStream rng(cfg.seed, 0xcb, k);
    IdealInit init;
    init.data_kind = cfg.cycle.code ? DataKind::PauliFrame : DataKind::ClassicalBit;
    if (cfg.cycle.code) init.block_size = cfg.cycle.code->block_size;
    LatticeState lat = new_lattice(n, p, init);
    CycleRunner runner(cfg.cycle, lat);
    CycleInstrumentation inst;
    const NoiseParams quiet;
    for (int s = 0; s < T0; ++s) {
      if (s == cfg.inject_tau) {
        inject_cluster(lat, {static_cast<int>(rng.below(n)), static_cast<int>(rng.below(n))}, rng);
      }
      runner.step(lat, quiet, &inst);
    }
    counts[k] = count_C_bound(inst);
  });
  return counts.empty() ? 0 : *std::max_element(counts.begin(), counts.end());
}

RenormFlow renorm_flow(double eta0, double A, int t_EC, int k) {
  if (!(A > 0) || t_EC < 1 || k < 0) throw ConfigError("renorm_flow needs A > 0, t_EC >= 1, k >= 0");
  if (!(eta0 > 0)) throw ConfigError("renorm_flow needs eta0 > 0");
  RenormFlow f;
  f.A = A;
  f.t_EC = t_EC;
  f.eta0 = eta0;
  f.k = k;
  const Real logA = boost::multiprecision::log(Real(A));
  const Real log_th = -logA / t_EC;
  const Real ln10 = boost::multiprecision::log(Real(10));
  f.eta_th = static_cast<double>(boost::multiprecision::exp(log_th));
  f.suppressing = eta0 < f.eta_th;
  const Real L0 = boost::multiprecision::log(Real(eta0));
  Real L = L0;
  Real power = 1;
  for (int l = 0; l <= k; ++l) {
    if (l > 0) {
      L = logA + (t_EC + 1) * L;
      power *= (t_EC + 1);
    }
    const Real closed = log_th + power * (L0 - log_th);
    const Real rel = boost::multiprecision::abs(boost::multiprecision::expm1(L - closed));
    f.max_rel_error = std::max(f.max_rel_error, static_cast<double>(rel));
    f.log10_eta.push_back(static_cast<double>(L / ln10));
    f.eta.push_back(static_cast<double>(boost::multiprecision::exp(L)));
    if (l == k) {
      f.log10_eta_log = static_cast<double>(L / ln10);
      f.log10_closed_form = static_cast<double>(closed / ln10);
    }
  }
  return f;
}

std::optional<int> required_levels(double N, double D, double delta, double eta0, double A,
                                   int t_EC) {
  if (!(A > 0) || t_EC < 1 || !(eta0 > 0) || !(N > 0) || !(D > 0) || !(delta > 0)) {
    throw ConfigError("required_levels needs positive N, D, delta, eta0, A and t_EC >= 1");
  }
  const Real logA = boost::multiprecision::log(Real(A));
  const Real target = boost::multiprecision::log(Real(delta)) -
                      boost::multiprecision::log(Real(N)) - boost::multiprecision::log(Real(D));
  const Real log_th = -logA / t_EC;
  Real L = boost::multiprecision::log(Real(eta0));
  if (L <= target) return 0;
  if (L >= log_th) return std::nullopt;
  for (int k = 1; k < 4096; ++k) {
    L = logA + (t_EC + 1) * L;
    if (L <= target) return k;
  }
  return std::nullopt;
}

}  // namespace toomqca
