#include "toomqca/schedulers.hpp"

#include <array>
#include <ostream>

#include "toomqca/errors.hpp"
#include "toomqca/rng.hpp"
#include "toomqca/structure.hpp"

namespace toomqca {

SyncTrajectory run_sync(const LatticeState& initial, std::int64_t n_steps,
                        const NoiseParams& noise, const SyncOptions& options) {
  SyncTrajectory traj{initial, {}, {}};
  traj.faults.seed = noise.seed;
  traj.faults.p = noise.p;
  const int stride = options.snapshot_stride;
  if (stride > 0) traj.snapshots.push_back(initial);
  CycleRunner runner(options.cycle, initial);
  for (std::int64_t s = 0; s < n_steps; ++s) {
    traj.faults.append(runner.step(traj.final_state, noise));
    if (stride > 0 && (s + 1) % stride == 0) traj.snapshots.push_back(traj.final_state);
  }
  return traj;
}

std::uint64_t AsyncTrajectory::min_counter() const {
  const auto c = state.counter_plane();
  return c.empty() ? 0 : *std::min_element(c.begin(), c.end());
}

LatticeState AsyncTrajectory::slice(std::uint64_t c) const {
  if (history.size() != state.size()) {
    throw InvariantViolation("slice requested from a trajectory without history");
  }
  if (c > min_counter()) throw InvariantViolation("slice beyond the minimum counter");
  LatticeState out = state;
  for (std::size_t k = 0; k < out.size(); ++k) {
    const SliceEntry& e = history[k][c];
    out.tau_plane()[k] = e.structure.tau;
    out.x_plane()[k] = e.structure.x;
    out.y_plane()[k] = e.structure.y;
    out.data_plane()[k] = e.dx;
    out.data_z_plane()[k] = e.dz;
    out.counter_plane()[k] = c;
  }
  out.set_global_time(state.global_time() + static_cast<std::int64_t>(c));
  return out;
}

namespace {

// Marching-soldier update engine shared by the discrete and continuous
// asynchronous schedulers. Each site keeps its current registers (in the
// lattice) and the registers one counter value earlier.
class AsyncEngine {
 public:
  AsyncEngine(AsyncTrajectory& traj, const CycleConfig& cfg, bool record_history)
      : traj_(traj), lat_(traj.state), cfg_(cfg), record_(record_history) {
    if (cfg_.rule == StepRule::Cycle && cfg_.table.has_two_site_gates()) {
      throw ConfigError("asynchronous schedulers support only site-local data gates");
    }
    if (lat_.data_kind() == DataKind::PauliFrame) {
      if (cfg_.code) decoder_.emplace(*cfg_.code);
      else if (lat_.block_size() == 3) decoder_.emplace(rep3_code());
    }
    const std::size_t N = lat_.size();
    prev_tau_.assign(lat_.tau_plane().begin(), lat_.tau_plane().end());
    prev_x_.assign(lat_.x_plane().begin(), lat_.x_plane().end());
    prev_y_.assign(lat_.y_plane().begin(), lat_.y_plane().end());
    prev_dx_.assign(lat_.data_plane().begin(), lat_.data_plane().end());
    prev_dz_.assign(lat_.data_z_plane().begin(), lat_.data_z_plane().end());
    if (record_) {
      traj_.history.assign(N, {});
      for (std::size_t k = 0; k < N; ++k) traj_.history[k].push_back(current(k));
    }
    const int n = lat_.n();
    nbr_.resize(N);
    for (std::size_t k = 0; k < N; ++k) {
      const Site s = lat_.site(k);
      for (int d = 0; d < 4; ++d) {
        nbr_[k][d] = lat_.index(neighbor(s, static_cast<Direction>(d), n));
      }
    }
  }

  SliceEntry current(std::size_t k) const {
    return {{lat_.tau_plane()[k], lat_.x_plane()[k], lat_.y_plane()[k]},
            lat_.data_plane()[k],
            lat_.data_z_plane()[k]};
  }

  SliceEntry at_counter(std::size_t k, std::uint64_t c) const {
    const std::uint64_t ck = lat_.counter_plane()[k];
    if (ck == c) return current(k);
    if (ck == c + 1) {
      return {{prev_tau_[k], prev_x_[k], prev_y_[k]}, prev_dx_[k], prev_dz_[k]};
    }
    throw InvariantViolation("neighbour slice no longer available");
  }

  bool is_local_min(std::size_t k) const {
    const auto cnt = lat_.counter_plane();
    const std::uint64_t c = cnt[k];
    for (int d = 0; d < 4; ++d) {
      if (cnt[nbr_[k][d]] < c) return false;
    }
    return true;
  }

  // Returns true when the update was accepted.
  bool attempt(std::size_t k) {
    if (!is_local_min(k)) {
      ++traj_.rejected;
      return false;
    }
    auto cnt = lat_.counter_plane();
    const std::uint64_t c = cnt[k];
    const SliceEntry self = current(k);
    const SliceEntry north = at_counter(nbr_[k][static_cast<int>(Direction::North)], c);
    const SliceEntry east = at_counter(nbr_[k][static_cast<int>(Direction::East)], c);
    const SiteView v{self.structure, north.structure, east.structure, self.dx, self.dz,
                     north.dx,       north.dz,        east.dx,        east.dz};
    const SiteResult r =
        site_rule(v, cfg_, lat_.params(), lat_.data_kind(), decoder_ ? &*decoder_ : nullptr);
    prev_tau_[k] = self.structure.tau;
    prev_x_[k] = self.structure.x;
    prev_y_[k] = self.structure.y;
    prev_dx_[k] = self.dx;
    prev_dz_[k] = self.dz;
    lat_.tau_plane()[k] = r.structure.tau;
    lat_.x_plane()[k] = r.structure.x;
    lat_.y_plane()[k] = r.structure.y;
    lat_.data_plane()[k] = r.dx;
    lat_.data_z_plane()[k] = r.dz;
    cnt[k] = c + 1;
    last_gate_ = r.gate;
    for (int d = 0; d < 4; ++d) {
      const std::uint64_t cq = cnt[nbr_[k][d]];
      const std::uint64_t gap = cq > c + 1 ? cq - (c + 1) : (c + 1) - cq;
      traj_.max_gap = std::max(traj_.max_gap, gap);
      if (gap > 1) throw InvariantViolation("marching-soldier gap exceeded 1");
    }
    if (record_) traj_.history[k].push_back(current(k));
    ++traj_.accepted;
    return true;
  }

  void apply(const FaultEvent& ev) {
    apply_fault(lat_, ev);
    if (record_) {
      for (const Site& s : ev.location.support) {
        const std::size_t k = lat_.index(s);
        traj_.history[k].back() = current(k);
      }
    }
    traj_.faults.events.push_back(ev);
  }

  LatticeState& lattice() { return lat_; }
  GateKind last_gate() const { return last_gate_; }

 private:
  AsyncTrajectory& traj_;
  LatticeState& lat_;
  const CycleConfig& cfg_;
  bool record_;
  std::optional<IdealDecoder> decoder_;
  std::vector<std::int32_t> prev_tau_, prev_x_, prev_y_;
  std::vector<std::uint32_t> prev_dx_, prev_dz_;
  std::vector<std::array<std::size_t, 4>> nbr_;
  GateKind last_gate_ = GateKind::Idle;
};

}  // namespace

AsyncTrajectory run_async(const LatticeState& initial, std::uint64_t n_events,
                          const NoiseParams& noise, const AsyncOptions& options) {
  AsyncTrajectory traj{initial, 0, 0, 0, {}, {}, {}};
  traj.faults.seed = noise.seed;
  traj.faults.p = noise.p;
  AsyncEngine engine(traj, options.cycle, options.record_history);
  LatticeState& lat = engine.lattice();
  const int n = lat.n();
  const std::size_t N = lat.size();
  const std::int64_t t0 = initial.global_time();
  const EffectContext ctx = EffectContext::of(lat);
  const bool cycle = options.cycle.rule == StepRule::Cycle;
  KeyedStream picker(options.seed, 0xa5);
  for (std::uint64_t e = 0; e < n_events; ++e) {
    std::size_t k;
    if (options.order) {
      if (e >= options.order->size()) break;
      k = (*options.order)[e] % N;
    } else {
      k = static_cast<std::size_t>(picker.below(N));
    }
    const std::uint64_t c = lat.counter_plane()[k];
    const bool ok = engine.attempt(k);
    if (options.log_events) {
      traj.events.push_back({static_cast<double>(e), lat.site(k), EventKind::CorrectionAttempt, ok});
    }
    if (!ok) continue;
    const Site s = lat.site(k);
    const std::int64_t time = t0 + static_cast<std::int64_t>(c);
    if (noise.mode == NoiseMode::Adversarial) {
      for (const auto& ev : noise.events) {
        if (ev.location.time == time && ev.location.support.size() == 1 &&
            ev.location.support[0] == s) {
          engine.apply(ev);
        }
      }
      continue;
    }
    if (noise.p <= 0.0) continue;
    if (noise.structure) {
      Location loc{time, location_op_id(LocationKind::Structure, s, n), LocationKind::Structure,
                   {s}};
      if (location_faulted(loc, noise.p, noise.seed)) engine.apply(draw_effect(loc, ctx, noise.seed));
    }
    if (noise.data && cycle) {
      Location loc{time, location_op_id(LocationKind::Data, s, n), LocationKind::Data, {s}};
      if (location_faulted(loc, noise.p, noise.seed)) engine.apply(draw_effect(loc, ctx, noise.seed));
    }
  }
  return traj;
}

double local_min_fraction(const LatticeState& lattice) {
  const int n = lattice.n();
  const auto cnt = lattice.counter_plane();
  std::size_t mins = 0;
  for (int i = 0; i < n; ++i) {
    const std::size_t row = static_cast<std::size_t>(i) * n;
    const std::size_t up = static_cast<std::size_t>(i + 1 == n ? 0 : i + 1) * n;
    const std::size_t down = static_cast<std::size_t>(i == 0 ? n - 1 : i - 1) * n;
    for (int j = 0; j < n; ++j) {
      const std::uint64_t c = cnt[row + j];
      const int jr = j + 1 == n ? 0 : j + 1;
      const int jl = j == 0 ? n - 1 : j - 1;
      if (c <= cnt[up + j] && c <= cnt[down + j] && c <= cnt[row + jr] && c <= cnt[row + jl]) {
        ++mins;
      }
    }
  }
  return static_cast<double>(mins) / static_cast<double>(lattice.size());
}

CTTrajectory run_ct(const LatticeState& initial, const CTParams& params) {
  CTTrajectory out{AsyncTrajectory{initial, 0, 0, 0, {}, {}, {}}, 0.0, 0, 0, 0, {}, {}};
  out.async.faults.seed = params.seed;
  out.async.faults.p = params.p;
  AsyncEngine engine(out.async, params.cycle, params.record_history);
  LatticeState& lat = engine.lattice();
  const int n = lat.n();
  const std::size_t N = lat.size();
  const EffectContext ctx = EffectContext::of(lat);
  KeyedStream rng(params.seed, 0xc7);
  KeyedStream sampler(params.seed, 0x5a);
  const double total_rate = static_cast<double>(N) * (1.0 + params.p);
  const double attempt_prob = 1.0 / (1.0 + params.p);
  std::vector<double> last_attempt(N, 0.0);
  // The first few intervals of each site are i.i.d.; taking the earliest
  // completed intervals overall would favour short ones.
  const std::size_t per_site = (params.max_interval_samples + N - 1) / N;
  std::vector<std::vector<double>> intervals(per_site > 0 ? N : 0);
  std::vector<std::uint8_t> noisy(N, 0);
  double t = 0.0;
  double next_sample =
      params.sample_rate > 0 ? sampler.exponential(params.sample_rate) : params.duration + 1.0;
  std::uint64_t event_index = 0;
  while (true) {
    const double t_next = t + rng.exponential(total_rate);
    while (next_sample <= params.duration && next_sample < t_next) {
      out.density.push_back({next_sample, local_min_fraction(lat)});
      next_sample += sampler.exponential(params.sample_rate);
    }
    if (t_next > params.duration) break;
    t = t_next;
    const std::size_t k = static_cast<std::size_t>(rng.below(N));
    const Site s = lat.site(k);
    const bool attempt = rng.uniform() < attempt_prob;
    ++event_index;
    if (attempt) {
      ++out.attempts;
      if (per_site > 0 && intervals[k].size() < per_site) intervals[k].push_back(t - last_attempt[k]);
      last_attempt[k] = t;
      const bool ok = engine.attempt(k);
      if (ok && noisy[k]) {
        ++out.accepted_after_noise;
        noisy[k] = 0;
      }
      if (params.log_events) out.async.events.push_back({t, s, EventKind::CorrectionAttempt, ok});
    } else {
      ++out.noise_events;
      noisy[k] = 1;
      const bool use_data = params.data_noise && (!params.structure_noise || rng.uniform() < 0.5);
      if (params.structure_noise || params.data_noise) {
        const LocationKind kind = use_data ? LocationKind::Data : LocationKind::Structure;
        Location loc{static_cast<std::int64_t>(event_index), location_op_id(kind, s, n), kind, {s}};
        engine.apply(draw_effect(loc, ctx, params.seed));
      }
      if (params.log_events) out.async.events.push_back({t, s, EventKind::NoiseJump, true});
    }
  }
  for (const auto& v : intervals) {
    for (double x : v) {
      if (out.attempt_intervals.size() < params.max_interval_samples) out.attempt_intervals.push_back(x);
    }
  }
  out.end_time = params.duration;
  return out;
}

Estimate local_min_density(const CTTrajectory& traj, double t_from, double t_to, int batches) {
  std::vector<double> xs;
  for (const auto& s : traj.density) {
    if (s.time >= t_from && s.time <= t_to) xs.push_back(s.fraction);
  }
  return batched_means(xs, batches);
}

double effective_fault_rate(const CTTrajectory& traj) {
  if (traj.async.accepted == 0) return 0.0;
  return static_cast<double>(traj.accepted_after_noise) / static_cast<double>(traj.async.accepted);
}

void write_event_log(std::ostream& out, const std::vector<AsyncEvent>& events, int n) {
  (void)n;
  for (const auto& e : events) {
    out << e.time << ' ' << e.site.i << ',' << e.site.j << ' '
        << (e.kind == EventKind::CorrectionAttempt ? "attempt" : "noise") << ' '
        << (e.accepted ? 1 : 0) << '\n';
  }
}

}  // namespace toomqca
