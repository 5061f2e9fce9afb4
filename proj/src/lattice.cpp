#include "toomqca/lattice.hpp"

#include <istream>
#include <ostream>
#include <sstream>

#include "toomqca/errors.hpp"

namespace toomqca {

std::string to_string(DataKind kind) {
  switch (kind) {
    case DataKind::ClassicalBit: return "classical";
    case DataKind::PauliFrame: return "pauli";
    case DataKind::Opaque: return "opaque";
  }
  return "classical";
}

DataKind data_kind_from_string(const std::string& name) {
  if (name == "classical") return DataKind::ClassicalBit;
  if (name == "pauli") return DataKind::PauliFrame;
  if (name == "opaque") return DataKind::Opaque;
  throw ConfigError("unknown data kind '" + name + "'");
}

ScheduleParams ScheduleParams::with_derived_dimensions() const {
  ScheduleParams out = *this;
  out.d_S = static_cast<std::int64_t>(T0()) * M * M;
  out.d = out.d_S * d_D;
  return out;
}

std::vector<std::string> ScheduleParams::violations() const {
  std::vector<std::string> out;
  auto check = [&](bool ok, const std::string& name, long long lhs, long long rhs) {
    if (!ok) {
      std::ostringstream s;
      s << name << " (" << lhs << " < " << rhs << ")";
      out.push_back(s.str());
    }
  };
  check(M > 0, "M > 0", M, 1);
  check(T_ref > 0, "T_ref > 0", T_ref, 1);
  check(T_code > 0, "T_code > 0", T_code, 1);
  check(T_sim > 0, "T_sim > 0", T_sim, 1);
  check(M >= T0(), "M >= T0", M, T0());
  check(T_ref >= w * t_EC_S, "T_ref >= w*t_EC_S", T_ref, static_cast<long long>(w) * t_EC_S);
  check(t_EC_D >= C_bound * t_EC_S + t_EC, "t_EC_D >= C_bound*t_EC_S + t_EC", t_EC_D,
        static_cast<long long>(C_bound) * t_EC_S + t_EC);
  check(t_EC_S >= 2 * R, "t_EC_S >= 2*R", t_EC_S, 2LL * R);
  return out;
}

void ScheduleParams::validate() const {
  const auto v = violations();
  if (!v.empty()) throw ConfigError("schedule parameters violate " + v.front());
}

namespace {
int checked_size(int n) {
  if (n <= 0) throw ConfigError("lattice size must be positive");
  return n;
}
}  // namespace

LatticeState::LatticeState(int n, const ScheduleParams& params, DataKind kind, int block_size)
    : n_(checked_size(n)),
      params_(params),
      kind_(kind),
      block_size_(block_size),
      tau_(size()),
      x_(size()),
      y_(size()),
      data_(size()),
      data_z_(size()),
      counter_(size()) {
  if (block_size <= 0 || block_size > 32) throw ConfigError("block size must be in [1, 32]");
}

DataState LatticeState::data(Site s) const {
  const auto k = index(s);
  switch (kind_) {
    case DataKind::ClassicalBit: return ClassicalBit{static_cast<std::uint8_t>(data_[k] & 1u)};
    case DataKind::PauliFrame: return PauliFrame{data_[k], data_z_[k]};
    case DataKind::Opaque: return Opaque{data_[k]};
  }
  return ClassicalBit{};
}

void LatticeState::set_data(Site s, const DataState& d) {
  const auto k = index(s);
  if (const auto* b = std::get_if<ClassicalBit>(&d); b && kind_ == DataKind::ClassicalBit) {
    data_[k] = b->value & 1u;
  } else if (const auto* f = std::get_if<PauliFrame>(&d); f && kind_ == DataKind::PauliFrame) {
    data_[k] = f->x_mask;
    data_z_[k] = f->z_mask;
  } else if (const auto* o = std::get_if<Opaque>(&d); o && kind_ == DataKind::Opaque) {
    data_[k] = o->symbol;
  } else {
    throw InvariantViolation("data variant does not match the lattice data kind");
  }
}

void LatticeState::set_cell(Site s, const Cell& c) {
  set_structure(s, c.structure);
  set_data(s, c.data);
  set_counter(s, c.counter);
}

LatticeState new_lattice(int n, const ScheduleParams& params, const LatticeInit& init) {
  if (params.M <= 0) throw ConfigError("M must be positive");
  if (n < params.M) {
    throw ConfigError("lattice size n=" + std::to_string(n) + " is smaller than M=" +
                      std::to_string(params.M));
  }
  if (n % params.M != 0) {
    throw ConfigError("lattice size n=" + std::to_string(n) + " is not a multiple of M=" +
                      std::to_string(params.M));
  }
  if (const auto* ideal = std::get_if<IdealInit>(&init)) {
    LatticeState lat(n, params, ideal->data_kind, ideal->block_size);
    DataState d0;
    switch (ideal->data_kind) {
      case DataKind::ClassicalBit: d0 = ClassicalBit{static_cast<std::uint8_t>(ideal->data_value & 1u)}; break;
      case DataKind::PauliFrame: d0 = PauliFrame{}; break;
      case DataKind::Opaque: d0 = Opaque{ideal->data_value}; break;
    }
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        lat.set_structure({i, j}, ideal_structure(0, i, j, params));
        lat.set_data({i, j}, d0);
      }
    }
    return lat;
  }
  const auto& custom = std::get<CustomInit>(init);
  if (!custom.assign) throw ConfigError("custom initializer has no assignment function");
  LatticeState lat(n, params, custom.data_kind, custom.block_size);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) lat.set_cell({i, j}, custom.assign({i, j}));
  }
  return lat;
}

namespace {

constexpr const char* kSnapshotTag = "toomqca-snapshot";
constexpr int kSnapshotVersion = 1;

template <typename T>
void write_plane(std::ostream& out, const char* name, std::span<const T> plane) {
  out << name;
  for (const T v : plane) out << ' ' << v;
  out << '\n';
}

template <typename T>
void read_plane(std::istream& in, const char* name, std::span<T> plane) {
  std::string tag;
  in >> tag;
  if (tag != name) throw ConfigError(std::string("snapshot: expected plane '") + name + "'");
  for (T& v : plane) {
    if (!(in >> v)) throw ConfigError(std::string("snapshot: truncated plane '") + name + "'");
  }
}

void expect(std::istream& in, const char* key) {
  std::string tag;
  in >> tag;
  if (tag != key) throw ConfigError(std::string("snapshot: expected '") + key + "'");
}

}  // namespace

void write_snapshot(std::ostream& out, const LatticeState& lat) {
  const auto& p = lat.params();
  out << kSnapshotTag << ' ' << kSnapshotVersion << '\n';
  out << "n " << lat.n() << '\n';
  out << "params " << p.M << ' ' << p.T_ref << ' ' << p.T_code << ' ' << p.T_sim << ' '
      << p.t_EC << ' ' << p.t_EC_S << ' ' << p.t_EC_D << ' ' << p.w << ' ' << p.R << ' '
      << p.C_bound << ' ' << p.d_D << ' ' << p.d_S << ' ' << p.d << '\n';
  out << "global_time " << lat.global_time() << '\n';
  out << "data " << to_string(lat.data_kind()) << ' ' << lat.block_size() << '\n';
  write_plane(out, "tau", lat.tau_plane());
  write_plane(out, "x", lat.x_plane());
  write_plane(out, "y", lat.y_plane());
  write_plane(out, "data_x", lat.data_plane());
  write_plane(out, "data_z", lat.data_z_plane());
  write_plane(out, "counter", lat.counter_plane());
}

LatticeState read_snapshot(std::istream& in) {
  std::string tag;
  int version = 0;
  in >> tag >> version;
  if (tag != kSnapshotTag) throw ConfigError("snapshot: missing header");
  if (version != kSnapshotVersion) {
    throw ConfigError("snapshot: unsupported version " + std::to_string(version));
  }
  int n = 0;
  expect(in, "n");
  in >> n;
  ScheduleParams p;
  expect(in, "params");
  in >> p.M >> p.T_ref >> p.T_code >> p.T_sim >> p.t_EC >> p.t_EC_S >> p.t_EC_D >> p.w >> p.R >>
      p.C_bound >> p.d_D >> p.d_S >> p.d;
  std::int64_t t = 0;
  expect(in, "global_time");
  in >> t;
  std::string kind;
  int block = 0;
  expect(in, "data");
  in >> kind >> block;
  if (!in) throw ConfigError("snapshot: malformed header");
  LatticeState lat(n, p, data_kind_from_string(kind), block);
  lat.set_global_time(t);
  read_plane(in, "tau", lat.tau_plane());
  read_plane(in, "x", lat.x_plane());
  read_plane(in, "y", lat.y_plane());
  read_plane(in, "data_x", lat.data_plane());
  read_plane(in, "data_z", lat.data_z_plane());
  read_plane(in, "counter", lat.counter_plane());
  return lat;
}

std::vector<Site> block_sites(const LatticeState& lattice, int block_i, int block_j) {
  const int M = lattice.params().M;
  const int blocks = lattice.n() / M;
  const int bi = wrap(block_i, blocks);
  const int bj = wrap(block_j, blocks);
  std::vector<Site> out;
  out.reserve(static_cast<std::size_t>(M) * M);
  for (int a = 0; a < M; ++a) {
    for (int b = 0; b < M; ++b) out.push_back({bi * M + a, bj * M + b});
  }
  return out;
}

}  // namespace toomqca
