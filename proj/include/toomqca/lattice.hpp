#pragma once

// Periodic n x n lattice of cells. Each cell carries structure registers
// (believed time stamp and block coordinates), a data register and an
// asynchronous update counter. Storage is one plane per register.
//
// Index convention: the northern neighbor of (i, j) is (i + 1, j) and the
// eastern neighbor is (i, j + 1), all indices taken modulo n.

#include <compare>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace toomqca {

struct Site {
  int i = 0;
  int j = 0;
  friend auto operator<=>(const Site&, const Site&) = default;
};

enum class Direction : std::uint8_t { North, East, South, West };

constexpr Direction opposite(Direction d) {
  switch (d) {
    case Direction::North: return Direction::South;
    case Direction::East: return Direction::West;
    case Direction::South: return Direction::North;
    case Direction::West: return Direction::East;
  }
  return d;
}

constexpr int wrap(std::int64_t v, std::int64_t m) {
  const std::int64_t r = v % m;
  return static_cast<int>(r < 0 ? r + m : r);
}

constexpr Site neighbor(Site s, Direction d, int n) {
  switch (d) {
    case Direction::North: return {wrap(s.i + 1, n), s.j};
    case Direction::East: return {s.i, wrap(s.j + 1, n)};
    case Direction::South: return {wrap(s.i - 1, n), s.j};
    case Direction::West: return {s.i, wrap(s.j - 1, n)};
  }
  return s;
}

struct StructureState {
  int tau = 0;
  int x = 0;
  int y = 0;
  friend bool operator==(const StructureState&, const StructureState&) = default;
};

struct ClassicalBit {
  std::uint8_t value = 0;
  friend bool operator==(const ClassicalBit&, const ClassicalBit&) = default;
};

// Accumulated X/Z error masks over one code block (bit k = qudit k).
struct PauliFrame {
  std::uint32_t x_mask = 0;
  std::uint32_t z_mask = 0;
  friend bool operator==(const PauliFrame&, const PauliFrame&) = default;
};

struct Opaque {
  std::uint32_t symbol = 0;
  friend bool operator==(const Opaque&, const Opaque&) = default;
};

using DataState = std::variant<ClassicalBit, PauliFrame, Opaque>;

enum class DataKind : std::uint8_t { ClassicalBit, PauliFrame, Opaque };

std::string to_string(DataKind kind);
DataKind data_kind_from_string(const std::string& name);

struct Cell {
  StructureState structure;
  DataState data;
  std::uint64_t counter = 0;
  friend bool operator==(const Cell&, const Cell&) = default;
};

// Scale constants of the error-correcting cycle. d_D, d_S and d are
// bookkeeping only; nothing in the simulator depends on them.
struct ScheduleParams {
  int M = 24;
  int T_ref = 18;
  int T_code = 6;
  int T_sim = 1;
  int t_EC = 1;
  int t_EC_S = 6;
  int t_EC_D = 7;
  int w = 3;
  int R = 3;
  int C_bound = 1;
  std::int64_t d_D = 12;
  std::int64_t d_S = 24 * 24 * 24;
  std::int64_t d = 24 * 24 * 24 * 12;

  constexpr int T0() const { return T_ref + T_code; }
  constexpr std::int64_t T() const { return static_cast<std::int64_t>(T0()) * T_sim; }

  // Recompute d_S = T0 * M^2 and d = d_S * d_D.
  ScheduleParams with_derived_dimensions() const;

  // Human-readable list of violated inequalities, each naming the inequality
  // (e.g. "M >= T0 (20 < 24)"). Empty when every invariant holds.
  std::vector<std::string> violations() const;

  // Throws ConfigError carrying the first violation.
  void validate() const;

  friend bool operator==(const ScheduleParams&, const ScheduleParams&) = default;
};

// The structural codeword: (t mod T0, i mod M, j mod M).
constexpr StructureState ideal_structure(std::int64_t t, std::int64_t i, std::int64_t j,
                                         const ScheduleParams& params) {
  return {wrap(t, params.T0()), wrap(i, params.M), wrap(j, params.M)};
}

class LatticeState {
 public:
  LatticeState(int n, const ScheduleParams& params, DataKind kind, int block_size);

  int n() const { return n_; }
  std::size_t size() const { return static_cast<std::size_t>(n_) * n_; }
  const ScheduleParams& params() const { return params_; }
  DataKind data_kind() const { return kind_; }
  int block_size() const { return block_size_; }

  std::int64_t global_time() const { return global_time_; }
  void set_global_time(std::int64_t t) { global_time_ = t; }

  std::size_t index(Site s) const { return static_cast<std::size_t>(s.i) * n_ + s.j; }
  Site site(std::size_t idx) const {
    return {static_cast<int>(idx / n_), static_cast<int>(idx % n_)};
  }
  Site neighbor(Site s, Direction d) const { return toomqca::neighbor(s, d, n_); }

  StructureState structure(Site s) const {
    const auto k = index(s);
    return {tau_[k], x_[k], y_[k]};
  }
  void set_structure(Site s, const StructureState& st) {
    const auto k = index(s);
    tau_[k] = st.tau;
    x_[k] = st.x;
    y_[k] = st.y;
  }

  DataState data(Site s) const;
  void set_data(Site s, const DataState& d);

  std::uint64_t counter(Site s) const { return counter_[index(s)]; }
  void set_counter(Site s, std::uint64_t c) { counter_[index(s)] = c; }

  Cell cell(Site s) const { return {structure(s), data(s), counter(s)}; }
  void set_cell(Site s, const Cell& c);

  std::span<std::int32_t> tau_plane() { return tau_; }
  std::span<std::int32_t> x_plane() { return x_; }
  std::span<std::int32_t> y_plane() { return y_; }
  std::span<std::uint32_t> data_plane() { return data_; }
  std::span<std::uint32_t> data_z_plane() { return data_z_; }
  std::span<std::uint64_t> counter_plane() { return counter_; }
  std::span<const std::int32_t> tau_plane() const { return tau_; }
  std::span<const std::int32_t> x_plane() const { return x_; }
  std::span<const std::int32_t> y_plane() const { return y_; }
  std::span<const std::uint32_t> data_plane() const { return data_; }
  std::span<const std::uint32_t> data_z_plane() const { return data_z_; }
  std::span<const std::uint64_t> counter_plane() const { return counter_; }

  friend bool operator==(const LatticeState&, const LatticeState&) = default;

 private:
  int n_;
  ScheduleParams params_;
  DataKind kind_;
  int block_size_;
  std::int64_t global_time_ = 0;
  std::vector<std::int32_t> tau_, x_, y_;
  std::vector<std::uint32_t> data_, data_z_;
  std::vector<std::uint64_t> counter_;
};

struct IdealInit {
  DataKind data_kind = DataKind::ClassicalBit;
  std::uint32_t data_value = 0;  // bit value or opaque symbol; frames start at zero
  int block_size = 3;
};

struct CustomInit {
  DataKind data_kind = DataKind::ClassicalBit;
  int block_size = 3;
  std::function<Cell(Site)> assign;
};

using LatticeInit = std::variant<IdealInit, CustomInit>;

// Throws ConfigError unless n >= M and M divides n.
LatticeState new_lattice(int n, const ScheduleParams& params,
                         const LatticeInit& init = IdealInit{});

// Text snapshot with a version tag; one line per register plane.
void write_snapshot(std::ostream& out, const LatticeState& lattice);
LatticeState read_snapshot(std::istream& in);

// Sites of one M x M block, (I, J) in block units.
std::vector<Site> block_sites(const LatticeState& lattice, int block_i, int block_j);

}  // namespace toomqca
