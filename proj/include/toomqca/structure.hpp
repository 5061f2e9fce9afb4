#pragma once

// Toom's rule, the structural Toom update, singular-site detection, cluster
// decomposition and the triangle norm.

#include <cstdint>
#include <span>
#include <vector>

#include "toomqca/lattice.hpp"

namespace toomqca {

// Shared value if at least two arguments coincide, otherwise the first.
template <typename T>
constexpr T maj(const T& a, const T& b, const T& c) {
  return (b == c) ? b : a;
}

// One synchronous step of plain Toom's rule on an n x n field (row-major).
template <typename T>
void toom_step(std::span<const T> in, std::span<T> out, int n) {
  for (int i = 0; i < n; ++i) {
    const int in_row = (i + 1 == n) ? 0 : i + 1;
    const T* row = in.data() + static_cast<std::size_t>(i) * n;
    const T* north = in.data() + static_cast<std::size_t>(in_row) * n;
    T* dst = out.data() + static_cast<std::size_t>(i) * n;
    for (int j = 0; j < n; ++j) {
      const int je = (j + 1 == n) ? 0 : j + 1;
      dst[j] = maj(row[j], north[j], row[je]);
    }
  }
}

template <typename T>
std::vector<T> toom_step(const std::vector<T>& field, int n) {
  std::vector<T> out(field.size());
  toom_step<T>(std::span<const T>(field), std::span<T>(out), n);
  return out;
}

// Site-local structural update from the slice values of s, N(s), E(s).
constexpr StructureState structural_update(const StructureState& c, const StructureState& north,
                                           const StructureState& east, const ScheduleParams& p) {
  return {wrap(static_cast<std::int64_t>(maj(c.tau, north.tau, east.tau)) + 1, p.T0()),
          maj(c.x, wrap(north.x - 1, p.M), east.x),
          maj(c.y, north.y, wrap(east.y - 1, p.M))};
}

// Structure registers after Toom correction but before the time stamp
// advance; this is the value a site acts on when it reads its controls.
constexpr StructureState toom_adjusted(const StructureState& c, const StructureState& north,
                                       const StructureState& east, const ScheduleParams& p) {
  return {maj(c.tau, north.tau, east.tau), maj(c.x, wrap(north.x - 1, p.M), east.x),
          maj(c.y, north.y, wrap(east.y - 1, p.M))};
}

// Synchronous structural Toom step over the whole lattice; global_time += 1.
void structural_toom_step(LatticeState& lattice);

struct Region {
  int i0 = 0;
  int j0 = 0;
  int rows = 0;
  int cols = 0;
};

std::vector<Site> singular_sites(const LatticeState& lattice, std::int64_t reference_time);
std::vector<Site> singular_sites(const LatticeState& lattice, std::int64_t reference_time,
                                 const Region& region);

struct Cluster {
  std::vector<Site> sites;
  Site box;  // top-left (smallest i, smallest j) corner of the 3x3 box
};

struct HealthReport {
  std::vector<Cluster> clusters;
  std::vector<Site> residual;  // always empty with 3x3 boxes
  int h_value = 0;
};

// Greedy row-major 3x3 box packing. The first uncovered site fixes the top
// row of the next box; of the three column placements containing it, the
// one covering the most uncovered sites wins, leftmost on ties. With
// torus > 0 box membership is evaluated modulo torus.
HealthReport decompose_clusters(std::vector<Site> sites, int torus = 0);

// Fewest 3x3 boxes covering the sites, searched exactly up to `limit`;
// returns limit + 1 when more are needed.
int min_cluster_count(std::vector<Site> sites, int torus, int limit);

// Greedy count when it is within `limit`, otherwise the exact minimum.
int cluster_count(const std::vector<Site>& sites, int torus, int limit);

// True iff the region decomposes into at most h boxes, i.e. summed box side
// lengths are at most 3h.
bool is_h_healthy(const Region& region, const LatticeState& lattice,
                  std::int64_t reference_time, int h);

// Translate of {(i,j): i >= -a, j >= -b, i + j <= c} by anchor.
struct Triangle {
  Site anchor;
  int a = 0;
  int b = 0;
  int c = 0;

  int norm() const { return a + b + c; }
  bool empty() const { return a + b + c < 0; }

  // Planar membership.
  bool contains(Site s) const;
  // Membership on an n-torus, offsets taken in (-n/2, n/2].
  bool contains(Site s, int n) const;

  // The same set with c lowered by k.
  Triangle eroded(int k) const { return {anchor, a, b, c - k}; }
};

// Smallest triangle containing the (planar) sites, anchored at its corner
// (min i, min j).
Triangle bounding_triangle(std::span<const Site> sites);

// True when some Toom neighborhood {s, N(s), E(s)} meets both triangles,
// which is when the two regions stop eroding independently.
bool interacts(const Triangle& t1, const Triangle& t2);

struct TriangleCover {
  std::vector<Triangle> triangles;
  std::vector<std::vector<Site>> groups;
  int norm = 0;
  bool exact = true;
};

// Minimal summed norm over covers of the planar site set by pairwise
// non-interacting triangles. Computed exactly by merging interacting
// bounding triangles until none interact.
TriangleCover triangle_norm(std::span<const Site> sites);

// Sets the given sites to 1 in an all-zero n x n field, runs `steps` plain
// Toom steps and checks after every step k that the ones lie inside the
// cover with c lowered by k.
bool erosion_check(int n, std::span<const Site> sites, std::span<const Triangle> cover,
                   int steps);

}  // namespace toomqca
