#include "toomqca/structure.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <numeric>

namespace toomqca {

void structural_toom_step(LatticeState& lattice) {
  const int n = lattice.n();
  const auto& p = lattice.params();
  const std::vector<std::int32_t> tau(lattice.tau_plane().begin(), lattice.tau_plane().end());
  const std::vector<std::int32_t> x(lattice.x_plane().begin(), lattice.x_plane().end());
  const std::vector<std::int32_t> y(lattice.y_plane().begin(), lattice.y_plane().end());
  auto out_tau = lattice.tau_plane();
  auto out_x = lattice.x_plane();
  auto out_y = lattice.y_plane();
  const int T0 = p.T0();
  const int M = p.M;
  for (int i = 0; i < n; ++i) {
    const std::size_t row = static_cast<std::size_t>(i) * n;
    const std::size_t north_row = static_cast<std::size_t>(i + 1 == n ? 0 : i + 1) * n;
    for (int j = 0; j < n; ++j) {
      const std::size_t k = row + j;
      const std::size_t kn = north_row + j;
      const std::size_t ke = row + (j + 1 == n ? 0 : j + 1);
      const int t = maj(tau[k], tau[kn], tau[ke]) + 1;
      out_tau[k] = t == T0 ? 0 : t;
      out_x[k] = maj(x[k], x[kn] == 0 ? M - 1 : x[kn] - 1, x[ke]);
      out_y[k] = maj(y[k], y[kn], y[ke] == 0 ? M - 1 : y[ke] - 1);
    }
  }
  lattice.set_global_time(lattice.global_time() + 1);
}

std::vector<Site> singular_sites(const LatticeState& lattice, std::int64_t reference_time) {
  return singular_sites(lattice, reference_time, Region{0, 0, lattice.n(), lattice.n()});
}

std::vector<Site> singular_sites(const LatticeState& lattice, std::int64_t reference_time,
                                 const Region& region) {
  const int n = lattice.n();
  const auto& p = lattice.params();
  std::vector<Site> out;
  for (int r = 0; r < region.rows; ++r) {
    for (int c = 0; c < region.cols; ++c) {
      const Site s{wrap(region.i0 + r, n), wrap(region.j0 + c, n)};
      if (lattice.structure(s) != ideal_structure(reference_time, s.i, s.j, p)) out.push_back(s);
    }
  }
  return out;
}

namespace {

bool in_box(Site u, Site corner, int torus) {
  const int di = torus > 0 ? wrap(u.i - corner.i, torus) : u.i - corner.i;
  const int dj = torus > 0 ? wrap(u.j - corner.j, torus) : u.j - corner.j;
  return di >= 0 && di < 3 && dj >= 0 && dj < 3;
}

}  // namespace

HealthReport decompose_clusters(std::vector<Site> sites, int torus) {
  std::sort(sites.begin(), sites.end());
  sites.erase(std::unique(sites.begin(), sites.end()), sites.end());
  HealthReport report;
  std::vector<bool> covered(sites.size(), false);
  for (std::size_t k = 0; k < sites.size(); ++k) {
    if (covered[k]) continue;
    const Site s = sites[k];
    Site best{};
    int best_count = -1;
    for (int off = 2; off >= 0; --off) {
      const Site corner{s.i, torus > 0 ? wrap(s.j - off, torus) : s.j - off};
      int count = 0;
      for (std::size_t q = k; q < sites.size(); ++q) {
        if (!covered[q] && in_box(sites[q], corner, torus)) ++count;
      }
      if (count > best_count) {
        best_count = count;
        best = corner;
      }
    }
    Cluster cluster{{}, best};
    for (std::size_t q = k; q < sites.size(); ++q) {
      if (!covered[q] && in_box(sites[q], best, torus)) {
        covered[q] = true;
        cluster.sites.push_back(sites[q]);
      }
    }
    report.clusters.push_back(std::move(cluster));
  }
  report.h_value = static_cast<int>(report.clusters.size());
  return report;
}

namespace {

bool cover_within(const std::vector<Site>& sites, std::vector<int>& hits, int torus, int budget) {
  std::size_t first = 0;
  while (first < sites.size() && hits[first] > 0) ++first;
  if (first == sites.size()) return true;
  if (budget == 0) return false;
  const Site s = sites[first];
  for (int di = 0; di < 3; ++di) {
    for (int dj = 0; dj < 3; ++dj) {
      const Site corner{torus > 0 ? wrap(s.i - di, torus) : s.i - di,
                        torus > 0 ? wrap(s.j - dj, torus) : s.j - dj};
      for (std::size_t q = 0; q < sites.size(); ++q) {
        if (in_box(sites[q], corner, torus)) ++hits[q];
      }
      const bool ok = cover_within(sites, hits, torus, budget - 1);
      for (std::size_t q = 0; q < sites.size(); ++q) {
        if (in_box(sites[q], corner, torus)) --hits[q];
      }
      if (ok) return true;
    }
  }
  return false;
}

}  // namespace

int min_cluster_count(std::vector<Site> sites, int torus, int limit) {
  std::sort(sites.begin(), sites.end());
  sites.erase(std::unique(sites.begin(), sites.end()), sites.end());
  std::vector<int> hits(sites.size(), 0);
  for (int b = 0; b <= limit; ++b) {
    if (cover_within(sites, hits, torus, b)) return b;
  }
  return limit + 1;
}

int cluster_count(const std::vector<Site>& sites, int torus, int limit) {
  const int greedy = decompose_clusters(sites, torus).h_value;
  if (greedy <= limit) return greedy;
  // 9 boxes per level; beyond ~9 sites per box the set is certainly too big.
  if (static_cast<int>(sites.size()) > 9 * limit) return greedy;
  return min_cluster_count(sites, torus, limit);
}

bool is_h_healthy(const Region& region, const LatticeState& lattice,
                  std::int64_t reference_time, int h) {
  const int count =
      cluster_count(singular_sites(lattice, reference_time, region), lattice.n(), h);
  return 3 * count <= 3 * h;
}

bool Triangle::contains(Site s) const {
  const int di = s.i - anchor.i;
  const int dj = s.j - anchor.j;
  return di >= -a && dj >= -b && di + dj <= c;
}

bool Triangle::contains(Site s, int n) const {
  auto centered = [n](int v) {
    int d = wrap(v, n);
    return d > n / 2 ? d - n : d;
  };
  const int di = centered(s.i - anchor.i);
  const int dj = centered(s.j - anchor.j);
  return di >= -a && dj >= -b && di + dj <= c;
}

Triangle bounding_triangle(std::span<const Site> sites) {
  if (sites.empty()) return {{0, 0}, 0, 0, -1};
  int min_i = std::numeric_limits<int>::max();
  int min_j = std::numeric_limits<int>::max();
  int max_s = std::numeric_limits<int>::min();
  for (const Site& s : sites) {
    min_i = std::min(min_i, s.i);
    min_j = std::min(min_j, s.j);
    max_s = std::max(max_s, s.i + s.j);
  }
  return {{min_i, min_j}, 0, 0, max_s - min_i - min_j};
}

namespace {

struct Bounds {
  int A, B, C;  // i >= A, j >= B, i + j <= C
};

Bounds bounds_of(const Triangle& t) {
  return {t.anchor.i - t.a, t.anchor.j - t.b, t.anchor.i + t.anchor.j + t.c};
}

constexpr std::array<std::array<int, 2>, 7> kInteraction{
    {{0, 0}, {1, 0}, {-1, 0}, {0, 1}, {0, -1}, {1, -1}, {-1, 1}}};

}  // namespace

bool interacts(const Triangle& t1, const Triangle& t2) {
  if (t1.empty() || t2.empty()) return false;
  const Bounds b1 = bounds_of(t1);
  const Bounds b2 = bounds_of(t2);
  for (const auto& d : kInteraction) {
    const int A = std::max(b1.A, b2.A - d[0]);
    const int B = std::max(b1.B, b2.B - d[1]);
    const int C = std::min(b1.C, b2.C - d[0] - d[1]);
    if (A + B <= C) return true;
  }
  return false;
}

TriangleCover triangle_norm(std::span<const Site> input) {
  std::vector<Site> sites(input.begin(), input.end());
  std::sort(sites.begin(), sites.end());
  sites.erase(std::unique(sites.begin(), sites.end()), sites.end());
  const std::size_t k = sites.size();

  std::vector<std::size_t> parent(k);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t v) {
    while (parent[v] != v) v = parent[v] = parent[parent[v]];
    return v;
  };
  auto unite = [&](std::size_t u, std::size_t v) { parent[find(u)] = find(v); };

  for (std::size_t u = 0; u < k; ++u) {
    for (std::size_t v = u + 1; v < k; ++v) {
      const int di = sites[v].i - sites[u].i;
      const int dj = sites[v].j - sites[u].j;
      for (const auto& d : kInteraction) {
        if (di == d[0] && dj == d[1]) unite(u, v);
      }
    }
  }

  bool merged = true;
  std::vector<std::vector<Site>> groups;
  std::vector<Triangle> tris;
  while (merged) {
    merged = false;
    groups.assign(k, {});
    for (std::size_t u = 0; u < k; ++u) groups[find(u)].push_back(sites[u]);
    std::vector<std::size_t> roots;
    tris.assign(k, {});
    for (std::size_t r = 0; r < k; ++r) {
      if (!groups[r].empty()) {
        roots.push_back(r);
        tris[r] = bounding_triangle(groups[r]);
      }
    }
    for (std::size_t x = 0; x < roots.size() && !merged; ++x) {
      for (std::size_t y = x + 1; y < roots.size() && !merged; ++y) {
        if (interacts(tris[roots[x]], tris[roots[y]])) {
          unite(roots[x], roots[y]);
          merged = true;
        }
      }
    }
  }

  TriangleCover cover;
  for (std::size_t r = 0; r < k; ++r) {
    if (groups[r].empty()) continue;
    cover.norm += tris[r].norm();
    cover.triangles.push_back(tris[r]);
    cover.groups.push_back(std::move(groups[r]));
  }
  return cover;
}

bool erosion_check(int n, std::span<const Site> sites, std::span<const Triangle> cover,
                   int steps) {
  std::vector<std::uint8_t> field(static_cast<std::size_t>(n) * n, 0);
  for (const Site& s : sites) field[static_cast<std::size_t>(wrap(s.i, n)) * n + wrap(s.j, n)] = 1;
  auto contained = [&](int k) {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (!field[static_cast<std::size_t>(i) * n + j]) continue;
        const bool inside = std::any_of(cover.begin(), cover.end(), [&](const Triangle& t) {
          const Triangle e = t.eroded(k);
          return !e.empty() && e.contains({i, j}, n);
        });
        if (!inside) return false;
      }
    }
    return true;
  };
  if (!contained(0)) return false;
  std::vector<std::uint8_t> next(field.size());
  for (int k = 1; k <= steps; ++k) {
    toom_step<std::uint8_t>(field, next, n);
    field.swap(next);
    if (!contained(k)) return false;
  }
  return true;
}

}  // namespace toomqca
