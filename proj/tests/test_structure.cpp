#include <doctest.h>

#include <algorithm>
#include <functional>
#include <set>

#include "toomqca/rng.hpp"
#include "toomqca/structure.hpp"

using namespace toomqca;

namespace {

// Independent oracle: fewest 3x3 boxes covering the sites, by trying every
// combination of candidate boxes of increasing size.
int brute_force_boxes(const std::vector<Site>& sites) {
  if (sites.empty()) return 0;
  std::set<Site> corners;
  for (const Site& s : sites) {
    for (int di = 0; di < 3; ++di) {
      for (int dj = 0; dj < 3; ++dj) corners.insert({s.i - di, s.j - dj});
    }
  }
  const std::vector<Site> cand(corners.begin(), corners.end());
  auto covers = [&](const std::vector<int>& pick) {
    for (const Site& s : sites) {
      bool in = false;
      for (int k : pick) {
        const Site c = cand[k];
        in |= s.i >= c.i && s.i < c.i + 3 && s.j >= c.j && s.j < c.j + 3;
      }
      if (!in) return false;
    }
    return true;
  };
  for (int size = 1;; ++size) {
    std::vector<int> pick(size);
    std::function<bool(int, int)> rec = [&](int pos, int from) {
      if (pos == size) return covers(pick);
      for (int k = from; k < static_cast<int>(cand.size()); ++k) {
        pick[pos] = k;
        if (rec(pos + 1, k + 1)) return true;
      }
      return false;
    };
    if (rec(0, 0)) return size;
  }
}

// Independent oracle for triangle covers: sites of a triangle enumerated
// explicitly, interaction tested by translating them.
std::vector<Site> triangle_sites(const Triangle& t) {
  std::vector<Site> out;
  for (int di = -t.a; di <= t.b + t.c; ++di) {
    for (int dj = -t.b; di + dj <= t.c; ++dj) out.push_back({t.anchor.i + di, t.anchor.j + dj});
  }
  return out;
}

bool oracle_interacts(const Triangle& t1, const Triangle& t2) {
  const auto s1 = triangle_sites(t1);
  const auto s2v = triangle_sites(t2);
  const std::set<Site> s2(s2v.begin(), s2v.end());
  const int d[7][2] = {{0, 0}, {1, 0}, {-1, 0}, {0, 1}, {0, -1}, {1, -1}, {-1, 1}};
  for (const Site& s : s1) {
    for (const auto& o : d) {
      if (s2.count({s.i + o[0], s.j + o[1]})) return true;
    }
  }
  return false;
}

Triangle oracle_bounding(const std::vector<Site>& g) {
  int mi = 1 << 20, mj = 1 << 20, ms = -(1 << 20);
  for (const Site& s : g) {
    mi = std::min(mi, s.i);
    mj = std::min(mj, s.j);
    ms = std::max(ms, s.i + s.j);
  }
  return {{mi, mj}, 0, 0, ms - mi - mj};
}

int brute_force_triangle_norm(const std::vector<Site>& sites) {
  int best = 1 << 20;
  std::vector<int> label(sites.size(), 0);
  std::function<void(std::size_t, int)> rec = [&](std::size_t k, int groups) {
    if (k == sites.size()) {
      std::vector<std::vector<Site>> g(groups);
      for (std::size_t q = 0; q < sites.size(); ++q) g[label[q]].push_back(sites[q]);
      std::vector<Triangle> tr;
      int norm = 0;
      for (const auto& grp : g) {
        tr.push_back(oracle_bounding(grp));
        norm += tr.back().norm();
      }
      for (std::size_t a = 0; a < tr.size(); ++a) {
        for (std::size_t b = a + 1; b < tr.size(); ++b) {
          if (oracle_interacts(tr[a], tr[b])) return;
        }
      }
      best = std::min(best, norm);
      return;
    }
    for (int l = 0; l <= groups; ++l) {
      label[k] = l;
      rec(k + 1, std::max(groups, l + 1));
    }
  };
  rec(0, 0);
  return best;
}

std::vector<Site> random_sites(KeyedStream& rng, int count, int span) {
  std::set<Site> s;
  while (static_cast<int>(s.size()) < count) {
    s.insert({static_cast<int>(rng.below(span)), static_cast<int>(rng.below(span))});
  }
  return {s.begin(), s.end()};
}

}  // namespace

TEST_CASE("majority keeps the centre unless both neighbours agree") {
  CHECK(maj(1, 2, 2) == 2);
  CHECK(maj(1, 2, 3) == 1);
  CHECK(maj(5, 5, 3) == 5);
  CHECK(maj(0, 1, 1) == 1);
}

TEST_CASE("Toom step by hand on a 4x4 torus") {
  std::vector<int> f(16, 0);
  f[0 * 4 + 0] = 1;
  f[1 * 4 + 0] = 1;  // vertical pair: (0,0) and its northern neighbour
  auto g = toom_step(f, 4);
  std::vector<int> want(16, 0);
  want[0] = 1;
  CHECK(g == want);
  CHECK(toom_step(g, 4) == std::vector<int>(16, 0));

  std::vector<int> h(16, 0);
  h[1 * 4 + 0] = 1;
  h[0 * 4 + 1] = 1;  // N and E of (0,0) both set: (0,0) flips
  auto h1 = toom_step(h, 4);
  CHECK(h1[0] == 1);
  CHECK(std::count(h1.begin(), h1.end(), 1) == 1);
}

TEST_CASE("structural update shifts x and y with the neighbour offsets") {
  ScheduleParams p;
  const auto c = ideal_structure(5, 3, 4, p);
  const auto n = ideal_structure(5, 4, 4, p);
  const auto e = ideal_structure(5, 3, 5, p);
  CHECK(structural_update(c, n, e, p) == ideal_structure(6, 3, 4, p));
  CHECK(toom_adjusted(c, n, e, p) == c);
  // Single singular centre is outvoted.
  const StructureState bad{9, 9, 9};
  CHECK(structural_update(bad, n, e, p) == ideal_structure(6, 3, 4, p));
}

TEST_CASE("greedy cluster decomposition against brute-force box covers") {
  KeyedStream rng(7, 1);
  for (int trial = 0; trial < 300; ++trial) {
    const auto sites = random_sites(rng, 1 + static_cast<int>(rng.below(6)), 9);
    const auto rep = decompose_clusters(sites);
    const int oracle = brute_force_boxes(sites);
    CHECK(rep.h_value >= oracle);
    CHECK(min_cluster_count(sites, 0, 8) == oracle);
    CHECK(cluster_count(sites, 0, oracle) == oracle);
    std::size_t covered = 0;
    for (const auto& cl : rep.clusters) {
      for (const Site& s : cl.sites) {
        CHECK(s.i - cl.box.i >= 0);
        CHECK(s.i - cl.box.i < 3);
        CHECK(s.j - cl.box.j >= 0);
        CHECK(s.j - cl.box.j < 3);
      }
      covered += cl.sites.size();
    }
    CHECK(covered == sites.size());
  }
}

TEST_CASE("one cluster decomposes into one box") {
  const std::vector<Site> l_shape{{5, 5}, {6, 5}, {5, 6}};
  CHECK(decompose_clusters(l_shape).h_value == 1);
  const std::vector<Site> far{{0, 0}, {10, 10}};
  CHECK(decompose_clusters(far).h_value == 2);
  // Wraps on a torus.
  const std::vector<Site> wrapped{{0, 0}, {0, 15}};
  CHECK(decompose_clusters(wrapped, 16).h_value == 1);
  CHECK(decompose_clusters(wrapped).h_value == 2);
}

TEST_CASE("triangle norm matches the brute-force non-interacting partition") {
  KeyedStream rng(11, 2);
  for (int trial = 0; trial < 150; ++trial) {
    const auto sites = random_sites(rng, 1 + static_cast<int>(rng.below(7)), 8);
    const auto cover = triangle_norm(sites);
    CHECK(cover.norm == brute_force_triangle_norm(sites));
    for (std::size_t a = 0; a < cover.triangles.size(); ++a) {
      for (std::size_t b = a + 1; b < cover.triangles.size(); ++b) {
        CHECK_FALSE(oracle_interacts(cover.triangles[a], cover.triangles[b]));
      }
    }
    for (const Site& s : sites) {
      CHECK(std::any_of(cover.triangles.begin(), cover.triangles.end(),
                        [&](const Triangle& t) { return t.contains(s); }));
    }
  }
}

TEST_CASE("triangle geometry") {
  const Triangle t{{4, 4}, 1, 1, 2};
  CHECK(t.norm() == 4);
  CHECK(t.contains({3, 3}));
  CHECK(t.contains({3, 6}));
  CHECK_FALSE(t.contains({2, 4}));
  CHECK_FALSE(t.contains({5, 6}));
  CHECK(t.eroded(4).norm() == 0);
  CHECK(t.eroded(5).empty());
  const std::vector<Site> single{{2, 3}};
  CHECK(bounding_triangle(single).norm() == 0);
}

TEST_CASE("sets inside a triangle erode with it") {
  KeyedStream rng(3, 3);
  for (int trial = 0; trial < 200; ++trial) {
    const int norm = static_cast<int>(rng.below(8));
    const Triangle t{{16, 16}, 0, 0, norm};
    std::vector<Site> sites;
    for (const Site& s : triangle_sites(t)) {
      if (rng.bernoulli(0.6)) sites.push_back(s);
    }
    const std::vector<Triangle> cover{t};
    CHECK(erosion_check(32, sites, cover, norm + 1));
    const auto tc = triangle_norm(sites);
    CHECK(tc.norm <= norm);
    CHECK(erosion_check(32, sites, tc.triangles, norm + 1));
  }
}

TEST_CASE("erosion check detects sets outside the cover") {
  const std::vector<Site> sites{{16, 16}, {17, 16}};
  const std::vector<Triangle> too_small{{{16, 16}, 0, 0, 0}};
  CHECK_FALSE(erosion_check(32, sites, too_small, 2));
}

TEST_CASE("h-health of a region") {
  ScheduleParams p;
  LatticeState lat = new_lattice(48, p);
  const Region block{0, 0, 24, 24};
  CHECK(is_h_healthy(block, lat, 0, 0));
  lat.set_structure({2, 2}, {1, 1, 1});
  lat.set_structure({3, 3}, {1, 1, 1});
  lat.set_structure({12, 12}, {1, 1, 1});
  CHECK_FALSE(is_h_healthy(block, lat, 0, 1));
  CHECK(is_h_healthy(block, lat, 0, 2));
  CHECK(singular_sites(lat, 0).size() == 3);
}
