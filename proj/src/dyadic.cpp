#include "radon/dyadic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

namespace radon {

namespace {

// Nearest-center queries during net construction. Closed-form metrics prune
// through the lattice box bound; matrix metrics scan (N <= 2^13 there).
struct CenterIndex {
  const DiscreteSHT& S;
  double radius;  // only neighbors with rho < radius matter
  std::vector<uint32_t> centers;
  // buckets over lattice cells sized to the metric search halfwidth
  std::array<double, 4> cell{1, 1, 1, 1};
  std::array<int, 4> ncell{1, 1, 1, 1};
  std::vector<std::vector<uint32_t>> buckets;
  bool use_buckets = false;

  CenterIndex(const DiscreteSHT& s, double r) : S(s), radius(r) {
    if (S.dist_matrix.empty()) {
      const int n = S.lattice.dim;
      Vec hw = S.metric->search_halfwidth(radius, n);
      use_buckets = true;
      size_t total = 1;
      for (int i = 0; i < n; ++i) {
        double extent = S.lattice.box.hi[i] - S.lattice.box.lo[i];
        double c = std::isfinite(hw[i]) ? std::max(hw[i], 1e-12) : extent + 1;
        cell[i] = c;
        ncell[i] = std::max(1, int(extent / c) + 1);
        total *= size_t(ncell[i]);
        if (total > (1u << 22)) {
          use_buckets = false;
          break;
        }
      }
      if (use_buckets) buckets.assign(total, {});
    }
  }

  size_t bucket_of(const Vec& x) const {
    size_t b = 0;
    for (int i = 0; i < S.lattice.dim; ++i) {
      int c = int((x[i] - S.lattice.box.lo[i]) / cell[i]);
      c = std::clamp(c, 0, ncell[i] - 1);
      b = b * size_t(ncell[i]) + size_t(c);
    }
    return b;
  }

  void insert(uint32_t p) {
    centers.push_back(p);
    if (use_buckets) buckets[bucket_of(S.pts[p])].push_back(p);
  }

  // nearest center with rho < radius; ties by smallest point index
  std::optional<std::pair<uint32_t, double>> nearest_within(uint32_t p) const {
    double best = radius;
    int64_t best_c = -1;
    auto consider = [&](uint32_t c) {
      double d = S.rho(p, c);
      if (d < best || (d == best && best_c >= 0 && c < best_c)) {
        best = d;
        best_c = c;
      }
    };
    if (!use_buckets) {
      for (uint32_t c : centers) consider(c);
    } else {
      const int n = S.lattice.dim;
      std::array<int, 4> c0{0, 0, 0, 0}, lo{0, 0, 0, 0}, hi{0, 0, 0, 0};
      for (int i = 0; i < n; ++i) {
        c0[i] = std::clamp(int((S.pts[p][i] - S.lattice.box.lo[i]) / cell[i]), 0,
                           ncell[i] - 1);
        lo[i] = std::max(0, c0[i] - 1);
        hi[i] = std::min(ncell[i] - 1, c0[i] + 1);
      }
      std::array<int, 4> c = lo;
      while (true) {
        size_t b = 0;
        for (int i = 0; i < n; ++i) b = b * size_t(ncell[i]) + size_t(c[i]);
        for (uint32_t cc : buckets[b]) consider(cc);
        int ax = n - 1;
        while (ax >= 0) {
          if (++c[ax] <= hi[ax]) break;
          c[ax] = lo[ax];
          --ax;
        }
        if (ax < 0) break;
      }
    }
    if (best_c < 0) return std::nullopt;
    return std::make_pair(uint32_t(best_c), best);
  }
};

DyadicGrid try_build(const DiscreteSHT& S, double delta, GridOptions opt,
                     uint64_t seed) {
  if (!(delta > 0 && delta < 1))
    throw ContractViolation("build_grid: 0 < delta < 1 required");
  const size_t N = S.size();
  DyadicGrid G;
  G.sht = &S;
  G.delta = delta;
  G.seed = seed;

  const double diam = S.diameter();
  const double res = S.min_resolvable_scale();
  const double s0 = diam;

  // base candidate ordering: a seeded permutation; per-generation preferred
  // centers are prepended below
  std::vector<uint32_t> base_order(N);
  for (uint32_t p = 0; p < N; ++p) base_order[p] = p;
  {
    Rng rng(seed);
    for (size_t i = N; i > 1; --i)
      std::swap(base_order[i - 1], base_order[rng.next_index(i)]);
  }

  int k_max = 0;
  while (k_max + 1 < opt.max_generations && s0 * std::pow(delta, k_max + 1) >= res)
    ++k_max;
  if (k_max < 1) throw ResolutionError("build_grid: net empty at requested scale");
  G.k_min = 0;
  G.k_max = k_max;

  const int gens = G.generations();
  G.gen_cubes.assign(gens, {});
  G.point_cube.assign(gens, std::vector<uint32_t>(N, 0));

  std::vector<uint32_t> prev_chain(N, 0);  // cube index at previous generation

  for (int k = 0; k <= k_max; ++k) {
    const double sigma = s0 * std::pow(delta, k);
    std::vector<uint32_t> order;
    if (size_t(k) < opt.preferred_centers.size()) {
      for (uint32_t p : opt.preferred_centers[k])
        if (p < N) order.push_back(p);
    }
    order.insert(order.end(), base_order.begin(), base_order.end());

    CenterIndex net(S, sigma);
    if (k == 0) {
      net.insert(order[0]);  // single root
    } else {
      // greedy maximal sigma-separated net in candidate order
      for (uint32_t p : order)
        if (!net.nearest_within(p)) net.insert(p);
    }

    // map centers to cubes; parent = the cube the center itself lives in at
    // the previous generation (keeps every center inside its own cube)
    std::vector<uint32_t> cube_of_center;
    std::map<uint32_t, uint32_t> center_to_cube;
    auto add_cube = [&](uint32_t c) {
      DyadicCube Q;
      Q.generation = k;
      Q.center = c;
      Q.parent = (k == 0) ? -1 : int32_t(prev_chain[c]);
      uint32_t idx = uint32_t(G.cubes.size());
      G.cubes.push_back(std::move(Q));
      G.gen_cubes[k].push_back(idx);
      center_to_cube[c] = idx;
      if (k > 0) G.cubes[prev_chain[c]].children.push_back(idx);
      return idx;
    };
    for (uint32_t c : net.centers) add_cube(c);

    if (k > 0) {
      // patch childless cubes of the previous generation with their own center
      for (uint32_t qi : G.gen_cubes[k - 1]) {
        if (!G.cubes[qi].children.empty()) continue;
        uint32_t c = G.cubes[qi].center;
        if (!center_to_cube.count(c)) {
          net.insert(c);
          add_cube(c);
        }
      }
    }

    // membership: nearest same-generation center among the children of the
    // point's previous cube; ties by smallest point index
    auto& chain = G.point_cube[k];
    for (uint32_t p = 0; p < N; ++p) {
      uint32_t best_cube = 0;
      double best = std::numeric_limits<double>::infinity();
      uint32_t best_center = 0;
      if (k == 0) {
        // single root by construction; still guard for multiple
        for (uint32_t qi : G.gen_cubes[0]) {
          double d = S.rho(p, G.cubes[qi].center);
          if (d < best || (d == best && G.cubes[qi].center < best_center)) {
            best = d;
            best_cube = qi;
            best_center = G.cubes[qi].center;
          }
        }
      } else {
        for (uint32_t qi : G.cubes[prev_chain[p]].children) {
          double d = S.rho(p, G.cubes[qi].center);
          if (d < best || (d == best && G.cubes[qi].center < best_center)) {
            best = d;
            best_cube = qi;
            best_center = G.cubes[qi].center;
          }
        }
      }
      chain[p] = best_cube;
    }
    prev_chain = chain;
  }

  // members, measures, ranks
  for (int k = 0; k <= k_max; ++k) {
    for (uint32_t p = 0; p < N; ++p) {
      DyadicCube& Q = G.cubes[G.point_cube[k][p]];
      Q.members.push_back(p);
      Q.measure += S.weights[p];
    }
  }
  // drop memberless cubes (possible when a patched level re-centered points)
  {
    std::vector<int32_t> remap(G.cubes.size(), -1);
    std::vector<DyadicCube> kept;
    for (size_t i = 0; i < G.cubes.size(); ++i) {
      if (G.cubes[i].members.empty()) continue;
      remap[i] = int32_t(kept.size());
      kept.push_back(std::move(G.cubes[i]));
    }
    for (auto& Q : kept) {
      if (Q.parent >= 0) Q.parent = remap[Q.parent];
      std::vector<uint32_t> ch;
      for (uint32_t c : Q.children)
        if (remap[c] >= 0) ch.push_back(uint32_t(remap[c]));
      Q.children = std::move(ch);
    }
    for (auto& g : G.gen_cubes) {
      std::vector<uint32_t> ng;
      for (uint32_t c : g)
        if (remap[c] >= 0) ng.push_back(uint32_t(remap[c]));
      g = std::move(ng);
    }
    for (auto& chain : G.point_cube)
      for (auto& c : chain) c = uint32_t(remap[c]);
    G.cubes = std::move(kept);
  }
  for (int k = 0; k <= k_max; ++k) {
    uint32_t r = 0;
    for (uint32_t qi : G.gen_cubes[k]) G.cubes[qi].rank = r++;
  }

  // sandwich radii; normalize the scale so the inner inclusion is exact
  double min_ratio = std::numeric_limits<double>::infinity();
  for (auto& Q : G.cubes) {
    const Vec& cx = S.pts[Q.center];
    double out = 0;
    for (uint32_t m : Q.members) out = std::max(out, S.rho(Q.center, m));
    Q.outer_radius = out;
    // nearest non-member: grow a ball until one shows up
    std::vector<char> is_member(N, 0);
    for (uint32_t m : Q.members) is_member[m] = 1;
    double inner = std::numeric_limits<double>::infinity();
    if (Q.members.size() < N) {
      double r = std::max(out, res);
      for (int it = 0; it < 64; ++it) {
        auto idx = ball(S, Q.center, r);
        for (uint32_t y : idx)
          if (!is_member[y]) inner = std::min(inner, S.rho(Q.center, y));
        if (std::isfinite(inner)) break;
        r *= 2;
        if (r > 4 * diam) break;
      }
      if (!std::isfinite(inner)) {
        for (uint32_t y = 0; y < N; ++y)
          if (!is_member[y]) inner = std::min(inner, S.rho(Q.center, y));
      }
    }
    Q.inner_radius = inner;
    (void)cx;
    if (std::isfinite(inner))
      min_ratio = std::min(min_ratio, inner / std::pow(delta, Q.generation));
  }
  if (!std::isfinite(min_ratio) || min_ratio <= 0)
    throw ResolutionError("build_grid: degenerate inner radii");
  G.scale = min_ratio;
  double cmax = 1;
  for (const auto& Q : G.cubes)
    cmax = std::max(cmax, Q.outer_radius / G.ell(Q.generation));
  G.outer_c = cmax * (1 + 1e-9) + 1e-12;

  // measured child-mass ratio
  double eps = 1;
  for (const auto& Q : G.cubes)
    if (Q.parent >= 0)
      eps = std::min(eps, Q.measure / G.cubes[Q.parent].measure);
  G.eps = eps;
  return G;
}

}  // namespace

DyadicGrid build_grid(const DiscreteSHT& S, double delta, GridOptions opt) {
  uint64_t seed = opt.seed;
  for (int attempt = 0; attempt < std::max(1, opt.rebuild_retries); ++attempt) {
    DyadicGrid G = try_build(S, delta, opt, seed);
    if (G.eps >= opt.min_eps) return G;
    seed += 1;  // grids with vanishing child mass are rebuilt from the next seed
  }
  throw ResolutionError("build_grid: child-mass ratio below threshold for all seeds");
}

std::vector<uint32_t> dilate(const DyadicGrid& G, const DyadicCube& Q,
                             double lambda) {
  if (lambda < 1)
    throw ContractViolation("dilate: lambda >= 1 (definition does not extend)");
  return ball(*G.sht, Q.center, lambda * G.outer_c * G.ell(Q.generation));
}

double dilate_measure(const DyadicGrid& G, const DyadicCube& Q, double lambda) {
  return G.sht->measure(dilate(G, Q, lambda));
}

GridCheckReport verify_grid(const DyadicGrid& G) {
  const DiscreteSHT& S = *G.sht;
  const size_t N = S.size();
  GridCheckReport rep;
  rep.eps = G.eps;
  rep.outer_c = G.outer_c;

  // (1) partition per generation
  rep.partition = true;
  for (int k = G.k_min; k <= G.k_max; ++k) {
    std::vector<char> hit(N, 0);
    for (uint32_t qi : G.gen_cubes[k - G.k_min])
      for (uint32_t p : G.cubes[qi].members) {
        if (hit[p]) rep.partition = false;
        hit[p] = 1;
      }
    for (char h : hit) rep.partition = rep.partition && h;
  }

  // (2) nesting: cubes at different generations intersect only by inclusion
  rep.nesting = true;
  for (const auto& Q : G.cubes) {
    if (Q.parent < 0) continue;
    const auto& P = G.cubes[Q.parent];
    std::vector<char> inP(N, 0);
    for (uint32_t p : P.members) inP[p] = 1;
    for (uint32_t p : Q.members) rep.nesting = rep.nesting && inP[p];
  }

  // (3) every non-leaf-generation cube has a child; (4) unique parent
  rep.has_child = true;
  for (const auto& Q : G.cubes)
    if (Q.generation < G.k_max) rep.has_child = rep.has_child && !Q.children.empty();
  rep.unique_parent = true;
  for (const auto& Q : G.cubes)
    if (Q.generation > G.k_min) rep.unique_parent = rep.unique_parent && Q.parent >= 0;

  // (5) child mass
  rep.mass_ratio = true;
  for (const auto& Q : G.cubes)
    if (Q.parent >= 0)
      rep.mass_ratio =
          rep.mass_ratio && Q.measure >= G.eps * G.cubes[Q.parent].measure - 1e-15;

  // (6) sandwich, exact ball queries
  rep.sandwich = true;
  for (const auto& Q : G.cubes) {
    double l = G.ell(Q.generation);
    std::vector<char> member(N, 0);
    for (uint32_t p : Q.members) member[p] = 1;
    for (uint32_t y : ball(S, Q.center, l))
      rep.sandwich = rep.sandwich && member[y];
    for (uint32_t p : Q.members)
      rep.sandwich = rep.sandwich && S.rho(Q.center, p) < G.outer_c * l;
  }
  return rep;
}

RescaledGrid rescaled_grid(const DyadicGrid& G, double w) {
  if (!(w > 0)) throw ContractViolation("rescaled_grid: w > 0");
  RescaledGrid R;
  R.base = &G;
  R.w = w;
  double a = std::log(w) / std::log(G.delta);
  double snapped = std::round(a);
  if (std::abs(a - snapped) < 1e-9)
    R.shift = int(snapped);
  else
    R.shift = int(std::floor(a));
  R.outer_bound = G.outer_c / G.delta;
  return R;
}

double rescaled_outer_constant(const RescaledGrid& R) {
  const DyadicGrid& G = *R.base;
  double worst = 0;
  for (const auto& Q : G.cubes) {
    int k_new = Q.generation - R.shift;
    // under rho/w, the cube's outer radius is outer/w and its sidelength is
    // scale * delta^{k_new}
    double l = G.scale * std::pow(G.delta, k_new);
    worst = std::max(worst, (Q.outer_radius / R.w) / l);
  }
  return worst;
}

std::vector<DyadicGrid> adjacent_grids(const DiscreteSHT& S, double delta,
                                       const std::vector<uint64_t>& seeds) {
  double k6 = std::pow(S.kappa, 6.0);
  if (96.0 * k6 * delta > 1.0)
    throw ContractViolation("adjacent_grids: 96 kappa^6 delta <= 1 violated");
  std::vector<DyadicGrid> out;
  for (uint64_t s : seeds) {
    GridOptions opt;
    opt.seed = s;
    out.push_back(build_grid(S, delta, opt));
  }
  return out;
}

CoverReport three_lattice_cover_check(const std::vector<DyadicGrid>& grids,
                                      int ball_samples, uint64_t seed) {
  CoverReport rep;
  if (grids.empty()) return rep;
  const DiscreteSHT& S = *grids[0].sht;
  Rng rng(seed);
  const double rmin = S.min_resolvable_scale();
  const double rmax = 0.5 * S.diameter();
  for (int s = 0; s < ball_samples; ++s) {
    uint32_t x = uint32_t(rng.next_index(S.size()));
    double r = rmin * std::pow(rmax / rmin, rng.next_double());
    auto B = ball(S, x, r);
    ++rep.tried;
    double best = std::numeric_limits<double>::infinity();
    for (const auto& G : grids) {
      // finest cube in x's chain that contains B
      for (int k = G.k_max; k >= G.k_min; --k) {
        const DyadicCube& Q = G.cube_of_point(x, k);
        std::vector<char> member(S.size(), 0);
        for (uint32_t p : Q.members) member[p] = 1;
        bool covers = true;
        for (uint32_t y : B) covers = covers && member[y];
        if (covers) {
          best = std::min(best, G.ell(k));
          break;  // coarser cubes in this grid only get bigger
        }
      }
    }
    if (!std::isfinite(best))
      ++rep.failures;
    else
      rep.c_tilde = std::max(rep.c_tilde, best / r);
  }
  return rep;
}

const DyadicCube& containing_cube(const DyadicGrid& G, uint32_t pt, int k) {
  if (k < G.k_min || k > G.k_max)
    throw ContractViolation("containing_cube: generation out of range");
  return G.cube_of_point(pt, k);
}

}  // namespace radon
