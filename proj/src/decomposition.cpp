#include "radon/decomposition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace radon {

GridFunction dyadic_maximal(const DyadicGrid& G, const GridFunction& f,
                            double p, Exec ex) {
  if (p < 1) throw ContractViolation("dyadic_maximal: p >= 1 required");
  const DiscreteSHT& S = *G.sht;
  // per-cube averages of |f|^p, then per-point sup along the chain
  std::vector<double> avg(G.cubes.size(), 0.0);
  for_n(ex, std::ptrdiff_t(G.cubes.size()), [&](size_t qi) {
    const DyadicCube& Q = G.cubes[qi];
    double s = 0;
    for (uint32_t m : Q.members)
      s += S.weights[m] * std::pow(std::abs(f.v[m]), p);
    avg[qi] = std::pow(s / Q.measure, 1.0 / p);
  });
  GridFunction out(S);
  for_n(ex, std::ptrdiff_t(S.size()), [&](size_t pt) {
    double m = 0;
    for (int k = G.k_min; k <= G.k_max; ++k)
      m = std::max(m, avg[G.cube_index_of_point(uint32_t(pt), k)]);
    out.v[pt] = m;
  });
  return out;
}

WhitneyFamily whitney(const DyadicGrid& G, const std::vector<uint32_t>& omega,
                      double c_prime, double A, bool strict) {
  const DiscreteSHT& S = *G.sht;
  const size_t N = S.size();
  const double kappa = S.kappa;

  WhitneyFamily fam;
  fam.c_prime = c_prime;
  fam.omega = omega;
  std::sort(fam.omega.begin(), fam.omega.end());
  if (fam.omega.empty()) {
    fam.covers = fam.disjoint = fam.bounds_ok = true;
    return fam;
  }
  if (c_prime <= 2 * kappa * kappa * G.outer_c)
    throw ContractViolation("whitney: c' > 2 kappa^2 c required");

  std::vector<char> in_omega(N, 0);
  for (uint32_t p : fam.omega) in_omega[p] = 1;
  std::vector<char> in_Y(N, 0);
  bool has_Y = false;
  for (uint32_t p = 0; p < N; ++p)
    if (!in_omega[p]) {
      in_Y[p] = 1;
      has_Y = true;
    }
  if (!has_Y) throw ContractViolation("whitney: Omega must have a complement");

  // level sets Omega_k = { c' ell(k) < dist(x, Y) <= c' ell(k-1) }; the level
  // index is clamped to the grid range at both ends
  std::vector<double> dist = dist_to_set_all(S, in_Y);

  std::vector<char> selected(G.cubes.size(), 0);
  for (uint32_t p : fam.omega) {
    double d = dist[p];
    int k = G.k_min + 1;
    while (k < G.k_max && c_prime * G.ell(k) >= d) ++k;
    // now k is the smallest generation > k_min with c' ell(k) < d, or k_max
    selected[G.cube_index_of_point(p, k)] = 1;
  }
  // initial selection M0: keep only cubes fully inside Omega (the distance
  // bounds force this in the continuum; on the cloud we check it)
  std::vector<uint32_t> m0;
  for (size_t qi = 0; qi < G.cubes.size(); ++qi) {
    if (!selected[qi]) continue;
    bool inside = true;
    for (uint32_t m : G.cubes[qi].members) inside = inside && in_omega[m];
    if (inside) m0.push_back(uint32_t(qi));
  }
  // maximal cubes of M0: drop any cube whose strict ancestor is in M0
  std::vector<char> in_m0(G.cubes.size(), 0);
  for (uint32_t qi : m0) in_m0[qi] = 1;
  for (uint32_t qi : m0) {
    int32_t a = G.cubes[qi].parent;
    bool shadowed = false;
    while (a >= 0) {
      if (in_m0[a]) {
        shadowed = true;
        break;
      }
      a = G.cubes[a].parent;
    }
    if (!shadowed) fam.cubes.push_back(qi);
  }

  // exact verification
  std::vector<char> covered(N, 0);
  fam.disjoint = true;
  for (uint32_t qi : fam.cubes)
    for (uint32_t m : G.cubes[qi].members) {
      if (covered[m]) fam.disjoint = false;
      covered[m] = 1;
    }
  fam.covers = true;
  for (uint32_t p : fam.omega) fam.covers = fam.covers && covered[p];
  for (uint32_t p = 0; p < N; ++p)
    if (covered[p] && !in_omega[p]) fam.covers = false;

  fam.bounds_ok = true;
  double lo_coef = c_prime / (2 * kappa * kappa * G.outer_c) - 1;
  double hi_coef = A * c_prime / G.delta;
  fam.worst_lower = std::numeric_limits<double>::infinity();
  fam.worst_upper = 0;
  for (uint32_t qi : fam.cubes) {
    const DyadicCube& Q = G.cubes[qi];
    double diam = 0;
    for (size_t a = 0; a < Q.members.size(); ++a)
      for (size_t b = a + 1; b < Q.members.size(); ++b)
        diam = std::max(diam, S.rho(Q.members[a], Q.members[b]));
    double dQ = std::numeric_limits<double>::infinity();
    for (uint32_t m : Q.members) dQ = std::min(dQ, dist[m]);
    if (diam > 0) {
      fam.worst_lower = std::min(fam.worst_lower, dQ / diam);
      fam.worst_upper = std::max(fam.worst_upper, dQ / diam);
    }
    bool ok = (lo_coef * diam <= dQ + 1e-12) && (dQ <= hi_coef * diam + 1e-12);
    fam.bounds_ok = fam.bounds_ok && ok;
  }
  if (strict && !(fam.covers && fam.disjoint && fam.bounds_ok))
    throw ContractViolation("whitney: family invariants violated on the cloud");
  return fam;
}

CzResult cz_decompose(const DyadicGrid& G, const GridFunction& f, double lambda) {
  const DiscreteSHT& S = *G.sht;
  double global_avg = 0;
  {
    double s = 0;
    for (size_t i = 0; i < S.size(); ++i) s += S.weights[i] * std::abs(f.v[i]);
    global_avg = s / S.total_measure();
  }
  if (!(lambda > global_avg))
    throw ContractViolation("cz_decompose: lambda must exceed the global average");

  // maximal dyadic cubes with <|f|>_Q > lambda
  std::vector<double> avg(G.cubes.size(), 0);
  for (size_t qi = 0; qi < G.cubes.size(); ++qi) {
    const DyadicCube& Q = G.cubes[qi];
    double s = 0;
    for (uint32_t m : Q.members) s += S.weights[m] * std::abs(f.v[m]);
    avg[qi] = s / Q.measure;
  }
  std::vector<uint32_t> selected;
  for (size_t qi = 0; qi < G.cubes.size(); ++qi) {
    if (avg[qi] <= lambda) continue;
    bool shadowed = false;
    int32_t a = G.cubes[qi].parent;
    while (a >= 0) {
      if (avg[a] > lambda) {
        shadowed = true;
        break;
      }
      a = G.cubes[a].parent;
    }
    if (!shadowed) selected.push_back(uint32_t(qi));
  }
  CzResult r = cz_decompose_on(G, f, selected);
  r.lambda = lambda;
  r.c_x = 0;
  for (size_t i = 0; i < S.size(); ++i)
    r.c_x = std::max(r.c_x, std::abs(r.good.v[i]) / lambda);
  return r;
}

CzResult cz_decompose_on(const DyadicGrid& G, const GridFunction& f,
                         const std::vector<uint32_t>& cubes) {
  const DiscreteSHT& S = *G.sht;
  CzResult r;
  r.good = f;
  r.cubes = cubes;
  for (uint32_t qi : cubes) {
    const DyadicCube& Q = G.cubes[qi];
    double mean = 0;
    for (uint32_t m : Q.members) mean += S.weights[m] * f.v[m];
    mean /= Q.measure;
    GridFunction b(S);
    for (uint32_t m : Q.members) {
      b.v[m] = f.v[m] - mean;
      r.good.v[m] = mean;
    }
    r.bad_parts.push_back(std::move(b));
  }
  return r;
}

}  // namespace radon
