#include "radon/sparse.hpp"

#include <algorithm>
#include <cmath>

namespace radon {

double sparse_form(const SparseFamily& fam, const GridFunction& f,
                   const GridFunction& g, const SparseFormParams& params) {
  const DyadicGrid& G = *fam.grid;
  double acc = 0;
  for (uint32_t qi : fam.cubes) {
    const DyadicCube& Q = G.cubes[qi];
    double af = f.avg_over(Q.members, params.r);
    double ag;
    if (params.kappa_prime > 1.0) {
      auto idx = dilate(G, Q, params.kappa_prime);
      ag = g.avg_over(idx, params.s);
    } else {
      ag = g.avg_over(Q.members, params.s);
    }
    acc += Q.measure * af * ag;
  }
  return acc;
}

SparseVerifyReport verify_sparse(const SparseFamily& fam) {
  const DyadicGrid& G = *fam.grid;
  const DiscreteSHT& S = *G.sht;
  SparseVerifyReport rep;
  rep.witness_ok = true;
  rep.worst_ratio = 1;

  std::vector<char> used(S.size(), 0);
  for (size_t i = 0; i < fam.cubes.size(); ++i) {
    const DyadicCube& Q = G.cubes[fam.cubes[i]];
    std::vector<char> inQ(S.size(), 0);
    for (uint32_t m : Q.members) inQ[m] = 1;
    double ew = 0;
    for (uint32_t p : fam.witnesses[i]) {
      if (!inQ[p] || used[p]) rep.witness_ok = false;
      used[p] = 1;
      ew += S.weights[p];
    }
    double ratio = ew / Q.measure;
    rep.worst_ratio = std::min(rep.worst_ratio, ratio);
    if (ratio < fam.sigma - 1e-12) rep.witness_ok = false;
  }

  // canonical-witness union form: for each Q, the strict sub-cubes of Q in
  // the family carry at most (1 - sigma) of its mass
  rep.union_ok = true;
  for (size_t i = 0; i < fam.cubes.size(); ++i) {
    const DyadicCube& Q = G.cubes[fam.cubes[i]];
    std::vector<char> inQ(S.size(), 0);
    for (uint32_t m : Q.members) inQ[m] = 1;
    std::vector<char> covered(S.size(), 0);
    for (size_t j = 0; j < fam.cubes.size(); ++j) {
      if (j == i) continue;
      const DyadicCube& P = G.cubes[fam.cubes[j]];
      if (P.members.size() >= Q.members.size()) continue;
      bool inside = true;
      for (uint32_t m : P.members)
        if (!inQ[m]) {
          inside = false;
          break;
        }
      if (!inside) continue;
      for (uint32_t m : P.members) covered[m] = 1;
    }
    double cov = 0;
    for (uint32_t m : Q.members)
      if (covered[m]) cov += S.weights[m];
    if (cov > (1 - fam.sigma) * Q.measure + 1e-12) rep.union_ok = false;
  }
  return rep;
}

void make_canonical_witnesses(SparseFamily& fam) {
  const DyadicGrid& G = *fam.grid;
  const size_t N = G.sht->size();
  fam.witnesses.assign(fam.cubes.size(), {});
  for (size_t i = 0; i < fam.cubes.size(); ++i) {
    const DyadicCube& Q = G.cubes[fam.cubes[i]];
    std::vector<char> inQ(N, 0);
    for (uint32_t m : Q.members) inQ[m] = 1;
    std::vector<char> covered(N, 0);
    for (size_t j = 0; j < fam.cubes.size(); ++j) {
      if (j == i) continue;
      const DyadicCube& P = G.cubes[fam.cubes[j]];
      if (P.members.size() >= Q.members.size()) continue;
      bool inside = true;
      for (uint32_t m : P.members)
        if (!inQ[m]) {
          inside = false;
          break;
        }
      if (!inside) continue;
      for (uint32_t m : P.members) covered[m] = 1;
    }
    for (uint32_t m : Q.members)
      if (!covered[m]) fam.witnesses[i].push_back(m);
  }
}

double select_whitney_constant(const DyadicGrid& G, double c_star) {
  const double c = G.outer_c;
  const double del = G.delta;
  const double kappa = G.sht->kappa;
  auto F = [&](double cp) {
    return (c_star + 2 * c + 12 * c * cp / del) / ((cp / (2 * c) - 1) / 3.0);
  };
  auto Gfun = [&](double cp) {
    return ((cp / (2 * c) - 1) / 3.0 - c_star) / (2 * c + 12 * c * cp / del);
  };
  const double band_lo = 36 * c * c / del, band_hi = 144 * c * c / del;
  const double g_lo = del / (144 * c * c), g_hi = del / (36 * c * c);
  double cp = 2 * kappa * kappa * c * 1.0625;
  for (int m = 0; m < 64; ++m, cp *= 1.25) {
    if (!(cp > 2 * kappa * kappa * c)) continue;
    if (!(F(cp) >= band_lo && F(cp) <= band_hi)) continue;
    if (!((cp / (2 * c) - 1) / 3.0 >= 100 * c_star)) continue;
    if (!(Gfun(cp) >= g_lo && Gfun(cp) <= g_hi)) continue;
    return cp;
  }
  throw ContractViolation(
      "select_whitney_constant: no menu value satisfies the constraints");
}

namespace {

struct SelectState {
  const RadonOperator* op;
  const DyadicGrid* G;
  const GridFunction* f2;
  GridFunction M2;  // dyadic maximal of f2 at s', fixed across the recursion
  double sigma;
  SparseFormParams params;
  SelectOptions opt;
  double c_prime;
  SparseSelection* out;
};

// cube j is contained in cube i (dyadic nesting via the center chain)
bool cube_inside(const DyadicGrid& G, uint32_t inner, uint32_t outer) {
  const DyadicCube& A = G.cubes[inner];
  const DyadicCube& B = G.cubes[outer];
  if (A.generation < B.generation) return false;
  return G.cube_index_of_point(A.center, B.generation) == outer;
}

void recurse(SelectState& st, uint32_t q_idx, const GridFunction& f1_loc,
             int depth) {
  const DyadicGrid& G = *st.G;
  const DiscreteSHT& S = *G.sht;
  const DyadicCube& Q = G.cubes[q_idx];

  if (int(Q.members.size()) <= st.opt.terminal_points ||
      depth >= st.opt.max_depth || Q.generation >= G.k_max) {
    st.out->family.cubes.push_back(q_idx);
    st.out->family.witnesses.push_back(Q.members);
    st.out->trace.push_back({q_idx, depth, 0, 0, true});
    return;
  }

  // reference averages
  double a1 = f1_loc.avg_over(Q.members, st.params.r);
  double s_conj = st.params.s / (st.params.s - 1.0);
  auto dilated = dilate(G, Q, st.params.kappa_prime);
  double a2 = st.f2->avg_over(dilated, s_conj);

  GridFunction M1 = dyadic_maximal(G, f1_loc, st.params.r, st.op->exec);

  // doubling search for D: mass of E = E1 union E2 within the budget
  double D = 2;
  std::vector<char> inE(S.size(), 0);
  double e_mass = 0, e_in_Q = 0;
  bool found = false;
  std::vector<char> inQ(S.size(), 0);
  for (uint32_t m : Q.members) inQ[m] = 1;
  for (int it = 0; it < st.opt.max_D_doublings; ++it, D *= 2) {
    std::fill(inE.begin(), inE.end(), 0);
    e_mass = 0;
    e_in_Q = 0;
    for (size_t p = 0; p < S.size(); ++p) {
      bool in1 = a1 > 0 && M1.v[p] > D * a1;
      bool in2 = a2 > 0 && st.M2.v[p] > D * a2;
      if (in1 || in2) {
        inE[p] = 1;
        e_mass += S.weights[p];
        if (inQ[p]) e_in_Q += S.weights[p];
      }
    }
    if (e_mass <= (1 - st.sigma) * Q.measure) {
      found = true;
      break;
    }
  }
  if (!found)
    throw ContractViolation(
        "sparse_select: no threshold D meets the measure budget");

  std::vector<uint32_t> omega;
  for (uint32_t p = 0; p < S.size(); ++p)
    if (inE[p]) omega.push_back(p);

  std::vector<uint32_t> children;
  if (!omega.empty()) {
    WhitneyFamily fam = whitney(G, omega, st.c_prime, 3.0, /*strict=*/false);
    for (uint32_t wq : fam.cubes)
      if (cube_inside(G, wq, q_idx) && wq != q_idx) children.push_back(wq);
  }

  st.out->trace.push_back({q_idx, depth, D, e_mass / Q.measure, false});

  // witness: the cube minus its recursion children
  std::vector<char> taken(S.size(), 0);
  for (uint32_t cq : children)
    for (uint32_t m : G.cubes[cq].members) taken[m] = 1;
  std::vector<uint32_t> witness;
  for (uint32_t m : Q.members)
    if (!taken[m]) witness.push_back(m);
  st.out->family.cubes.push_back(q_idx);
  st.out->family.witnesses.push_back(std::move(witness));

  for (uint32_t cq : children) {
    GridFunction f1_child(S);
    for (uint32_t m : G.cubes[cq].members) f1_child.v[m] = f1_loc.v[m];
    recurse(st, cq, f1_child, depth + 1);
  }
}

}  // namespace

SparseSelection sparse_select(const RadonOperator& op, const DyadicGrid& G,
                              const GridFunction& f1, const GridFunction& f2,
                              double sigma, const SparseFormParams& params,
                              SelectOptions opt) {
  if (!(sigma > 0 && sigma < 1))
    throw ContractViolation("sparse_select: sigma in (0,1) required");
  SparseSelection sel;
  sel.family.grid = &G;
  sel.family.sigma = sigma;

  auto sc = measure_support_constants(op, *G.sht, G.scale, G.k_max);
  sel.c_star = sc.c_star;
  sel.kappa_prime = std::max(params.kappa_prime, sc.kappa_prime);
  sel.c_prime = select_whitney_constant(G, sel.c_star);

  // root cube: the smallest cube containing supp f1
  uint32_t root = opt.root_cube;
  if (root == UINT32_MAX) {
    std::vector<uint32_t> supp;
    for (uint32_t p = 0; p < G.sht->size(); ++p)
      if (f1.v[p] != 0.0) supp.push_back(p);
    if (supp.empty()) {
      // degenerate input: the family is the root generation cube
      root = G.gen_cubes[0][0];
    } else {
      root = G.gen_cubes[0][0];
      for (int k = G.k_min + 1; k <= G.k_max; ++k) {
        uint32_t cand = G.cube_index_of_point(supp[0], k);
        bool all = true;
        for (uint32_t p : supp)
          if (G.cube_index_of_point(p, k) != cand) {
            all = false;
            break;
          }
        if (!all) break;
        root = cand;
      }
    }
  }

  SelectState st{&op, &G,    f2.sht ? &f2 : nullptr,
                 {},  sigma, params,
                 opt, 0,     &sel};
  st.f2 = &f2;
  st.params.kappa_prime = sel.kappa_prime;
  double s_conj = params.s / (params.s - 1.0);
  st.M2 = dyadic_maximal(G, f2, s_conj, op.exec);
  st.c_prime = sel.c_prime;

  recurse(st, root, f1, 0);
  return sel;
}

DominationReport domination_check(const RadonOperator& op,
                                  const SparseFamily& fam,
                                  const GridFunction& f1,
                                  const GridFunction& f2,
                                  const SparseFormParams& params) {
  DominationReport rep;
  GridFunction Tf = apply_full(op, f1);
  rep.lhs = std::abs(pairing(Tf, f2, op.exec));
  SparseFormParams dual = params;
  dual.s = params.s / (params.s - 1.0);  // the form pairs f2 at s'
  rep.rhs = sparse_form(fam, f1, f2, dual);
  if (rep.rhs == 0) {
    if (rep.lhs > 1e-12)
      throw ContractViolation("domination_check: zero form against nonzero pairing");
    rep.c_emp = 0;
    return rep;
  }
  rep.c_emp = rep.lhs / rep.rhs;
  return rep;
}

}  // namespace radon
