#include "radon/weights.hpp"

#include <algorithm>
#include <cmath>

namespace radon {

Weight make_weight(const DiscreteSHT& S,
                   const std::function<double(const Vec&)>& fn) {
  Weight w;
  w.w = GridFunction(S);
  for (size_t i = 0; i < S.size(); ++i) {
    double v = fn(S.pts[i]);
    if (v < 1e-30) {
      v = 1e-30;
      w.clamped = true;
    }
    w.w.v[i] = v;
  }
  return w;
}

Weight power_weight(const DiscreteSHT& S, int axis, double beta) {
  return make_weight(S, [axis, beta](const Vec& x) {
    return std::pow(std::abs(x[axis]), beta);
  });
}

namespace {

double cube_avg_pow(const DiscreteSHT& S, const DyadicCube& Q,
                    const GridFunction& w, double p) {
  double s = 0;
  for (uint32_t m : Q.members) s += S.weights[m] * std::pow(w.v[m], p);
  return s / Q.measure;
}

}  // namespace

double a_p_constant(const Weight& w, double p, const DyadicGrid& G) {
  if (!(p > 1)) throw ContractViolation("a_p_constant: p > 1 required");
  const DiscreteSHT& S = *G.sht;
  const double pp = p / (p - 1);  // conjugate
  double sup = 0;
  for (const auto& Q : G.cubes) {
    double m1 = cube_avg_pow(S, Q, w.w, 1.0);
    double m2 = cube_avg_pow(S, Q, w.w, 1.0 - pp);
    sup = std::max(sup, m1 * std::pow(m2, p - 1));
  }
  return sup;
}

double rh_constant(const Weight& w, double p, const DyadicGrid& G) {
  if (!(p > 1)) throw ContractViolation("rh_constant: p > 1 required");
  const DiscreteSHT& S = *G.sht;
  double sup = 0;
  for (const auto& Q : G.cubes) {
    double m1 = cube_avg_pow(S, Q, w.w, 1.0);
    double mp = std::pow(cube_avg_pow(S, Q, w.w, p), 1.0 / p);
    if (m1 > 0) sup = std::max(sup, mp / m1);
  }
  return sup;
}

WeightedNormCheck weighted_norm_check(const OpClosure& op, const Weight& w,
                                      double p, double r, double s,
                                      const DyadicGrid& G, int test_count,
                                      uint64_t seed, double c_cal) {
  if (!(r < p && p < s))
    throw ContractViolation("weighted_norm_check: r < p < s required");
  WeightedNormCheck out;
  out.alpha = std::max(1.0 / (p - r), (s - 1.0) / (s - p));
  double ap = a_p_constant(w, p / r, G);
  double sp_conj = (s / p) / (s / p - 1.0);
  double rh = rh_constant(w, sp_conj, G);
  out.bound = std::pow(ap * rh, out.alpha);

  const DiscreteSHT& S = *G.sht;
  Rng rng(seed);
  for (int i = 0; i < test_count; ++i) {
    GridFunction f = random_smooth(S, rng.next_u64());
    double fn = f.lp_norm(p, w.w.v);
    if (fn == 0) continue;
    GridFunction Tf = op(f);
    out.c_emp = std::max(out.c_emp, Tf.lp_norm(p, w.w.v) / fn);
  }
  out.pass = out.c_emp <= c_cal * out.bound;
  return out;
}

}  // namespace radon
