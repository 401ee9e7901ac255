#include "radon/analysis.hpp"

#include <algorithm>
#include <cmath>

namespace radon {

namespace {

double quotient(const OpClosure& op, const GridFunction& f, double r, double s) {
  double fr = f.lp_norm(r);
  if (fr == 0) return 0;
  GridFunction Tf = op(f);
  return Tf.lp_norm(s) / fr;
}

GridFunction spike_aniso(const DiscreteSHT& S, const Vec& c, const Vec& widths) {
  GridFunction f(S);
  const int n = S.lattice.dim;
  for (size_t i = 0; i < S.size(); ++i) {
    double r2 = 0;
    for (int d = 0; d < n; ++d) {
      double dd = (S.pts[i][d] - c[d]) / widths[d];
      r2 += dd * dd;
    }
    double r = std::sqrt(r2);
    f.v[i] = r >= 1 ? 0.0 : std::pow(1 - r * r, 3.0);
  }
  return f;
}

GridFunction spike(const DiscreteSHT& S, const Vec& c, double width) {
  Vec w(S.lattice.dim);
  for (int d = 0; d < S.lattice.dim; ++d) w[d] = width;
  return spike_aniso(S, c, w);
}

// spike menu at scale w: isotropic, one slab per axis, and the graded box
// (w, w^2, ...) matching monomial dilations
std::vector<Vec> spike_widths(int n, double w, double base) {
  std::vector<Vec> out;
  Vec iso(n);
  for (int d = 0; d < n; ++d) iso[d] = w;
  out.push_back(iso);
  for (int a = 0; a < n; ++a) {
    Vec slab(n);
    for (int d = 0; d < n; ++d) slab[d] = (d == a) ? w : base;
    out.push_back(slab);
  }
  Vec graded(n);
  double cur = w;
  for (int d = 0; d < n; ++d) {
    graded[d] = cur;
    cur *= w / base;  // next power relative to the base scale
  }
  out.push_back(graded);
  return out;
}

Vec random_center(const DiscreteSHT& S, Rng& rng, double margin) {
  const int n = S.lattice.dim;
  Vec c(n);
  for (int d = 0; d < n; ++d) {
    double lo = S.lattice.box.lo[d], hi = S.lattice.box.hi[d];
    double m = margin * (hi - lo);
    c[d] = rng.uniform(lo + m, hi - m);
  }
  return c;
}

}  // namespace

NormEstimate estimate_norm(const OpClosure& op, const DiscreteSHT& S, double r,
                           double s, int budget, uint64_t seed) {
  if (r < 1 || s < 1) throw ContractViolation("estimate_norm: r, s >= 1");
  NormEstimate est;
  est.r = r;
  est.s = s;
  est.seed = seed;

  GridFunction best;
  auto consider = [&](const GridFunction& f, const char* tag) {
    double q = quotient(op, f, r, s);
    ++est.samples;
    if (q > est.value) {
      est.value = q;
      est.method = tag;
      best = f;
    }
  };

  // separate streams per family keep the sample sets nested in the budget,
  // which makes the estimate monotone under enlarging it
  Rng rng_rand(seed ^ 0xA5A5A5A5ull), rng_spike(seed ^ 0x5A5A5A5Aull),
      rng_asc(seed ^ 0x3C3C3C3Cull);

  int n_rand = std::max(2, budget / 3);
  for (int i = 0; i < n_rand; ++i)
    consider(random_smooth(S, rng_rand.next_u64()), "random-function");

  int n_spike = std::max(2, budget / 3);
  double base = 0.25 * S.lattice.box.extent();
  for (int i = 0; i < n_spike; ++i) {
    double width = base * std::pow(0.5, i % 5);
    consider(spike(S, random_center(S, rng_spike, 0.25), width), "spike-family");
  }

  // gradient-free coordinate ascent: perturb the best seed with bumps
  if (best.sht != nullptr) {
    int n_asc = std::max(1, budget / 3);
    for (int i = 0; i < n_asc; ++i) {
      GridFunction cand = best;
      GridFunction pert = spike(S, random_center(S, rng_asc, 0.2),
                                base * rng_asc.uniform(0.2, 1.0));
      double amp = 0.3 * rng_asc.uniform(-1, 1);
      for (size_t p = 0; p < S.size(); ++p) cand.v[p] += amp * pert.v[p];
      double q = quotient(op, cand, r, s);
      ++est.samples;
      if (q > est.value) {
        est.value = q;
        est.method = "power-iteration";
        best = cand;
      }
    }
  }
  return est;
}

ImprovingRegion map_improving_region(const OpClosure& op, const DiscreteSHT& S,
                                     const std::vector<double>& rs,
                                     const std::vector<double>& ss, int budget,
                                     uint64_t seed) {
  ImprovingRegion region;
  const int levels = 4;
  double base = 0.2 * S.lattice.box.extent();
  int n_centers = std::max(2, budget);

  const int n = S.lattice.dim;
  // shared centers and spike shapes across (r, s) for comparability; the
  // quotients per level are cached over the shape menu
  Rng rng(seed);
  std::vector<Vec> centers;
  for (int c = 0; c < n_centers; ++c) centers.push_back(random_center(S, rng, 0.3));
  struct LevelFns {
    std::vector<GridFunction> fs;
    std::vector<GridFunction> Tfs;
  };
  std::vector<LevelFns> lv(levels);
  for (int L = 0; L < levels; ++L) {
    double w = base * std::pow(0.5, L);
    for (const Vec& c : centers)
      for (const Vec& widths : spike_widths(n, w, base)) {
        GridFunction f = spike_aniso(S, c, widths);
        lv[L].Tfs.push_back(op(f));
        lv[L].fs.push_back(std::move(f));
      }
  }

  for (double r : rs)
    for (double s : ss) {
      if (s < r) continue;
      ImprovingVerdict v;
      v.r = r;
      v.s = s;
      std::vector<double> q(levels, 0.0);
      for (int L = 0; L < levels; ++L)
        for (size_t i = 0; i < lv[L].fs.size(); ++i) {
          double fr = lv[L].fs[i].lp_norm(r);
          if (fr > 0) q[L] = std::max(q[L], lv[L].Tfs[i].lp_norm(s) / fr);
        }
      v.quotient = q[0];
      // bounded when the total quotient growth across the refinement span
      // stays below 10%
      v.bounded = q[0] > 0 && q[levels - 1] <= 1.10 * q[0];
      v.worst_growth = q[0] > 0 ? q[levels - 1] / q[0] : 0;
      region.verdicts.push_back(v);
    }

  // sampled convexity of the accepted set along s at fixed r
  for (double r : rs) {
    bool seen_reject_then_accept = false;
    bool rejected = false;
    for (double s : ss) {
      if (s < r) continue;
      for (const auto& v : region.verdicts)
        if (v.r == r && v.s == s) {
          if (!v.bounded) rejected = true;
          else if (rejected) seen_reject_then_accept = true;
        }
    }
    if (seen_reject_then_accept) region.convex_ok = false;
  }
  return region;
}

double improving_frontier(const ImprovingRegion& R, double r) {
  double best = 0;  // largest accepted s at this r
  for (const auto& v : R.verdicts)
    if (v.r == r && v.bounded) best = std::max(best, v.s);
  return best;
}

Vec ThetaFamily::apply(const Vec& b, const Vec& x) const {
  std::vector<const VectorField*> fs;
  std::vector<double> cs;
  for (size_t i = 0; i < sys->fields.size() && int(i) < b.n; ++i) {
    fs.push_back(&sys->fields[i].field);
    cs.push_back(b[int(i)] * std::pow(scale, sys->fields[i].degree));
  }
  return flow_combination(fs, cs, x, 16);
}

ModulusFit modulus_exponent(const OpClosure& op, const DiscreteSHT& S,
                            const ThetaFamily& theta,
                            const std::vector<double>& b_mags, int f_samples,
                            uint64_t seed) {
  Rng rng(seed);
  ModulusFit fit;
  const int q = theta.sys->size();

  // fixed sample functions and flow directions
  std::vector<GridFunction> fs;
  for (int i = 0; i < f_samples; ++i) fs.push_back(random_smooth(S, rng.next_u64()));
  std::vector<Vec> dirs;
  for (int i = 0; i < 3; ++i) {
    Vec d(q);
    double nn = 0;
    for (int j = 0; j < q; ++j) {
      d[j] = rng.normal();
      nn += d[j] * d[j];
    }
    nn = std::sqrt(nn);
    for (int j = 0; j < q; ++j) d[j] /= nn;
    dirs.push_back(d);
  }

  for (double mag : b_mags) {
    double worst = 0;
    for (const auto& f : fs) {
      GridFunction Tf = op(f);
      double fn = f.lp_norm(2.0);
      if (fn == 0) continue;
      for (const Vec& dir : dirs) {
        Vec b = dir;
        for (int j = 0; j < q; ++j) b[j] *= mag;
        // || Tf - (Tf) o theta_b ||_2, zero extension off the box
        double acc = 0;
        for (size_t p = 0; p < S.size(); ++p) {
          Vec y = (mag == 0.0) ? S.pts[p] : theta.apply(b, S.pts[p]);
          double shifted = (mag == 0.0) ? Tf.v[p] : interp(Tf, y);
          double d = Tf.v[p] - shifted;
          acc += S.weights[p] * d * d;
        }
        worst = std::max(worst, std::sqrt(acc) / fn);
      }
    }
    fit.b_mags.push_back(mag);
    fit.diffs.push_back(worst);
  }

  // log-log regression over positive differences
  std::vector<double> X, Y;
  for (size_t i = 0; i < fit.b_mags.size(); ++i) {
    if (fit.b_mags[i] <= 0 || fit.diffs[i] <= 0) continue;
    X.push_back(std::log(fit.b_mags[i]));
    Y.push_back(std::log(fit.diffs[i]));
  }
  if (X.size() >= 2) {
    double n = double(X.size()), sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    for (size_t i = 0; i < X.size(); ++i) {
      sx += X[i];
      sy += Y[i];
      sxx += X[i] * X[i];
      sxy += X[i] * Y[i];
      syy += Y[i] * Y[i];
    }
    double denom = n * sxx - sx * sx;
    fit.eta = (n * sxy - sx * sy) / denom;
    double ybar = sy / n;
    double ss_tot = syy - n * ybar * ybar;
    double slope = fit.eta, intercept = (sy - slope * sx) / n;
    double ss_res = 0;
    for (size_t i = 0; i < X.size(); ++i) {
      double e = Y[i] - (slope * X[i] + intercept);
      ss_res += e * e;
    }
    fit.r2 = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
  }
  return fit;
}

}  // namespace radon
