#include "radon/geometry.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <queue>

namespace radon {

namespace {

Eigen::MatrixXd fields_matrix(const std::vector<const VectorField*>& fs,
                              const Vec& x) {
  const int n = fs.empty() ? 0 : fs[0]->dim;
  Eigen::MatrixXd M(n, static_cast<int>(fs.size()));
  for (size_t j = 0; j < fs.size(); ++j) {
    Vec v = fs[j]->eval(x);
    for (int i = 0; i < n; ++i) M(i, static_cast<int>(j)) = v[i];
  }
  return M;
}

int rank_with_tol(const Eigen::MatrixXd& M) {
  if (M.cols() == 0) return 0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
  const auto& s = svd.singularValues();
  if (s.size() == 0) return 0;
  double thresh = 1e-9 * s(0);
  if (thresh == 0) return 0;
  int r = 0;
  for (int i = 0; i < s.size(); ++i)
    if (s(i) > thresh) ++r;
  return r;
}

// multi-indices over `vars` variables with total degree exactly d, lex order
void enum_multiindices(int vars, int d, std::vector<std::vector<int>>& out) {
  std::vector<int> cur(vars, 0);
  std::function<void(int, int)> rec = [&](int pos, int left) {
    if (pos == vars - 1) {
      cur[pos] = left;
      out.push_back(cur);
      return;
    }
    for (int e = left; e >= 0; --e) {
      cur[pos] = e;
      rec(pos + 1, left - e);
    }
  };
  if (vars > 0) rec(0, d);
}

double factorial_of(const std::vector<int>& beta) {
  double f = 1;
  for (int b : beta)
    for (int i = 2; i <= b; ++i) f *= i;
  return f;
}

}  // namespace

// --- VectorField -------------------------------------------------------------

VectorField VectorField::from_poly(int dim, PolyMap comps) {
  VectorField f;
  f.dim = dim;
  f.poly = std::move(comps);
  return f;
}

VectorField VectorField::from_fn(int dim, std::function<Vec(const Vec&)> fn) {
  VectorField f;
  f.dim = dim;
  f.fn = std::move(fn);
  return f;
}

VectorField VectorField::coordinate(int dim, int axis, double c) {
  PolyMap comps(dim);
  comps[axis] = Poly::constant(c);
  return from_poly(dim, std::move(comps));
}

VectorField VectorField::zero(int dim) { return from_poly(dim, PolyMap(dim)); }

Vec VectorField::eval(const Vec& x) const {
  if (is_poly()) {
    Vec v(dim);
    for (int i = 0; i < dim; ++i) v[i] = poly[i].eval(x.a.data(), x.n);
    return v;
  }
  return fn(x);
}

bool VectorField::is_identically_zero(double tol) const {
  if (is_poly()) {
    for (const Poly& p : poly)
      if (p.max_abs_coeff() > tol) return false;
    return true;
  }
  return false;  // generic fields are never assumed zero
}

VectorField lie_bracket(const VectorField& X, const VectorField& Y) {
  if (X.dim != Y.dim) throw ContractViolation("lie_bracket: dimension mismatch");
  const int n = X.dim;
  if (X.is_poly() && Y.is_poly()) {
    PolyMap out(n);
    for (int i = 0; i < n; ++i) {
      Poly acc;
      for (int j = 0; j < n; ++j)
        acc = acc + X.poly[j] * Y.poly[i].deriv(j) - Y.poly[j] * X.poly[i].deriv(j);
      out[i] = acc;
    }
    return VectorField::from_poly(n, std::move(out));
  }
  // finite-difference Jacobian-vector products, central with Richardson
  auto Xf = X, Yf = Y;
  return VectorField::from_fn(n, [n, Xf, Yf](const Vec& x) {
    auto jvp = [n, &x](const VectorField& F, const Vec& dir) {
      auto d_at = [&](double h) {
        Vec xp = x, xm = x;
        for (int i = 0; i < n; ++i) {
          xp[i] += h * dir[i];
          xm[i] -= h * dir[i];
        }
        Vec fp = F.eval(xp), fm = F.eval(xm);
        Vec r(n);
        for (int i = 0; i < n; ++i) r[i] = (fp[i] - fm[i]) / (2 * h);
        return r;
      };
      const double h = 1e-4;
      Vec d1 = d_at(h), d2 = d_at(h / 2);
      Vec r(n);
      for (int i = 0; i < n; ++i) r[i] = (4 * d2[i] - d1[i]) / 3.0;
      return r;
    };
    Vec xv = Xf.eval(x), yv = Yf.eval(x);
    Vec dYx = jvp(Yf, xv), dXy = jvp(Xf, yv);
    Vec r(n);
    for (int i = 0; i < n; ++i) r[i] = dYx[i] - dXy[i];
    return r;
  });
}

// --- GradedFieldSystem --------------------------------------------------------

int GradedFieldSystem::max_degree() const {
  int d = 1;
  for (const auto& g : fields) d = std::max(d, g.degree);
  return d;
}

void GradedFieldSystem::validate() const {
  if (fields.empty()) throw ContractViolation("graded system: empty field list");
  for (const auto& g : fields) {
    if (g.degree < 1) throw ContractViolation("graded system: degree < 1");
    if (g.field.dim != dim())
      throw ContractViolation("graded system: dimension mismatch");
  }
}

// --- CurveFamily ---------------------------------------------------------------

Vec CurveFamily::eval(const Vec& t, const Vec& x) const {
  if (!poly.empty()) {
    double vals[8];
    for (int i = 0; i < n; ++i) vals[i] = x[i];
    for (int j = 0; j < k; ++j) vals[n + j] = t[j];
    Vec r(n);
    for (int i = 0; i < n; ++i) r[i] = poly[i].eval(vals, n + k);
    return r;
  }
  return fn(t, x);
}

Vec CurveFamily::invert(const Vec& t, const Vec& x, double tol) const {
  if (!invertible) throw InvertibilityError("curve not flagged invertible");
  // Newton on w -> gamma_t(w) - x with finite-difference Jacobian.
  Vec w = x;
  for (int it = 0; it < 50; ++it) {
    Vec g = eval(t, w);
    Vec r(n);
    double rn = 0;
    for (int i = 0; i < n; ++i) {
      r[i] = g[i] - x[i];
      rn = std::max(rn, std::abs(r[i]));
    }
    if (rn < tol) return w;
    Eigen::MatrixXd J(n, n);
    const double h = 1e-6 * std::max(1.0, norm_inf(w));
    for (int j = 0; j < n; ++j) {
      Vec wp = w, wm = w;
      wp[j] += h;
      wm[j] -= h;
      Vec gp = eval(t, wp), gm = eval(t, wm);
      for (int i = 0; i < n; ++i) J(i, j) = (gp[i] - gm[i]) / (2 * h);
    }
    Eigen::VectorXd rv(n);
    for (int i = 0; i < n; ++i) rv(i) = r[i];
    Eigen::VectorXd dw = J.fullPivLu().solve(rv);
    for (int i = 0; i < n; ++i) w[i] -= dw(i);
  }
  throw InvertibilityError("curve inversion did not converge");
}

// --- Taylor expansion -----------------------------------------------------------

namespace {

// Exact path: gamma polynomial in (x, t). Returns W(t, x) as a polynomial,
// truncated to t-degree <= N.
Poly w_component_poly(const CurveFamily& g, int comp, int N) {
  const int n = g.n, k = g.k;
  // layers: gamma_i = x_i + sum_{d>=1} G_d ; V = sum_d d * G_d
  PolyMap V(n);
  for (int i = 0; i < n; ++i) {
    Poly gi = g.poly[i].truncated(n, k, N);
    Poly acc;
    for (int d = 1; d <= N; ++d) {
      Poly layer = gi.truncated(n, k, d) - gi.truncated(n, k, d - 1);
      acc = acc + layer.scaled(double(d));
    }
    V[i] = acc;
  }
  // inverse series: w with gamma_t(w) = x + O(t^{N+1})
  PolyMap w(n);
  for (int i = 0; i < n; ++i) w[i] = Poly::var(i);
  std::vector<Poly> subs(n + k);
  for (int it = 0; it < N + 1; ++it) {
    for (int i = 0; i < n; ++i) subs[i] = w[i];
    for (int j = 0; j < k; ++j) subs[n + j] = Poly::var(n + j);
    PolyMap next(n);
    for (int i = 0; i < n; ++i) {
      Poly gw = g.poly[i].substituted(subs).truncated(n, k, N);
      next[i] = (w[i] + Poly::var(i) - gw).truncated(n, k, N);
    }
    w = std::move(next);
  }
  for (int i = 0; i < n; ++i) subs[i] = w[i];
  for (int j = 0; j < k; ++j) subs[n + j] = Poly::var(n + j);
  return V[comp].substituted(subs).truncated(n, k, N);
}

}  // namespace

std::vector<TaylorField> expand_taylor_fields(const CurveFamily& gamma, int N) {
  if (N < 1) throw ContractViolation("expand_taylor_fields: N >= 1 required");
  if (!gamma.invertible)
    throw InvertibilityError("expand_taylor_fields: gamma_t not invertible");
  const int n = gamma.n, k = gamma.k;

  std::vector<std::vector<int>> alphas;
  for (int d = 1; d < N; ++d) enum_multiindices(k, d, alphas);

  std::vector<TaylorField> out;

  if (!gamma.poly.empty()) {
    // exact: collect t-coefficients of W
    PolyMap W(n);
    for (int i = 0; i < n; ++i) W[i] = w_component_poly(gamma, i, N - 1);
    for (const auto& alpha : alphas) {
      PolyMap comp(n);
      for (int i = 0; i < n; ++i) {
        // extract coefficient of t^alpha: pick matching terms, strip t part
        Poly c;
        for (const auto& term : W[i].terms()) {
          bool match = true;
          for (int j = 0; j < k; ++j)
            if (Poly::exp_of(term.key, n + j) != alpha[j]) {
              match = false;
              break;
            }
          if (!match) continue;
          std::vector<int> exps(n, 0);
          for (int v = 0; v < n; ++v) exps[v] = Poly::exp_of(term.key, v);
          c = c + Poly::monomial(exps, term.c);
        }
        comp[i] = c;
      }
      out.push_back({alpha, VectorField::from_poly(n, std::move(comp))});
    }
    return out;
  }

  // Generic path: W(t, x) by central difference in epsilon at 1 (with one
  // Richardson level), then per-point least-squares fit in t.
  auto W_at = [gamma](const Vec& t, const Vec& x) {
    Vec w = gamma.invert(t, x);
    auto d_at = [&](double h) {
      Vec tp(t.n), tm(t.n);
      for (int j = 0; j < t.n; ++j) {
        tp[j] = (1 + h) * t[j];
        tm[j] = (1 - h) * t[j];
      }
      Vec gp = gamma.eval(tp, w), gm = gamma.eval(tm, w);
      Vec r(gamma.n);
      for (int i = 0; i < gamma.n; ++i) r[i] = (gp[i] - gm[i]) / (2 * h);
      return r;
    };
    Vec d1 = d_at(1e-3), d2 = d_at(5e-4);
    Vec r(gamma.n);
    for (int i = 0; i < gamma.n; ++i) r[i] = (4 * d2[i] - d1[i]) / 3.0;
    return r;
  };

  // fit two orders past the request to keep truncation bias out of the
  // reported coefficients
  std::vector<std::vector<int>> alphas_fit;
  for (int d = 1; d < N + 2; ++d) enum_multiindices(k, d, alphas_fit);

  // t-stencil: tensor grid of small offsets
  const double t0 = 0.02 * gamma.a;
  std::vector<Vec> stencil;
  std::vector<int> levels = {-4, -3, -2, -1, 1, 2, 3, 4};
  std::function<void(int, Vec)> build = [&](int pos, Vec cur) {
    if (pos == k) {
      bool allzero = true;
      for (int j = 0; j < k; ++j) allzero = allzero && cur[j] == 0;
      if (!allzero) stencil.push_back(cur);
      return;
    }
    for (int lv : levels) {
      Vec nxt = cur;
      nxt[pos] = lv * t0;
      build(pos + 1, nxt);
    }
    Vec nxt = cur;
    nxt[pos] = 0;
    build(pos + 1, nxt);
  };
  build(0, Vec(k));

  for (const auto& alpha : alphas) {
    auto alphas_copy = alphas_fit;
    auto field_fn = [W_at, alphas_copy, alpha, stencil, n](const Vec& x) {
      // fit all coefficients at x, return the requested one
      const int m = static_cast<int>(alphas_copy.size());
      Eigen::MatrixXd A(stencil.size(), m);
      for (size_t s = 0; s < stencil.size(); ++s)
        for (int c = 0; c < m; ++c) {
          double mono = 1;
          for (size_t j = 0; j < alphas_copy[c].size(); ++j)
            for (int e = 0; e < alphas_copy[c][j]; ++e) mono *= stencil[s][int(j)];
          A(static_cast<int>(s), c) = mono;
        }
      Vec r(n);
      Eigen::MatrixXd B(stencil.size(), n);
      for (size_t s = 0; s < stencil.size(); ++s) {
        Vec w = W_at(stencil[s], x);
        for (int i = 0; i < n; ++i) B(static_cast<int>(s), i) = w[i];
      }
      Eigen::MatrixXd sol = A.colPivHouseholderQr().solve(B);
      int idx = 0;
      for (int c = 0; c < m; ++c)
        if (alphas_copy[c] == alpha) idx = c;
      for (int i = 0; i < n; ++i) r[i] = sol(idx, i);
      return r;
    };
    out.push_back({alpha, VectorField::from_fn(n, field_fn)});
  }
  return out;
}

double taylor_remainder_defect(const CurveFamily& gamma,
                               const std::vector<TaylorField>& fields, int N,
                               const Vec& t, const Vec& x) {
  const int n = gamma.n;
  // frozen field W(t, .)
  auto Wfield = VectorField::from_fn(n, [&gamma, t, n](const Vec& y) {
    Vec w = gamma.invert(t, y);
    auto d_at = [&](double h) {
      Vec tp(t.n), tm(t.n);
      for (int j = 0; j < t.n; ++j) {
        tp[j] = (1 + h) * t[j];
        tm[j] = (1 - h) * t[j];
      }
      Vec gp = gamma.eval(tp, w), gm = gamma.eval(tm, w);
      Vec r(n);
      for (int i = 0; i < n; ++i) r[i] = (gp[i] - gm[i]) / (2 * h);
      return r;
    };
    Vec d1 = d_at(1e-3), d2 = d_at(5e-4);
    Vec r(n);
    for (int i = 0; i < n; ++i) r[i] = (4 * d2[i] - d1[i]) / 3.0;
    return r;
  });
  Vec a = flow(Wfield, 1.0, x, 1e-3);

  std::vector<const VectorField*> fs;
  std::vector<double> cs;
  for (const auto& tf : fields) {
    if (tf.degree() >= N) continue;
    double mono = 1;
    for (size_t j = 0; j < tf.alpha.size(); ++j)
      for (int e = 0; e < tf.alpha[j]; ++e) mono *= t[int(j)];
    fs.push_back(&tf.field);
    cs.push_back(mono);
  }
  Vec b = flow_combination(fs, cs, x, 256);
  return norm2(a - b);
}

// --- Hormander ---------------------------------------------------------------

std::optional<int> hormander_type(const std::vector<VectorField>& fields,
                                  const Vec& x, int M_max) {
  if (M_max < 1) throw ContractViolation("hormander_type: M_max >= 1");
  if (fields.empty()) return std::nullopt;
  const int n = fields[0].dim;
  // accumulate iterated brackets ad(X_i)...ad(X_j) Y level by level; checking
  // the span of left-nested brackets is enough for the Lie-algebra rank
  std::vector<VectorField> acc = fields;
  std::vector<VectorField> layer = fields;
  for (int m = 1; m <= M_max; ++m) {
    if (m > 1) {
      std::vector<VectorField> next;
      for (const auto& g : fields)
        for (const auto& y : layer) {
          VectorField b = lie_bracket(g, y);
          if (b.is_poly() && b.is_identically_zero()) continue;
          next.push_back(std::move(b));
        }
      layer = next;
      for (auto& f : layer) acc.push_back(f);
    }
    std::vector<const VectorField*> ptrs;
    for (const auto& f : acc) ptrs.push_back(&f);
    if (rank_with_tol(fields_matrix(ptrs, x)) == n) return m;
  }
  return std::nullopt;
}

std::optional<int> hormander_type(const GradedFieldSystem& sys, const Vec& x,
                                  int M_max) {
  std::vector<VectorField> fs;
  for (const auto& g : sys.fields) fs.push_back(g.field);
  return hormander_type(fs, x, M_max);
}

// --- Curvature condition -------------------------------------------------------

namespace {

// Exact path: iterate gamma n times as a polynomial map over variables
// (x_1..x_n, tau_1..tau_{kn}).
std::optional<CjWitness> cj_poly(const CurveFamily& g, int M_max) {
  const int n = g.n, k = g.k, kn = k * n;
  if (n + kn > 8) return std::nullopt;  // fall back to FD
  PolyMap cur(n);
  for (int i = 0; i < n; ++i) cur[i] = Poly::var(i);
  for (int it = 0; it < n; ++it) {
    std::vector<Poly> subs(n + k);
    for (int i = 0; i < n; ++i) subs[i] = cur[i];
    for (int j = 0; j < k; ++j) subs[n + j] = Poly::var(n + it * k + j);
    PolyMap next(n);
    for (int i = 0; i < n; ++i) next[i] = g.poly[i].substituted(subs);
    cur = std::move(next);
  }
  // Jacobian in tau, all kn columns
  std::vector<std::vector<Poly>> Jac(n, std::vector<Poly>(kn));
  for (int i = 0; i < n; ++i)
    for (int c = 0; c < kn; ++c) Jac[i][c] = cur[i].deriv(n + c);

  // substitute x = 0
  std::vector<Poly> zero_subs(n);
  for (int i = 0; i < n; ++i) zero_subs[i] = Poly::constant(0.0);

  // increasing n-tuples xi over {0..kn-1}
  std::vector<std::vector<int>> tuples;
  std::vector<int> cu;
  std::function<void(int, int)> recT = [&](int start, int left) {
    if (left == 0) {
      tuples.push_back(cu);
      return;
    }
    for (int i = start; i <= kn - left; ++i) {
      cu.push_back(i);
      recT(i + 1, left - 1);
      cu.pop_back();
    }
  };
  recT(0, n);

  std::optional<CjWitness> best;
  for (const auto& xi : tuples) {
    // determinant of the n x n submatrix (n <= 3 here)
    Poly det;
    if (n == 1) {
      det = Jac[0][xi[0]];
    } else if (n == 2) {
      det = Jac[0][xi[0]] * Jac[1][xi[1]] - Jac[0][xi[1]] * Jac[1][xi[0]];
    } else if (n == 3) {
      auto m = [&](int r, int c) { return Jac[r][xi[c]]; };
      det = m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1)) -
            m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0)) +
            m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0));
    } else {
      return std::nullopt;
    }
    Poly dz = det.substituted(zero_subs);
    // scan tau-coefficients; prefer lowest total order, then largest magnitude
    for (const auto& term : dz.terms()) {
      std::vector<int> beta(kn, 0);
      int tot = 0;
      for (int v = 0; v < kn; ++v) {
        beta[v] = Poly::exp_of(term.key, n + v);
        tot += beta[v];
      }
      if (tot > M_max) continue;
      double c = std::abs(term.c) * factorial_of(beta);
      if (c < 1e-12) continue;
      int best_tot = 0;
      if (best)
        for (int b : best->beta) best_tot += b;
      if (!best || tot < best_tot || (tot == best_tot && c > best->c)) {
        CjWitness w;
        for (int v : xi) w.xi.push_back(v + 1);  // 1-based coordinate labels
        w.beta = beta;
        w.c = c;
        best = w;
      }
    }
  }
  return best;
}

}  // namespace

std::optional<CjWitness> curvature_cj_check(const CurveFamily& gamma, int M_max) {
  if (!gamma.poly.empty()) {
    auto r = cj_poly(gamma, M_max);
    if (r || gamma.n * gamma.k + gamma.n <= 8) return r;
  }
  // FD fallback: sample J_xi on a tau-grid and difference.
  const int n = gamma.n, k = gamma.k, kn = k * n;
  auto Gamma = [&](const Vec& x, const std::vector<double>& tau) {
    Vec cur = x;
    for (int it = 0; it < n; ++it) {
      Vec t(k);
      for (int j = 0; j < k; ++j) t[j] = tau[it * k + j];
      cur = gamma.eval(t, cur);
    }
    return cur;
  };
  Vec x0(n);
  const double h = 0.02 * gamma.a;
  auto jac_minor = [&](const std::vector<int>& xi, const std::vector<double>& tau) {
    Eigen::MatrixXd M(n, n);
    for (int c = 0; c < n; ++c) {
      std::vector<double> tp = tau, tm = tau;
      tp[xi[c]] += h * 0.5;
      tm[xi[c]] -= h * 0.5;
      Vec gp = Gamma(x0, tp), gm = Gamma(x0, tm);
      for (int i = 0; i < n; ++i) M(i, c) = (gp[i] - gm[i]) / h;
    }
    return M.determinant();
  };
  std::vector<std::vector<int>> tuples;
  {
    std::vector<int> cu;
    std::function<void(int, int)> recT = [&](int start, int left) {
      if (left == 0) {
        tuples.push_back(cu);
        return;
      }
      for (int i = start; i <= kn - left; ++i) {
        cu.push_back(i);
        recT(i + 1, left - 1);
        cu.pop_back();
      }
    };
    recT(0, n);
  }
  std::vector<std::vector<int>> betas;
  for (int d = 0; d <= M_max; ++d) enum_multiindices(kn, d, betas);

  for (const auto& beta : betas) {
    for (const auto& xi : tuples) {
      // central-difference d^beta J_xi at 0, one variable at a time
      std::vector<int> rem = beta;
      std::function<double(std::vector<double>&, int)> rec =
          [&](std::vector<double>& tau, int v) -> double {
        while (v < kn && rem[v] == 0) ++v;
        if (v == kn) return jac_minor(xi, tau);
        double acc = 0;
        int b = rem[v];
        rem[v] = 0;
        // central stencil for b-th derivative
        // use b+1-point forward of central differences: apply first-derivative
        // operator b times with step h2
        std::function<double(std::vector<double>&, int)> d1 =
            [&](std::vector<double>& ta, int order) -> double {
          if (order == 0) return rec(ta, v + 1);
          std::vector<double> tp = ta, tm = ta;
          tp[v] += h;
          tm[v] -= h;
          return (d1(tp, order - 1) - d1(tm, order - 1)) / (2 * h);
        };
        acc = d1(tau, b);
        rem[v] = b;
        return acc;
      };
      std::vector<double> tau0(kn, 0.0);
      double c = std::abs(rec(tau0, 0));
      double scale = std::max(1.0, std::abs(jac_minor(xi, tau0)));
      if (c > 1e-4 * scale && c > 1e-5) {
        CjWitness w;
        for (int v : xi) w.xi.push_back(v + 1);
        w.beta = beta;
        w.c = c;
        return w;
      }
    }
  }
  return std::nullopt;
}

// --- Graded system generation ----------------------------------------------------

namespace {

bool same_field(const VectorField& a, const VectorField& b) {
  if (!a.is_poly() || !b.is_poly()) return false;
  for (int i = 0; i < a.dim; ++i) {
    Poly d = a.poly[i] - b.poly[i];
    if (d.max_abs_coeff() > 1e-12) return false;
  }
  return true;
}

GradedFieldSystem close_system(std::vector<GradedField> base, const Box& box,
                               int m0) {
  // Step II: commutators up to order m0 with summed degrees.
  std::vector<GradedField> list = base;
  std::vector<GradedField> layer = base;
  for (int len = 2; len <= m0; ++len) {
    std::vector<GradedField> next;
    for (const auto& g : base)
      for (const auto& y : layer) {
        VectorField b = lie_bracket(g.field, y.field);
        if (b.is_poly() && b.is_identically_zero()) continue;
        next.push_back({std::move(b), g.degree + y.degree, false});
      }
    for (const auto& f : next) {
      bool dup = false;
      for (const auto& e : list) dup = dup || same_field(e.field, f.field);
      if (!dup) list.push_back(f);
    }
    layer = std::move(next);
  }
  // Step III: close under brackets with degree cap = max degree so far.
  int dmax = 1;
  for (const auto& g : list) dmax = std::max(dmax, g.degree);
  bool grew = true;
  int guard = 0;
  while (grew && guard++ < 16 && list.size() < 64) {
    grew = false;
    const size_t cnt = list.size();
    for (size_t i = 0; i < cnt; ++i)
      for (size_t j = 0; j < cnt; ++j) {
        int d = list[i].degree + list[j].degree;
        if (d > dmax) continue;
        VectorField b = lie_bracket(list[i].field, list[j].field);
        if (b.is_poly() && b.is_identically_zero()) continue;
        bool dup = false;
        for (const auto& e : list) dup = dup || same_field(e.field, b);
        if (!dup) {
          list.push_back({std::move(b), d, false});
          grew = true;
        }
      }
  }
  GradedFieldSystem sys;
  sys.fields = std::move(list);
  sys.box = box;
  sys.validate();
  return sys;
}

}  // namespace

GradedFieldSystem generate_graded_system(const CurveFamily& gamma, int m0) {
  const int N = std::max(m0 + 2, 4);
  auto taylor = expand_taylor_fields(gamma, N);
  Vec origin(gamma.n);

  // Step I: smallest alpha-order cut making the sub-list of type m0.
  for (int cut = 1; cut < N; ++cut) {
    std::vector<GradedField> base;
    for (const auto& tf : taylor) {
      if (tf.degree() > cut) continue;
      if (tf.field.is_poly() && tf.field.is_identically_zero()) continue;
      base.push_back({tf.field, tf.degree(), false});
    }
    if (base.empty()) continue;
    std::vector<VectorField> raw;
    for (const auto& g : base) raw.push_back(g.field);
    auto type = hormander_type(raw, origin, m0);
    if (type) return close_system(std::move(base), gamma.box, m0);
  }
  throw CurvatureError("generate_graded_system: Hormander condition not detected");
}

// --- Flows --------------------------------------------------------------------

namespace {

Vec rk4_step(const VectorField& X, const Vec& x, double h) {
  Vec k1 = X.eval(x);
  Vec x2 = x;
  for (int i = 0; i < x.n; ++i) x2[i] = x[i] + 0.5 * h * k1[i];
  Vec k2 = X.eval(x2);
  for (int i = 0; i < x.n; ++i) x2[i] = x[i] + 0.5 * h * k2[i];
  Vec k3 = X.eval(x2);
  for (int i = 0; i < x.n; ++i) x2[i] = x[i] + h * k3[i];
  Vec k4 = X.eval(x2);
  Vec r = x;
  for (int i = 0; i < x.n; ++i)
    r[i] = x[i] + h / 6.0 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
  return r;
}

}  // namespace

Vec flow(const VectorField& X, double t, const Vec& x, double step) {
  if (t == 0) return x;
  int nsteps = std::max(1, int(std::ceil(std::abs(t) / step)));
  double h = t / nsteps;
  Vec cur = x;
  for (int s = 0; s < nsteps; ++s) cur = rk4_step(X, cur, h);
  return cur;
}

Vec flow(const VectorField& X, double t, const Vec& x, const Box& box,
         double step) {
  if (t == 0) return x;
  int nsteps = std::max(1, int(std::ceil(std::abs(t) / step)));
  double h = t / nsteps;
  Vec cur = x;
  for (int s = 0; s < nsteps; ++s) {
    cur = rk4_step(X, cur, h);
    if (!box.contains(cur, 1e-12))
      throw DomainError("flow: trajectory exited the domain box");
  }
  return cur;
}

Vec flow_combination(const std::vector<const VectorField*>& fields,
                     const std::vector<double>& coef, const Vec& x, int steps) {
  if (fields.empty()) return x;
  const int n = x.n;
  auto F = [&](const Vec& y) {
    Vec r(n);
    for (size_t i = 0; i < fields.size(); ++i) {
      if (coef[i] == 0) continue;
      Vec v = fields[i]->eval(y);
      for (int j = 0; j < n; ++j) r[j] += coef[i] * v[j];
    }
    return r;
  };
  VectorField comb = VectorField::from_fn(n, F);
  Vec cur = x;
  double h = 1.0 / steps;
  for (int s = 0; s < steps; ++s) cur = rk4_step(comb, cur, h);
  return cur;
}

// --- CC graph -------------------------------------------------------------------

CCGraph::CCGraph(const GradedFieldSystem& sys, std::vector<Vec> lattice_points,
                 Vec spacing, CCParams params)
    : sys_(sys), pts_(std::move(lattice_points)), spacing_(spacing), p_(params) {
  const int n = sys_.dim();
  lo_ = pts_.front();
  Vec hi = pts_.front();
  for (const Vec& p : pts_)
    for (int i = 0; i < n; ++i) {
      lo_[i] = std::min(lo_[i], p[i]);
      hi[i] = std::max(hi[i], p[i]);
    }
  for (int i = 0; i < n; ++i)
    counts_[i] = int(std::lround((hi[i] - lo_[i]) / spacing_[i])) + 1;
  size_t expect = 1;
  for (int i = 0; i < n; ++i) expect *= size_t(counts_[i]);
  if (expect != pts_.size())
    throw ContractViolation("CCGraph: points are not a full row-major lattice");
}

int CCGraph::snap(const Vec& x) const {
  const int n = sys_.dim();
  long idx = 0;
  for (int i = 0; i < n; ++i) {
    long c = std::lround((x[i] - lo_[i]) / spacing_[i]);
    if (c < 0 || c >= counts_[i]) return -1;
    idx = idx * counts_[i] + c;
  }
  return int(idx);
}

void CCGraph::build_edges(double delta, std::vector<Edge>& edges,
                          std::vector<int>& offsets, Exec ex) const {
  const int N = size();
  const int n = sys_.dim();
  const int q = sys_.size();
  const int per_node = q * p_.menu_levels * 2;
  double half_min = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i)
    if (spacing_[i] > 0) half_min = std::min(half_min, 0.5 * spacing_[i]);
  std::vector<Edge> tmp(size_t(N) * per_node, Edge{-1, 0});
  for_n(ex, N, [&](size_t v) {
    int slot = 0;
    for (int f = 0; f < q; ++f) {
      const auto& gf = sys_.fields[f];
      if (gf.flagged_zero) {
        slot += p_.menu_levels * 2;
        continue;
      }
      double base = std::pow(delta, gf.degree);
      for (int m = 0; m < p_.menu_levels; ++m) {
        double tau = base / double(1 << m);
        for (int sgn = 0; sgn < 2; ++sgn, ++slot) {
          double tt = sgn ? -tau : tau;
          Vec y = pts_[v];
          double h = tt / p_.flow_steps;
          bool inside = true;
          for (int s = 0; s < p_.flow_steps && inside; ++s) {
            y = rk4_step(gf.field, y, h);
            inside = sys_.box.contains(y, 1e-9);
          }
          if (!inside) continue;
          double move = norm2(y - pts_[v]);
          if (move < half_min) continue;  // snaps back to itself
          int w = snap(y);
          if (w < 0 || w == int(v)) continue;
          // cost of the snapped displacement at this field's speed
          double ratio = norm2(pts_[size_t(w)] - pts_[v]) / move;
          if (ratio < 0.4 || ratio > 2.5) continue;
          double cost = double(p_.budget_units) * ratio / double(1 << m);
          int wu = std::max(1, int(std::lround(cost)));
          if (wu > p_.budget_units) continue;
          tmp[v * per_node + slot] = Edge{w, wu};
        }
      }
    }
  });
  offsets.assign(size_t(N) + 1, 0);
  for (size_t v = 0; v < size_t(N); ++v) {
    int cnt = 0;
    for (int s = 0; s < per_node; ++s)
      if (tmp[v * per_node + s].to >= 0) ++cnt;
    offsets[v + 1] = offsets[v] + cnt;
  }
  edges.assign(size_t(offsets.back()), Edge{-1, 0});
  for (size_t v = 0; v < size_t(N); ++v) {
    int at = offsets[v];
    for (int s = 0; s < per_node; ++s)
      if (tmp[v * per_node + s].to >= 0) edges[at++] = tmp[v * per_node + s];
  }
}

namespace {

// bucket Dijkstra over integer budgets 0..max_units
void bucket_dijkstra(const std::vector<CCGraph::Edge>& edges,
                     const std::vector<int>& offsets, int src, int max_units,
                     std::vector<int>& dist) {
  const int INF = max_units + 1;
  dist.assign(offsets.size() - 1, INF);
  dist[src] = 0;
  std::vector<std::vector<int>> buckets(size_t(max_units) + 1);
  buckets[0].push_back(src);
  for (int d = 0; d <= max_units; ++d) {
    auto& B = buckets[d];
    for (size_t qi = 0; qi < B.size(); ++qi) {
      int v = B[qi];
      if (dist[v] != d) continue;
      for (int e = offsets[v]; e < offsets[v + 1]; ++e) {
        int to = edges[e].to, nd = d + edges[e].w;
        if (nd <= max_units && nd < dist[to]) {
          dist[to] = nd;
          buckets[nd].push_back(to);
        }
      }
    }
  }
}

}  // namespace

std::vector<int> CCGraph::budgets_from(int src, double delta) const {
  std::vector<Edge> edges;
  std::vector<int> offsets;
  build_edges(delta, edges, offsets, Exec::Serial);
  std::vector<int> dist;
  bucket_dijkstra(edges, offsets, src, p_.budget_units, dist);
  return dist;
}

bool CCGraph::reachable(int src, int dst, double delta) const {
  auto d = budgets_from(src, delta);
  if (d[dst] <= p_.budget_units) return true;
  // arrival within one lattice cell of the target counts: edge quanta are
  // node differences and cannot always hit a prescribed node exactly
  const int n = sys_.dim();
  const Vec& t = pts_[size_t(dst)];
  for (size_t y = 0; y < pts_.size(); ++y) {
    if (d[y] > p_.budget_units) continue;
    bool close = true;
    for (int i = 0; i < n; ++i)
      close = close && std::abs(pts_[y][i] - t[i]) <= spacing_[i] * 1.01;
    if (close) return true;
  }
  return false;
}

std::vector<float> CCGraph::distance_matrix(double delta_min, double delta_max,
                                            Exec ex) const {
  const int N = size();
  std::vector<float> mat(size_t(N) * N, std::numeric_limits<float>::infinity());
  for (int i = 0; i < N; ++i) mat[size_t(i) * N + i] = 0.f;

  std::vector<double> ladder;
  for (double d = delta_min; d < delta_max * p_.ladder_ratio; d *= p_.ladder_ratio)
    ladder.push_back(d);

  std::vector<Edge> edges;
  std::vector<int> offsets;
  for (double delta : ladder) {
    build_edges(delta, edges, offsets, ex);
    for_n(ex, N, [&](size_t s) {
      std::vector<int> dist;
      bucket_dijkstra(edges, offsets, int(s), p_.budget_units, dist);
      float* row = mat.data() + s * size_t(N);
      for (int y = 0; y < N; ++y)
        if (dist[y] <= p_.budget_units && !(row[y] <= float(delta)))
          row[y] = float(delta);
    });
  }
  // symmetrize: both directions searched, take max
  for (int i = 0; i < N; ++i)
    for (int j = i + 1; j < N; ++j) {
      float m = std::max(mat[size_t(i) * N + j], mat[size_t(j) * N + i]);
      mat[size_t(i) * N + j] = mat[size_t(j) * N + i] = m;
    }
  for (float v : mat)
    if (std::isinf(v))
      throw DomainError("cc distance matrix: cloud not connected at max scale");
  return mat;
}

double cc_distance_on_lattice(const GradedFieldSystem& sys, const Vec& x,
                              const Vec& y, double tol,
                              const std::array<int, 4>& counts,
                              CCParams params) {
  const int n = sys.dim();
  std::vector<Vec> pts;
  Vec spacing(n);
  for (int i = 0; i < n; ++i)
    spacing[i] = (sys.box.hi[i] - sys.box.lo[i]) / (counts[i] - 1);
  std::function<void(int, Vec)> gen = [&](int axis, Vec cur) {
    if (axis == n) {
      pts.push_back(cur);
      return;
    }
    for (int c = 0; c < counts[axis]; ++c) {
      Vec nx = cur;
      nx[axis] = sys.box.lo[axis] + c * spacing[axis];
      gen(axis + 1, nx);
    }
  };
  gen(0, Vec(n));
  CCGraph g(sys, std::move(pts), spacing, params);
  int a = g.snap(x), b = g.snap(y);
  if (a < 0 || b < 0) throw DomainError("cc_distance: point outside box");
  if (a == b) return 0.0;

  auto reach_sym = [&](double delta) {
    return g.reachable(a, b, delta) && g.reachable(b, a, delta);
  };
  double hi = 4.0 * sys.box.extent() * std::sqrt(double(n));
  double lo = 0.0;
  int guard = 0;
  while (!reach_sym(hi)) {
    hi *= 2;
    if (++guard > 8) throw DomainError("cc_distance: unreachable within max scale");
  }
  while (hi - lo > tol) {
    double mid = 0.5 * (hi + lo);
    if (reach_sym(mid))
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

double cc_distance(const GradedFieldSystem& sys, const Vec& x, const Vec& y,
                   double tol, int lattice_per_axis) {
  const int n = sys.dim();
  int per_axis = lattice_per_axis;
  if (per_axis == 0) per_axis = (n <= 2) ? 65 : 17;
  std::array<int, 4> counts{1, 1, 1, 1};
  for (int i = 0; i < n; ++i) counts[i] = per_axis;
  CCParams p;

  return cc_distance_on_lattice(sys, x, y, tol, counts, p);
}

// --- Volume proxy ----------------------------------------------------------------

double volume_proxy(const GradedFieldSystem& sys, const Vec& x, double delta) {
  if (delta < 0) throw ContractViolation("volume_proxy: delta >= 0");
  if (delta == 0) return 0.0;
  const int n = sys.dim(), q = sys.size();
  double total = 0;
  std::vector<int> idx;
  std::function<void(int, int)> rec = [&](int start, int left) {
    if (left == 0) {
      Eigen::MatrixXd M(n, n);
      int dsum = 0;
      for (int c = 0; c < n; ++c) {
        Vec v = sys.fields[idx[c]].field.eval(x);
        dsum += sys.fields[idx[c]].degree;
        for (int r = 0; r < n; ++r) M(r, c) = v[r];
      }
      total += std::abs(M.determinant()) * std::pow(delta, dsum);
      return;
    }
    for (int i = start; i <= q - left; ++i) {
      idx.push_back(i);
      rec(i + 1, left - 1);
      idx.pop_back();
    }
  };
  rec(0, n);
  return total;
}

// --- Scaling map -----------------------------------------------------------------

Vec ScalingMap::apply(const Vec& u) const {
  std::vector<const VectorField*> fs;
  std::vector<double> cs;
  for (size_t i = 0; i < J0.size(); ++i) {
    const auto& gf = sys->fields[J0[i]];
    fs.push_back(&gf.field);
    cs.push_back(u[int(i)] * std::pow(scale, gf.degree));
  }
  return flow_combination(fs, cs, x0, 32);
}

ScalingMap build_scaling_map(const GradedFieldSystem& sys, const Vec& x0,
                             double scale, int samples, uint64_t seed) {
  const int n = sys.dim(), q = sys.size();
  ScalingMap best;
  best.sys = &sys;
  best.x0 = x0;
  best.scale = scale;

  double best_det = -1;
  std::vector<int> idx;
  std::function<void(int, int)> rec = [&](int start, int left) {
    if (left == 0) {
      Eigen::MatrixXd M(n, n);
      for (int c = 0; c < n; ++c) {
        const auto& gf = sys.fields[idx[c]];
        Vec v = gf.field.eval(x0);
        for (int r = 0; r < n; ++r) M(r, c) = v[r] * std::pow(scale, gf.degree);
      }
      double d = std::abs(M.determinant());
      if (d > best_det * (1 + 1e-12)) {  // lex-smallest among ties
        best_det = d;
        best.J0 = idx;
      }
      return;
    }
    for (int i = start; i <= q - left; ++i) {
      idx.push_back(i);
      rec(i + 1, left - 1);
      idx.pop_back();
    }
  };
  rec(0, n);
  if (best_det <= 1e-14)
    throw ContractViolation("build_scaling_map: system does not span at x0");
  best.det_at_zero = best_det;

  // sampled comparability of |det dPhi| and a crude injectivity radius
  Rng rng(seed);
  double radius = 0.5;
  double inf_det = std::numeric_limits<double>::infinity(), sup_det = 0;
  auto det_at = [&](const Vec& u) {
    Eigen::MatrixXd J(n, n);
    const double h = 1e-4;
    for (int c = 0; c < n; ++c) {
      Vec up = u, um = u;
      up[c] += h;
      um[c] -= h;
      Vec fp = best.apply(up), fm = best.apply(um);
      for (int r = 0; r < n; ++r) J(r, c) = (fp[r] - fm[r]) / (2 * h);
    }
    return std::abs(J.determinant());
  };
  for (int s = 0; s < samples; ++s) {
    Vec u(n);
    for (int i = 0; i < n; ++i) u[i] = rng.uniform(-radius, radius);
    double d = det_at(u);
    inf_det = std::min(inf_det, d);
    sup_det = std::max(sup_det, d);
  }
  best.comparability_ratio = (inf_det > 0) ? sup_det / inf_det
                                           : std::numeric_limits<double>::infinity();
  // injectivity: shrink until sampled pairs stay separated
  double r = radius;
  for (int it = 0; it < 8; ++it) {
    bool ok = true;
    Rng rr(seed + 17);
    for (int s = 0; s < samples && ok; ++s) {
      Vec u(n), v(n);
      for (int i = 0; i < n; ++i) {
        u[i] = rr.uniform(-r, r);
        v[i] = rr.uniform(-r, r);
      }
      double du = norm2(u - v);
      if (du < 1e-6) continue;
      double dx = norm2(best.apply(u) - best.apply(v));
      if (dx < 1e-10 * du) ok = false;
    }
    if (ok) break;
    r *= 0.5;
  }
  best.injectivity_radius = r;
  return best;
}

}  // namespace radon
