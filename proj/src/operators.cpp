#include "radon/operators.hpp"

#include <algorithm>
#include <cmath>

#include "radon/models.hpp"

namespace radon {

// --- bumps ---------------------------------------------------------------------

double Bump::profile(double u) {
  if (u <= 0) return 0;
  if (u >= 1) return 1;
  return u * u * u * (10 + u * (-15 + 6 * u));
}

double Bump::operator()(const Vec& x) const {
  double r = 0;
  for (int i = 0; i < center.n; ++i) {
    double d = x[i] - center[i];
    r += d * d;
  }
  r = std::sqrt(r);
  if (r <= r0) return 1.0;
  if (r >= r1) return 0.0;
  return profile((r1 - r) / (r1 - r0));
}

// --- kernels --------------------------------------------------------------------

CZKernel CZKernel::hilbert(double a) {
  CZKernel K;
  K.k = 1;
  K.a = a;
  K.name = "hilbert";
  K.eval = [](const Vec& t) { return 1.0 / t[0]; };
  return K;
}

std::vector<double> CZKernel::measure_diff_constants(int samples,
                                                     uint64_t seed) const {
  Rng rng(seed);
  std::vector<double> C(3, 0.0);
  for (int s = 0; s < samples; ++s) {
    Vec t(k);
    double r = a * std::pow(10.0, -3.0 * rng.next_double());
    for (int i = 0; i < k; ++i) t[i] = (rng.next_double() < 0.5 ? -1 : 1) * r;
    double tn = norm2(t);
    if (tn < 1e-9 * a || tn >= a) continue;
    C[0] = std::max(C[0], std::abs(eval(t)) * std::pow(tn, double(k)));
    for (int i = 0; i < k; ++i) {
      double h = 1e-4 * tn;
      Vec tp = t, tm = t;
      tp[i] += h;
      tm[i] -= h;
      double d1 = std::abs(eval(tp) - eval(tm)) / (2 * h);
      double d2 = std::abs(eval(tp) - 2 * eval(t) + eval(tm)) / (h * h);
      C[1] = std::max(C[1], d1 * std::pow(tn, double(k + 1)));
      C[2] = std::max(C[2], d2 * std::pow(tn, double(k + 2)));
    }
  }
  return C;
}

double CZKernel::cancellation_functional(int scales) const {
  if (k != 1) return 0.0;  // bundled kernels are one-dimensional
  double worst = 0;
  for (int s = 0; s < scales; ++s) {
    double R = std::pow(2.0, s - scales / 2);
    for (double w : {0.25, 0.5, 0.75}) {
      // plateau bump scaled so its C^1 norm stays at most 1
      double slope = 1.875 / (1 - w);
      double amp = std::min(1.0, 1.0 / slope);
      const int N = 4096;
      double acc = 0;
      double dt = 2 * a / N;
      for (int i = 0; i < N; ++i) {
        double t = -a + (i + 0.5) * dt;
        if (std::abs(t) < 1e-12) continue;
        double u = std::abs(R * t);
        double phi = u <= w ? 1.0 : Bump::profile((1 - u) / (1 - w));
        acc += eval(Vec{t}) * amp * phi * dt;
      }
      worst = std::max(worst, std::abs(acc));
    }
  }
  return worst;
}

// --- kernel ladder ----------------------------------------------------------------

namespace {

// radial cutoff at reference radius A: 1 for r <= delta A, 0 for r >= A
double beta_cut(double r, double A, double delta) {
  if (r <= delta * A) return 1.0;
  if (r >= A) return 0.0;
  return Bump::profile((A - r) / (A - delta * A));
}

// ring window supported on [delta^2 a, a]
double ring(double r, double a, double delta) {
  return beta_cut(r, a, delta) - beta_cut(r, a * delta, delta);
}

// unit-mass bump supported in B^k(0.8 a)
double phi_mass(double a, int k) {
  const int N = (k == 1) ? 8192 : 256;
  double acc = 0;
  if (k == 1) {
    double dt = 2 * a / N;
    for (int i = 0; i < N; ++i) {
      double r = std::abs(-a + (i + 0.5) * dt);
      acc += (r >= 0.8 * a ? 0.0 : Bump::profile((0.8 * a - r) / (0.4 * a))) * dt;
    }
  } else {
    double dt = 2 * a / N;
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j) {
        Vec u{-a + (i + 0.5) * dt, -a + (j + 0.5) * dt};
        double r = norm2(u);
        acc += (r >= 0.8 * a ? 0.0 : Bump::profile((0.8 * a - r) / (0.4 * a))) *
               dt * dt;
      }
  }
  return acc;
}

double phi_bump(const Vec& t, double a, int k) {
  double r = norm2(t);
  if (r >= 0.8 * a) return 0.0;
  static thread_local double cache_a = -1;
  static thread_local int cache_k = -1;
  static thread_local double mass = 1;
  if (cache_a != a || cache_k != k) {
    mass = phi_mass(a, k);
    cache_a = a;
    cache_k = k;
  }
  return Bump::profile((0.8 * a - r) / (0.4 * a)) / mass;
}

double raw_piece(const KernelLadder& L, int j, const Vec& t) {
  double r = norm2(t);
  if (r <= 0 || r >= L.a) return 0.0;
  if (j == 0) {
    double w = 1.0 - beta_cut(r, L.a * L.delta, L.delta);
    if (w == 0.0) return 0.0;
    return L.kernel.eval(t) * w;
  }
  double w = ring(r, L.a, L.delta);
  if (w == 0.0) return 0.0;
  Vec td = t;
  double sc = std::pow(L.delta, j);
  for (int i = 0; i < L.k; ++i) td[i] = t[i] * sc;
  return std::pow(sc, double(L.k)) * L.kernel.eval(td) * w;
}

double piece_mean(const KernelLadder& L, int j) {
  auto quad = [&](int N) {
    double acc = 0;
    if (L.k == 1) {
      double dt = 2 * L.a / N;
      for (int i = 0; i < N; ++i) acc += raw_piece(L, j, Vec{-L.a + (i + 0.5) * dt}) * dt;
    } else {
      int M = int(std::sqrt(double(N)));
      double dt = 2 * L.a / M;
      for (int i = 0; i < M; ++i)
        for (int l = 0; l < M; ++l)
          acc += raw_piece(L, j, Vec{-L.a + (i + 0.5) * dt, -L.a + (l + 0.5) * dt}) *
                 dt * dt;
    }
    return acc;
  };
  double c1 = quad(1 << 14), c2 = quad(1 << 15);
  return (4 * c2 - c1) / 3.0;
}

}  // namespace

KernelLadder split_kernel(const CZKernel& K, double delta, int J) {
  if (!(delta > 0 && delta < 1))
    throw ContractViolation("split_kernel: 0 < delta < 1 required");
  if (J < 1) throw ContractViolation("split_kernel: J >= 1 required");
  KernelLadder L;
  L.k = K.k;
  L.a = K.a;
  L.delta = delta;
  L.J = J;
  L.kernel = K;
  // mean cascade: b_j = sum_{i > j} c_i moves ring means down the ladder so
  // every piece with j >= 1 integrates to zero; b_J = 0 closes it
  L.piece_means.assign(size_t(J) + 1, 0.0);
  for (int j = 1; j <= J; ++j) L.piece_means[j] = piece_mean(L, j);
  L.bump_coeff.assign(size_t(J) + 1, 0.0);
  double tail = 0;
  for (int j = J; j >= 1; --j) {
    tail += L.piece_means[j];
    L.bump_coeff[j - 1] = tail;
  }
  return L;
}

double KernelLadder::chi(int j, const Vec& t) const {
  double v = raw_piece(*this, j, t);
  const double a_j = (j == 0) ? 0.0 : bump_coeff[size_t(j) - 1];
  const double b_j = bump_coeff[size_t(j)];
  if (a_j != 0.0) v -= a_j * phi_bump(t, a, k);
  if (b_j != 0.0) {
    Vec ts = t;
    for (int i = 0; i < k; ++i) ts[i] = t[i] / delta;
    v += b_j * std::pow(delta, -double(k)) * phi_bump(ts, a, k);
  }
  return v;
}

double KernelLadder::reconstruct(const Vec& t) const {
  double acc = 0;
  for (int j = 0; j <= J; ++j) {
    Vec ts = t;
    double sc = std::pow(delta, -double(j));
    for (int i = 0; i < k; ++i) ts[i] = t[i] * sc;
    acc += std::pow(sc, double(k)) * chi(j, ts);
  }
  return acc;
}

double KernelLadder::c0_norm(int j, int samples) const {
  double m = 0;
  for (int i = 0; i < samples; ++i) {
    Vec t{-a + 2 * a * (i + 0.5) / samples};
    m = std::max(m, std::abs(chi(j, t)));
  }
  return m;
}

double KernelLadder::c1_norm(int j, int samples) const {
  double m = c0_norm(j, samples);
  double h = 0.25 * a / samples;
  for (int i = 0; i < samples; ++i) {
    Vec t{-a + 2 * a * (i + 0.5) / samples};
    Vec tp = t, tm = t;
    tp[0] += h;
    tm[0] -= h;
    m = std::max(m, std::abs(chi(j, tp) - chi(j, tm)) / (2 * h));
  }
  return m;
}

// --- operator application -----------------------------------------------------------

RadonOperator make_radon_operator(const std::string& curve, double a,
                                  double delta, int J, const Bump& psi1,
                                  const Bump& psi2, int t_nodes) {
  RadonOperator op;
  op.gamma = make_curve(curve);
  op.gamma.a = a;
  op.ladder = split_kernel(CZKernel::hilbert(a), delta, J);
  op.psi1 = psi1;
  op.psi2 = psi2;
  op.t_nodes = t_nodes;
  return op;
}

namespace {

// symmetric midpoint t-lattice on [-a, a]^k
template <class F>
void for_t_lattice(int k, double a, int nodes, F&& fn) {
  double dt = 2 * a / nodes;
  if (k == 1) {
    for (int i = 0; i < nodes; ++i) fn(Vec{-a + (i + 0.5) * dt}, dt);
  } else {
    for (int i = 0; i < nodes; ++i)
      for (int j = 0; j < nodes; ++j)
        fn(Vec{-a + (i + 0.5) * dt, -a + (j + 0.5) * dt}, dt * dt);
  }
}

}  // namespace

GridFunction apply_single_scale(const RadonOperator& op,
                                const std::function<double(const Vec&)>& chi,
                                const GridFunction& f) {
  const DiscreteSHT& S = *f.sht;
  GridFunction out(S);
  for_n(op.exec, std::ptrdiff_t(S.size()), [&](size_t p) {
    double w1 = op.psi1(S.pts[p]);
    if (w1 == 0.0) return;
    double acc = 0;
    for_t_lattice(op.gamma.k, op.ladder.a, op.t_nodes,
                  [&](const Vec& t, double dt) {
                    double cv = chi(t);
                    if (cv == 0.0) return;
                    Vec y = op.gamma.eval(t, S.pts[p]);
                    double w2 = op.psi2(y);
                    if (w2 == 0.0) return;
                    acc += interp(f, y) * w2 * op.rho_at(t, S.pts[p]) * cv * dt;
                  });
    out.v[p] = w1 * acc;
  });
  return out;
}

GridFunction apply_dilated(const RadonOperator& op, int j, int i,
                           const GridFunction& f) {
  const DiscreteSHT& S = *f.sht;
  const double sc = std::pow(op.ladder.delta, i);
  GridFunction out(S);
  for_n(op.exec, std::ptrdiff_t(S.size()), [&](size_t p) {
    double w1 = op.psi1(S.pts[p]);
    if (w1 == 0.0) return;
    double acc = 0;
    for_t_lattice(op.gamma.k, op.ladder.a, op.t_nodes,
                  [&](const Vec& t, double dt) {
                    double cv = op.ladder.chi(j, t);
                    if (cv == 0.0) return;
                    Vec td = t;
                    for (int d = 0; d < op.gamma.k; ++d) td[d] = sc * t[d];
                    Vec y = op.gamma.eval(td, S.pts[p]);
                    double w2 = op.psi2(y);
                    if (w2 == 0.0) return;
                    acc += interp(f, y) * w2 * op.rho_at(td, S.pts[p]) * cv * dt;
                  });
    out.v[p] = w1 * acc;
  });
  return out;
}

GridFunction apply_full(const RadonOperator& op, const GridFunction& f) {
  const DiscreteSHT& S = *f.sht;
  GridFunction out(S);
  for (int j = 0; j <= op.ladder.J; ++j) {
    GridFunction part = apply_dilated(op, j, j, f);
    for (size_t i = 0; i < S.size(); ++i) out.v[i] += part.v[i];
  }
  return out;
}

GridFunction adjoint_apply(const RadonOperator& op, int j, int i,
                           const GridFunction& g) {
  // exact transpose of the quadrature-plus-interpolation stencil; scatters
  // into the output, serial for determinism
  const DiscreteSHT& S = *g.sht;
  const Lattice& L = S.lattice;
  const int n = L.dim;
  const double sc = std::pow(op.ladder.delta, i);
  GridFunction out(S);
  Vec h = L.spacing();
  for (size_t p = 0; p < S.size(); ++p) {
    double w1 = op.psi1(S.pts[p]);
    if (w1 == 0.0) continue;
    double gp = g.v[p] * S.weights[p] * w1;
    if (gp == 0.0) continue;
    for_t_lattice(op.gamma.k, op.ladder.a, op.t_nodes, [&](const Vec& t,
                                                           double dt) {
      double cv = op.ladder.chi(j, t);
      if (cv == 0.0) return;
      Vec td = t;
      for (int d = 0; d < op.gamma.k; ++d) td[d] = sc * t[d];
      Vec y = op.gamma.eval(td, S.pts[p]);
      double w2 = op.psi2(y);
      if (w2 == 0.0) return;
      double coeff = gp * w2 * op.rho_at(td, S.pts[p]) * cv * dt;
      std::array<int, 4> c0{0, 0, 0, 0};
      std::array<double, 4> frac{0, 0, 0, 0};
      bool ok = true;
      for (int d = 0; d < n && ok; ++d) {
        if (h[d] == 0) {
          ok = std::abs(y[d] - L.box.lo[d]) < 1e-12;
          continue;
        }
        double u = (y[d] - L.box.lo[d]) / h[d];
        if (u < 0 || u > L.counts[d] - 1) {
          ok = false;
          break;
        }
        c0[d] = std::min(int(u), L.counts[d] - 2);
        if (L.counts[d] == 1) c0[d] = 0;
        frac[d] = u - c0[d];
      }
      if (!ok) return;
      for (int mask = 0; mask < (1 << n); ++mask) {
        double wgt = 1;
        long idx = 0;
        bool good = true;
        for (int d = 0; d < n; ++d) {
          int bit = (mask >> d) & 1;
          int ci = c0[d] + bit;
          if (ci >= L.counts[d]) {
            good = bit == 0;
            ci = c0[d];
          }
          if (!good) break;
          wgt *= bit ? frac[d] : 1 - frac[d];
          idx = idx * L.counts[d] + ci;
        }
        if (good && wgt != 0)
          out.v[size_t(idx)] += coeff * wgt / S.weights[size_t(idx)];
      }
    });
  }
  return out;
}

double pairing(const GridFunction& f, const GridFunction& g, Exec ex) {
  const auto& w = f.sht->weights;
  return sum_n(ex, f.size(), [&](size_t i) { return w[i] * f.v[i] * g.v[i]; });
}

GridFunction hilbert_monomial(const std::vector<int>& alpha,
                              const GridFunction& f, double a, double t_min,
                              int nodes, Exec ex) {
  if (alpha.empty() || alpha[0] < 1)
    throw ContractViolation("hilbert_monomial: need 0 < a1 < ... < an");
  for (size_t i = 1; i < alpha.size(); ++i)
    if (alpha[i] <= alpha[i - 1])
      throw ContractViolation("hilbert_monomial: need 0 < a1 < ... < an");
  if (!(t_min < a))
    throw ContractViolation("hilbert_monomial: t_min < a required");
  const DiscreteSHT& S = *f.sht;
  const int n = S.lattice.dim;
  GridFunction out(S);
  double dt = (a - t_min) / nodes;
  for_n(ex, std::ptrdiff_t(S.size()), [&](size_t p) {
    double acc = 0;
    for (int i = 0; i < nodes; ++i) {
      double t = t_min + (i + 0.5) * dt;
      Vec yp = S.pts[p], ym = S.pts[p];
      for (int d = 0; d < n; ++d) {
        double tp = 1, tm = 1;
        for (int e = 0; e < alpha[d]; ++e) {
          tp *= t;
          tm *= -t;
        }
        yp[d] = S.pts[p][d] - tp;
        ym[d] = S.pts[p][d] - tm;
      }
      // odd-symmetric pairing of t and -t realizes the principal value
      acc += (interp(f, yp) - interp(f, ym)) / t * dt;
    }
    out.v[p] = acc;
  });
  return out;
}

SupportConstants measure_support_constants(const RadonOperator& op,
                                           const DiscreteSHT& S, double scale,
                                           int j_max, int samples,
                                           uint64_t seed) {
  Rng rng(seed);
  SupportConstants out;
  for (int j = 0; j <= j_max; ++j) {
    double sc = std::pow(op.ladder.delta, j);
    for (int s = 0; s < samples; ++s) {
      size_t p = rng.next_index(S.size());
      Vec t(op.gamma.k);
      for (int d = 0; d < op.gamma.k; ++d)
        t[d] = op.ladder.a * sc * rng.uniform(-1, 1);
      Vec y = op.gamma.eval(t, S.pts[p]);
      long yi = S.lattice.index_of(y);
      if (yi < 0) continue;
      double d = S.dist_matrix.empty()
                     ? S.metric->rho(S.pts[p], S.pts[size_t(yi)])
                     : S.rho(p, size_t(yi));
      out.c_star = std::max(out.c_star, d / (scale * sc));
    }
  }
  out.kappa_prime = std::max(1.0, out.c_star * (1 + 1e-6));
  return out;
}

}  // namespace radon
