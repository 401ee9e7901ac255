#include "radon/sht.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace radon {

// --- Lattice -----------------------------------------------------------------

Vec Lattice::point(size_t idx) const {
  Vec h = spacing();
  Vec x(dim);
  for (int i = dim - 1; i >= 0; --i) {
    int c = int(idx % size_t(counts[i]));
    idx /= size_t(counts[i]);
    x[i] = box.lo[i] + c * h[i];
  }
  return x;
}

long Lattice::index_of(const Vec& x) const {
  Vec h = spacing();
  long idx = 0;
  for (int i = 0; i < dim; ++i) {
    long c = (h[i] > 0) ? std::lround((x[i] - box.lo[i]) / h[i]) : 0;
    if (c < 0 || c >= counts[i]) return -1;
    idx = idx * counts[i] + c;
  }
  return idx;
}

std::vector<Vec> Lattice::points() const {
  std::vector<Vec> out(size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = point(i);
  return out;
}

// --- Metrics ------------------------------------------------------------------

Vec Metric::search_halfwidth(double r, int dim) const {
  Vec w(dim);
  for (int i = 0; i < dim; ++i) w[i] = std::numeric_limits<double>::infinity();
  return w;
}

double Metric::cell_scale(const Vec& spacing) const {
  // the smallest per-axis footprint: a ball of this radius reaches a lattice
  // neighbor in at least one direction
  Vec zero(spacing.n);
  double m = std::numeric_limits<double>::infinity();
  for (int i = 0; i < spacing.n; ++i) {
    if (spacing[i] <= 0) continue;
    Vec step(spacing.n);
    step[i] = spacing[i];
    m = std::min(m, rho(zero, step));
  }
  return std::isfinite(m) ? m : 0.0;
}

namespace {

struct EuclideanMetric : Metric {
  double rho(const Vec& x, const Vec& y) const override { return norm2(x - y); }
  Vec search_halfwidth(double r, int dim) const override {
    Vec w(dim);
    for (int i = 0; i < dim; ++i) w[i] = r;
    return w;
  }
  std::string name() const override { return "euclidean"; }
};

// |dx1| + sqrt(|dx2|): the anisotropic quasi-metric of the parabola; it is an
// actual metric (kappa = 1) since sqrt is subadditive.
struct ParabolaMetric : Metric {
  double rho(const Vec& x, const Vec& y) const override {
    return std::abs(x[0] - y[0]) + std::sqrt(std::abs(x[1] - y[1]));
  }
  Vec search_halfwidth(double r, int dim) const override {
    Vec w(dim);
    w[0] = r;
    if (dim > 1) w[1] = r * r;
    return w;
  }
  bool separable() const override { return true; }
  double axis_cost(int axis, double d) const override {
    return axis == 0 ? d : std::sqrt(d);
  }
  std::string name() const override { return "parabola"; }
};

// Heisenberg-type homogeneous metric on R^3 = C x R.
struct HeisenbergMetric : Metric {
  double rho(const Vec& x, const Vec& y) const override {
    double dx = x[0] - y[0], dy = x[1] - y[1];
    double twist = x[2] - y[2] - 0.5 * (x[0] * y[1] - x[1] * y[0]);
    return std::hypot(dx, dy) + std::sqrt(std::abs(twist));
  }
  Vec search_halfwidth(double r, int dim) const override {
    Vec w(dim);
    w[0] = r;
    w[1] = r;
    // |twist| < r^2 and the cross term is O(|x| r); conservative bound
    if (dim > 2) w[2] = r * r + 4.0 * r;
    return w;
  }
  std::string name() const override { return "heisenberg"; }
};

struct GrushinMetric : Metric {
  // Comparable closed form for the Grushin plane {d/dx, x d/dy}:
  // |dx| + min(sqrt(|dy|), |dy| / max(|x1|,|x2|,|dx|)).
  double rho(const Vec& x, const Vec& y) const override {
    double dx = std::abs(x[0] - y[0]);
    double dy = std::abs(x[1] - y[1]);
    double reach = std::max({std::abs(x[0]), std::abs(y[0]), dx});
    double vert = std::sqrt(dy);
    if (reach > 0) vert = std::min(vert, dy / reach);
    return dx + vert;
  }
  Vec search_halfwidth(double r, int dim) const override {
    Vec w(dim);
    w[0] = r;
    if (dim > 1) w[1] = std::numeric_limits<double>::infinity();
    return w;
  }
  std::string name() const override { return "grushin"; }
};

}  // namespace

std::shared_ptr<Metric> make_metric(const std::string& name) {
  if (name == "euclidean") return std::make_shared<EuclideanMetric>();
  if (name == "parabola") return std::make_shared<ParabolaMetric>();
  if (name == "heisenberg") return std::make_shared<HeisenbergMetric>();
  if (name == "grushin") return std::make_shared<GrushinMetric>();
  throw ContractViolation("unknown metric: " + name);
}

// --- DiscreteSHT -----------------------------------------------------------------

double DiscreteSHT::total_measure() const {
  double s = 0;
  for (double w : weights) s += w;
  return s;
}

double DiscreteSHT::diameter() const {
  if (!dist_matrix.empty()) {
    float m = 0;
    for (float d : dist_matrix) m = std::max(m, d);
    return m;
  }
  // corners + random sample; metrics here are monotone in coordinate gaps
  double m = 0;
  const size_t N = size();
  Rng rng(12345);
  for (int s = 0; s < 4096; ++s) {
    size_t i = rng.next_index(N), j = rng.next_index(N);
    m = std::max(m, rho(i, j));
  }
  // all corner pairs
  std::vector<size_t> corners;
  const int n = lattice.dim;
  for (int mask = 0; mask < (1 << n); ++mask) {
    Vec x(n);
    for (int i = 0; i < n; ++i)
      x[i] = (mask >> i & 1) ? lattice.box.hi[i] : lattice.box.lo[i];
    long idx = lattice.index_of(x);
    if (idx >= 0) corners.push_back(size_t(idx));
  }
  for (size_t a : corners)
    for (size_t b : corners) m = std::max(m, rho(a, b));
  return m;
}

double DiscreteSHT::min_resolvable_scale() const {
  if (!dist_matrix.empty()) {
    // 4x the smallest positive quantized distance
    float mn = std::numeric_limits<float>::infinity();
    const size_t N = size();
    for (size_t i = 0; i < N; ++i)
      for (size_t j = i + 1; j < N; ++j)
        if (dist_matrix[i * N + j] > 0)
          mn = std::min(mn, dist_matrix[i * N + j]);
    return 4.0 * mn;
  }
  return 4.0 * metric->cell_scale(lattice.spacing());
}

DiscreteSHT make_cloud(const Box& box, const std::array<int, 4>& counts,
                       const std::string& metric_name) {
  DiscreteSHT S;
  S.lattice.box = box;
  S.lattice.counts = counts;
  S.lattice.dim = box.dim();
  S.pts = S.lattice.points();
  Vec h = S.lattice.spacing();
  double cell = 1;
  for (int i = 0; i < S.lattice.dim; ++i) cell *= (h[i] > 0 ? h[i] : 1.0);
  S.weights.assign(S.pts.size(), cell);
  S.metric = make_metric(metric_name);
  S.metric_name = metric_name;
  S.kappa = S.metric->kappa;
  return S;
}

DiscreteSHT make_cc_cloud(const GradedFieldSystem& sys,
                          const std::array<int, 4>& counts,
                          double quantization_tol, Exec ex) {
  DiscreteSHT S;
  S.lattice.box = sys.box;
  S.lattice.counts = counts;
  S.lattice.dim = sys.box.dim();
  S.pts = S.lattice.points();
  if (S.pts.size() > (1u << 13))
    throw ResolutionError("cc cloud: pairwise matrix capped at 2^13 points");
  Vec h = S.lattice.spacing();
  double cell = 1;
  for (int i = 0; i < S.lattice.dim; ++i) cell *= (h[i] > 0 ? h[i] : 1.0);
  S.weights.assign(S.pts.size(), cell);

  CCParams p;
  p.ladder_ratio = 1.0 + quantization_tol;
  CCGraph g(sys, S.pts, h, p);
  // scale range: from the smallest per-axis cell footprint to past the box
  double dmin = std::numeric_limits<double>::infinity();
  for (int i = 0; i < S.lattice.dim; ++i)
    if (h[i] > 0) dmin = std::min(dmin, h[i]);
  double dmax = 4.0 * sys.box.extent();
  S.dist_matrix = g.distance_matrix(0.25 * dmin, dmax, ex);
  S.metric_name = "cc";
  S.kappa = 1.0;  // CC metrics are metrics; quantization inflation is measured
  return S;
}

std::vector<uint32_t> ball(const DiscreteSHT& S, uint32_t x, double r) {
  if (r <= 0) throw ContractViolation("ball: r > 0 required");
  std::vector<uint32_t> out;
  const size_t N = S.size();
  if (!S.dist_matrix.empty()) {
    const float* row = S.dist_matrix.data() + size_t(x) * N;
    for (size_t j = 0; j < N; ++j)
      if (row[j] < r) out.push_back(uint32_t(j));
    return out;
  }
  // prune to the lattice sub-box allowed by the metric
  const Lattice& L = S.lattice;
  Vec w = S.metric->search_halfwidth(r, L.dim);
  Vec h = L.spacing();
  const Vec& cx = S.pts[x];
  std::array<int, 4> lo{0, 0, 0, 0}, hi{0, 0, 0, 0};
  for (int i = 0; i < L.dim; ++i) {
    if (h[i] > 0 && std::isfinite(w[i])) {
      lo[i] = std::max(0L, std::lround(std::floor((cx[i] - w[i] - L.box.lo[i]) / h[i])));
      hi[i] = std::min(long(L.counts[i]) - 1,
                       std::lround(std::ceil((cx[i] + w[i] - L.box.lo[i]) / h[i])));
    } else {
      lo[i] = 0;
      hi[i] = L.counts[i] - 1;
    }
  }
  std::array<int, 4> c = lo;
  while (true) {
    long idx = 0;
    for (int i = 0; i < L.dim; ++i) idx = idx * L.counts[i] + c[i];
    if (S.metric->rho(cx, S.pts[size_t(idx)]) < r) out.push_back(uint32_t(idx));
    int ax = L.dim - 1;
    while (ax >= 0) {
      if (++c[ax] <= hi[ax]) break;
      c[ax] = lo[ax];
      --ax;
    }
    if (ax < 0) break;
  }
  std::sort(out.begin(), out.end());
  return out;
}

double ball_measure(const DiscreteSHT& S, uint32_t x, double r) {
  auto idx = ball(S, x, r);
  return S.measure(idx);
}

DoublingEstimate doubling_estimate(const DiscreteSHT& S, int samples,
                                   uint64_t seed) {
  if (samples < 1) throw ContractViolation("doubling_estimate: samples >= 1");
  Rng rng(seed);
  const double rmin = S.min_resolvable_scale();
  const double rmax = 0.5 * S.diameter();
  if (rmax <= rmin)
    throw ResolutionError("doubling_estimate: no resolvable scale range");
  DoublingEstimate est;
  for (int s = 0; s < samples; ++s) {
    uint32_t x = uint32_t(rng.next_index(S.size()));
    double r = rmin * std::pow(rmax / rmin, rng.next_double());
    double inner = ball_measure(S, x, r);
    if (inner <= 0) throw ResolutionError("doubling_estimate: empty inner ball");
    double ratio = ball_measure(S, x, 2 * r) / inner;
    if (ratio > est.D) {
      est.D = ratio;
      est.worst_x = x;
      est.worst_r = r;
    }
  }
  return est;
}

PerfectnessReport uniform_perfectness_check(const DiscreteSHT& S, double A,
                                            int samples, uint64_t seed) {
  if (A < 1) throw ContractViolation("uniform_perfectness_check: A >= 1");
  Rng rng(seed);
  const double rmin = S.min_resolvable_scale();
  const double rmax = 0.999 * S.diameter();
  PerfectnessReport rep;
  for (int s = 0; s < samples; ++s) {
    uint32_t x = uint32_t(rng.next_index(S.size()));
    double r = rmin * std::pow(rmax / rmin, rng.next_double());
    bool found = false;
    for (size_t y = 0; y < S.size() && !found; ++y) {
      double d = S.rho(x, y);
      found = (d >= r / A && d <= r);
    }
    if (!found) {
      rep.ok = false;
      rep.worst_x = x;
      rep.worst_r = r;
      return rep;
    }
  }
  return rep;
}

// --- GridFunction ---------------------------------------------------------------

double GridFunction::integral() const {
  double s = 0;
  for (size_t i = 0; i < v.size(); ++i) s += sht->weights[i] * v[i];
  return s;
}

double GridFunction::lp_norm(double p) const {
  double s = 0;
  for (size_t i = 0; i < v.size(); ++i)
    s += sht->weights[i] * std::pow(std::abs(v[i]), p);
  return std::pow(s, 1.0 / p);
}

double GridFunction::lp_norm(double p, const std::vector<double>& w) const {
  double s = 0;
  for (size_t i = 0; i < v.size(); ++i)
    s += sht->weights[i] * w[i] * std::pow(std::abs(v[i]), p);
  return std::pow(s, 1.0 / p);
}

double GridFunction::avg_over(const std::vector<uint32_t>& idx, double r) const {
  double mass = 0, s = 0;
  for (uint32_t i : idx) {
    mass += sht->weights[i];
    s += sht->weights[i] * std::pow(std::abs(v[i]), r);
  }
  if (mass == 0) return 0;
  return std::pow(s / mass, 1.0 / r);
}

GridFunction random_smooth(const DiscreteSHT& S, uint64_t seed, int modes) {
  Rng rng(seed);
  const int n = S.lattice.dim;
  GridFunction f(S);
  std::vector<Vec> freq(modes);
  std::vector<double> amp(modes), phase(modes);
  for (int m = 0; m < modes; ++m) {
    freq[m] = Vec(n);
    for (int i = 0; i < n; ++i) freq[m][i] = rng.uniform(-3.0, 3.0);
    amp[m] = rng.uniform(-1.0, 1.0);
    phase[m] = rng.uniform(0, 6.283185307179586);
  }
  for (size_t i = 0; i < S.size(); ++i) {
    double s = 0;
    for (int m = 0; m < modes; ++m) {
      double arg = phase[m];
      for (int d = 0; d < n; ++d) arg += freq[m][d] * S.pts[i][d];
      s += amp[m] * std::sin(arg);
    }
    f.v[i] = s;
  }
  return f;
}

GridFunction random_bounded(const DiscreteSHT& S, uint64_t seed) {
  Rng rng(seed);
  GridFunction f(S);
  for (size_t i = 0; i < S.size(); ++i) f.v[i] = rng.uniform(-1.0, 1.0);
  return f;
}

std::vector<double> dist_to_set_all(const DiscreteSHT& S,
                                    const std::vector<char>& in_set,
                                    Exec ex) {
  const size_t N = S.size();
  const double INF = std::numeric_limits<double>::infinity();
  std::vector<double> D(N, INF);
  if (!S.dist_matrix.empty() || !S.metric->separable()) {
    // brute scan; matrix metrics read rows, closed forms evaluate pairs
    std::vector<uint32_t> set_idx;
    for (uint32_t i = 0; i < N; ++i)
      if (in_set[i]) set_idx.push_back(i);
    for_n(ex, std::ptrdiff_t(N), [&](size_t p) {
      double d = INF;
      for (uint32_t y : set_idx) d = std::min(d, S.rho(p, y));
      D[p] = d;
    });
    return D;
  }
  // exact axis-sweep transform for additively separable metrics
  const Lattice& L = S.lattice;
  const int n = L.dim;
  Vec h = L.spacing();
  for (size_t i = 0; i < N; ++i)
    if (in_set[i]) D[i] = 0;
  // strides for row-major, axis 0 slowest
  std::array<size_t, 4> stride{1, 1, 1, 1};
  for (int a = n - 2; a >= 0; --a)
    stride[a] = stride[a + 1] * size_t(L.counts[a + 1]);
  for (int a = 0; a < n; ++a) {
    const int cnt = L.counts[a];
    if (cnt <= 1) continue;
    const size_t lines = N / size_t(cnt);
    std::vector<double> next(N);
    for_n(ex, std::ptrdiff_t(lines), [&](size_t line) {
      // decode the base index of this line (coordinates with axis a removed)
      size_t rem = line, base = 0;
      for (int b = n - 1; b >= 0; --b) {
        if (b == a) continue;
        size_t c = rem % size_t(L.counts[b]);
        rem /= size_t(L.counts[b]);
        base += c * stride[b];
      }
      for (int i = 0; i < cnt; ++i) {
        double best = INF;
        for (int j = 0; j < cnt; ++j) {
          double dj = D[base + size_t(j) * stride[a]];
          if (!std::isfinite(dj)) continue;
          double cost = dj + S.metric->axis_cost(a, std::abs(i - j) * h[a]);
          best = std::min(best, cost);
        }
        next[base + size_t(i) * stride[a]] = best;
      }
    });
    D.swap(next);
  }
  return D;
}

double interp(const GridFunction& f, const Vec& x) {
  const Lattice& L = f.sht->lattice;
  const int n = L.dim;
  Vec h = L.spacing();
  // cell coordinates; zero extension outside the box
  std::array<int, 4> c0{0, 0, 0, 0};
  std::array<double, 4> frac{0, 0, 0, 0};
  for (int i = 0; i < n; ++i) {
    if (h[i] == 0) {
      if (std::abs(x[i] - L.box.lo[i]) > 1e-12) return 0.0;
      continue;
    }
    double u = (x[i] - L.box.lo[i]) / h[i];
    if (u < 0 || u > L.counts[i] - 1) return 0.0;
    c0[i] = std::min(int(u), L.counts[i] - 2);
    if (L.counts[i] == 1) c0[i] = 0;
    frac[i] = u - c0[i];
  }
  double acc = 0;
  for (int mask = 0; mask < (1 << n); ++mask) {
    double wgt = 1;
    long idx = 0;
    bool ok = true;
    for (int i = 0; i < n; ++i) {
      int bit = (mask >> i) & 1;
      int ci = c0[i] + bit;
      if (ci >= L.counts[i]) {
        ok = bit == 0;
        ci = c0[i];
      }
      if (!ok) break;
      wgt *= bit ? frac[i] : 1 - frac[i];
      idx = idx * L.counts[i] + ci;
    }
    if (ok && wgt != 0) acc += wgt * f.v[size_t(idx)];
  }
  return acc;
}

}  // namespace radon
