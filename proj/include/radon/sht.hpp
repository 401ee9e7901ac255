#ifndef RADON_SHT_HPP
#define RADON_SHT_HPP

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "radon/common.hpp"
#include "radon/geometry.hpp"

namespace radon {

// Uniform lattice inside a box; points enumerated row-major, axis 0 slowest.
struct Lattice {
  Box box;
  std::array<int, 4> counts{1, 1, 1, 1};
  int dim = 0;

  size_t size() const {
    size_t s = 1;
    for (int i = 0; i < dim; ++i) s *= size_t(counts[i]);
    return s;
  }
  Vec spacing() const {
    Vec h(dim);
    for (int i = 0; i < dim; ++i)
      h[i] = (counts[i] > 1) ? (box.hi[i] - box.lo[i]) / (counts[i] - 1) : 0.0;
    return h;
  }
  Vec point(size_t idx) const;
  long index_of(const Vec& x) const;  // nearest lattice node, -1 outside
  std::vector<Vec> points() const;
};

// Quasi-metric handle. Closed-form metrics implement rho(); cc-backed clouds
// carry a precomputed matrix instead.
struct Metric {
  virtual ~Metric() = default;
  virtual double rho(const Vec& x, const Vec& y) const = 0;
  // Per-axis Euclidean half-widths W with: rho(x,y) < r implies |x_i - y_i| <
  // W_i for all i. Used to prune ball queries on lattices.
  virtual Vec search_halfwidth(double r, int dim) const;
  // Metric radius that one lattice cell of the given spacing occupies.
  virtual double cell_scale(const Vec& spacing) const;
  // Additively separable metrics rho(x,y) = sum_i g_i(|x_i - y_i|) admit an
  // exact axis-sweep distance transform.
  virtual bool separable() const { return false; }
  virtual double axis_cost(int axis, double d) const {
    (void)axis;
    (void)d;
    return 0;
  }
  virtual std::string name() const = 0;
  double kappa = 1.0;
};

std::shared_ptr<Metric> make_metric(const std::string& name);

// Discretized space of homogeneous type: lattice cloud + cell-volume weights
// + quasi-metric (closed form or precomputed matrix).
struct DiscreteSHT {
  Lattice lattice;
  std::vector<Vec> pts;
  std::vector<double> weights;
  std::shared_ptr<Metric> metric;
  std::vector<float> dist_matrix;  // optional, row-major size N*N
  double kappa = 1.0;
  std::string metric_name;

  size_t size() const { return pts.size(); }
  double rho(size_t i, size_t j) const {
    if (!dist_matrix.empty()) return dist_matrix[i * size() + j];
    return metric->rho(pts[i], pts[j]);
  }
  double measure(const std::vector<uint32_t>& idx) const {
    double s = 0;
    for (uint32_t i : idx) s += weights[i];
    return s;
  }
  double total_measure() const;
  double diameter() const;              // max pairwise distance (sampled + corners)
  double min_resolvable_scale() const;  // 4 lattice cells in metric units
};

// Construct a cloud on a box lattice with the named closed-form metric.
DiscreteSHT make_cloud(const Box& box, const std::array<int, 4>& counts,
                       const std::string& metric_name);

// Construct a cloud whose metric is the CC distance matrix of the system.
DiscreteSHT make_cc_cloud(const GradedFieldSystem& sys,
                          const std::array<int, 4>& counts,
                          double quantization_tol = 0.19,
                          Exec ex = Exec::Parallel);

// All indices with rho(x, .) < r.
std::vector<uint32_t> ball(const DiscreteSHT& S, uint32_t x, double r);
double ball_measure(const DiscreteSHT& S, uint32_t x, double r);

struct DoublingEstimate {
  double D = 0;
  uint32_t worst_x = 0;
  double worst_r = 0;
};
DoublingEstimate doubling_estimate(const DiscreteSHT& S, int samples,
                                   uint64_t seed);

struct PerfectnessReport {
  bool ok = true;
  uint32_t worst_x = 0;
  double worst_r = 0;
};
PerfectnessReport uniform_perfectness_check(const DiscreteSHT& S, double A,
                                            int samples, uint64_t seed);

// Per-point function on a cloud.
struct GridFunction {
  const DiscreteSHT* sht = nullptr;
  std::vector<double> v;

  GridFunction() = default;
  explicit GridFunction(const DiscreteSHT& S, double fill = 0.0)
      : sht(&S), v(S.size(), fill) {}
  size_t size() const { return v.size(); }
  double integral() const;
  double lp_norm(double p) const;
  double lp_norm(double p, const std::vector<double>& w) const;  // weighted
  // average <|f|^r>^{1/r} over an index set
  double avg_over(const std::vector<uint32_t>& idx, double r) const;
};

GridFunction random_smooth(const DiscreteSHT& S, uint64_t seed, int modes = 4);
GridFunction random_bounded(const DiscreteSHT& S, uint64_t seed);

// Multilinear interpolation of a lattice function at an off-lattice point;
// zero outside the box.
double interp(const GridFunction& f, const Vec& x);

// Distance of every cloud point to the given set: exact axis-sweep transform
// for separable metrics, brute scan otherwise.
std::vector<double> dist_to_set_all(const DiscreteSHT& S,
                                    const std::vector<char>& in_set,
                                    Exec ex = Exec::Parallel);

}  // namespace radon

#endif
