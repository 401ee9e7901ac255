#ifndef RADON_GEOMETRY_HPP
#define RADON_GEOMETRY_HPP

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "radon/common.hpp"
#include "radon/poly.hpp"

namespace radon {

// A smooth vector field on a box in R^n. Polynomial components, when present,
// are authoritative: brackets and derivatives are then exact.
struct VectorField {
  int dim = 0;
  PolyMap poly;  // empty when only a generic evaluator exists
  std::function<Vec(const Vec&)> fn;

  static VectorField from_poly(int dim, PolyMap comps);
  static VectorField from_fn(int dim, std::function<Vec(const Vec&)> f);
  static VectorField coordinate(int dim, int axis, double c = 1.0);
  static VectorField zero(int dim);

  bool is_poly() const { return !poly.empty(); }
  Vec eval(const Vec& x) const;
  bool is_identically_zero(double tol = 0.0) const;
};

// Lie bracket [X, Y] = XY - YX. Exact for polynomial fields, central
// finite differences otherwise.
VectorField lie_bracket(const VectorField& X, const VectorField& Y);

struct GradedField {
  VectorField field;
  int degree = 1;
  bool flagged_zero = false;  // identically-vanishing fields are kept but flagged
};

struct GradedFieldSystem {
  std::vector<GradedField> fields;
  Box box;

  int dim() const { return box.dim(); }
  int size() const { return static_cast<int>(fields.size()); }
  int max_degree() const;
  void validate() const;  // degrees >= 1, nonempty, shared dimension
};

// Curve family gamma_t(x), t in B^k(a), x in box. The polynomial map, when
// present, has variables (x_1..x_n, t_1..t_k) and is exact.
struct CurveFamily {
  int n = 0;
  int k = 0;
  double a = 0.25;
  Box box;
  bool invertible = true;
  PolyMap poly;  // n components over n+k variables; empty for generic curves
  std::function<Vec(const Vec& t, const Vec& x)> fn;
  std::string name;

  Vec eval(const Vec& t, const Vec& x) const;
  // Invert x = gamma_t(w) for w by Newton iteration (generic) or exact
  // series (polynomial path handles it internally where needed).
  Vec invert(const Vec& t, const Vec& x, double tol = 1e-12) const;
};

struct TaylorField {
  std::vector<int> alpha;  // multi-index over t, |alpha| >= 1
  VectorField field;
  int degree() const {
    int s = 0;
    for (int e : alpha) s += e;
    return s;
  }
};

// Taylor vector fields X_alpha of W(t,x) = d/de|_{e=1} gamma_{et}(gamma_t^{-1}(x)),
// W(t) ~ sum_alpha t^alpha X_alpha, for 0 < |alpha| < N. X_alpha are Taylor
// coefficients (the factorials are folded in).
std::vector<TaylorField> expand_taylor_fields(const CurveFamily& gamma, int N);

// Defect of the order-N truncation at (t, x): |e^{W(t,.)}x - e^{sum t^a X_a}x|.
double taylor_remainder_defect(const CurveFamily& gamma,
                               const std::vector<TaylorField>& fields, int N,
                               const Vec& t, const Vec& x);

// Smallest m <= M_max such that brackets of length <= m of the given fields
// span R^n at x; nullopt when none does.
std::optional<int> hormander_type(const std::vector<VectorField>& fields,
                                  const Vec& x, int M_max);
std::optional<int> hormander_type(const GradedFieldSystem& sys, const Vec& x,
                                  int M_max);

struct CjWitness {
  std::vector<int> xi;    // n-tuple of tau-coordinate indices (increasing)
  std::vector<int> beta;  // multi-index over the full tau variable
  double c = 0;           // |d^beta J_xi(0,0)|
};

// Curvature condition check: Jacobian minors of the n-fold iterate of gamma,
// Taylor-searched in tau up to total order M_max.
std::optional<CjWitness> curvature_cj_check(const CurveFamily& gamma, int M_max);

// Algorithm steps I-III: select a finite Hormander sub-list of the Taylor
// fields, close under commutators, enumerate bracket-generated fields up to the
// maximal degree.
GradedFieldSystem generate_graded_system(const CurveFamily& gamma, int m0);

// Fourth-order integration of phi' = X(phi) from x over time t.
Vec flow(const VectorField& X, double t, const Vec& x, double step = 1e-2);
Vec flow(const VectorField& X, double t, const Vec& x, const Box& box,
         double step);

// Time-1 flow of sum_i coef[i] * fields[i] (the exponential map used by
// scaling maps and the theta flows).
Vec flow_combination(const std::vector<const VectorField*>& fields,
                     const std::vector<double>& coef, const Vec& x,
                     int steps = 32);

// --- Carnot-Caratheodory machinery -----------------------------------------

struct CCParams {
  // per-edge flow times delta^{d_i} * 2^{-m}; m runs past the nominal 6
  // levels so thin boxes stay reachable at coarse scales. Edge costs are
  // rescaled to the snapped displacement, so lattice rounding cannot inflate
  // speeds; the unit-time budget is tracked in 1/256 granules.
  int menu_levels = 13;
  int budget_units = 256;
  int flow_steps = 4;
  double ladder_ratio = 1.1892071150027210667;  // 2^{1/4}
};

// Reachability graph over an explicit uniform lattice; scales are bisected /
// laddered outside.
class CCGraph {
 public:
  struct Edge {
    int to;
    int w;  // budget units
  };

  CCGraph(const GradedFieldSystem& sys, std::vector<Vec> lattice_points,
          Vec spacing, CCParams params = {});

  // Minimal budget (in units of 1/64, additive Dijkstra) to reach each node
  // from src at scale delta; entries > budget_units mean unreachable.
  std::vector<int> budgets_from(int src, double delta) const;
  bool reachable(int src, int dst, double delta) const;

  // Full quantized distance matrix: entry = smallest ladder scale connecting
  // the pair, symmetrized by max as the two directed searches may differ.
  std::vector<float> distance_matrix(double delta_min, double delta_max,
                                     Exec ex = Exec::Parallel) const;

  int size() const { return static_cast<int>(pts_.size()); }
  const std::vector<Vec>& points() const { return pts_; }
  int snap(const Vec& x) const;  // nearest lattice node, -1 if outside

 private:
  const GradedFieldSystem& sys_;
  std::vector<Vec> pts_;
  Vec spacing_;
  Vec lo_;
  std::array<int, 4> counts_{1, 1, 1, 1};
  CCParams p_;

  void build_edges(double delta, std::vector<Edge>& edges,
                   std::vector<int>& offsets, Exec ex) const;
};

// CC distance between two points: bisection on delta over a reachability
// lattice on the system box; symmetric by construction.
double cc_distance(const GradedFieldSystem& sys, const Vec& x, const Vec& y,
                   double tol, int lattice_per_axis = 0);
double cc_distance_on_lattice(const GradedFieldSystem& sys, const Vec& x,
                              const Vec& y, double tol,
                              const std::array<int, 4>& counts,
                              CCParams params = {});

// NSW volume proxy Lambda(x, delta) = sum_I |det of fields in I| delta^{d(I)}
// over increasing n-tuples I.
double volume_proxy(const GradedFieldSystem& sys, const Vec& x, double delta);

// --- Scaling maps -----------------------------------------------------------

struct ScalingMap {
  const GradedFieldSystem* sys = nullptr;
  Vec x0;
  double scale = 1;
  std::vector<int> J0;       // selected increasing index set, |J0| = n
  double det_at_zero = 0;    // |det Z_{J0}(x0)|
  double injectivity_radius = 0;
  double comparability_ratio = 1;  // sup/inf |det dPhi| over sampled u

  Vec apply(const Vec& u) const;  // Phi(u) = e^{u . Z_{J0}} x0
};

ScalingMap build_scaling_map(const GradedFieldSystem& sys, const Vec& x0,
                             double scale, int samples = 64, uint64_t seed = 1);

}  // namespace radon

#endif
