#ifndef RADON_OPERATORS_HPP
#define RADON_OPERATORS_HPP

#include <functional>
#include <string>
#include <vector>

#include "radon/geometry.hpp"
#include "radon/sht.hpp"

namespace radon {

// Quintic-smoothstep radial bump: 1 on |x - c| <= r0, 0 off |x - c| >= r1.
struct Bump {
  Vec center;
  double r0 = 0.5, r1 = 1.0;
  double operator()(const Vec& x) const;
  static double profile(double u);  // 6u^5 - 15u^4 + 10u^3 clamped
};

// Calderon-Zygmund kernel on B^k(a) \ {0}.
struct CZKernel {
  int k = 1;
  double a = 0.25;
  double t_min = 0;  // principal-value truncation used by diagnostics
  std::function<double(const Vec&)> eval;
  std::string name;

  static CZKernel hilbert(double a);  // 1/t on the line
  // measured differential-inequality constants sup |d^m K| |t|^{m+k}, m <= 2
  std::vector<double> measure_diff_constants(int samples = 200,
                                             uint64_t seed = 3) const;
  // sup over scalings and a bundled bump family of |int K(t) phi(Rt) dt|
  double cancellation_functional(int scales = 12) const;
};

// Dyadic kernel ladder K = sum_j delta^{-kj} chi_j(delta^{-j} .) with
// mean-zero pieces for j >= 1.
struct KernelLadder {
  int k = 1;
  double a = 0.25;
  double delta = 0.25;
  int J = 10;
  CZKernel kernel;
  std::vector<double> bump_coeff;  // b_j of the mean cascade
  std::vector<double> piece_means; // raw ring means c_j (diagnostic)

  double chi(int j, const Vec& t) const;  // the corrected piece
  // partial reconstruction sum_{j<=J} delta^{-kj} chi_j(delta^{-j} t)
  double reconstruct(const Vec& t) const;
  double c0_norm(int j, int samples = 512) const;
  double c1_norm(int j, int samples = 512) const;
};

KernelLadder split_kernel(const CZKernel& K, double delta, int J);

struct RadonOperator {
  CurveFamily gamma;
  Bump psi1, psi2;
  std::function<double(const Vec& t, const Vec& x)> density;  // default 1
  KernelLadder ladder;
  int t_nodes = 128;  // quadrature nodes per t-axis
  Exec exec = Exec::Parallel;

  double rho_at(const Vec& t, const Vec& x) const {
    return density ? density(t, x) : 1.0;
  }
};

// Configuration by names; curve/kernel resolved via the model registry.
RadonOperator make_radon_operator(const std::string& curve, double a,
                                  double delta, int J, const Bump& psi1,
                                  const Bump& psi2, int t_nodes = 128);

// T_chi f(x) = psi1(x) int f(gamma_t(x)) psi2(gamma_t(x)) rho(t,x) chi(t) dt
GridFunction apply_single_scale(const RadonOperator& op,
                                const std::function<double(const Vec&)>& chi,
                                const GridFunction& f);
// the i-th dilation of the j-th ladder piece
GridFunction apply_dilated(const RadonOperator& op, int j, int i,
                           const GridFunction& f);
// T = sum_{j=0..J} T_j^{(j)}
GridFunction apply_full(const RadonOperator& op, const GridFunction& f);
// adjoint of the (j, i)-dilated piece w.r.t. the cloud inner product
GridFunction adjoint_apply(const RadonOperator& op, int j, int i,
                           const GridFunction& g);

double pairing(const GridFunction& f, const GridFunction& g,
               Exec ex = Exec::Parallel);

// Truncated principal value of the Hilbert transform along the monomial
// curve t -> (t^{a1}, ..., t^{an}).
GridFunction hilbert_monomial(const std::vector<int>& alpha,
                              const GridFunction& f, double a, double t_min,
                              int nodes = 256, Exec ex = Exec::Parallel);

// Support-tracking constants over a dyadic grid: kappa' with
// supp T_j^{(j)}(1_Q) inside B(x_c, kappa' ell(Q)), and the displacement
// constant c* = sup rho(x, gamma_{delta^j t}(x)) / (scale delta^j).
struct SupportConstants {
  double kappa_prime = 1;
  double c_star = 0;
};
struct DyadicGrid;  // fwd (radon/dyadic.hpp)
SupportConstants measure_support_constants(const RadonOperator& op,
                                           const DiscreteSHT& S, double scale,
                                           int j_max, int samples = 64,
                                           uint64_t seed = 5);

}  // namespace radon

#endif
