#ifndef RADON_SPARSE_HPP
#define RADON_SPARSE_HPP

#include <vector>

#include "radon/decomposition.hpp"
#include "radon/dyadic.hpp"
#include "radon/operators.hpp"

namespace radon {

struct SparseFamily {
  const DyadicGrid* grid = nullptr;
  double sigma = 0.5;
  std::vector<uint32_t> cubes;                    // grid cube indices
  std::vector<std::vector<uint32_t>> witnesses;   // E(Q), same order
};

struct SparseFormParams {
  double r = 2.0;
  double s = 2.0;
  double kappa_prime = 1.0;  // > 1 dilates the second average
};

// Lambda_{S,r,s}(f,g) = sum mu(S) <f>_{S,r} <g>_{S or kappa'S, s}
double sparse_form(const SparseFamily& fam, const GridFunction& f,
                   const GridFunction& g, const SparseFormParams& params);

struct SparseVerifyReport {
  bool witness_ok = false;  // E(Q) in Q, pairwise disjoint, sigma-heavy
  bool union_ok = false;    // canonical-witness union characterization
  double worst_ratio = 1;   // min mu(E(Q)) / mu(Q)
  bool ok() const { return witness_ok && union_ok; }
};

SparseVerifyReport verify_sparse(const SparseFamily& fam);

// canonical witnesses E(Q) = Q minus the union of strict sub-cubes in S
void make_canonical_witnesses(SparseFamily& fam);

struct SparseTraceEntry {
  uint32_t cube = 0;
  int depth = 0;
  double D = 0;
  double e_ratio = 0;  // mu(E) / mu(Q) at the accepted threshold
  bool terminal = false;
};

struct SelectOptions {
  int terminal_points = 64;
  int max_depth = 12;
  int max_D_doublings = 24;
  uint32_t root_cube = UINT32_MAX;  // default: smallest cube holding supp f1
};

struct SparseSelection {
  SparseFamily family;
  std::vector<SparseTraceEntry> trace;
  double c_prime = 0;      // Whitney constant used by every level
  double c_star = 0;       // measured displacement constant
  double kappa_prime = 1;  // support-tracking dilation
};

// The constructive recursion: level sets of dyadic maximal functions, a
// doubling search for the threshold D, Whitney cubes, recursion on them.
SparseSelection sparse_select(const RadonOperator& op, const DyadicGrid& G,
                              const GridFunction& f1, const GridFunction& f2,
                              double sigma, const SparseFormParams& params,
                              SelectOptions opt = {});

// Whitney constant selection from the three constraint inequalities, given
// the grid constants and the measured displacement constant c*.
double select_whitney_constant(const DyadicGrid& G, double c_star);

struct DominationReport {
  double lhs = 0;
  double rhs = 0;
  double c_emp = 0;
};

// lhs = |<T f1, f2>|, rhs = the dilated sparse form at (r, s'), their ratio.
DominationReport domination_check(const RadonOperator& op,
                                  const SparseFamily& fam,
                                  const GridFunction& f1,
                                  const GridFunction& f2,
                                  const SparseFormParams& params);

}  // namespace radon

#endif
