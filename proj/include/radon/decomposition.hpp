#ifndef RADON_DECOMPOSITION_HPP
#define RADON_DECOMPOSITION_HPP

#include <vector>

#include "radon/dyadic.hpp"
#include "radon/sht.hpp"

namespace radon {

// Dyadic maximal function at exponent p: at each point, the sup over
// containing cubes of <|f|^p>_Q^{1/p}.
GridFunction dyadic_maximal(const DyadicGrid& G, const GridFunction& f,
                            double p = 1.0, Exec ex = Exec::Parallel);

struct WhitneyFamily {
  std::vector<uint32_t> cubes;  // cube indices into the grid
  std::vector<uint32_t> omega;  // sorted point indices of Omega
  double c_prime = 0;
  // verification results (exact on the cloud)
  bool covers = false, disjoint = false, bounds_ok = false;
  double worst_lower = 0, worst_upper = 0;  // dist/diam extremes over cubes
};

// Whitney decomposition of Omega = X \ Y along the grid. In strict mode a
// violated family invariant throws; otherwise it is recorded in the flags.
WhitneyFamily whitney(const DyadicGrid& G, const std::vector<uint32_t>& omega,
                      double c_prime, double A = 3.0, bool strict = true);

struct CzPiece {
  uint32_t cube = 0;            // grid cube index
  std::vector<double> values;   // bad part, sparse over cube members
};

struct CzResult {
  GridFunction good;
  std::vector<uint32_t> cubes;           // selected maximal cubes
  std::vector<GridFunction> bad_parts;   // one per cube, supported there
  double lambda = 0;
  double c_x = 0;  // measured bound |g| <= c_x * lambda
};

// Calderon-Zygmund decomposition at level lambda over maximal dyadic cubes
// with <|f|>_Q > lambda.
CzResult cz_decompose(const DyadicGrid& G, const GridFunction& f, double lambda);

// Variant splitting along a prescribed disjoint cube family:
// b_Q = 1_Q (f - <f>_Q), g = f - sum b_Q.
CzResult cz_decompose_on(const DyadicGrid& G, const GridFunction& f,
                         const std::vector<uint32_t>& cubes);

}  // namespace radon

#endif
