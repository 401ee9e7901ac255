#ifndef RADON_WEIGHTS_HPP
#define RADON_WEIGHTS_HPP

#include "radon/analysis.hpp"
#include "radon/dyadic.hpp"
#include "radon/sht.hpp"

namespace radon {

struct Weight {
  GridFunction w;  // strictly positive; clamped at 1e-30 with a warning flag
  bool clamped = false;
};

Weight make_weight(const DiscreteSHT& S,
                   const std::function<double(const Vec&)>& fn);
Weight power_weight(const DiscreteSHT& S, int axis, double beta);

// [w]_{A_p} = sup_Q <w>_Q <w^{1-p'}>_Q^{p-1} over all grid cubes
double a_p_constant(const Weight& w, double p, const DyadicGrid& G);
// [w]_{RH_p} = sup_Q <w>_{Q,p} / <w>_Q
double rh_constant(const Weight& w, double p, const DyadicGrid& G);

struct WeightedNormCheck {
  double c_emp = 0;   // max ||Tf||_{L^p(w)} / ||f||_{L^p(w)} over the test set
  double bound = 0;   // ([w]_{A_{p/r}} [w]_{RH_{(s/p)'}})^alpha
  double alpha = 0;
  bool pass = false;
};

// Weighted norm inequality check at calibration constant c_cal.
WeightedNormCheck weighted_norm_check(const OpClosure& op, const Weight& w,
                                      double p, double r, double s,
                                      const DyadicGrid& G, int test_count,
                                      uint64_t seed, double c_cal);

}  // namespace radon

#endif
