#ifndef RADON_ANALYSIS_HPP
#define RADON_ANALYSIS_HPP

#include <functional>
#include <string>
#include <vector>

#include "radon/geometry.hpp"
#include "radon/sht.hpp"

namespace radon {

using OpClosure = std::function<GridFunction(const GridFunction&)>;

struct NormEstimate {
  double r = 2, s = 2;
  double value = 0;  // max Rayleigh quotient: a certified lower bound
  std::string method;
  int samples = 0;
  uint64_t seed = 0;
};

// Lower-bound operator norm L^r -> L^s: random smooth fields, a spike family
// of shrinking supports, and coordinate ascent from the best seed.
NormEstimate estimate_norm(const OpClosure& op, const DiscreteSHT& S, double r,
                           double s, int budget, uint64_t seed);

struct ImprovingVerdict {
  double r = 0, s = 0;
  bool bounded = false;
  double worst_growth = 0;  // max quotient ratio across refinement levels
  double quotient = 0;
};

struct ImprovingRegion {
  std::vector<ImprovingVerdict> verdicts;
  bool convex_ok = true;  // sampled segment-convexity of the accepted set
};

// Stability map over a grid of (r, s): accepted when spike-family quotients
// grow less than 10% across three dyadic refinement levels.
ImprovingRegion map_improving_region(const OpClosure& op, const DiscreteSHT& S,
                                     const std::vector<double>& rs,
                                     const std::vector<double>& ss, int budget,
                                     uint64_t seed);

// the largest s (smallest 1/s) accepted at fixed r, linearly indexed on ss
double improving_frontier(const ImprovingRegion& R, double r);

// Graded flow family theta_b(x) = exp(sum_i b_i scale^{d_i} W_i)(x).
struct ThetaFamily {
  const GradedFieldSystem* sys = nullptr;
  double scale = 1.0;
  Vec apply(const Vec& b, const Vec& x) const;
};

struct ModulusFit {
  double eta = 0;
  double r2 = 0;
  std::vector<double> b_mags;
  std::vector<double> diffs;
};

// Empirical modulus-of-continuity exponent: sup over samples of
// ||Tf - (Tf) o theta_b||_2 / ||f||_2 against |b|, log-log slope.
ModulusFit modulus_exponent(const OpClosure& op, const DiscreteSHT& S,
                            const ThetaFamily& theta,
                            const std::vector<double>& b_mags, int f_samples,
                            uint64_t seed);

}  // namespace radon

#endif
