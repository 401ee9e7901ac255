#ifndef RADON_DYADIC_HPP
#define RADON_DYADIC_HPP

#include <optional>
#include <string>
#include <vector>

#include "radon/sht.hpp"

namespace radon {

struct DyadicCube {
  int generation = 0;
  uint32_t rank = 0;    // rank within generation; (generation, rank) is stable
  uint32_t center = 0;  // point index
  int32_t parent = -1;  // cube index, -1 at the top
  std::vector<uint32_t> children;  // cube indices
  std::vector<uint32_t> members;   // sorted point indices
  double measure = 0;
  double inner_radius = 0;  // min distance from center to a non-member
  double outer_radius = 0;  // max distance from center to a member
};

struct GridOptions {
  uint64_t seed = 1;
  // per-generation candidate centers tried before the seeded permutation
  // (the classical-interval tests seed each generation's dyadic midpoints)
  std::vector<std::vector<uint32_t>> preferred_centers;
  double min_eps = 1e-3;
  int rebuild_retries = 8;
  int max_generations = 48;
};

// Dyadic decomposition of a DiscreteSHT. Sidelengths are ell(k) =
// scale * delta^k; `scale` is normalized at build time so the inner sandwich
// inclusion B(x_c, ell(Q)) <= Q holds exactly on the cloud.
struct DyadicGrid {
  const DiscreteSHT* sht = nullptr;
  double delta = 0.5;
  double scale = 1.0;
  double outer_c = 1.0;  // sandwich constant
  double eps = 0;        // measured child-mass ratio
  int k_min = 0, k_max = 0;
  uint64_t seed = 0;

  std::vector<DyadicCube> cubes;
  std::vector<std::vector<uint32_t>> gen_cubes;   // per generation offset k-k_min
  std::vector<std::vector<uint32_t>> point_cube;  // [k-k_min][point] -> cube idx

  double ell(int k) const { return scale * std::pow(delta, k); }
  int generations() const { return k_max - k_min + 1; }
  const DyadicCube& cube_of_point(uint32_t pt, int k) const {
    return cubes[point_cube[size_t(k - k_min)][pt]];
  }
  uint32_t cube_index_of_point(uint32_t pt, int k) const {
    return point_cube[size_t(k - k_min)][pt];
  }
};

DyadicGrid build_grid(const DiscreteSHT& S, double delta, GridOptions opt = {});

// lambda-dilate: the ball B(x_c(Q), lambda * c * ell(Q)); lambda >= 1.
std::vector<uint32_t> dilate(const DyadicGrid& G, const DyadicCube& Q,
                             double lambda);
double dilate_measure(const DyadicGrid& G, const DyadicCube& Q, double lambda);

// Verification of the six decomposition properties; exact on the cloud.
struct GridCheckReport {
  bool partition = false, nesting = false, has_child = false,
       unique_parent = false, mass_ratio = false, sandwich = false;
  double eps = 0, outer_c = 0;
  bool all() const {
    return partition && nesting && has_child && unique_parent && mass_ratio &&
           sandwich;
  }
};
GridCheckReport verify_grid(const DyadicGrid& G);

// Rescaled-grid view: generation k of the metric-rescaled space equals
// generation k + shift of the base grid.
struct RescaledGrid {
  const DyadicGrid* base = nullptr;
  double w = 1;
  int shift = 0;  // N_w with delta^{N_w+1} < w <= delta^{N_w}
  double outer_bound = 0;  // c / delta, from the uniformity theorem
};
RescaledGrid rescaled_grid(const DyadicGrid& G, double w);
// Largest sandwich constant realized by the rescaled view under rho/w.
double rescaled_outer_constant(const RescaledGrid& R);

struct CoverReport {
  int tried = 0;
  int failures = 0;
  double c_tilde = 0;  // max over covered balls of ell(Q) / r
};

// Adjacent family: one grid per seed; cover check over sampled balls.
std::vector<DyadicGrid> adjacent_grids(const DiscreteSHT& S, double delta,
                                       const std::vector<uint64_t>& seeds);
CoverReport three_lattice_cover_check(const std::vector<DyadicGrid>& grids,
                                      int ball_samples, uint64_t seed);

const DyadicCube& containing_cube(const DyadicGrid& G, uint32_t pt, int k);

}  // namespace radon

#endif
