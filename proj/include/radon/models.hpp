#ifndef RADON_MODELS_HPP
#define RADON_MODELS_HPP

#include <string>

#include "radon/geometry.hpp"

namespace radon {

// Bundled model curves, selectable by name:
//   identity, parabola, flatline, translation, grushin_coupled, monomial123,
//   sine (generic evaluator, exercises the finite-difference paths)
CurveFamily make_curve(const std::string& name);

// Bundled graded systems:
//   euclidean1, euclidean2, parabola, grushin, monomial123
GradedFieldSystem make_system(const std::string& name);

}  // namespace radon

#endif
