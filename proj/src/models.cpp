#include "radon/models.hpp"

#include <cmath>

namespace radon {

namespace {

Box square(double half, int dim) {
  Box b;
  b.lo = Vec(dim);
  b.hi = Vec(dim);
  for (int i = 0; i < dim; ++i) {
    b.lo[i] = -half;
    b.hi[i] = half;
  }
  return b;
}

// variables: x_0..x_{n-1}, then t_0..t_{k-1}
Poly X(int i) { return Poly::var(i); }
Poly T(int n, int j) { return Poly::var(n + j); }

}  // namespace

CurveFamily make_curve(const std::string& name) {
  CurveFamily g;
  g.name = name;
  if (name == "identity") {
    g.n = 2;
    g.k = 1;
    g.box = square(1.0, 2);
    g.poly = {X(0), X(1)};
    return g;
  }
  if (name == "parabola") {
    // gamma_t(x) = x - (t, t^2)
    g.n = 2;
    g.k = 1;
    g.box = square(1.0, 2);
    g.poly = {X(0) - T(2, 0), X(1) - T(2, 0) * T(2, 0)};
    return g;
  }
  if (name == "flatline") {
    g.n = 2;
    g.k = 1;
    g.box = square(1.0, 2);
    g.poly = {X(0) - T(2, 0), X(1)};
    return g;
  }
  if (name == "translation") {
    // gamma_t(x) = x - (t1, t2), k = 2
    g.n = 2;
    g.k = 2;
    g.box = square(1.0, 2);
    g.poly = {X(0) - T(2, 0), X(1) - T(2, 1)};
    return g;
  }
  if (name == "grushin_coupled") {
    // gamma_t(x) = (x1 + t, x2 + t x1); Taylor fields d_1 + x1 d_2, -d_2
    g.n = 2;
    g.k = 1;
    g.box = square(1.0, 2);
    g.poly = {X(0) + T(2, 0), X(1) + T(2, 0) * X(0)};
    return g;
  }
  if (name == "monomial123") {
    g.n = 3;
    g.k = 1;
    g.box = square(1.0, 3);
    Poly t = T(3, 0);
    g.poly = {X(0) - t, X(1) - t * t, X(2) - t * t * t};
    return g;
  }
  if (name == "sine") {
    // generic evaluator only; x - (sin t, 1 - cos t)
    g.n = 2;
    g.k = 1;
    g.box = square(1.0, 2);
    g.fn = [](const Vec& t, const Vec& x) {
      Vec r(2);
      r[0] = x[0] - std::sin(t[0]);
      r[1] = x[1] - (1.0 - std::cos(t[0]));
      return r;
    };
    return g;
  }
  throw ContractViolation("unknown curve: " + name);
}

GradedFieldSystem make_system(const std::string& name) {
  GradedFieldSystem sys;
  if (name == "euclidean1") {
    sys.box = square(1.0, 1);
    sys.fields.push_back({VectorField::coordinate(1, 0), 1, false});
    return sys;
  }
  if (name == "euclidean2") {
    sys.box = square(1.0, 2);
    sys.fields.push_back({VectorField::coordinate(2, 0), 1, false});
    sys.fields.push_back({VectorField::coordinate(2, 1), 1, false});
    return sys;
  }
  if (name == "parabola") {
    // Taylor fields of the parabola curve: (-d_1, 1), (-2 d_2, 2)
    sys.box = square(1.0, 2);
    sys.fields.push_back({VectorField::coordinate(2, 0, -1.0), 1, false});
    sys.fields.push_back({VectorField::coordinate(2, 1, -2.0), 2, false});
    return sys;
  }
  if (name == "grushin") {
    // {d_1 (1), x1 d_2 (1), d_2 (2)}
    sys.box = square(1.0, 2);
    sys.fields.push_back({VectorField::coordinate(2, 0), 1, false});
    PolyMap xdy(2);
    xdy[1] = Poly::var(0);
    sys.fields.push_back({VectorField::from_poly(2, std::move(xdy)), 1, false});
    sys.fields.push_back({VectorField::coordinate(2, 1), 2, false});
    return sys;
  }
  if (name == "monomial123") {
    sys.box = square(1.0, 3);
    sys.fields.push_back({VectorField::coordinate(3, 0, -1.0), 1, false});
    sys.fields.push_back({VectorField::coordinate(3, 1, -2.0), 2, false});
    sys.fields.push_back({VectorField::coordinate(3, 2, -3.0), 3, false});
    return sys;
  }
  throw ContractViolation("unknown system: " + name);
}

}  // namespace radon
