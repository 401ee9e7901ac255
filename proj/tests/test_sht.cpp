#include <cmath>

#include "doctest.h"
#include "radon/models.hpp"
#include "radon/sht.hpp"

using namespace radon;

namespace {

DiscreteSHT interval_cloud(int n = 65) {
  Box b;
  b.lo = Vec{0.0};
  b.hi = Vec{1.0};
  return make_cloud(b, {n, 1, 1, 1}, "euclidean");
}

DiscreteSHT square_cloud(const char* metric, int n = 33) {
  Box b;
  b.lo = Vec{-1.0, -1.0};
  b.hi = Vec{1.0, 1.0};
  return make_cloud(b, {n, n, 1, 1}, metric);
}

}  // namespace

TEST_CASE("metric invariants: symmetry, identity, quasi-triangle") {
  for (const char* name : {"euclidean", "parabola", "heisenberg", "grushin"}) {
    auto m = make_metric(name);
    Rng rng(42);
    int dim = std::string(name) == "heisenberg" ? 3 : 2;
    double worst_kappa = 0;
    for (int s = 0; s < 500; ++s) {
      Vec x(dim), y(dim), z(dim);
      for (int i = 0; i < dim; ++i) {
        x[i] = rng.uniform(-1, 1);
        y[i] = rng.uniform(-1, 1);
        z[i] = rng.uniform(-1, 1);
      }
      CHECK(m->rho(x, y) == doctest::Approx(m->rho(y, x)));
      CHECK(m->rho(x, x) == 0.0);
      double lhs = m->rho(x, y);
      double rhs = m->rho(x, z) + m->rho(z, y);
      if (rhs > 0) worst_kappa = std::max(worst_kappa, lhs / rhs);
    }
    INFO("metric ", name);
    CHECK(worst_kappa <= 2.0);
  }
}

TEST_CASE("ball queries: full cloud, singleton, parabola shape") {
  auto S = square_cloud("euclidean");
  uint32_t center = uint32_t(S.lattice.index_of(Vec{0.0, 0.0}));

  auto all = ball(S, center, 10.0);
  CHECK(all.size() == S.size());

  Vec h = S.lattice.spacing();
  auto self = ball(S, center, 0.5 * h[0]);
  REQUIRE(self.size() == 1);
  CHECK(self[0] == center);

  // parabola metric: bounding box of B(0, r) has side ratio ~ r : r^2
  auto P = make_cloud(S.lattice.box, {129, 129, 1, 1}, "parabola");
  uint32_t c2 = uint32_t(P.lattice.index_of(Vec{0.0, 0.0}));
  double r = 0.5;
  auto B = ball(P, c2, r);
  double w0 = 0, w1 = 0;
  for (uint32_t i : B) {
    w0 = std::max(w0, std::abs(P.pts[i][0]));
    w1 = std::max(w1, std::abs(P.pts[i][1]));
  }
  double ratio = (w1 / (r * r)) / (w0 / r);
  CHECK(ratio > 0.25);
  CHECK(ratio < 4.0);
}

TEST_CASE("ball is monotone in r and nested per the engulfing property") {
  auto S = square_cloud("parabola", 17);
  Rng rng(3);
  for (int s = 0; s < 40; ++s) {
    uint32_t x = uint32_t(rng.next_index(S.size()));
    double r1 = rng.uniform(0.05, 0.6), r2 = r1 + rng.uniform(0, 0.5);
    auto b1 = ball(S, x, r1), b2 = ball(S, x, r2);
    std::vector<char> in2(S.size(), 0);
    for (uint32_t i : b2) in2[i] = 1;
    for (uint32_t i : b1) CHECK(in2[i]);
  }
  // if B(x1,d1) meets B(x2,d2), d1 <= d2, then B(x1,d1) is inside B(x2,3d2)
  for (int s = 0; s < 25; ++s) {
    uint32_t x1 = uint32_t(rng.next_index(S.size()));
    uint32_t x2 = uint32_t(rng.next_index(S.size()));
    double d1 = rng.uniform(0.05, 0.4);
    double d2 = d1 + rng.uniform(0, 0.4);
    auto b1 = ball(S, x1, d1);
    auto b2 = ball(S, x2, d2);
    std::vector<char> in2(S.size(), 0);
    for (uint32_t i : b2) in2[i] = 1;
    bool meets = false;
    for (uint32_t i : b1) meets = meets || in2[i];
    if (!meets) continue;
    auto big = ball(S, x2, 3 * d2);
    std::vector<char> inBig(S.size(), 0);
    for (uint32_t i : big) inBig[i] = 1;
    for (uint32_t i : b1) CHECK(inBig[i]);
  }
}

TEST_CASE("doubling estimates match the homogeneous dimension") {
  auto S1 = interval_cloud(257);
  auto d1 = doubling_estimate(S1, 200, 7);
  CHECK(d1.D == doctest::Approx(2.0).epsilon(0.2));

  auto S2 = square_cloud("euclidean", 65);
  auto d2 = doubling_estimate(S2, 200, 7);
  CHECK(d2.D == doctest::Approx(4.0).epsilon(0.2));

  auto S3 = square_cloud("parabola", 65);
  auto d3 = doubling_estimate(S3, 200, 7);
  CHECK(d3.D == doctest::Approx(8.0).epsilon(0.3));
}

TEST_CASE("doubling estimate is invariant under uniform weight rescaling") {
  auto S = square_cloud("euclidean", 33);
  auto d1 = doubling_estimate(S, 100, 11);
  for (auto& w : S.weights) w *= 7.5;
  auto d2 = doubling_estimate(S, 100, 11);
  CHECK(d1.D == doctest::Approx(d2.D));
}

TEST_CASE("uniform perfectness holds on intervals and parabola clouds") {
  auto S = interval_cloud(129);
  CHECK(uniform_perfectness_check(S, 3.0, 200, 5).ok);

  auto P = square_cloud("parabola", 33);
  CHECK(uniform_perfectness_check(P, 3.0, 200, 5).ok);
}

TEST_CASE("two-point space fails perfectness for small A") {
  DiscreteSHT S;
  S.lattice.box.lo = Vec{0.0};
  S.lattice.box.hi = Vec{1.0};
  S.lattice.counts = {2, 1, 1, 1};
  S.lattice.dim = 1;
  S.pts = S.lattice.points();
  S.weights = {1.0, 1.0};
  S.metric = make_metric("euclidean");
  S.metric_name = "euclidean";
  // radii between gap/A and gap have no witnesses; with diam = gap = 1 any
  // r in (1/A, 1) fails; A small makes the whole band empty of witnesses
  auto rep = uniform_perfectness_check(S, 1.5, 64, 3);
  CHECK_FALSE(rep.ok);
}

TEST_CASE("grid function calculus: integral, norms, interpolation") {
  auto S = interval_cloud(65);
  GridFunction f(S, 1.0);
  CHECK(f.integral() == doctest::Approx(S.total_measure()));
  CHECK(f.lp_norm(2.0) == doctest::Approx(std::sqrt(S.total_measure())));

  // interpolation reproduces linear functions off-lattice
  GridFunction g(S);
  for (size_t i = 0; i < S.size(); ++i) g.v[i] = 3.0 * S.pts[i][0] - 1.0;
  CHECK(interp(g, Vec{0.333}) == doctest::Approx(3 * 0.333 - 1.0));
  CHECK(interp(g, Vec{1.7}) == 0.0);  // zero extension outside
}

TEST_CASE("cc-backed cloud: grushin matrix metric is symmetric and doubling") {
  auto sys = make_system("grushin");
  auto S = make_cc_cloud(sys, {24, 24, 1, 1}, 0.25, Exec::Serial);
  REQUIRE(S.size() == 24 * 24);
  // symmetry and vanishing diagonal by construction
  for (size_t i = 0; i < S.size(); i += 37)
    for (size_t j = 0; j < S.size(); j += 41) {
      CHECK(S.rho(i, j) == S.rho(j, i));
      CHECK(S.rho(i, i) == 0.0);
    }
  auto d = doubling_estimate(S, 60, 9);
  CHECK(d.D < 64.0);
  MESSAGE("grushin cc cloud doubling D = ", d.D);
}
