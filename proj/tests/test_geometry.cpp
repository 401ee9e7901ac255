#include <cmath>

#include "doctest.h"
#include "radon/geometry.hpp"
#include "radon/models.hpp"

using namespace radon;

namespace {

// Independent oracle for the Taylor fields: difference the composed map
// e -> gamma_{et}(gamma_t^{-1}(x)) on a small t-stencil, then solve the normal
// equations of the monomial fit by hand. Exercises none of the series code.
Vec oracle_taylor_coeff(const CurveFamily& g, const std::vector<int>& alpha,
                        int N, const Vec& x) {
  const int k = g.k, n = g.n;
  std::vector<std::vector<int>> alphas;
  std::function<void(std::vector<int>&, int, int)> gen = [&](std::vector<int>& c,
                                                             int pos, int left) {
    if (pos == k) {
      int tot = 0;
      for (int e : c) tot += e;
      if (tot >= 1 && tot < N) alphas.push_back(c);
      return;
    }
    for (int e = 0; e <= left; ++e) {
      c[pos] = e;
      gen(c, pos + 1, left - e);
    }
    c[pos] = 0;
  };
  std::vector<int> cur(k, 0);
  gen(cur, 0, N - 1);

  std::vector<Vec> stencil;
  const double t0 = 0.015;
  std::vector<double> lv = {-1.5, -1.0, -0.5, 0.5, 1.0, 1.5};
  std::function<void(Vec, int)> st = [&](Vec c, int pos) {
    if (pos == k) {
      bool nz = false;
      for (int j = 0; j < k; ++j) nz = nz || c[j] != 0;
      if (nz) stencil.push_back(c);
      return;
    }
    for (double l : lv) {
      Vec nx = c;
      nx[pos] = l * t0;
      st(nx, pos + 1);
    }
    Vec nx = c;
    nx[pos] = 0;
    st(nx, pos + 1);
  };
  st(Vec(k), 0);

  const int m = int(alphas.size());
  // normal equations A^T A c = A^T b per component
  std::vector<std::vector<double>> ata(m, std::vector<double>(m, 0));
  std::vector<std::vector<double>> atb(m, std::vector<double>(n, 0));
  auto mono = [&](const std::vector<int>& a, const Vec& t) {
    double v = 1;
    for (int j = 0; j < k; ++j)
      for (int e = 0; e < a[j]; ++e) v *= t[j];
    return v;
  };
  for (const Vec& t : stencil) {
    Vec w;
    {
      Vec inv = g.invert(t, x);
      const double h = 1e-4;
      Vec tp(k), tm(k);
      for (int j = 0; j < k; ++j) {
        tp[j] = (1 + h) * t[j];
        tm[j] = (1 - h) * t[j];
      }
      Vec gp = g.eval(tp, inv), gm = g.eval(tm, inv);
      w = Vec(n);
      for (int i = 0; i < n; ++i) w[i] = (gp[i] - gm[i]) / (2 * h);
    }
    std::vector<double> row(m);
    for (int c = 0; c < m; ++c) row[c] = mono(alphas[c], t);
    for (int a = 0; a < m; ++a) {
      for (int b = 0; b < m; ++b) ata[a][b] += row[a] * row[b];
      for (int i = 0; i < n; ++i) atb[a][i] += row[a] * w[i];
    }
  }
  // gaussian elimination
  for (int col = 0; col < m; ++col) {
    int piv = col;
    for (int r = col + 1; r < m; ++r)
      if (std::abs(ata[r][col]) > std::abs(ata[piv][col])) piv = r;
    std::swap(ata[piv], ata[col]);
    std::swap(atb[piv], atb[col]);
    for (int r = 0; r < m; ++r) {
      if (r == col) continue;
      double f = ata[r][col] / ata[col][col];
      for (int c2 = col; c2 < m; ++c2) ata[r][c2] -= f * ata[col][c2];
      for (int i = 0; i < n; ++i) atb[r][i] -= f * atb[col][i];
    }
  }
  int idx = 0;
  for (int c = 0; c < m; ++c)
    if (alphas[c] == alpha) idx = c;
  Vec out(n);
  for (int i = 0; i < n; ++i) out[i] = atb[idx][i] / ata[idx][idx];
  return out;
}

const TaylorField* find_alpha(const std::vector<TaylorField>& fs,
                              const std::vector<int>& alpha) {
  for (const auto& f : fs)
    if (f.alpha == alpha) return &f;
  return nullptr;
}

}  // namespace

TEST_CASE("lie brackets: constants commute, coordinates twist") {
  auto dx = VectorField::coordinate(2, 0);
  auto dy = VectorField::coordinate(2, 1);
  PolyMap xdy(2);
  xdy[1] = Poly::var(0);
  auto xd2 = VectorField::from_poly(2, xdy);

  CHECK(lie_bracket(dx, dy).is_identically_zero());
  CHECK(lie_bracket(xd2, xd2).is_identically_zero());

  VectorField b = lie_bracket(dx, xd2);  // = dy
  Vec at{0.3, -0.7};
  Vec v = b.eval(at);
  CHECK(v[0] == doctest::Approx(0.0));
  CHECK(v[1] == doctest::Approx(1.0));
}

TEST_CASE("lie bracket finite-difference path matches exact") {
  auto dx = VectorField::coordinate(2, 0);
  PolyMap xdy(2);
  xdy[1] = Poly::var(0);
  auto xd2 = VectorField::from_poly(2, xdy);
  auto dx_fn = VectorField::from_fn(2, [&](const Vec& x) { return dx.eval(x); });
  auto xd2_fn = VectorField::from_fn(2, [&](const Vec& x) { return xd2.eval(x); });
  VectorField b = lie_bracket(dx_fn, xd2_fn);
  Vec at{0.2, 0.4};
  Vec v = b.eval(at);
  CHECK(v[0] == doctest::Approx(0.0).epsilon(1e-8));
  CHECK(v[1] == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("bracket antisymmetry and Jacobi identity on polynomial fields") {
  PolyMap a(2), b(2), c(2);
  a[0] = Poly::var(1);                      // y d_x
  a[1] = Poly::var(0) * Poly::var(0);       // x^2 d_y
  b[0] = Poly::constant(1.0);               // d_x
  b[1] = Poly::var(0);                      // x d_y
  c[0] = Poly::var(0) * Poly::var(1);       // xy d_x
  c[1] = Poly::constant(-2.0);              // -2 d_y
  VectorField X = VectorField::from_poly(2, a);
  VectorField Y = VectorField::from_poly(2, b);
  VectorField Z = VectorField::from_poly(2, c);

  VectorField anti = lie_bracket(X, Y);
  VectorField anti2 = lie_bracket(Y, X);
  VectorField jac1 = lie_bracket(X, lie_bracket(Y, Z));
  VectorField jac2 = lie_bracket(Y, lie_bracket(Z, X));
  VectorField jac3 = lie_bracket(Z, lie_bracket(X, Y));
  Rng rng(7);
  for (int s = 0; s < 20; ++s) {
    Vec x{rng.uniform(-1, 1), rng.uniform(-1, 1)};
    Vec u = anti.eval(x), v = anti2.eval(x);
    Vec j1 = jac1.eval(x), j2 = jac2.eval(x), j3 = jac3.eval(x);
    for (int i = 0; i < 2; ++i) {
      CHECK(std::abs(u[i] + v[i]) < 1e-10);
      CHECK(std::abs(j1[i] + j2[i] + j3[i]) < 1e-10);
    }
  }
}

TEST_CASE("taylor fields: identity curve gives zero fields") {
  auto g = make_curve("identity");
  auto fs = expand_taylor_fields(g, 3);
  for (const auto& f : fs) CHECK(f.field.is_identically_zero());
}

TEST_CASE("taylor fields of the parabola match the finite-difference oracle") {
  auto g = make_curve("parabola");
  auto fs = expand_taylor_fields(g, 3);
  const TaylorField* x1 = find_alpha(fs, {1});
  const TaylorField* x2 = find_alpha(fs, {2});
  REQUIRE(x1 != nullptr);
  REQUIRE(x2 != nullptr);

  Vec at{0.1, -0.2};
  Vec v1 = x1->field.eval(at), v2 = x2->field.eval(at);
  CHECK(v1[0] == doctest::Approx(-1.0));
  CHECK(v1[1] == doctest::Approx(0.0));
  CHECK(v2[0] == doctest::Approx(0.0));
  CHECK(v2[1] == doctest::Approx(-2.0));

  Vec o1 = oracle_taylor_coeff(g, {1}, 3, at);
  Vec o2 = oracle_taylor_coeff(g, {2}, 3, at);
  CHECK(o1[0] == doctest::Approx(-1.0).epsilon(1e-5));
  CHECK(o1[1] == doctest::Approx(0.0).epsilon(1e-5));
  CHECK(o2[0] == doctest::Approx(0.0).epsilon(1e-5));
  CHECK(o2[1] == doctest::Approx(-2.0).epsilon(1e-5));
}

TEST_CASE("taylor fields of the coupled curve carry x-dependence") {
  auto g = make_curve("grushin_coupled");
  auto fs = expand_taylor_fields(g, 3);
  const TaylorField* x1 = find_alpha(fs, {1});
  REQUIRE(x1 != nullptr);
  Vec a{0.5, 0.0}, b{-0.3, 0.2};
  Vec va = x1->field.eval(a), vb = x1->field.eval(b);
  CHECK(va[1] == doctest::Approx(0.5));
  CHECK(vb[1] == doctest::Approx(-0.3));
  // oracle agreement at a sampled point
  Vec o = oracle_taylor_coeff(g, {1}, 3, a);
  CHECK(o[0] == doctest::Approx(va[0]).epsilon(1e-5));
  CHECK(o[1] == doctest::Approx(va[1]).epsilon(1e-5));
}

TEST_CASE("taylor remainder decays at the advertised order") {
  auto g = make_curve("sine");  // generic evaluator path
  for (int N = 2; N <= 4; ++N) {
    auto fs = expand_taylor_fields(g, N);
    std::vector<double> lt, ld;
    Vec x{0.05, -0.1};
    for (double tv : {2e-3, 4e-3, 8e-3}) {
      Vec t{tv};
      double d = taylor_remainder_defect(g, fs, N, t, x);
      if (d < 1e-13) continue;  // exact truncation; nothing to fit
      lt.push_back(std::log(tv));
      ld.push_back(std::log(d));
    }
    if (lt.size() < 2) continue;
    double n = double(lt.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < lt.size(); ++i) {
      sx += lt[i];
      sy += ld[i];
      sxx += lt[i] * lt[i];
      sxy += lt[i] * ld[i];
    }
    double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    CHECK(slope >= N - 0.2);
  }
}

TEST_CASE("hormander type: spanning, bracket-generated, degenerate") {
  auto dx = VectorField::coordinate(2, 0);
  auto dy = VectorField::coordinate(2, 1);
  PolyMap xdy(2);
  xdy[1] = Poly::var(0);
  auto xd2 = VectorField::from_poly(2, xdy);
  Vec origin{0.0, 0.0};

  auto m1 = hormander_type({dx, dy}, origin, 3);
  REQUIRE(m1.has_value());
  CHECK(*m1 == 1);

  auto m2 = hormander_type({dx, xd2}, origin, 3);
  REQUIRE(m2.has_value());
  CHECK(*m2 == 2);

  PolyMap xdx(1);
  xdx[0] = Poly::var(0);
  auto xd1 = VectorField::from_poly(1, xdx);
  Vec origin1{0.0};
  origin1.n = 1;
  CHECK_FALSE(hormander_type({xd1}, origin1, 5).has_value());
}

TEST_CASE("curvature condition: parabola yes, flat line no, translation beta=0") {
  auto wit = curvature_cj_check(make_curve("parabola"), 4);
  REQUIRE(wit.has_value());
  CHECK(wit->c > 0);

  CHECK_FALSE(curvature_cj_check(make_curve("flatline"), 5).has_value());

  auto tw = curvature_cj_check(make_curve("translation"), 3);
  REQUIRE(tw.has_value());
  int tot = 0;
  for (int b : tw->beta) tot += b;
  CHECK(tot == 0);
}

TEST_CASE("curvature and hormander agree on all bundled model curves") {
  for (const char* name :
       {"parabola", "flatline", "translation", "grushin_coupled", "monomial123"}) {
    auto g = make_curve(name);
    auto fs = expand_taylor_fields(g, 4);
    std::vector<VectorField> raw;
    for (const auto& f : fs)
      if (!(f.field.is_poly() && f.field.is_identically_zero()))
        raw.push_back(f.field);
    Vec origin(g.n);
    bool horm = !raw.empty() && hormander_type(raw, origin, 4).has_value();
    bool cj = curvature_cj_check(g, 6).has_value();
    INFO("curve ", name);
    CHECK(horm == cj);
  }
}

TEST_CASE("flows: constant, shear, rotation") {
  auto dx = VectorField::coordinate(2, 0);
  Vec p = flow(dx, 0.25, Vec{0.0, 0.0});
  CHECK(p[0] == doctest::Approx(0.25));
  CHECK(p[1] == doctest::Approx(0.0));

  PolyMap sh(2);
  sh[1] = Poly::var(0);
  auto shear = VectorField::from_poly(2, sh);
  Vec q = flow(shear, 0.5, Vec{1.0, 0.0});
  CHECK(q[0] == doctest::Approx(1.0));
  CHECK(q[1] == doctest::Approx(0.5));

  PolyMap rot(2);
  rot[0] = Poly::var(1).scaled(-1.0);
  rot[1] = Poly::var(0);
  auto R = VectorField::from_poly(2, rot);
  Vec r = flow(R, 1.5707963267948966, Vec{1.0, 0.0}, 1e-3);
  CHECK(std::abs(r[0] - 0.0) < 1e-8);
  CHECK(std::abs(r[1] - 1.0) < 1e-8);
}

TEST_CASE("flow raises on domain exit") {
  auto dx = VectorField::coordinate(2, 0);
  Box b;
  b.lo = Vec{-1.0, -1.0};
  b.hi = Vec{1.0, 1.0};
  CHECK_THROWS_AS(flow(dx, 3.0, Vec{0.0, 0.0}, b, 1e-2), DomainError);
}

TEST_CASE("cc distance: euclidean flows at unit speed") {
  auto sys = make_system("euclidean2");
  double d = cc_distance(sys, Vec{0.0, 0.0}, Vec{0.5, 0.0}, 0.02);
  CHECK(d == doctest::Approx(0.5).epsilon(0.1));
  CHECK(cc_distance(sys, Vec{0.25, 0.25}, Vec{0.25, 0.25}, 0.01) == 0.0);
}

TEST_CASE("cc distance on the grushin system scales like sqrt(h)") {
  auto sys = make_system("grushin");
  // narrow anisotropic boxes around the vertical segment; the ratio
  // rho / sqrt(h) stays in a fixed band across three heights
  double c1 = 1e9, c2 = 0;
  for (double h : {1e-2, 1e-3, 1e-4}) {
    GradedFieldSystem local = sys;
    double w = 4 * std::sqrt(h);
    local.box.lo = Vec{-w, -h};
    local.box.hi = Vec{w, 2 * h};
    CCParams p;
    double d = cc_distance_on_lattice(local, Vec{0.0, 0.0}, Vec{0.0, h},
                                      0.05 * std::sqrt(h), {257, 13, 1, 1}, p);
    double ratio = d / std::sqrt(h);
    c1 = std::min(c1, ratio);
    c2 = std::max(c2, ratio);
  }
  CHECK(c1 > 0.05);
  CHECK(c2 < 20.0);
  MESSAGE("grushin ratio band [", c1, ", ", c2, "]");
}

TEST_CASE("volume proxy: parabola system and euclidean") {
  auto par = make_system("parabola");
  Vec x{0.3, 0.1};
  CHECK(volume_proxy(par, x, 0.5) == doctest::Approx(2 * 0.125));
  CHECK(volume_proxy(par, x, 0.0) == 0.0);

  auto eu = make_system("euclidean2");
  CHECK(volume_proxy(eu, x, 0.25) == doctest::Approx(0.0625));
}

TEST_CASE("graded system generation: parabola, raw grushin via curve, identity") {
  auto sys = generate_graded_system(make_curve("parabola"), 2);
  CHECK(sys.size() == 2);
  bool deg1 = false, deg2 = false;
  for (const auto& g : sys.fields) {
    if (g.degree == 1) deg1 = true;
    if (g.degree == 2) deg2 = true;
  }
  CHECK(deg1);
  CHECK(deg2);

  CHECK_THROWS_AS(generate_graded_system(make_curve("identity"), 3),
                  CurvatureError);
}

TEST_CASE("scaling maps: affine case, parabola determinant, grushin ratio") {
  auto eu = make_system("euclidean2");
  auto phi = build_scaling_map(eu, Vec{0.0, 0.0}, 1.0);
  Vec u{0.2, -0.3};
  Vec y = phi.apply(u);
  CHECK(y[0] == doctest::Approx(0.2));
  CHECK(y[1] == doctest::Approx(-0.3));
  CHECK(phi.comparability_ratio == doctest::Approx(1.0).epsilon(1e-6));

  auto par = make_system("parabola");
  auto phi2 = build_scaling_map(par, Vec{0.0, 0.0}, 0.25);
  CHECK(phi2.det_at_zero == doctest::Approx(2.0 * std::pow(0.25, 3)));

  auto gr = make_system("grushin");
  auto phi3 = build_scaling_map(gr, Vec{1.0, 0.0}, 0.125);
  CHECK(phi3.comparability_ratio <= 4.0);
  MESSAGE("grushin scaling comparability ", phi3.comparability_ratio);
}

TEST_CASE("scaling map selects J0 by determinant with lexicographic ties") {
  // duplicate coordinate fields force a tie; the first (lex) pair must win
  GradedFieldSystem sys;
  sys.box.lo = Vec{-1.0, -1.0};
  sys.box.hi = Vec{1.0, 1.0};
  sys.fields.push_back({VectorField::coordinate(2, 0), 1, false});
  sys.fields.push_back({VectorField::coordinate(2, 1), 1, false});
  sys.fields.push_back({VectorField::coordinate(2, 0), 1, false});
  auto phi = build_scaling_map(sys, Vec{0.0, 0.0}, 1.0);
  CHECK(phi.J0 == std::vector<int>{0, 1});
}
