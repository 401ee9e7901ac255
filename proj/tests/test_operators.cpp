#include <cmath>

#include "doctest.h"
#include "radon/operators.hpp"
#include "radon/models.hpp"

using namespace radon;

namespace {

DiscreteSHT square_cloud(int n = 65, double half = 1.0) {
  Box b;
  b.lo = Vec{-half, -half};
  b.hi = Vec{half, half};
  return make_cloud(b, {n, n, 1, 1}, "euclidean");
}

RadonOperator parabola_op(double a = 0.2, double delta = 0.5, int J = 6,
                          int nodes = 128) {
  Bump psi1{Vec{0.0, 0.0}, 0.3, 0.5};
  Bump psi2{Vec{0.0, 0.0}, 0.5, 0.7};
  return make_radon_operator("parabola", a, delta, J, psi1, psi2, nodes);
}

}  // namespace

TEST_CASE("kernel ladder: reconstruction, mean zero, supports, norms") {
  auto K = CZKernel::hilbert(0.25);
  auto L = split_kernel(K, 0.25, 10);

  // reconstruction on the covered annulus is exact by telescoping
  double sup_err = 0;
  for (int i = 0; i < 2000; ++i) {
    double t = std::pow(0.25, 10) * 0.25 +
               (0.25 - std::pow(0.25, 10) * 0.25) * (i + 0.5) / 2000.0;
    for (double sgn : {-1.0, 1.0}) {
      Vec tv{sgn * t};
      sup_err = std::max(sup_err, std::abs(L.reconstruct(tv) - K.eval(tv)));
    }
  }
  CHECK(sup_err <= 1e-8);

  // mean-zero pieces: the hilbert kernel is odd, so every ring mean vanishes
  for (int j = 0; j <= 10; ++j) {
    const int N = 20001;
    double acc = 0, dt = 2 * L.a / N;
    for (int i = 0; i < N; ++i) acc += L.chi(j, Vec{-L.a + (i + 0.5) * dt}) * dt;
    CHECK(std::abs(acc) <= 1e-12);
  }

  // supports inside B(a)
  for (int j = 0; j <= 10; ++j) {
    CHECK(L.chi(j, Vec{L.a * 1.01}) == 0.0);
    CHECK(L.chi(j, Vec{-L.a * 1.2}) == 0.0);
  }

  // uniform C^0/C^1 bounds across the ladder
  double c1min = 1e300, c1max = 0;
  for (int j = 1; j <= 10; ++j) {
    double c1 = L.c1_norm(j);
    c1min = std::min(c1min, c1);
    c1max = std::max(c1max, c1);
  }
  CHECK(c1max / c1min <= 2.0);
  MESSAGE("ladder C1 range [", c1min, ", ", c1max, "]");
}

TEST_CASE("kernel diagnostics: differential constants and cancellation") {
  auto K = CZKernel::hilbert(0.25);
  auto C = K.measure_diff_constants();
  CHECK(C[0] == doctest::Approx(1.0).epsilon(0.01));  // |1/t| * |t|
  CHECK(C[1] == doctest::Approx(1.0).epsilon(0.05));
  CHECK(C[2] == doctest::Approx(2.0).epsilon(0.05));
  CHECK(K.cancellation_functional() < 10.0);
}

TEST_CASE("single scale: averaging constants and cancellation") {
  auto S = square_cloud(65);
  auto op = parabola_op();

  // chi with unit integral (under the operator's own t-lattice) averages
  // constants to 1 on supp psi1
  double a = op.ladder.a;
  auto unit_chi = [a](const Vec& t) {
    double u = std::abs(t[0]) / a;
    return u >= 0.8 ? 0.0 : Bump::profile((0.8 - u) / 0.4);
  };
  double mass = 0;
  const int N = op.t_nodes;
  for (int i = 0; i < N; ++i)
    mass += unit_chi(Vec{-a + 2 * a * (i + 0.5) / N}) * (2 * a / N);
  auto chi_normal = [unit_chi, mass](const Vec& t) { return unit_chi(t) / mass; };

  GridFunction one(S, 1.0);
  auto T1 = apply_single_scale(op, chi_normal, one);
  long c = S.lattice.index_of(Vec{0.0, 0.0});
  CHECK(T1.v[c] == doctest::Approx(1.0).epsilon(1e-9));

  // mean-zero chi kills constants
  auto Tz = apply_single_scale(
      op, [&op](const Vec& t) { return op.ladder.chi(1, t); }, one);
  CHECK(std::abs(Tz.v[c]) <= 1e-12);
}

TEST_CASE("single scale quadrature oracle on the parabola") {
  auto S = square_cloud(129);
  auto op = parabola_op(0.2, 0.5, 6, 256);
  double a = op.ladder.a;

  // one-sided normalized bump on [a/2, a]
  auto chi = [a](const Vec& t) {
    if (t[0] < a / 2 || t[0] > a) return 0.0;
    double u = (t[0] - a / 2) / (a / 2);
    return Bump::profile(1 - std::abs(2 * u - 1));
  };
  double mass = 0, m1 = 0;
  const int N = 1 << 16;
  for (int i = 0; i < N; ++i) {
    double t = -a + 2 * a * (i + 0.5) / N;
    mass += chi(Vec{t}) * (2 * a / N);
    m1 += t * chi(Vec{t}) * (2 * a / N);
  }
  auto chin = [chi, mass](const Vec& t) { return chi(t) / mass; };

  GridFunction f(S);
  Bump bump{Vec{0.0, 0.0}, 0.5, 0.8};
  for (size_t i = 0; i < S.size(); ++i) f.v[i] = S.pts[i][0] * bump(S.pts[i]);
  auto Tf = apply_single_scale(op, chin, f);
  long c = S.lattice.index_of(Vec{0.0, 0.0});
  // value at 0 is -int t chi(t) dt up to quadrature and interpolation error
  CHECK(Tf.v[c] == doctest::Approx(-m1 / mass).epsilon(5e-3));
}

TEST_CASE("dilated pieces: i = 0 reduction and constant annihilation") {
  auto S = square_cloud(65);
  auto op = parabola_op();
  auto f = random_smooth(S, 99);

  auto d0 = apply_dilated(op, 2, 0, f);
  auto ss = apply_single_scale(
      op, [&op](const Vec& t) { return op.ladder.chi(2, t); }, f);
  for (size_t i = 0; i < S.size(); ++i)
    CHECK(d0.v[i] == doctest::Approx(ss.v[i]).epsilon(1e-12));

  GridFunction one(S, 1.0);
  for (int j : {1, 2}) {
    auto Tj = apply_dilated(op, j, 3, one);
    long c = S.lattice.index_of(Vec{0.0, 0.0});
    CHECK(std::abs(Tj.v[c]) <= 1e-12);
  }
}

TEST_CASE("full operator: zero input, linearity, bounded L2 quotients") {
  auto S = square_cloud(65);
  auto op = parabola_op(0.2, 0.5, 5, 64);

  GridFunction zero(S, 0.0);
  auto Tz = apply_full(op, zero);
  for (double v : Tz.v) CHECK(v == 0.0);

  auto f = random_smooth(S, 5), g = random_smooth(S, 6);
  auto Tf = apply_full(op, f), Tg = apply_full(op, g);
  GridFunction h(S);
  for (size_t i = 0; i < S.size(); ++i) h.v[i] = 2.0 * f.v[i] - 0.5 * g.v[i];
  auto Th = apply_full(op, h);
  for (size_t i = 0; i < S.size(); ++i)
    CHECK(std::abs(Th.v[i] - (2.0 * Tf.v[i] - 0.5 * Tg.v[i])) <= 1e-12);

  double worst = 0;
  for (uint64_t s = 0; s < 10; ++s) {
    auto u = random_smooth(S, 100 + s);
    double un = u.lp_norm(2.0);
    if (un == 0) continue;
    worst = std::max(worst, apply_full(op, u).lp_norm(2.0) / un);
  }
  CHECK(worst < 50.0);
  MESSAGE("full operator L2 quotient bound over 10 random f: ", worst);
}

TEST_CASE("adjoint: pairing identity, even-kernel self-adjointness, zero") {
  auto S = square_cloud(49);
  auto op = parabola_op(0.2, 0.5, 4, 64);

  for (uint64_t s = 0; s < 3; ++s) {
    auto f = random_smooth(S, 200 + s);
    auto g = random_smooth(S, 300 + s);
    auto Tf = apply_dilated(op, 1, 1, f);
    auto Tsg = adjoint_apply(op, 1, 1, g);
    double lhs = pairing(Tf, g), rhs = pairing(f, Tsg);
    CHECK(std::abs(lhs - rhs) <= 1e-8 * std::max(1.0, std::abs(lhs)));
  }

  GridFunction z(S, 0.0);
  auto Tz = adjoint_apply(op, 1, 1, z);
  for (double v : Tz.v) CHECK(v == 0.0);

  // flat translation with an even kernel and matching interior cutoffs is
  // self-adjoint up to rounding (zero extension never clips inside supports)
  RadonOperator flat;
  flat.gamma = make_curve("flatline");
  CZKernel even;
  even.k = 1;
  even.a = 0.2;
  even.name = "even";
  even.eval = [](const Vec& t) { return 1.0 / std::abs(t[0]); };
  flat.ladder = split_kernel(even, 0.5, 4);
  flat.psi1 = Bump{Vec{0.0, 0.0}, 0.5, 0.7};
  flat.psi2 = flat.psi1;
  flat.t_nodes = 64;
  auto f = random_smooth(S, 77);
  auto g = random_smooth(S, 78);
  double d = pairing(apply_dilated(flat, 1, 1, f), g) -
             pairing(f, apply_dilated(flat, 1, 1, g));
  CHECK(std::abs(d) <= 1e-10);
}

TEST_CASE("monomial hilbert transform: symmetry, constants, oracle") {
  // even functions die at the origin for alpha = (1) in one dimension
  Box b1;
  b1.lo = Vec{-1.0};
  b1.hi = Vec{1.0};
  auto S1 = make_cloud(b1, {257, 1, 1, 1}, "euclidean");
  GridFunction even(S1);
  for (size_t i = 0; i < S1.size(); ++i)
    even.v[i] = std::cos(3.0 * S1.pts[i][0]);
  auto H1 = hilbert_monomial({1}, even, 0.25, 1e-3);
  long c1 = S1.lattice.index_of(Vec{0.0});
  CHECK(std::abs(H1.v[c1]) <= 1e-12);

  // constants on a huge box are annihilated
  auto S = square_cloud(65, 4.0);
  GridFunction one(S, 1.0);
  auto H2 = hilbert_monomial({1, 2}, one, 0.25, 1e-3);
  long c = S.lattice.index_of(Vec{0.0, 0.0});
  CHECK(std::abs(H2.v[c]) <= 1e-12);

  // f = x1 * bump: value at 0 is -2 (a - t_min) while the bump plateau covers
  // the curve
  auto S3 = square_cloud(257, 1.0);
  GridFunction f(S3);
  Bump bump{Vec{0.0, 0.0}, 0.6, 0.9};
  for (size_t i = 0; i < S3.size(); ++i) f.v[i] = S3.pts[i][0] * bump(S3.pts[i]);
  double a = 0.2, tmin = 1e-3;
  auto H3 = hilbert_monomial({1, 2}, f, a, tmin, 512);
  long c3 = S3.lattice.index_of(Vec{0.0, 0.0});
  CHECK(H3.v[c3] == doctest::Approx(-2 * (a - tmin)).epsilon(1e-3));

  CHECK_THROWS_AS(hilbert_monomial({2, 1}, f, 0.2, 1e-3), ContractViolation);
}

TEST_CASE("truncation consistency: halving the tail changes pairings little") {
  auto S = square_cloud(65);
  Bump psi1{Vec{0.0, 0.0}, 0.3, 0.5};
  Bump psi2{Vec{0.0, 0.0}, 0.5, 0.7};
  auto f = random_smooth(S, 41);
  auto g = random_smooth(S, 42);
  // J and J+2 ladders: the omitted tail acts on smooth f through mean-zero
  // pieces at scales delta^J a, so pairings move very little
  auto opA = make_radon_operator("parabola", 0.2, 0.5, 8, psi1, psi2, 64);
  auto opB = make_radon_operator("parabola", 0.2, 0.5, 10, psi1, psi2, 64);
  double pa = pairing(apply_full(opA, f), g);
  double pb = pairing(apply_full(opB, f), g);
  CHECK(std::abs(pa - pb) <= 1e-4 * std::max(1.0, std::abs(pa)));
}
