#ifndef RADON_COMMON_HPP
#define RADON_COMMON_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace radon {

// Small dense vector for points in R^n and parameters in R^k, n <= 4.
// Value type everywhere; no heap traffic in inner loops.
struct Vec {
  std::array<double, 4> a{0, 0, 0, 0};
  int n = 0;

  Vec() = default;
  explicit Vec(int dim) : n(dim) {}
  Vec(std::initializer_list<double> xs) {
    n = static_cast<int>(xs.size());
    int i = 0;
    for (double x : xs) a[i++] = x;
  }
  double& operator[](int i) { return a[i]; }
  double operator[](int i) const { return a[i]; }
  int size() const { return n; }

  Vec& operator+=(const Vec& o) {
    for (int i = 0; i < n; ++i) a[i] += o.a[i];
    return *this;
  }
  Vec& operator-=(const Vec& o) {
    for (int i = 0; i < n; ++i) a[i] -= o.a[i];
    return *this;
  }
  Vec& operator*=(double c) {
    for (int i = 0; i < n; ++i) a[i] *= c;
    return *this;
  }
  friend Vec operator+(Vec x, const Vec& y) { return x += y; }
  friend Vec operator-(Vec x, const Vec& y) { return x -= y; }
  friend Vec operator*(double c, Vec x) { return x *= c; }
};

inline double norm2(const Vec& x) {
  double s = 0;
  for (int i = 0; i < x.n; ++i) s += x.a[i] * x.a[i];
  return std::sqrt(s);
}

inline double norm_inf(const Vec& x) {
  double s = 0;
  for (int i = 0; i < x.n; ++i) s = std::max(s, std::abs(x.a[i]));
  return s;
}

// Axis-aligned box, the common domain of fields and curves.
struct Box {
  Vec lo, hi;
  int dim() const { return lo.n; }
  bool contains(const Vec& x, double slack = 0.0) const {
    for (int i = 0; i < x.n; ++i)
      if (x[i] < lo[i] - slack || x[i] > hi[i] + slack) return false;
    return true;
  }
  double extent() const {
    double e = 0;
    for (int i = 0; i < dim(); ++i) e = std::max(e, hi[i] - lo[i]);
    return e;
  }
};

// splitmix64: tiny, seedable, reproducible across platforms.
struct Rng {
  uint64_t state;
  explicit Rng(uint64_t seed = 0x9e3779b97f4a7c15ull) : state(seed) {}
  uint64_t next_u64() {
    uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }
  // uniform in [0,1)
  double next_double() { return (next_u64() >> 11) * 0x1.0p-53; }
  double uniform(double a, double b) { return a + (b - a) * next_double(); }
  // uniform integer in [0, m)
  size_t next_index(size_t m) { return static_cast<size_t>(next_u64() % m); }
  double normal() {
    // Box-Muller; one value per call is plenty here.
    double u1 = std::max(next_double(), 1e-300), u2 = next_double();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }
};

struct DomainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ContractViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ResolutionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct CurvatureError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct InvertibilityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Execution policy for the data-parallel kernels. Every kernel has a serial
// path that produces bit-identical output; tests compare the two.
enum class Exec { Serial, Parallel };

inline int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

// Parallel loop over [0, n). Each index writes only its own outputs, so the
// parallel and serial paths agree exactly.
template <class F>
void for_n(Exec ex, std::ptrdiff_t n, F&& f) {
#ifdef _OPENMP
  if (ex == Exec::Parallel) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) f(static_cast<size_t>(i));
    return;
  }
#endif
  (void)ex;
  for (std::ptrdiff_t i = 0; i < n; ++i) f(static_cast<size_t>(i));
}

// Deterministic blocked sum: fixed block size, blocks summed in order, so the
// result does not depend on the thread count.
template <class F>
double sum_n(Exec ex, size_t n, F&& term) {
  constexpr size_t kBlock = 4096;
  const size_t nblocks = (n + kBlock - 1) / kBlock;
  std::vector<double> partial(nblocks, 0.0);
  for_n(ex, static_cast<std::ptrdiff_t>(nblocks), [&](size_t b) {
    double s = 0;
    const size_t end = std::min(n, (b + 1) * kBlock);
    for (size_t i = b * kBlock; i < end; ++i) s += term(i);
    partial[b] = s;
  });
  double s = 0;
  for (double p : partial) s += p;
  return s;
}

}  // namespace radon

#endif
