#ifndef RADON_POLY_HPP
#define RADON_POLY_HPP

#include <cstdint>
#include <vector>

#include "radon/common.hpp"

namespace radon {

// Multivariate polynomial in up to 8 variables, exponents < 256 each.
// Exponent tuples are packed 8 bits per variable into a uint64 key; terms are
// kept sorted by key with exact coefficient arithmetic on doubles.
class Poly {
 public:
  struct Term {
    uint64_t key;
    double c;
  };

  Poly() = default;
  static Poly constant(double c);
  static Poly var(int i);  // the monomial x_i
  static Poly monomial(const std::vector<int>& exps, double c);

  bool is_zero() const { return terms_.empty(); }
  const std::vector<Term>& terms() const { return terms_; }

  static int exp_of(uint64_t key, int var) { return int((key >> (8 * var)) & 0xff); }

  Poly operator+(const Poly& o) const;
  Poly operator-(const Poly& o) const;
  Poly operator*(const Poly& o) const;
  Poly scaled(double c) const;
  Poly deriv(int var) const;

  // Total degree in the variable range [v0, v0+cnt).
  int degree_in(int v0, int cnt) const;
  // Drop terms whose total degree in [v0, v0+cnt) exceeds N.
  Poly truncated(int v0, int cnt, int maxdeg) const;

  // Evaluate with values[i] as variable i.
  double eval(const double* values, int nvals) const;

  // Substitute variable i by subs[i] (polynomials over the same variable
  // space); variables beyond subs.size() stay themselves.
  Poly substituted(const std::vector<Poly>& subs) const;

  double max_abs_coeff() const;
  std::string to_string(const std::vector<std::string>& names) const;

 private:
  std::vector<Term> terms_;  // sorted by key, no zero coefficients
  void normalize();
  friend Poly poly_sum(const std::vector<Poly>& ps);
};

// Polynomial map: m components over a shared variable space.
using PolyMap = std::vector<Poly>;

// pow of a polynomial by repeated squaring
Poly poly_pow(const Poly& p, int e);

}  // namespace radon

#endif
