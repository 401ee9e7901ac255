#include "radon/poly.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace radon {

void Poly::normalize() {
  std::sort(terms_.begin(), terms_.end(),
            [](const Term& a, const Term& b) { return a.key < b.key; });
  std::vector<Term> out;
  out.reserve(terms_.size());
  for (const Term& t : terms_) {
    if (!out.empty() && out.back().key == t.key)
      out.back().c += t.c;
    else
      out.push_back(t);
  }
  out.erase(std::remove_if(out.begin(), out.end(),
                           [](const Term& t) { return t.c == 0.0; }),
            out.end());
  terms_ = std::move(out);
}

Poly Poly::constant(double c) {
  Poly p;
  if (c != 0.0) p.terms_.push_back({0, c});
  return p;
}

Poly Poly::var(int i) {
  Poly p;
  p.terms_.push_back({uint64_t(1) << (8 * i), 1.0});
  return p;
}

Poly Poly::monomial(const std::vector<int>& exps, double c) {
  Poly p;
  if (c == 0.0) return p;
  uint64_t key = 0;
  for (size_t i = 0; i < exps.size(); ++i) key |= uint64_t(exps[i] & 0xff) << (8 * i);
  p.terms_.push_back({key, c});
  return p;
}

Poly Poly::operator+(const Poly& o) const {
  Poly r;
  r.terms_ = terms_;
  r.terms_.insert(r.terms_.end(), o.terms_.begin(), o.terms_.end());
  r.normalize();
  return r;
}

Poly Poly::operator-(const Poly& o) const { return *this + o.scaled(-1.0); }

Poly Poly::operator*(const Poly& o) const {
  Poly r;
  r.terms_.reserve(terms_.size() * o.terms_.size());
  for (const Term& a : terms_)
    for (const Term& b : o.terms_) r.terms_.push_back({a.key + b.key, a.c * b.c});
  r.normalize();
  return r;
}

Poly Poly::scaled(double c) const {
  Poly r = *this;
  if (c == 0.0) {
    r.terms_.clear();
    return r;
  }
  for (Term& t : r.terms_) t.c *= c;
  return r;
}

Poly Poly::deriv(int var) const {
  Poly r;
  for (const Term& t : terms_) {
    int e = exp_of(t.key, var);
    if (e == 0) continue;
    r.terms_.push_back({t.key - (uint64_t(1) << (8 * var)), t.c * e});
  }
  r.normalize();
  return r;
}

int Poly::degree_in(int v0, int cnt) const {
  int d = 0;
  for (const Term& t : terms_) {
    int s = 0;
    for (int v = v0; v < v0 + cnt; ++v) s += exp_of(t.key, v);
    d = std::max(d, s);
  }
  return d;
}

Poly Poly::truncated(int v0, int cnt, int maxdeg) const {
  Poly r;
  for (const Term& t : terms_) {
    int s = 0;
    for (int v = v0; v < v0 + cnt; ++v) s += exp_of(t.key, v);
    if (s <= maxdeg) r.terms_.push_back(t);
  }
  return r;
}

double Poly::eval(const double* values, int nvals) const {
  double acc = 0;
  for (const Term& t : terms_) {
    double m = t.c;
    uint64_t key = t.key;
    for (int v = 0; key != 0 && v < nvals; ++v, key >>= 8) {
      int e = int(key & 0xff);
      double x = values[v];
      while (e-- > 0) m *= x;
    }
    acc += m;
  }
  return acc;
}

Poly poly_pow(const Poly& p, int e) {
  Poly r = Poly::constant(1.0);
  Poly base = p;
  while (e > 0) {
    if (e & 1) r = r * base;
    base = base * base;
    e >>= 1;
  }
  return r;
}

Poly Poly::substituted(const std::vector<Poly>& subs) const {
  Poly acc;
  for (const Term& t : terms_) {
    Poly m = Poly::constant(t.c);
    uint64_t key = t.key;
    for (int v = 0; key != 0; ++v, key >>= 8) {
      int e = int(key & 0xff);
      if (e == 0) continue;
      const Poly base = (v < int(subs.size())) ? subs[v] : Poly::var(v);
      m = m * poly_pow(base, e);
    }
    acc = acc + m;
  }
  return acc;
}

double Poly::max_abs_coeff() const {
  double m = 0;
  for (const Term& t : terms_) m = std::max(m, std::abs(t.c));
  return m;
}

std::string Poly::to_string(const std::vector<std::string>& names) const {
  if (terms_.empty()) return "0";
  std::ostringstream os;
  bool first = true;
  for (const Term& t : terms_) {
    if (!first) os << " + ";
    first = false;
    os << t.c;
    uint64_t key = t.key;
    for (int v = 0; key != 0; ++v, key >>= 8) {
      int e = int(key & 0xff);
      if (e == 0) continue;
      os << "*" << (v < int(names.size()) ? names[v] : "v" + std::to_string(v));
      if (e > 1) os << "^" << e;
    }
  }
  return os.str();
}

}  // namespace radon
