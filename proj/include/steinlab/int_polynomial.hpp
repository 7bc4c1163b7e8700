#pragma once

#include <gmpxx.h>

#include <cstddef>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "steinlab/errors.hpp"

namespace steinlab {

// Dense univariate polynomial over Z, coefficients stored low degree first.
// Invariant: the coefficient vector is never empty and has no trailing
// (highest-degree) zeros, so degree() == size-1 and the zero polynomial is
// represented as {0} with degree 0.
class IntPolynomial {
public:
  IntPolynomial() : c_{mpz_class(0)} {}

  explicit IntPolynomial(std::vector<mpz_class> coeffs_low_to_high)
      : c_(std::move(coeffs_low_to_high)) {
    normalize();
  }

  static IntPolynomial from_int_coeffs(const std::vector<long>& coeffs) {
    std::vector<mpz_class> c;
    c.reserve(coeffs.size());
    for (long v : coeffs) c.emplace_back(v);
    return IntPolynomial(std::move(c));
  }

  // x^n
  static IntPolynomial power_of_x(std::size_t n) {
    std::vector<mpz_class> c(n + 1, mpz_class(0));
    c[n] = 1;
    return IntPolynomial(std::move(c));
  }

  std::size_t degree() const { return c_.size() - 1; }
  const mpz_class& leading() const { return c_.back(); }
  const mpz_class& constant() const { return c_.front(); }
  const mpz_class& at(std::size_t i) const { return c_[i]; }
  const std::vector<mpz_class>& coeffs() const { return c_; }
  bool is_zero() const { return c_.size() == 1 && c_[0] == 0; }
  bool is_one() const { return c_.size() == 1 && c_[0] == 1; }
  bool is_monic() const { return c_.back() == 1; }

  bool operator==(const IntPolynomial& o) const { return c_ == o.c_; }
  bool operator!=(const IntPolynomial& o) const { return !(*this == o); }

  mpz_class eval(const mpz_class& x) const {
    mpz_class acc = 0;
    for (std::size_t i = c_.size(); i-- > 0;) acc = acc * x + c_[i];
    return acc;
  }

  IntPolynomial derivative() const {
    if (degree() == 0) return IntPolynomial();
    std::vector<mpz_class> d(degree());
    for (std::size_t i = 1; i < c_.size(); ++i) d[i - 1] = c_[i] * mpz_class(static_cast<long>(i));
    return IntPolynomial(std::move(d));
  }

  IntPolynomial operator+(const IntPolynomial& o) const {
    std::vector<mpz_class> r(std::max(c_.size(), o.c_.size()), mpz_class(0));
    for (std::size_t i = 0; i < c_.size(); ++i) r[i] += c_[i];
    for (std::size_t i = 0; i < o.c_.size(); ++i) r[i] += o.c_[i];
    return IntPolynomial(std::move(r));
  }

  IntPolynomial operator-() const {
    std::vector<mpz_class> r(c_);
    for (auto& v : r) v = -v;
    return IntPolynomial(std::move(r));
  }

  IntPolynomial operator-(const IntPolynomial& o) const { return *this + (-o); }

  IntPolynomial operator*(const IntPolynomial& o) const {
    if (is_zero() || o.is_zero()) return IntPolynomial();
    std::vector<mpz_class> r(c_.size() + o.c_.size() - 1, mpz_class(0));
    for (std::size_t i = 0; i < c_.size(); ++i)
      for (std::size_t j = 0; j < o.c_.size(); ++j) r[i + j] += c_[i] * o.c_[j];
    return IntPolynomial(std::move(r));
  }

  IntPolynomial operator*(const mpz_class& s) const {
    std::vector<mpz_class> r(c_);
    for (auto& v : r) v *= s;
    return IntPolynomial(std::move(r));
  }

  // Long division by a monic divisor; exact over Z.
  std::pair<IntPolynomial, IntPolynomial> divmod_monic(const IntPolynomial& g) const {
    if (!g.is_monic()) throw CertificationFailed("divmod_monic: divisor not monic");
    if (degree() < g.degree()) return {IntPolynomial(), *this};
    std::vector<mpz_class> rem(c_);
    std::vector<mpz_class> quot(degree() - g.degree() + 1, mpz_class(0));
    for (std::size_t i = degree() + 1; i-- > g.degree();) {
      mpz_class q = rem[i];
      if (q == 0) continue;
      quot[i - g.degree()] = q;
      for (std::size_t j = 0; j < g.c_.size(); ++j) rem[i - g.degree() + j] -= q * g.c_[j];
    }
    return {IntPolynomial(std::move(quot)), IntPolynomial(std::move(rem))};
  }

  bool divisible_by(const IntPolynomial& g) const {
    return divmod_monic(g).second.is_zero();
  }

  // x^d * P(1/x): coefficient reversal. Requires a nonzero constant term so
  // the degree is preserved.
  IntPolynomial reversed() const {
    if (constant() == 0) throw ZeroConstantTerm("cannot reverse polynomial with root 0");
    std::vector<mpz_class> r(c_.rbegin(), c_.rend());
    return IntPolynomial(std::move(r));
  }

  std::string pretty() const {
    std::string out;
    for (std::size_t i = c_.size(); i-- > 0;) {
      const mpz_class& a = c_[i];
      if (a == 0 && !(out.empty() && i == 0)) continue;
      mpz_class mag = abs(a);
      const bool neg = a < 0;
      if (out.empty())
        out += neg ? "-" : "";
      else
        out += neg ? "-" : "+";
      const bool unit = (mag == 1);
      if (i == 0 || !unit) out += mag.get_str();
      if (i >= 1) {
        out += "x";
        if (i >= 2) out += "^" + std::to_string(i);
      }
    }
    return out.empty() ? "0" : out;
  }

private:
  void normalize() {
    while (c_.size() > 1 && c_.back() == 0) c_.pop_back();
    if (c_.empty()) c_.push_back(mpz_class(0));
  }

  std::vector<mpz_class> c_;
};

namespace detail {

// Rational polynomials, used only as scaffolding for gcd and Sturm chains.
using QPoly = std::vector<mpq_class>; // low to high, may carry trailing zeros

inline void qtrim(QPoly& p) {
  while (p.size() > 1 && p.back() == 0) p.pop_back();
  if (p.empty()) p.emplace_back(0);
}

inline QPoly to_q(const IntPolynomial& p) {
  QPoly q;
  q.reserve(p.coeffs().size());
  for (const auto& c : p.coeffs()) q.emplace_back(c);
  return q;
}

inline bool qis_zero(const QPoly& p) { return p.size() == 1 && p[0] == 0; }

inline QPoly qrem(QPoly a, const QPoly& b) {
  qtrim(a);
  while (a.size() >= b.size() && !qis_zero(a)) {
    mpq_class f = a.back() / b.back();
    std::size_t off = a.size() - b.size();
    for (std::size_t j = 0; j + 1 < b.size(); ++j) a[off + j] -= f * b[j];
    a.pop_back();
    qtrim(a);
  }
  return a;
}

inline void qmonic(QPoly& p) {
  qtrim(p);
  mpq_class lead = p.back();
  if (lead == 0 || lead == 1) return;
  for (auto& c : p) c /= lead;
}

// Monic gcd over Q.  For a monic integer dividend the result has integer
// coefficients (a monic rational divisor of a monic integer polynomial is
// integral), which monic_gcd relies on below.
inline QPoly qgcd(QPoly a, QPoly b) {
  qtrim(a);
  qtrim(b);
  while (!qis_zero(b)) {
    QPoly r = qrem(a, b);
    a = std::move(b);
    b = std::move(r);
  }
  qmonic(a);
  return a;
}

} // namespace detail

// Monic gcd of p and q. Requires one of the inputs monic so the result is
// integral.
inline IntPolynomial monic_gcd(const IntPolynomial& p, const IntPolynomial& q) {
  detail::QPoly g = detail::qgcd(detail::to_q(p), detail::to_q(q));
  std::vector<mpz_class> c;
  c.reserve(g.size());
  for (const auto& v : g) {
    if (v.get_den() != 1)
      throw CertificationFailed("monic_gcd produced a non-integral coefficient");
    c.push_back(v.get_num());
  }
  return IntPolynomial(std::move(c));
}

// Product of the distinct irreducible factors (the squarefree part).
inline IntPolynomial radical(const IntPolynomial& p) {
  if (p.degree() == 0) return p;
  IntPolynomial g = monic_gcd(p, p.derivative());
  if (g.degree() == 0) return p;
  return p.divmod_monic(g).first;
}

// Yun's squarefree decomposition: p = prod factor^multiplicity with the
// factors pairwise coprime and squarefree.  Requires p monic of degree >= 1.
inline std::vector<std::pair<IntPolynomial, int>> squarefree_decomposition(
    const IntPolynomial& p) {
  std::vector<std::pair<IntPolynomial, int>> out;
  IntPolynomial g = monic_gcd(p, p.derivative());
  if (g.degree() == 0) {
    out.emplace_back(p, 1);
    return out;
  }
  IntPolynomial c = p.divmod_monic(g).first;
  IntPolynomial d = p.derivative().divmod_monic(g).first - c.derivative();
  for (int i = 1; c.degree() > 0; ++i) {
    IntPolynomial f = monic_gcd(c, d);
    if (f.degree() > 0) out.emplace_back(f, i);
    c = c.divmod_monic(f).first;
    d = d.divmod_monic(f).first - c.derivative();
  }
  return out;
}

// n-th cyclotomic polynomial via exact division of x^n - 1 by the lower ones.
inline IntPolynomial cyclotomic(unsigned n) {
  if (n == 0) throw DegenerateDegreeZero("cyclotomic index must be >= 1");
  std::map<unsigned, IntPolynomial> built;
  for (unsigned m = 1; m <= n; ++m) {
    if (n % m != 0) continue;
    IntPolynomial num = IntPolynomial::power_of_x(m) - IntPolynomial::from_int_coeffs({1});
    for (unsigned d = 1; d < m; ++d)
      if (m % d == 0) num = num.divmod_monic(built.at(d)).first;
    built.emplace(m, std::move(num));
  }
  return built.at(n);
}

inline unsigned long euler_phi(unsigned long n) {
  unsigned long result = n;
  for (unsigned long p = 2; p * p <= n; ++p) {
    if (n % p == 0) {
      while (n % p == 0) n /= p;
      result -= result / p;
    }
  }
  if (n > 1) result -= result / n;
  return result;
}

} // namespace steinlab
