#pragma once

#include <gmpxx.h>

#include <cmath>
#include <complex>
#include <cstddef>
#include <optional>
#include <vector>

#include "steinlab/errors.hpp"
#include "steinlab/int_matrix.hpp"
#include "steinlab/int_polynomial.hpp"

namespace steinlab {

// Integer covector. Acts on the right of a matrix power: k |-> k M^j, so the
// rows of M are what a single application adds up. Kept separate from any
// column-vector use, which always goes through col_apply below.
class LatticeVector {
public:
  explicit LatticeVector(std::size_t dim) : e_(dim, mpz_class(0)) {
    if (dim == 0) throw DimensionMismatch("vector dimension must be >= 1");
  }

  explicit LatticeVector(std::vector<mpz_class> entries) : e_(std::move(entries)) {
    if (e_.empty()) throw DimensionMismatch("vector dimension must be >= 1");
  }

  static LatticeVector from_ints(const std::vector<long>& v) {
    std::vector<mpz_class> e;
    e.reserve(v.size());
    for (long x : v) e.emplace_back(x);
    return LatticeVector(std::move(e));
  }

  std::size_t dim() const { return e_.size(); }
  mpz_class& at(std::size_t i) { return e_[i]; }
  const mpz_class& at(std::size_t i) const { return e_[i]; }
  const std::vector<mpz_class>& entries() const { return e_; }

  bool operator==(const LatticeVector& o) const { return e_ == o.e_; }
  bool operator!=(const LatticeVector& o) const { return !(*this == o); }
  bool is_zero() const {
    for (const auto& v : e_)
      if (v != 0) return false;
    return true;
  }

  mpz_class max_abs() const {
    mpz_class m = 0;
    for (const auto& v : e_) {
      mpz_class a = abs(v);
      if (a > m) m = a;
    }
    return m;
  }

private:
  std::vector<mpz_class> e_;
};

// Row action k * M.
inline LatticeVector row_apply(const LatticeVector& k, const IntMatrix& m) {
  if (k.dim() != m.dim()) throw DimensionMismatch("covector/matrix dimension mismatch");
  LatticeVector r(k.dim());
  for (std::size_t j = 0; j < m.dim(); ++j) {
    mpz_class s = 0;
    for (std::size_t i = 0; i < m.dim(); ++i) s += k.at(i) * m.at(i, j);
    r.at(j) = s;
  }
  return r;
}

// Column action M * v.
inline LatticeVector col_apply(const IntMatrix& m, const LatticeVector& v) {
  if (v.dim() != m.dim()) throw DimensionMismatch("matrix/vector dimension mismatch");
  LatticeVector r(v.dim());
  for (std::size_t i = 0; i < m.dim(); ++i) {
    mpz_class s = 0;
    for (std::size_t j = 0; j < m.dim(); ++j) s += m.at(i, j) * v.at(j);
    r.at(i) = s;
  }
  return r;
}

// k M^j for any integer j (negative powers need |det M| = 1).
inline LatticeVector covector_action(const LatticeVector& k, const IntMatrix& m, long j) {
  if (k.dim() != m.dim()) throw DimensionMismatch("covector/matrix dimension mismatch");
  return row_apply(k, m.pow(j));
}

// Point of (C*)^d: every coordinate nonzero.
class ComplexPoint {
public:
  explicit ComplexPoint(std::vector<std::complex<double>> coords)
      : z_(std::move(coords)) {
    if (z_.empty()) throw DimensionMismatch("point dimension must be >= 1");
    for (const auto& c : z_)
      if (c == std::complex<double>(0.0, 0.0))
        throw ZeroCoordinate("point has a zero coordinate");
  }

  std::size_t dim() const { return z_.size(); }
  const std::complex<double>& at(std::size_t i) const { return z_[i]; }
  const std::vector<std::complex<double>>& coords() const { return z_; }

private:
  std::vector<std::complex<double>> z_;
};

// Point with all coordinates on the unit circle, up to tol.
class TorusPoint {
public:
  TorusPoint(std::vector<std::complex<double>> coords, double tol = 1e-9)
      : z_(std::move(coords)), tol_(tol) {
    if (z_.empty()) throw DimensionMismatch("point dimension must be >= 1");
    for (const auto& c : z_)
      if (std::abs(std::abs(c) - 1.0) > tol_)
        throw SchemaViolation("torus coordinate off the unit circle");
  }

  // From arguments theta_i = exp(2*pi*i*t_i).
  static TorusPoint from_args_2pi(const std::vector<double>& t, double tol = 1e-9) {
    std::vector<std::complex<double>> z;
    z.reserve(t.size());
    for (double x : t)
      z.emplace_back(std::cos(2.0 * M_PI * x), std::sin(2.0 * M_PI * x));
    return TorusPoint(std::move(z), tol);
  }

  std::size_t dim() const { return z_.size(); }
  const std::complex<double>& at(std::size_t i) const { return z_[i]; }
  double arg(std::size_t i) const { return std::arg(z_[i]); }
  double tol() const { return tol_; }

private:
  std::vector<std::complex<double>> z_;
  double tol_;
};

// Monomial twist of a point: w_i = prod_l z_l^{E_il} where E = M^j. Exponents
// are exact integers; the evaluation goes through log-polar form.
inline ComplexPoint point_action(const ComplexPoint& z, const IntMatrix& m, long j) {
  if (z.dim() != m.dim()) throw DimensionMismatch("point/matrix dimension mismatch");
  IntMatrix e = m.pow(j);
  const std::size_t d = z.dim();
  std::vector<double> logr(d), ang(d);
  for (std::size_t l = 0; l < d; ++l) {
    logr[l] = std::log(std::abs(z.at(l)));
    ang[l] = std::arg(z.at(l));
  }
  std::vector<std::complex<double>> w(d);
  for (std::size_t i = 0; i < d; ++i) {
    double lr = 0.0, th = 0.0;
    for (std::size_t l = 0; l < d; ++l) {
      const double exp_il = e.at(i, l).get_d();
      lr += exp_il * logr[l];
      th += exp_il * ang[l];
    }
    w[i] = std::polar(std::exp(lr), th);
  }
  return ComplexPoint(std::move(w));
}

// log |z^k| = <k, log|z|> -- the pairing that turns monomial geometry into
// lattice geometry.
inline double log_abs_monomial(const ComplexPoint& z, const LatticeVector& k) {
  if (z.dim() != k.dim()) throw DimensionMismatch("point/covector dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < z.dim(); ++i)
    s += k.at(i).get_d() * std::log(std::abs(z.at(i)));
  return s;
}

enum class OrbitKind { Finite, Free, Unknown };

struct OrbitClass {
  OrbitKind kind = OrbitKind::Unknown;
  long period = 0; // valid when kind == Finite
};

// Classify the orbit {k M^j : j in Z}.  Exact dichotomy: the orbit is finite
// iff k lies in the rational span of the eigenvectors of M^T for
// root-of-unity eigenvalues, i.e. iff k * Q(M) = 0 where Q is the product of
// the distinct cyclotomic factors of the characteristic polynomial (those
// kernels are genuine eigenspaces because Q is squarefree).  Otherwise the
// orbit is infinite, and infinite orbits of a single covector under one
// matrix are free.  period_cap only bounds the period search for orbits
// already certified finite.
inline OrbitClass orbit_classify(const LatticeVector& k, const IntMatrix& m,
                                 long period_cap = 1024) {
  if (k.dim() != m.dim()) throw DimensionMismatch("covector/matrix dimension mismatch");
  if (period_cap < 1) throw NonPositiveMargin("period cap must be >= 1");
  if (!m.is_unimodular()) throw NotUnimodular("orbit classification needs |det| = 1");
  if (k.is_zero()) return {OrbitKind::Finite, 1};

  IntPolynomial p = m.char_poly();
  IntPolynomial q = IntPolynomial::from_int_coeffs({1});
  unsigned long lcm_orders = 1;
  const unsigned long d = m.dim();
  for (unsigned long n = 1; n <= 2 * d * d + 2; ++n) {
    if (euler_phi(n) > d) continue;
    IntPolynomial phi = cyclotomic(static_cast<unsigned>(n));
    if (p.divisible_by(phi)) {
      q = q * phi;
      mpz_class l = lcm(mpz_class(static_cast<long>(lcm_orders)),
                        mpz_class(static_cast<long>(n)));
      lcm_orders = l.get_ui();
    }
  }
  if (q.degree() == 0) return {OrbitKind::Free, 0};

  LatticeVector image = row_apply(k, poly_at_matrix(q, m));
  if (!image.is_zero()) return {OrbitKind::Free, 0};

  // Finite orbit; its period divides the lcm of the cyclotomic orders, but we
  // report the exact minimal period when it fits under the cap.
  LatticeVector cur = k;
  for (long p2 = 1; p2 <= period_cap; ++p2) {
    cur = row_apply(cur, m);
    if (cur == k) return {OrbitKind::Finite, p2};
  }
  return {OrbitKind::Unknown, 0};
}

} // namespace steinlab
