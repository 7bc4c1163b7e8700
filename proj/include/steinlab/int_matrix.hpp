#pragma once

#include <gmpxx.h>

#include <cstddef>
#include <vector>

#include "steinlab/errors.hpp"
#include "steinlab/int_polynomial.hpp"

namespace steinlab {

// Square integer matrix with exact arithmetic throughout.
class IntMatrix {
public:
  explicit IntMatrix(std::size_t dim) : d_(dim), e_(dim * dim, mpz_class(0)) {
    if (dim == 0) throw DimensionMismatch("matrix dimension must be >= 1");
  }

  IntMatrix(std::size_t dim, std::vector<mpz_class> row_major)
      : d_(dim), e_(std::move(row_major)) {
    if (dim == 0 || e_.size() != dim * dim)
      throw DimensionMismatch("entry count does not match dimension");
  }

  static IntMatrix from_rows(const std::vector<std::vector<long>>& rows) {
    const std::size_t d = rows.size();
    IntMatrix m(d);
    for (std::size_t i = 0; i < d; ++i) {
      if (rows[i].size() != d) throw DimensionMismatch("ragged row list");
      for (std::size_t j = 0; j < d; ++j) m.at(i, j) = rows[i][j];
    }
    return m;
  }

  static IntMatrix identity(std::size_t dim) {
    IntMatrix m(dim);
    for (std::size_t i = 0; i < dim; ++i) m.at(i, i) = 1;
    return m;
  }

  std::size_t dim() const { return d_; }
  mpz_class& at(std::size_t i, std::size_t j) { return e_[i * d_ + j]; }
  const mpz_class& at(std::size_t i, std::size_t j) const { return e_[i * d_ + j]; }

  bool operator==(const IntMatrix& o) const { return d_ == o.d_ && e_ == o.e_; }
  bool operator!=(const IntMatrix& o) const { return !(*this == o); }

  IntMatrix operator*(const IntMatrix& o) const {
    if (d_ != o.d_) throw DimensionMismatch("matrix product dimension mismatch");
    IntMatrix r(d_);
    for (std::size_t i = 0; i < d_; ++i)
      for (std::size_t k = 0; k < d_; ++k) {
        const mpz_class& a = at(i, k);
        if (a == 0) continue;
        for (std::size_t j = 0; j < d_; ++j) r.at(i, j) += a * o.at(k, j);
      }
    return r;
  }

  IntMatrix operator+(const IntMatrix& o) const {
    if (d_ != o.d_) throw DimensionMismatch("matrix sum dimension mismatch");
    IntMatrix r(d_);
    for (std::size_t i = 0; i < d_ * d_; ++i) r.e_[i] = e_[i] + o.e_[i];
    return r;
  }

  IntMatrix operator-(const IntMatrix& o) const {
    if (d_ != o.d_) throw DimensionMismatch("matrix difference dimension mismatch");
    IntMatrix r(d_);
    for (std::size_t i = 0; i < d_ * d_; ++i) r.e_[i] = e_[i] - o.e_[i];
    return r;
  }

  IntMatrix transpose() const {
    IntMatrix r(d_);
    for (std::size_t i = 0; i < d_; ++i)
      for (std::size_t j = 0; j < d_; ++j) r.at(j, i) = at(i, j);
    return r;
  }

  mpz_class trace() const {
    mpz_class t = 0;
    for (std::size_t i = 0; i < d_; ++i) t += at(i, i);
    return t;
  }

  mpz_class max_abs_entry() const {
    mpz_class m = 0;
    for (const auto& v : e_) {
      mpz_class a = abs(v);
      if (a > m) m = a;
    }
    return m;
  }

  // Induced l1 operator norm (max absolute column sum); submultiplicative,
  // used for certified growth bounds on powers.
  mpz_class col_abs_sum_max() const {
    mpz_class best = 0;
    for (std::size_t j = 0; j < d_; ++j) {
      mpz_class s = 0;
      for (std::size_t i = 0; i < d_; ++i) s += abs(at(i, j));
      if (s > best) best = s;
    }
    return best;
  }

  // Bareiss fraction-free elimination: exact determinant without rationals.
  mpz_class det() const {
    std::vector<mpz_class> a(e_);
    const std::size_t n = d_;
    mpz_class prev = 1;
    int sign = 1;
    for (std::size_t k = 0; k + 1 < n; ++k) {
      if (a[k * n + k] == 0) {
        std::size_t p = k + 1;
        while (p < n && a[p * n + k] == 0) ++p;
        if (p == n) return 0;
        for (std::size_t j = 0; j < n; ++j) std::swap(a[k * n + j], a[p * n + j]);
        sign = -sign;
      }
      for (std::size_t i = k + 1; i < n; ++i)
        for (std::size_t j = k + 1; j < n; ++j) {
          mpz_class num = a[i * n + j] * a[k * n + k] - a[i * n + k] * a[k * n + j];
          mpz_divexact(a[i * n + j].get_mpz_t(), num.get_mpz_t(), prev.get_mpz_t());
        }
      prev = a[k * n + k];
    }
    mpz_class d = a[n * n - 1];
    return sign < 0 ? mpz_class(-d) : d;
  }

  bool is_unimodular() const {
    mpz_class d = det();
    return d == 1 || d == -1;
  }

  // Faddeev-LeVerrier: char poly x^d + c1 x^{d-1} + ... + cd with exact
  // integer divisions, plus the inverse as a byproduct when |det| = 1.
  IntPolynomial char_poly() const {
    std::vector<mpz_class> c(d_ + 1);
    c[d_] = 1; // leading
    IntMatrix b = identity(d_);
    mpz_class ck = 1;
    for (std::size_t k = 1; k <= d_; ++k) {
      IntMatrix ak = *this * b;
      mpz_class t = ak.trace();
      mpz_class kk(static_cast<long>(k));
      mpz_class divd;
      mpz_class num = -t;
      mpz_divexact(divd.get_mpz_t(), num.get_mpz_t(), kk.get_mpz_t());
      ck = divd;
      c[d_ - k] = ck;
      if (k < d_) {
        b = ak;
        for (std::size_t i = 0; i < d_; ++i) b.at(i, i) += ck;
      }
    }
    return IntPolynomial(std::move(c));
  }

  IntMatrix inverse_unimodular() const {
    IntPolynomial p = char_poly();
    const mpz_class& cd = p.constant();
    if (cd != 1 && cd != -1) throw NotUnimodular("matrix determinant is not +-1");
    // inv = -(B_{d-1}) / c_d where B_k is the Faddeev-LeVerrier sequence.
    IntMatrix b = identity(d_);
    for (std::size_t k = 1; k < d_; ++k) {
      IntMatrix ak = *this * b;
      b = ak;
      const mpz_class& ck = p.at(d_ - k);
      for (std::size_t i = 0; i < d_; ++i) b.at(i, i) += ck;
    }
    IntMatrix inv(d_);
    for (std::size_t i = 0; i < d_; ++i)
      for (std::size_t j = 0; j < d_; ++j)
        inv.at(i, j) = (cd == 1) ? mpz_class(-b.at(i, j)) : mpz_class(b.at(i, j));
    return inv;
  }

  // M^j for any integer j; negative powers require |det| = 1.
  IntMatrix pow(long j) const {
    IntMatrix base = (j >= 0) ? *this : inverse_unimodular();
    unsigned long e = (j >= 0) ? static_cast<unsigned long>(j)
                               : static_cast<unsigned long>(-(j + 1)) + 1UL;
    IntMatrix acc = identity(d_);
    while (e > 0) {
      if (e & 1UL) acc = acc * base;
      base = base * base;
      e >>= 1;
    }
    return acc;
  }

  std::vector<std::vector<double>> to_double() const {
    std::vector<std::vector<double>> r(d_, std::vector<double>(d_));
    for (std::size_t i = 0; i < d_; ++i)
      for (std::size_t j = 0; j < d_; ++j) r[i][j] = at(i, j).get_d();
    return r;
  }

private:
  std::size_t d_;
  std::vector<mpz_class> e_; // row major
};

// Evaluate a polynomial at a matrix argument (Horner).
inline IntMatrix poly_at_matrix(const IntPolynomial& p, const IntMatrix& m) {
  IntMatrix acc(m.dim());
  for (std::size_t i = 0; i < m.dim(); ++i) acc.at(i, i) = p.leading();
  for (std::size_t k = p.degree(); k-- > 0;) {
    acc = acc * m;
    for (std::size_t i = 0; i < m.dim(); ++i) acc.at(i, i) += p.at(k);
  }
  return acc;
}

} // namespace steinlab
