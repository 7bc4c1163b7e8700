#pragma once

#include <cstddef>
#include <vector>

#include <gmpxx.h>

#include "steinlab/errors.hpp"

namespace steinlab {
namespace qlp {

using QVec = std::vector<mpq_class>;
using QMat = std::vector<QVec>; // list of columns (or rows, per context)

struct Feasibility {
  bool feasible = false;
  QVec lambda; // one weight per input column when feasible
};

namespace detail {

// Phase-I simplex with Bland's rule on {A x = b, x >= 0}; A given as m rows
// of length n. Exact rational arithmetic throughout, so feasibility is a
// certificate, not an approximation; Bland's rule guarantees termination.
inline Feasibility phase_one(QMat rows, QVec b) {
  const std::size_t m = rows.size();
  const std::size_t n = m == 0 ? 0 : rows[0].size();
  for (const auto& r : rows)
    if (r.size() != n) throw DimensionMismatch("ragged constraint matrix");
  if (b.size() != m) throw DimensionMismatch("rhs size mismatch");

  // Tableau: n structural + m artificial columns, then the rhs.
  QMat t(m, QVec(n + m + 1, 0));
  for (std::size_t i = 0; i < m; ++i) {
    const bool neg = b[i] < 0;
    for (std::size_t j = 0; j < n; ++j) t[i][j] = neg ? -rows[i][j] : rows[i][j];
    t[i][n + i] = 1;
    t[i][n + m] = neg ? -b[i] : b[i];
  }
  std::vector<std::size_t> basis(m);
  for (std::size_t i = 0; i < m; ++i) basis[i] = n + i;

  for (;;) {
    // Reduced cost of column j for the Phase-I objective (sum of
    // artificials): d_j = c_j - sum_i cB_i t[i][j].
    std::size_t enter = n + m;
    for (std::size_t j = 0; j < n + m && enter == n + m; ++j) {
      mpq_class d = (j >= n) ? 1 : 0;
      for (std::size_t i = 0; i < m; ++i)
        if (basis[i] >= n) d -= t[i][j];
      if (d < 0) enter = j; // Bland: first improving column
    }
    if (enter == n + m) break; // optimal

    // Ratio test; Bland ties by smallest basic-variable index.
    std::size_t leave = m;
    mpq_class best;
    for (std::size_t i = 0; i < m; ++i) {
      if (t[i][enter] <= 0) continue;
      mpq_class ratio = t[i][n + m] / t[i][enter];
      if (leave == m || ratio < best ||
          (ratio == best && basis[i] < basis[leave])) {
        leave = i;
        best = ratio;
      }
    }
    if (leave == m)
      throw CertificationFailed("phase-one objective unbounded; inconsistent tableau");

    const mpq_class piv = t[leave][enter];
    for (auto& v : t[leave]) v /= piv;
    for (std::size_t i = 0; i < m; ++i) {
      if (i == leave || t[i][enter] == 0) continue;
      const mpq_class f = t[i][enter];
      for (std::size_t j = 0; j <= n + m; ++j) t[i][j] -= f * t[leave][j];
    }
    basis[leave] = enter;
  }

  mpq_class objective = 0;
  for (std::size_t i = 0; i < m; ++i)
    if (basis[i] >= n) objective += t[i][n + m];

  Feasibility res;
  res.feasible = (objective == 0);
  if (res.feasible) {
    res.lambda.assign(n, 0);
    for (std::size_t i = 0; i < m; ++i)
      if (basis[i] < n) res.lambda[basis[i]] = t[i][n + m];
  }
  return res;
}

} // namespace detail

// Does target lie in the convex cone generated by the columns?
// cols: list of n columns, each of dimension m; exact.
inline Feasibility cone_member(const QMat& cols, const QVec& target) {
  const std::size_t n = cols.size();
  const std::size_t m = target.size();
  QMat rows(m, QVec(n));
  for (std::size_t j = 0; j < n; ++j) {
    if (cols[j].size() != m) throw DimensionMismatch("column size mismatch");
    for (std::size_t i = 0; i < m; ++i) rows[i][j] = cols[j][i];
  }
  return detail::phase_one(std::move(rows), target);
}

// Does target lie in the convex hull of the columns? (cone + sum lambda = 1)
inline Feasibility hull_member(const QMat& cols, const QVec& target) {
  const std::size_t n = cols.size();
  const std::size_t m = target.size();
  QMat rows(m + 1, QVec(n));
  for (std::size_t j = 0; j < n; ++j) {
    if (cols[j].size() != m) throw DimensionMismatch("column size mismatch");
    for (std::size_t i = 0; i < m; ++i) rows[i][j] = cols[j][i];
    rows[m][j] = 1;
  }
  QVec rhs = target;
  rhs.emplace_back(1);
  return detail::phase_one(std::move(rows), std::move(rhs));
}

// Exact verification helpers for re-checking a returned certificate.
inline bool combination_matches(const QMat& cols, const QVec& lambda,
                                const QVec& target, bool require_convex) {
  if (cols.size() != lambda.size()) return false;
  QVec acc(target.size(), 0);
  mpq_class total = 0;
  for (std::size_t j = 0; j < cols.size(); ++j) {
    if (lambda[j] < 0) return false;
    for (std::size_t i = 0; i < target.size(); ++i)
      acc[i] += lambda[j] * cols[j][i];
    total += lambda[j];
  }
  if (require_convex && total != 1) return false;
  for (std::size_t i = 0; i < target.size(); ++i)
    if (acc[i] != target[i]) return false;
  return true;
}

} // namespace qlp
} // namespace steinlab
