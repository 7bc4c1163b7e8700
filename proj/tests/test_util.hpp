// Shared helpers for the test suite: fixture paths, CLI subprocess driver,
// and small independent numeric oracles (polynomial roots via Durand-Kerner,
// complex linear solves) used to cross-check the certified pipelines.
#pragma once

#include <array>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <sys/wait.h>
#include <unistd.h>
#include <vector>

#include "steinlab/int_matrix.hpp"
#include "steinlab/int_polynomial.hpp"

namespace testutil {

inline std::string env_or(const char* name, const std::string& fallback) {
  const char* v = std::getenv(name);
  return v != nullptr ? std::string(v) : fallback;
}

inline std::string fixture(const std::string& name) {
  return env_or("STEINLAB_FIXTURES", "tests/fixtures") + "/" + name;
}

struct CliResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

inline std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Run the installed CLI binary with the given argument string. Stdout and
// stderr are captured through temp files; the exit code is decoded from the
// shell status.
inline CliResult run_cli(const std::string& args) {
  static int counter = 0;
  const std::string bin = env_or("STEINLAB_BIN", "");
  if (bin.empty()) throw std::runtime_error("STEINLAB_BIN not set");
  const std::string tag = std::to_string(static_cast<long>(getpid())) + "_" +
                          std::to_string(counter++);
  const std::string out_path = "/tmp/steinlab_test_out_" + tag;
  const std::string err_path = "/tmp/steinlab_test_err_" + tag;
  const std::string cmd = bin + " " + args + " > " + out_path + " 2> " + err_path;
  const int status = std::system(cmd.c_str());
  CliResult r;
  r.exit_code = (status >= 0 && WIFEXITED(status)) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out_path);
  r.err = slurp(err_path);
  std::remove(out_path.c_str());
  std::remove(err_path.c_str());
  return r;
}

// ---------------------------------------------------------------------------
// Independent root oracle: plain double-precision Durand-Kerner iteration.
// Deliberately shares no code with the certified solver; good to ~1e-12 on
// the small, well-separated polynomials used in tests.
// ---------------------------------------------------------------------------
inline std::vector<std::complex<double>> dk_roots(const std::vector<double>& monic_low_to_high) {
  using C = std::complex<double>;
  const std::size_t n = monic_low_to_high.size() - 1;
  std::vector<C> z(n);
  const C seed(0.4, 0.9);
  C acc(1.0, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    acc *= seed;
    z[i] = acc;
  }
  auto eval = [&](C x) {
    C v(0.0, 0.0);
    for (std::size_t i = monic_low_to_high.size(); i-- > 0;) v = v * x + monic_low_to_high[i];
    return v;
  };
  for (int it = 0; it < 500; ++it) {
    double moved = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      C denom(1.0, 0.0);
      for (std::size_t j = 0; j < n; ++j)
        if (j != i) denom *= (z[i] - z[j]);
      const C delta = eval(z[i]) / denom;
      z[i] -= delta;
      moved = std::max(moved, std::abs(delta));
    }
    if (moved < 1e-14) break;
  }
  return z;
}

inline std::vector<double> poly_to_doubles(const steinlab::IntPolynomial& p) {
  std::vector<double> c;
  c.reserve(p.coeffs().size());
  for (const auto& v : p.coeffs()) c.push_back(v.get_d());
  return c;
}

inline double house_oracle(const std::vector<double>& monic_low_to_high) {
  double h = 0.0;
  for (const auto& r : dk_roots(monic_low_to_high)) h = std::max(h, std::abs(r));
  return h;
}

// Gaussian elimination with partial pivoting over complex doubles.
inline std::vector<std::complex<double>> solve_complex(
    std::vector<std::vector<std::complex<double>>> a, std::vector<std::complex<double>> b) {
  const std::size_t n = a.size();
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(a[i][k]) > std::abs(a[piv][k])) piv = i;
    std::swap(a[k], a[piv]);
    std::swap(b[k], b[piv]);
    for (std::size_t i = k + 1; i < n; ++i) {
      const std::complex<double> f = a[i][k] / a[k][k];
      for (std::size_t j = k; j < n; ++j) a[i][j] -= f * a[k][j];
      b[i] -= f * b[k];
    }
  }
  std::vector<std::complex<double>> x(n);
  for (std::size_t i = n; i-- > 0;) {
    std::complex<double> s = b[i];
    for (std::size_t j = i + 1; j < n; ++j) s -= a[i][j] * x[j];
    x[i] = s / a[i][i];
  }
  return x;
}

// Characteristic polynomial det(xI - M) by recursive Laplace expansion over
// exact integer polynomials: an oracle fully independent of the
// Faddeev-LeVerrier implementation under test.
inline steinlab::IntPolynomial char_poly_laplace(const steinlab::IntMatrix& m) {
  using steinlab::IntPolynomial;
  const std::size_t d = m.dim();
  std::vector<std::vector<IntPolynomial>> entry(d, std::vector<IntPolynomial>(d));
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      std::vector<mpz_class> c{-m.at(i, j)};
      if (i == j) c.push_back(1);
      entry[i][j] = IntPolynomial(std::move(c));
    }
  std::function<IntPolynomial(std::vector<std::size_t>, std::vector<std::size_t>)> det =
      [&](std::vector<std::size_t> rows, std::vector<std::size_t> cols) -> IntPolynomial {
    if (rows.size() == 1) return entry[rows[0]][cols[0]];
    IntPolynomial acc;
    for (std::size_t c = 0; c < cols.size(); ++c) {
      std::vector<std::size_t> sub_rows(rows.begin() + 1, rows.end());
      std::vector<std::size_t> sub_cols;
      for (std::size_t cc = 0; cc < cols.size(); ++cc)
        if (cc != c) sub_cols.push_back(cols[cc]);
      IntPolynomial term = entry[rows[0]][cols[c]] * det(sub_rows, sub_cols);
      acc = (c % 2 == 0) ? acc + term : acc - term;
    }
    return acc;
  };
  std::vector<std::size_t> idx(d);
  for (std::size_t i = 0; i < d; ++i) idx[i] = i;
  return det(idx, idx);
}

// Companion matrix of a monic polynomial with unit subdiagonal and the
// negated coefficients along the last row; same spectrum, last-row layout.
inline steinlab::IntMatrix companion_last_row(const steinlab::IntPolynomial& p) {
  const std::size_t d = p.degree();
  steinlab::IntMatrix m(d);
  for (std::size_t i = 0; i + 1 < d; ++i) m.at(i, i + 1) = 1;
  for (std::size_t j = 0; j < d; ++j) m.at(d - 1, j) = -p.at(j);
  return m;
}

// Monomial action of an integer matrix on a point of (C*)^d:
// (M.z)_i = prod_j z_j^{M_ij}, so that (M.z)^k = z^{k M} for row covectors.
inline std::vector<std::complex<double>> monomial_action(
    const steinlab::IntMatrix& m, const std::vector<std::complex<double>>& z) {
  const std::size_t d = m.dim();
  std::vector<std::complex<double>> out(d, {1.0, 0.0});
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      const long e = m.at(i, j).get_si();
      out[i] *= std::pow(z[j], static_cast<double>(e));
    }
  return out;
}

} // namespace testutil
