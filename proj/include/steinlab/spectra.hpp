#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "steinlab/errors.hpp"
#include "steinlab/int_matrix.hpp"
#include "steinlab/int_polynomial.hpp"
#include "steinlab/interval.hpp"
#include "steinlab/roots.hpp"

namespace steinlab {

// Certified spectral data of a unimodular integer matrix.
//
//   rho      = max(max |eigenvalue|, max |eigenvalue of inverse|)
//   mu       = log rho
//   mu_plus  = log max |eigenvalue|          (expansion rate forward)
//   mu_minus = log max |eigenvalue of M^-1|  (expansion rate backward)
//
// exact_one means rho == 1 exactly, decided symbolically (see
// is_cyclotomic_product); in that case all intervals are the exact points.
// Otherwise rho_lo > 1 strictly: the certification refines until the gap to 1
// is resolved, which must happen because a unimodular spectrum not made of
// roots of unity has a root strictly outside the unit circle.
struct SpectralProfile {
  Interval rho, mu, mu_plus, mu_minus;
  bool exact_one = false;
  std::vector<RootCluster> eigenvalues;
};

// Decides exactly whether every root of p lies on the unit circle, i.e.
// whether p is a product of cyclotomic polynomials. This is the classical
// dichotomy for monic integer polynomials with unit constant term: either
// all roots are roots of unity, or some root has modulus > 1. Decided by
// exact trial division against every cyclotomic of degree <= deg p (their
// indices n satisfy phi(n) <= deg, hence n <= 2 deg^2 + 2).
inline bool is_cyclotomic_product(const IntPolynomial& p) {
  if (!p.is_monic()) throw SchemaViolation("cyclotomic test expects a monic polynomial");
  if (p.constant() == 0)
    throw ZeroConstantTerm("cyclotomic test needs a nonzero constant term");
  if (p.degree() == 0) return true;
  IntPolynomial q = p;
  const unsigned long d = p.degree();
  for (unsigned long n = 1; n <= 2 * d * d + 2 && q.degree() > 0; ++n) {
    if (euler_phi(n) > d) continue;
    IntPolynomial phi = cyclotomic(static_cast<unsigned>(n));
    while (q.degree() >= phi.degree()) {
      auto [quot, rem] = q.divmod_monic(phi);
      if (!rem.is_zero()) break;
      q = quot;
      if (q.degree() == 0) break;
    }
  }
  return q.is_one();
}

inline SpectralProfile spectral_profile(const IntMatrix& m, double tol) {
  if (tol <= 0.0) throw NonPositiveMargin("tol must be positive");
  IntPolynomial p = m.char_poly();
  const mpz_class& c0 = p.constant();
  if (c0 != 1 && c0 != -1)
    throw NotUnimodular("spectral profile needs |det| = 1");

  SpectralProfile prof;
  prof.exact_one = is_cyclotomic_product(p);
  if (prof.exact_one) {
    prof.rho = {1.0, 1.0};
    prof.mu = prof.mu_plus = prof.mu_minus = {0.0, 0.0};
    prof.eigenvalues = root_radius(p, std::max(tol, 1e-10)).roots;
    return prof;
  }

  // Reversal maps eigenvalues to their reciprocals; when the determinant is
  // -1 the reversed polynomial has leading coefficient -1, so negate (same
  // roots) to keep it monic.
  IntPolynomial rev = p.reversed();
  if (rev.leading() == -1) rev = -rev;

  // rho > 1 strictly; refine until that gap and the requested width are both
  // certified. The width floor reflects the double readout slack of the
  // underlying enclosures.
  const double width_goal = std::max(tol, 2e-14);
  double t = width_goal / 2.0;
  for (int attempt = 0; attempt < 6; ++attempt) {
    RootRadiusResult fwd = root_radius(p, t);
    RootRadiusResult bwd = root_radius(rev, t);
    // max |eigenvalue| >= 1 because the moduli multiply to 1; clamp.
    Interval rf{std::max(fwd.modulus.lo, 1.0), std::max(fwd.modulus.hi, 1.0)};
    Interval rb{std::max(bwd.modulus.lo, 1.0), std::max(bwd.modulus.hi, 1.0)};
    Interval rho = max_interval(rf, rb);
    if (rho.lo > 1.0) {
      SpectralProfile out;
      out.exact_one = false;
      out.rho = rho;
      out.mu_plus = log_interval(rf);
      out.mu_minus = log_interval(rb);
      out.mu = max_interval(out.mu_plus, out.mu_minus);
      out.eigenvalues = fwd.roots;
      if (out.mu.width() <= width_goal) return out;
    }
    t /= 1000.0;
  }
  throw CertificationFailed("could not separate the spectral radius from 1");
}

// Exact irreducibility over Z for monic polynomials up to this degree.
constexpr std::size_t kIrreducibleDegreeCap = 12;

namespace spectradetail {

inline bool next_combination(std::vector<std::size_t>& idx, std::size_t n) {
  const std::size_t k = idx.size();
  for (std::size_t i = k; i-- > 0;) {
    if (idx[i] + (k - i) < n) {
      ++idx[i];
      for (std::size_t j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
      return true;
    }
  }
  return false;
}

// Expand prod (x - z_i) over a subset of certified roots and round to an
// integer polynomial; returns false when some coefficient is not close to an
// integer (slack 0.45, matched by the < 0.4 perturbation bound upstream).
inline bool subset_candidate(const std::vector<PreciseRoot>& roots,
                             const std::vector<std::size_t>& idx, int bits,
                             IntPolynomial& out) {
  using rootdetail::Cx;
  const std::size_t k = idx.size();
  std::vector<Cx<mpf_class>> c(k + 1,
                               Cx<mpf_class>{mpf_class(0, bits), mpf_class(0, bits)});
  c[0] = {mpf_class(1, bits), mpf_class(0, bits)};
  for (std::size_t t = 0; t < k; ++t) {
    const PreciseRoot& r = roots[idx[t]];
    Cx<mpf_class> z{mpf_class(r.re, bits), mpf_class(r.im, bits)};
    for (std::size_t j = t + 1; j-- > 0;) {
      Cx<mpf_class> shifted =
          (j == 0) ? Cx<mpf_class>{mpf_class(0, bits), mpf_class(0, bits)} : c[j - 1];
      c[j] = rootdetail::csub(shifted, rootdetail::cmul(z, c[j]));
      if (j == 0) break;
    }
    c[t + 1] = {mpf_class(1, bits), mpf_class(0, bits)};
  }
  std::vector<mpz_class> g(k + 1);
  for (std::size_t j = 0; j <= k; ++j) {
    if (std::fabs(c[j].im.get_d()) > 0.45) return false;
    mpf_class rounded = floor(mpf_class(c[j].re + 0.5));
    mpf_class err(c[j].re - rounded);
    if (std::fabs(err.get_d()) > 0.45) return false;
    mpz_set_f(g[j].get_mpz_t(), rounded.get_mpf_t());
  }
  out = IntPolynomial(std::move(g));
  return true;
}

} // namespace spectradetail

// Bounded factor search: any monic divisor of degree k is the product of
// (x - root) over a k-subset of the roots, so its coefficients are recovered
// by rounding subset symmetric functions once the certified root discs are
// tight enough for the rounding to be unambiguous; candidates are confirmed
// or refuted by exact division. The degree cap keeps the subset count and
// the required precision bounded.
inline bool is_irreducible(const IntPolynomial& p) {
  const std::size_t n = p.degree();
  if (n > kIrreducibleDegreeCap)
    throw DegreeTooLarge("irreducibility test capped at degree " +
                         std::to_string(kIrreducibleDegreeCap));
  if (!p.is_monic()) throw SchemaViolation("irreducibility test expects monic input");
  if (n == 0) return false;
  if (n == 1) return true;
  if (p.constant() == 0) return false;                          // x divides
  if (monic_gcd(p, p.derivative()).degree() > 0) return false;  // repeated factor

  const std::size_t half = n / 2;
  const double rho_hi = root_radius(p, 0.25).modulus.hi;
  const double scale = std::max(1.0, rho_hi);
  // Perturbing one root by delta moves a degree-j symmetric function by at
  // most delta * C(k-1, j-1) * scale^{j-1}; summed over roots and bounded
  // crudely by 2^k scale^k, doubled again for second-order terms.
  double rel = 0.1 / (2.0 * n * std::ldexp(1.0, static_cast<int>(n)) *
                      std::pow(scale, static_cast<double>(half + 1)));
  if (!std::isfinite(rel) || rel <= 0.0) rel = 1e-240;

  for (int round = 0; round < 3; ++round, rel /= 1e6) {
    std::vector<PreciseRoot> roots = certified_roots(p, rel);
    double sum_rad = 0.0;
    for (const auto& r : roots) sum_rad += r.cover_radius;
    const double worst = 2.0 * sum_rad * std::ldexp(1.0, static_cast<int>(half)) *
                         std::pow(scale, static_cast<double>(half > 0 ? half - 1 : 0));
    if (worst >= 0.4) continue;

    const int bits = std::max(192, 64 + static_cast<int>(half + 1) *
                                       static_cast<int>(std::log2(scale) + 2.0));
    for (std::size_t k = 1; k <= half; ++k) {
      std::vector<std::size_t> idx(k);
      for (std::size_t i = 0; i < k; ++i) idx[i] = i;
      do {
        IntPolynomial cand;
        if (!spectradetail::subset_candidate(roots, idx, bits, cand)) continue;
        if (cand.degree() != k || !cand.is_monic() || cand.constant() == 0) continue;
        if (!mpz_divisible_p(p.constant().get_mpz_t(), cand.constant().get_mpz_t()))
          continue;
        if (p.divisible_by(cand)) return false;
      } while (spectradetail::next_combination(idx, n));
    }
    return true;
  }
  throw CertificationFailed("irreducibility: root discs never became unambiguous");
}

// Number of distinct real roots, by an exact Sturm chain over Q.
inline int count_real_roots(const IntPolynomial& p) {
  if (p.degree() == 0) return 0;
  using detail::QPoly;
  std::vector<QPoly> chain;
  chain.push_back(detail::to_q(p));
  chain.push_back(detail::to_q(p.derivative()));
  detail::qtrim(chain[0]);
  detail::qtrim(chain[1]);
  while (!detail::qis_zero(chain.back())) {
    QPoly r = detail::qrem(chain[chain.size() - 2], chain.back());
    for (auto& v : r) v = -v;
    detail::qtrim(r);
    if (detail::qis_zero(r)) break;
    chain.push_back(std::move(r));
  }
  auto sign_at_inf = [](const QPoly& q, bool plus) {
    int s = sgn(q.back());
    if (!plus && (q.size() - 1) % 2 == 1) s = -s;
    return s;
  };
  auto variations = [&](bool plus) {
    int v = 0, prev = 0;
    for (const auto& q : chain) {
      int s = sign_at_inf(q, plus);
      if (s == 0) continue;
      if (prev != 0 && s != prev) ++v;
      prev = s;
    }
    return v;
  };
  return variations(false) - variations(true);
}

} // namespace steinlab
