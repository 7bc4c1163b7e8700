#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "steinlab/actions.hpp"
#include "steinlab/errors.hpp"
#include "steinlab/int_matrix.hpp"
#include "steinlab/int_polynomial.hpp"
#include "steinlab/interval.hpp"
#include "steinlab/roots.hpp"
#include "steinlab/spectra.hpp"
#include "steinlab/steinness.hpp"

namespace steinlab {

// ---------------------------------------------------------------------------
// Strip geometry.
//
// The base annulus of modulus m is uniformized by the horizontal strip
// S_m = { w : |Im w| < m/(4 pi) } modulo the unit horizontal translation.
// The once-infinite annulus corresponds to the upper half plane Im w > 0 and
// the doubly infinite one to the whole plane.
// ---------------------------------------------------------------------------
struct StripPoint {
  std::complex<double> w;
  ModulusSpec m;

  StripPoint(std::complex<double> w_, ModulusSpec m_) : w(w_), m(m_) {
    switch (m.kind) {
      case ModulusSpec::Kind::Finite:
        if (!(std::abs(w.imag()) < m.m / (4.0 * M_PI)))
          throw OutsideStrip("|Im w| must be < m/(4 pi)");
        break;
      case ModulusSpec::Kind::Infinity:
        if (!(w.imag() > 0.0))
          throw OutsideStrip("half-plane model requires Im w > 0");
        break;
      case ModulusSpec::Kind::TwoInfinity:
        break;
    }
    if (!std::isfinite(w.real()) || !std::isfinite(w.imag()))
      throw SchemaViolation("strip point must have finite coordinates");
  }
};

// ---------------------------------------------------------------------------
// Extension series specification.
//
// The series extends the fiber monomial z^k to the whole bundle:
//
//   f(w, z) = (1/W(a)) * sum_j W(w+j) * D(w+j) * z^{j.k},      j.k = k M^j,
//
// where a is the anchor, D is the normalized interpolation kernel vanishing
// at every integer offset of the anchor except zero, and the weight W is
//
//   expanding spectrum (rho > 1):  W(w) = exp(-2 cosh(2 pi^2 w / m)),
//     valid when m log rho(M) < 2 pi^2 strictly (certified);
//   spectrum on the unit circle:   W(w) = exp(-w^{2p}),
//     where the covector orbit grows polynomially with degree p' and
//     2p > p', so this weight works for any modulus, finite or not.
//
// The series specification also freezes the data needed for certified tail
// majorants:
// a growth scale for the covector orbit (a submultiplicative-norm scan for
// the expanding case, a torsion/unipotent split for the unit-circle case)
// and a reference truncation certificate established at the anchor.
// ---------------------------------------------------------------------------
struct SeriesVariant {
  enum class Kind { Cosh, Polynomial };
  Kind kind = Kind::Cosh;
  double m = 0.0; // Cosh: finite modulus of the strip
  int p = 0;      // Polynomial: weight exponent, W = exp(-w^{2p})
};

struct SeriesSpec {
  IntMatrix M;
  ModulusSpec m;
  LatticeVector k;
  StripPoint anchor;
  SeriesVariant variant;

  // Reference truncation certificate, established at the anchor for
  // evaluation points with max_i |log|z_i|| <= 1: truncating at `horizon`
  // leaves a tail of at most `tail_bound`.
  long horizon = 0;
  double tail_bound = 0.0;

  // Expanding case: |eigenvalue| bound rho_hi, slack epsilon with
  // log(rho_hi + epsilon) = lambda < 2 pi^2 / m, and the certified orbit
  // growth  ||k M^j||_1 <= growth_C * (rho_hi + epsilon)^{|j|}.
  double rho_hi = 0.0;
  double epsilon = 0.0;
  double lambda = 0.0;
  double growth_C = 0.0;

  // Unit-circle case: M^L = I + B with B nilpotent of index n*, so that
  //   ||k M^j||_1 <= k_l1 * power_norm_max * sum_{i<n*} X^i r_i / i!,
  //   X = |j|/L + 1 + n*,  r_i = max row abs sum of B^i.
  long torsion_order = 0;
  int nilpotency = 0;
  int p_prime = 0;
  std::vector<double> nil_row_norms;
  double power_norm_max = 0.0;

  double k_l1 = 0.0;

  SeriesSpec(IntMatrix M_, ModulusSpec m_, LatticeVector k_, StripPoint a_)
      : M(std::move(M_)), m(m_), k(std::move(k_)), anchor(a_) {}
};

struct SectionValue {
  std::complex<double> value{0.0, 0.0};
  double tail_bound = 0.0;
  long horizon = 0;
};

namespace andetail {

// Round a nonnegative double up / a bound-producing value outward by a hair.
// Tail certificates combine a handful of elementary double operations; a
// relative pad of 1e-12 dominates the accumulated rounding of such short
// expression trees by several orders of magnitude.
inline double pad_up(double x) { return x + std::abs(x) * 1e-12 + 1e-300; }
inline double pad_dn(double x) { return x - std::abs(x) * 1e-12 - 1e-300; }

// Max absolute row sum of an integer matrix, rounded up: the operator norm
// for the right action of the matrix on integer row covectors with the l1
// norm, so it is submultiplicative along products.
inline double row_norm_up(const IntMatrix& a) {
  mpz_class best = 0;
  for (std::size_t i = 0; i < a.dim(); ++i) {
    mpz_class s = 0;
    for (std::size_t j = 0; j < a.dim(); ++j) s += abs(a.at(i, j));
    if (s > best) best = s;
  }
  double v = best.get_d();
  if (!std::isfinite(v)) throw TailNotCertifiable("matrix power norm exceeds double range");
  return pad_up(v);
}

inline bool matrix_is_zero(const IntMatrix& a) {
  for (std::size_t i = 0; i < a.dim(); ++i)
    for (std::size_t j = 0; j < a.dim(); ++j)
      if (a.at(i, j) != 0) return false;
  return true;
}

inline double lattice_l1(const LatticeVector& k) {
  mpz_class s = 0;
  for (std::size_t i = 0; i < k.dim(); ++i) s += abs(k.at(i));
  return pad_up(s.get_d());
}

// Large integer to double with saturation: callers only branch on sign and
// hugeness once a conversion would overflow.
inline double clamped_d(const mpz_class& v) {
  double x = v.get_d();
  if (std::isfinite(x)) return std::min(std::max(x, -1e306), 1e306);
  return v < 0 ? -1e306 : 1e306;
}

inline std::complex<double> pow_int(std::complex<double> z, int e) {
  std::complex<double> acc(1.0, 0.0);
  for (int i = 0; i < e; ++i) acc *= z;
  return acc;
}

// Everything a tail certificate needs about one evaluation point.
struct TailQuery {
  bool cosh = true;

  // Shared.
  double log_C2 = 0.0;       // log of the constant: kernel sup / |W(anchor)|
  double re_shift_abs = 0.0; // |Re(w - anchor)|

  // Expanding weight.
  double c = 0.0;        // 2 pi^2 / m
  double lam = 0.0;      // log(rho_hi + epsilon) < c
  double beta_eff = 0.0; // cos(c Im w) * exp(-c |Re w|) > 0 inside the strip
  double alpha = 0.0;    // growth_C * max_i |log|z_i||

  // Unit-circle weight.
  int p = 0;
  double absx = 0.0, absy = 0.0;
  double u0 = 0.0;            // decay-regime threshold max(1, (8p/pi)|Im w|)
  double alphaB_scale = 0.0;  // max_i|log|z_i|| * k_l1 * power_norm_max
  long L = 0;
  int nstar = 0;
  const std::vector<double>* r_nil = nullptr;
};

// Shift a polynomial (coefficients low to high, in j) to the variable
// s = j - shift and report whether every shifted coefficient clears the
// accumulated rounding envelope. A fully nonnegative shifted expansion
// certifies nonnegativity of the polynomial on [shift, infinity).
inline bool shifted_coeffs_nonneg(std::vector<double> c, double shift) {
  std::vector<double> mag(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) mag[i] = std::abs(c[i]);
  const std::size_t n = c.size();
  if (n == 0) return true;
  for (std::size_t i = 0; i + 1 < n; ++i)
    for (std::size_t l = n - 2; l + 1 > i; --l) {
      c[l] += shift * c[l + 1];
      mag[l] += std::abs(shift) * mag[l + 1];
    }
  for (std::size_t l = 0; l < n; ++l)
    if (!(c[l] >= 1e-9 * mag[l])) return false;
  return true;
}

// Certified bound on the tail sum_{|j| > H} |term_j| of the extension
// series, or +infinity when the certificate conditions fail at this horizon.
//
// Expanding weight: inside the strip, with c = 2 pi^2/m and y = Im w,
//   |W(w+j)| = exp(-2 cosh(c(x+j)) cos(cy)) <= exp(-beta_eff e^{c|j|}),
// an exact inequality (cosh t >= e^{|t|}/2 and |x+j| >= |j|-|x|). The
// monomial factor obeys log|z^{j.k}| <= alpha e^{lam |j|} by the frozen
// growth scan, and the kernel by C2 once |j| exceeds |Re(w-a)| + 1. With
//   A = beta_eff e^{c(H+1)} (e^c - 1),  B = alpha e^{lam (H+1)} (e^lam - 1),
// the condition A >= 2 max(B, 1) forces every majorant step ratio beyond H
// under e^{-1} (A/B only grows, since c > lam), so the majorant tail is
// geometric from its first term.
//
// Unit-circle weight: for |j| - |x| >= u0 the weight obeys
//   |W(w+j)| <= exp(-(sqrt2/2) (|j|-|x|)^{2p})
// (the argument of (w+j)^{2p} stays within pi/4), while the monomial grows
// like exp(alphaB(j)) with alphaB polynomial of degree p' < 2p. Certifying
//   phi(j) = (sqrt2/2)(j-|x|)^{2p} - alphaB(j) - (j+2) >= 0  for j >= H+1
// via nonnegative shifted coefficients yields term_j <= C2 e^{-(j+2)} and
// again a geometric tail.
inline double tail_bound_at(const TailQuery& q, long H) {
  const double inf = std::numeric_limits<double>::infinity();
  if (H < 1) return inf;
  if (!(static_cast<double>(H) >= q.re_shift_abs + 1.0)) return inf;

  double tail_log;
  if (q.cosh) {
    if (!(q.beta_eff > 0.0)) return inf;
    const double c = q.c, lam = q.lam;
    const double LA0 = std::log(q.beta_eff) + c * (H + 1.0);
    const double logA = LA0 + ((c > 700.0) ? c : std::log(std::expm1(c)));
    double logB = -inf;
    if (q.alpha > 0.0)
      logB = std::log(q.alpha) + lam * (H + 1.0) + std::log(std::expm1(lam));
    // A >= 2 max(B, 1), with a pad against rounding.
    if (!(pad_dn(logA) >= std::log(2.0) + std::max(logB, 0.0))) return inf;
    const double LB0 = (q.alpha > 0.0) ? std::log(q.alpha) + lam * (H + 1.0) : -inf;
    if (LB0 > 650.0) return inf;
    const double P = (LA0 > 709.0) ? 1.7e308 : std::exp(LA0);
    const double Q = (q.alpha > 0.0) ? std::exp(LB0) : 0.0;
    const double T_log = pad_up(Q) - pad_dn(P);
    tail_log = std::log(2.0) + q.log_C2 + T_log - std::log1p(-std::exp(-1.0));
  } else {
    const double g1 = (H + 1.0) - q.absx;
    if (!(g1 >= q.u0)) return inf;
    const int deg = 2 * q.p;
    // phi(j) = (sqrt2/2)(j - absx)^{2p} - alphaB(j) - (j + 2)   in powers of j.
    std::vector<double> phi(static_cast<std::size_t>(deg) + 1, 0.0);
    {
      // (j - absx)^{2p} by binomial expansion.
      double binom = 1.0;
      for (int l = 0; l <= deg; ++l) {
        // coefficient of j^l: C(2p, l) * (-absx)^{2p-l}
        double coef = binom * std::pow(-q.absx, deg - l);
        phi[static_cast<std::size_t>(l)] += (std::sqrt(2.0) / 2.0) * coef;
        binom = binom * (deg - l) / (l + 1.0);
      }
    }
    {
      // alphaB(j) = alphaB_scale * sum_{i<n*} r_i/i! * (j/L + 1 + n*)^i.
      const double base = 1.0 + q.nstar;
      const double slope = 1.0 / static_cast<double>(q.L);
      double fact = 1.0;
      for (int i = 0; i < q.nstar; ++i) {
        if (i > 0) fact *= i;
        const double ri = (*q.r_nil)[static_cast<std::size_t>(i)];
        // expand (slope j + base)^i
        double binom = 1.0;
        for (int l = 0; l <= i; ++l) {
          double coef = binom * std::pow(slope, l) * std::pow(base, i - l);
          phi[static_cast<std::size_t>(l)] -= q.alphaB_scale * ri / fact * coef;
          binom = binom * (i - l) / (l + 1.0);
        }
      }
    }
    phi[0] -= 2.0;
    if (phi.size() > 1) phi[1] -= 1.0;
    if (!shifted_coeffs_nonneg(phi, H + 1.0)) return inf;
    tail_log = std::log(2.0) + q.log_C2 - (H + 3.0) - std::log1p(-std::exp(-1.0));
  }
  if (tail_log > 700.0) return inf;
  double t = std::exp(tail_log);
  return pad_up(t * (1.0 + 1e-9));
}

// Smallest certified horizon at or above `start` whose tail is <= tol.
inline long find_horizon(const TailQuery& q, double tol, long start, long cap,
                         double* out_bound) {
  long H = std::max<long>(1, start);
  const long floor1 = static_cast<long>(std::ceil(q.re_shift_abs)) + 1;
  if (H < floor1) H = floor1;
  if (!q.cosh) {
    const long floor2 = static_cast<long>(std::ceil(q.absx + q.u0)) + 1;
    if (H < floor2) H = floor2;
  }
  for (; H <= cap; H += 8) {
    double b = tail_bound_at(q, H);
    if (b <= tol) {
      *out_bound = b;
      return H;
    }
  }
  return -1;
}

// Factor a product of cyclotomics into its indices (with multiplicity).
inline std::vector<unsigned long> cyclotomic_indices(const IntPolynomial& p) {
  std::vector<unsigned long> idx;
  IntPolynomial q = p;
  const unsigned long d = p.degree();
  for (unsigned long n = 1; n <= 2 * d * d + 2 && q.degree() > 0; ++n) {
    if (euler_phi(n) > d) continue;
    IntPolynomial phi = cyclotomic(static_cast<unsigned>(n));
    while (q.degree() >= phi.degree()) {
      auto [quot, rem] = q.divmod_monic(phi);
      if (!rem.is_zero()) break;
      q = quot;
      idx.push_back(n);
      if (q.degree() == 0) break;
    }
  }
  if (!q.is_one())
    throw CertificationFailed("spectrum on the unit circle did not factor into cyclotomics");
  return idx;
}

} // namespace andetail

// ---------------------------------------------------------------------------
// Weight and kernel factors.
// ---------------------------------------------------------------------------

// W(w): exp(-2 cosh(2 pi^2 w / m)) for the expanding variant (w must lie in
// the finite strip), exp(-w^{2p}) for the unit-circle variant.
inline std::complex<double> omega_factor(std::complex<double> w, const SeriesSpec& spec) {
  if (spec.variant.kind == SeriesVariant::Kind::Cosh) {
    const double m = spec.variant.m;
    if (!(std::abs(w.imag()) < m / (4.0 * M_PI)))
      throw OutsideStrip("weight evaluated outside the strip |Im w| < m/(4 pi)");
    const double c = 2.0 * M_PI * M_PI / m;
    return std::exp(-2.0 * std::cosh(c * w));
  }
  return std::exp(-andetail::pow_int(w, 2 * spec.variant.p));
}

// D(w) = sin(pi (w - a)) / (pi (w - a)) with the removable singularity
// handled by a degree-8 Taylor branch near the anchor; D(a) = 1 and
// D(a + j) = 0 for every nonzero integer j.
inline std::complex<double> delta_factor(std::complex<double> w, std::complex<double> anchor) {
  const std::complex<double> v = w - anchor;
  if (std::abs(v) < 1e-3) {
    const std::complex<double> s = (M_PI * v) * (M_PI * v);
    // 1 - s/3! + s^2/5! - s^3/7! + s^4/9!
    return 1.0 + s * (-1.0 / 6.0 + s * (1.0 / 120.0 + s * (-1.0 / 5040.0 + s * (1.0 / 362880.0))));
  }
  const std::complex<double> pv = M_PI * v;
  return std::sin(pv) / pv;
}

// ---------------------------------------------------------------------------
// Series specification builder.
// ---------------------------------------------------------------------------
inline SeriesSpec make_series_spec(const IntMatrix& M, const ModulusSpec& mod,
                                   const LatticeVector& k, std::complex<double> anchor,
                                   long horizon_cap = 160) {
  if (k.dim() != M.dim()) throw DimensionMismatch("covector/matrix dimension mismatch");
  if (horizon_cap < 1) throw SchemaViolation("horizon cap must be >= 1");
  StripPoint anchor_pt(anchor, mod);
  SeriesSpec spec(M, mod, k, anchor_pt);
  spec.k_l1 = andetail::lattice_l1(k);

  SpectralProfile prof = spectral_profile(M, 1e-12);
  if (prof.exact_one) {
    // Unit-circle spectrum: split off the torsion. M^L = I + B with B
    // nilpotent; the orbit of any covector grows polynomially of degree
    // n* - 1 where n* is the nilpotency index of B.
    std::vector<unsigned long> idx = andetail::cyclotomic_indices(M.char_poly());
    long L = 1;
    for (unsigned long n : idx) L = std::lcm(L, static_cast<long>(n));
    if (L > 10000) throw TailNotCertifiable("torsion order of the spectrum is too large");

    IntMatrix B = M.pow(L) - IntMatrix::identity(M.dim());
    int nstar = 1;
    std::vector<double> r_nil{1.0};
    if (!andetail::matrix_is_zero(B)) {
      IntMatrix P = B;
      while (!andetail::matrix_is_zero(P)) {
        r_nil.push_back(andetail::row_norm_up(P));
        ++nstar;
        if (static_cast<std::size_t>(nstar) > M.dim())
          throw CertificationFailed("nilpotent part of the torsion split did not terminate");
        P = P * B;
      }
    }

    IntMatrix Minv = M.inverse_unimodular();
    IntMatrix fwd = IntMatrix::identity(M.dim());
    IntMatrix bwd = fwd;
    double C0 = 1.0;
    for (long s = 0; s < L; ++s) {
      C0 = std::max({C0, andetail::row_norm_up(fwd), andetail::row_norm_up(bwd)});
      fwd = fwd * M;
      bwd = bwd * Minv;
    }

    spec.variant.kind = SeriesVariant::Kind::Polynomial;
    spec.torsion_order = L;
    spec.nilpotency = nstar;
    spec.p_prime = nstar - 1;
    spec.variant.p = spec.p_prime / 2 + 1; // 2p > p'
    spec.nil_row_norms = std::move(r_nil);
    spec.power_norm_max = C0;
  } else {
    // Expanding spectrum: the weight needs a finite strip with
    // m log rho < 2 pi^2, certified strictly.
    if (mod.kind != ModulusSpec::Kind::Finite)
      throw HypothesisViolated(
          "expanding spectrum over an infinite-modulus base: m log rho >= 2 pi^2");
    const double m = mod.m;
    const Interval tps = two_pi_squared();
    if (!(andetail::pad_up(m * prof.mu.hi) < tps.lo))
      throw HypothesisViolated("cannot certify m log rho < 2 pi^2 strictly");
    const double c = 2.0 * M_PI * M_PI / m;
    const double slack = std::exp(c) - prof.rho.hi;
    if (!(slack > 0.0)) throw HypothesisViolated("no positive slack between rho and e^{2 pi^2/m}");
    const double eps = std::min(slack / 2.0, 1.0);
    const double lam = andetail::pad_up(std::log(prof.rho.hi + eps));
    if (!(lam < c * (1.0 - 1e-9)))
      throw TailNotCertifiable("growth margin between rho and the weight decay is too thin");

    // Submultiplicative-norm scan: find j0 with row_norm(M^{+-j0}) <= b^{j0},
    // b = rho_hi + eps. Then ||k M^j||_1 <= ||k||_1 * C_r * b^{|j|} with
    // C_r the worst norm over partial powers.
    const double b = prof.rho.hi + eps;
    IntMatrix Minv = M.inverse_unimodular();
    IntMatrix fwd = IntMatrix::identity(M.dim());
    IntMatrix bwd = fwd;
    double C_r = 1.0;
    long j0 = -1;
    for (long j = 1; j <= 64; ++j) {
      C_r = std::max({C_r, andetail::row_norm_up(fwd), andetail::row_norm_up(bwd)});
      fwd = fwd * M;
      bwd = bwd * Minv;
      const double rj = std::max(andetail::row_norm_up(fwd), andetail::row_norm_up(bwd));
      const double bj = andetail::pad_dn(std::pow(b, static_cast<double>(j)));
      if (rj <= bj) {
        j0 = j;
        break;
      }
    }
    if (j0 < 0)
      throw TailNotCertifiable("no submultiplicative growth certificate within 64 powers");

    spec.variant.kind = SeriesVariant::Kind::Cosh;
    spec.variant.m = m;
    spec.rho_hi = prof.rho.hi;
    spec.epsilon = eps;
    spec.lambda = lam;
    spec.growth_C = andetail::pad_up(spec.k_l1 * C_r);
  }

  // Reference truncation certificate at the anchor, normalized to
  // evaluation points with max_i |log|z_i|| <= 1.
  andetail::TailQuery q;
  q.re_shift_abs = 0.0;
  if (spec.variant.kind == SeriesVariant::Kind::Cosh) {
    const double c = 2.0 * M_PI * M_PI / spec.variant.m;
    q.cosh = true;
    q.c = c;
    q.lam = spec.lambda;
    q.beta_eff = andetail::pad_dn(std::cos(c * anchor.imag()) * std::exp(-c * std::abs(anchor.real())));
    q.alpha = spec.growth_C;
    q.log_C2 = -std::log(M_PI) + 2.0 * std::cosh(c * anchor.real()) * std::cos(c * anchor.imag());
  } else {
    q.cosh = false;
    q.p = spec.variant.p;
    q.absx = std::abs(anchor.real());
    q.absy = std::abs(anchor.imag());
    q.u0 = std::max(1.0, (8.0 * spec.variant.p / M_PI) * q.absy);
    q.alphaB_scale = spec.k_l1 * spec.power_norm_max;
    q.L = spec.torsion_order;
    q.nstar = spec.nilpotency;
    q.r_nil = &spec.nil_row_norms;
    q.log_C2 = -std::log(M_PI) +
               std::real(andetail::pow_int(anchor, 2 * spec.variant.p));
  }
  double ref_bound = 0.0;
  long H = andetail::find_horizon(q, 1e-10, 1, horizon_cap, &ref_bound);
  if (H < 0)
    throw TailNotCertifiable("no horizon within the cap certifies the reference tail");
  spec.horizon = H;
  spec.tail_bound = ref_bound;
  return spec;
}

// ---------------------------------------------------------------------------
// Truncated series evaluation with a certified tail.
// ---------------------------------------------------------------------------
inline SectionValue monomial_section(const SeriesSpec& spec, const StripPoint& w,
                                     const ComplexPoint& z, double tol,
                                     long horizon_override = -1) {
  if (z.dim() != spec.M.dim()) throw DimensionMismatch("point/matrix dimension mismatch");
  if (!(tol > 0.0)) throw NonPositiveMargin("tol must be positive");
  if (w.m.kind != spec.m.kind ||
      (w.m.kind == ModulusSpec::Kind::Finite && w.m.m != spec.m.m))
    throw SchemaViolation("strip point modulus differs from the series modulus");

  const std::size_t d = z.dim();
  const std::complex<double> a = spec.anchor.w;

  std::vector<std::complex<double>> logz(d);
  double Lz = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    logz[i] = std::log(z.at(i)); // principal branch
    Lz = std::max(Lz, std::abs(logz[i].real()));
  }

  // Per-evaluation tail data.
  andetail::TailQuery q;
  q.re_shift_abs = std::abs(w.w.real() - a.real());
  const bool is_cosh = spec.variant.kind == SeriesVariant::Kind::Cosh;
  double c = 0.0;
  if (is_cosh) {
    c = 2.0 * M_PI * M_PI / spec.variant.m;
    q.cosh = true;
    q.c = c;
    q.lam = spec.lambda;
    q.beta_eff =
        andetail::pad_dn(std::cos(c * w.w.imag()) * std::exp(-c * std::abs(w.w.real())));
    q.alpha = andetail::pad_up(spec.growth_C * Lz);
    q.log_C2 = M_PI * std::abs(w.w.imag() - a.imag()) - std::log(M_PI) +
               2.0 * std::cosh(c * a.real()) * std::cos(c * a.imag());
  } else {
    q.cosh = false;
    q.p = spec.variant.p;
    q.absx = std::abs(w.w.real());
    q.absy = std::abs(w.w.imag());
    q.u0 = std::max(1.0, (8.0 * spec.variant.p / M_PI) * q.absy);
    q.alphaB_scale = andetail::pad_up(Lz * spec.k_l1 * spec.power_norm_max);
    q.L = spec.torsion_order;
    q.nstar = spec.nilpotency;
    q.r_nil = &spec.nil_row_norms;
    q.log_C2 = M_PI * std::abs(w.w.imag() - a.imag()) - std::log(M_PI) +
               std::real(andetail::pow_int(a, 2 * spec.variant.p));
  }

  long H;
  double bound;
  if (horizon_override > 0) {
    H = horizon_override;
    bound = andetail::tail_bound_at(q, H);
    if (!std::isfinite(bound))
      throw TailNotCertifiable("requested horizon does not admit a tail certificate");
    if (bound > tol)
      throw TailNotCertifiable("tail at the requested horizon exceeds the tolerance");
  } else {
    const long cap = std::max<long>(spec.horizon, 512);
    H = andetail::find_horizon(q, tol * 0.999, 1, cap, &bound);
    if (H < 0)
      throw TailNotCertifiable("no horizon within the cap brings the tail under the tolerance");
  }

  // Base of the per-term exponent: +log(1/W(anchor)).
  std::complex<double> base;
  if (is_cosh)
    base = 2.0 * std::cosh(c * a);
  else
    base = andetail::pow_int(a, 2 * spec.variant.p);

  // Deterministic left-to-right summation over j = -H .. H, with the
  // covector orbit maintained exactly. Each term is assembled in log form:
  //   E_j = log(1/W(anchor)) + log W(w+j) + <j.k, Log z>,
  // so astronomically small terms underflow gracefully (they are tallied
  // into the reported tail) instead of polluting the sum with NaNs. The
  // kernel never exceeds exp(dsup_log), so any term whose exponent clears
  // -700 - dsup_log is below e^{-700} and may be dropped against the tally;
  // kept terms with deeply negative exponents are rescaled before the kernel
  // multiply so the product stays inside the normal double range.
  const double dsup_log =
      std::max(std::log(3.7), M_PI * std::abs(w.w.imag() - a.imag()));
  LatticeVector r = covector_action(spec.k, spec.M, -H);
  std::complex<double> sum(0.0, 0.0);
  double sum_abs = 0.0;
  for (long j = -H; j <= H; ++j) {
    std::complex<double> dot(0.0, 0.0);
    for (std::size_t i = 0; i < d; ++i) dot += andetail::clamped_d(r.at(i)) * logz[i];

    const std::complex<double> wj = w.w + static_cast<double>(j);
    double reE;
    std::complex<double> weight_exp; // -2 cosh(c(w+j)) resp. -(w+j)^{2p}
    bool have_weight = false;
    if (is_cosh) {
      const double uu = c * wj.real(), vv = c * wj.imag();
      const double ch = std::cosh(uu); // may overflow to +inf
      reE = base.real() - 2.0 * ch * std::cos(vv) + dot.real();
      if (std::isfinite(ch)) {
        weight_exp = {-2.0 * ch * std::cos(vv), -2.0 * std::sinh(uu) * std::sin(vv)};
        have_weight = true;
      }
    } else {
      const std::complex<double> pw = andetail::pow_int(wj, 2 * spec.variant.p);
      reE = base.real() - pw.real() + dot.real();
      weight_exp = -pw;
      have_weight = std::isfinite(pw.real()) && std::isfinite(pw.imag());
    }

    if (std::isnan(reE)) throw CertificationFailed("series term evaluation produced NaN");
    if (reE + dsup_log < -700.0) {
      if (j < H) r = row_apply(r, spec.M);
      continue;
    }
    if (reE > 700.0)
      throw CertificationFailed("series value exceeds the double range at this point");
    if (!have_weight) throw CertificationFailed("series term evaluation overflowed");

    const std::complex<double> E = base + weight_exp + dot;
    const double shift = (reE < -600.0) ? (-600.0 - reE) : 0.0;
    const std::complex<double> term =
        (std::exp(E + shift) * delta_factor(wj, a)) * std::exp(-shift);
    if (!std::isfinite(term.real()) || !std::isfinite(term.imag()))
      throw CertificationFailed("series term evaluation overflowed");
    sum += term;
    sum_abs += std::abs(term);
    if (j < H) r = row_apply(r, spec.M);
  }

  SectionValue out;
  out.value = sum;
  // Truncation tail + dropped-term tally + summation rounding envelope.
  out.tail_bound = bound + static_cast<double>(2 * H + 1) * 1e-304 +
                   static_cast<double>(2 * H + 1) * sum_abs * 1e-14;
  out.horizon = H;
  return out;
}

// ---------------------------------------------------------------------------
// Torus-grid Fourier extraction of one Laurent coefficient.
// ---------------------------------------------------------------------------
using SectionFn =
    std::function<std::complex<double>(const StripPoint&, const ComplexPoint&)>;

namespace andetail {

inline void fft_inplace(std::vector<std::complex<double>>& v) {
  const std::size_t n = v.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(v[i], v[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = -2.0 * M_PI / static_cast<double>(len);
    const std::complex<double> wl(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t j2 = 0; j2 < len / 2; ++j2) {
        const std::complex<double> u = v[i + j2];
        const std::complex<double> t = w * v[i + j2 + len / 2];
        v[i + j2] = u + t;
        v[i + j2 + len / 2] = u - t;
        w *= wl;
      }
    }
  }
}

// One coefficient by an N-per-axis torus sample: the d-dimensional DFT bin
// congruent to k, divided by N^d and the radius monomial.
inline std::complex<double> torus_coefficient(const SectionFn& f, const LatticeVector& k,
                                              const StripPoint& w,
                                              const std::vector<double>& radii,
                                              std::size_t N) {
  const std::size_t d = radii.size();
  double total_d = 1.0;
  for (std::size_t i = 0; i < d; ++i) total_d *= static_cast<double>(N);
  if (total_d > static_cast<double>(1u << 24))
    throw SchemaViolation("torus sample grid is too large");
  const std::size_t total = static_cast<std::size_t>(total_d);

  std::vector<std::complex<double>> roots(N);
  for (std::size_t t = 0; t < N; ++t) {
    const double ang = 2.0 * M_PI * static_cast<double>(t) / static_cast<double>(N);
    roots[t] = {std::cos(ang), std::sin(ang)};
  }

  std::vector<std::complex<double>> data(total);
  std::vector<std::size_t> digit(d);
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::size_t rest = flat;
    for (std::size_t ax = d; ax-- > 0;) {
      digit[ax] = rest % N;
      rest /= N;
    }
    std::vector<std::complex<double>> zc(d);
    for (std::size_t i = 0; i < d; ++i) zc[i] = radii[i] * roots[digit[i]];
    data[flat] = f(w, ComplexPoint(std::move(zc)));
  }

  // Row-major layout: axis ax has stride N^{d-1-ax}.
  for (std::size_t ax = 0; ax < d; ++ax) {
    std::size_t stride = 1;
    for (std::size_t i = ax + 1; i < d; ++i) stride *= N;
    std::vector<std::complex<double>> line(N);
    for (std::size_t start = 0; start < total; ++start) {
      if ((start / stride) % N != 0) continue;
      for (std::size_t l = 0; l < N; ++l) line[l] = data[start + l * stride];
      fft_inplace(line);
      for (std::size_t l = 0; l < N; ++l) data[start + l * stride] = line[l];
    }
  }

  std::size_t flat = 0;
  double radius_pow = 1.0;
  for (std::size_t i = 0; i < d; ++i) {
    if (!k.at(i).fits_slong_p())
      throw SchemaViolation("coefficient index is out of range for the sample grid");
    const long ki = k.at(i).get_si();
    const long n_l = static_cast<long>(N);
    const std::size_t bi = static_cast<std::size_t>(((ki % n_l) + n_l) % n_l);
    flat = flat * N + bi;
    radius_pow *= std::pow(radii[i], static_cast<double>(ki));
  }
  return data[flat] / total_d / radius_pow;
}

} // namespace andetail

// g_k(w): the coefficient of z^k in the fiberwise Laurent expansion of f at
// w, by discrete torus integration at the given radii. Two sample densities
// (N and 2N per axis) are compared; a disagreement beyond the resolution
// tolerance means the coefficient decay does not yet separate the aliases.
inline std::complex<double> laurent_coefficient(const SectionFn& f, const LatticeVector& k,
                                                const StripPoint& w,
                                                const std::vector<double>& radii,
                                                std::size_t samples_per_axis) {
  if (radii.size() != k.dim()) throw DimensionMismatch("radii/index dimension mismatch");
  for (double r : radii)
    if (!(r > 0.0)) throw NonPositiveMargin("torus radii must be positive");
  const std::size_t N = samples_per_axis;
  if (N == 0 || (N & (N - 1)) != 0)
    throw SchemaViolation("samples per axis must be a power of two");
  mpz_class kmax = 0;
  for (std::size_t i = 0; i < k.dim(); ++i) kmax = std::max(kmax, mpz_class(abs(k.at(i))));
  if (mpz_class(static_cast<long>(N)) < 2 * (1 + kmax))
    throw SchemaViolation("samples per axis must be >= 2 (1 + max |k_i|)");

  const std::complex<double> c1 = andetail::torus_coefficient(f, k, w, radii, N);
  const std::complex<double> c2 = andetail::torus_coefficient(f, k, w, radii, 2 * N);
  if (std::abs(c1 - c2) > 1e-7 * std::max(1.0, std::abs(c2)))
    throw AliasingSuspected("torus samples at N and 2N disagree");
  return c2;
}

// ---------------------------------------------------------------------------
// Bounded-gap return sets of torus orbits.
// ---------------------------------------------------------------------------
struct GapSet {
  double epsilon = 0.0;
  long horizon = 0;
  std::vector<long> members; // sorted ascending, within [0, horizon]
  long max_gap = 0;          // largest consecutive difference (0 if < 2 members)
  bool exhaustive = false;   // the whole range [0, horizon] was scanned

  bool nonempty() const { return !members.empty(); }
};

// J = { j in [0, horizon] : max_i |1 - theta_i^j| < epsilon }, by exact scan.
// Distances are evaluated through |1 - e^{i j phi}| = 2 |sin(j phi / 2)|, so
// no drift accumulates along the orbit.
inline GapSet gap_set(const TorusPoint& theta, double eps, long horizon) {
  if (!(eps > 0.0)) throw NonPositiveMargin("epsilon must be positive");
  if (horizon < 1) throw SchemaViolation("horizon must be >= 1");
  std::vector<double> half_args(theta.dim());
  for (std::size_t i = 0; i < theta.dim(); ++i) half_args[i] = 0.5 * theta.arg(i);

  GapSet out;
  out.epsilon = eps;
  out.horizon = horizon;
  out.exhaustive = true;
  for (long j = 0; j <= horizon; ++j) {
    double worst = 0.0;
    for (double h : half_args)
      worst = std::max(worst, 2.0 * std::abs(std::sin(static_cast<double>(j) * h)));
    if (worst < eps) out.members.push_back(j);
  }
  for (std::size_t i = 1; i < out.members.size(); ++i)
    out.max_gap = std::max(out.max_gap, out.members[i] - out.members[i - 1]);
  return out;
}

// ---------------------------------------------------------------------------
// Non-Steinness witness: a point and a covector whose orbit grows doubly
// exponentially along return sets with bounded gaps in both directions.
// ---------------------------------------------------------------------------
struct WitnessCertificate {
  IntMatrix M;
  ComplexPoint z;   // witness point (positive real coordinates)
  LatticeVector k;  // witness covector
  double delta = 0.0;
  Interval mu_plus{0.0, 0.0}, mu_minus{0.0, 0.0};
  GapSet J_plus, J_minus; // J_minus holds |j| for the backward indices
  long verified_horizon = 0;

  // Indices surviving the discarded prefix, and the verified margins
  //   log|z^{j.k}| - delta e^{|j| mu}   (mu taken at the upper end).
  std::vector<long> retained_plus, retained_minus;
  std::vector<double> margins_plus, margins_minus;
  long discarded_prefix_plus = 0, discarded_prefix_minus = 0;

  std::uint64_t seed = 0;
  int draws = 0;

  WitnessCertificate(IntMatrix M_, ComplexPoint z_, LatticeVector k_)
      : M(std::move(M_)), z(std::move(z_)), k(std::move(k_)) {}
};

namespace andetail {

using CVec = std::vector<std::complex<double>>;
using CMat = std::vector<CVec>;

// Dense LU solve with partial pivoting.
inline CVec solve_dense(CMat a, CVec b) {
  const std::size_t n = b.size();
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(a[i][k]) > std::abs(a[piv][k])) piv = i;
    if (std::abs(a[piv][k]) < 1e-300)
      throw SearchFailed("singular system in the eigenbasis solve");
    std::swap(a[k], a[piv]);
    std::swap(b[k], b[piv]);
    for (std::size_t i = k + 1; i < n; ++i) {
      const std::complex<double> f = a[i][k] / a[k][k];
      for (std::size_t j = k; j < n; ++j) a[i][j] -= f * a[k][j];
      b[i] -= f * b[k];
    }
  }
  CVec x(n);
  for (std::size_t k = n; k-- > 0;) {
    std::complex<double> s = b[k];
    for (std::size_t j = k + 1; j < n; ++j) s -= a[k][j] * x[j];
    x[k] = s / a[k][k];
  }
  return x;
}

// Null vector of a (numerically) rank-deficient square matrix by full-pivot
// elimination: runs n-1 elimination steps, then back-substitutes with the
// last permuted variable freed. Normalized so the largest entry is 1.
inline CVec null_vector_dense(CMat a) {
  const std::size_t n = a.size();
  std::vector<std::size_t> colp(n);
  for (std::size_t i = 0; i < n; ++i) colp[i] = i;
  double scale = 1e-300;
  for (const auto& row : a)
    for (const auto& v : row) scale = std::max(scale, std::abs(v));
  for (std::size_t k = 0; k + 1 < n; ++k) {
    std::size_t pr = k, pc = k;
    double best = 0.0;
    for (std::size_t i = k; i < n; ++i)
      for (std::size_t j = k; j < n; ++j)
        if (std::abs(a[i][j]) > best) {
          best = std::abs(a[i][j]);
          pr = i;
          pc = j;
        }
    if (best < 1e-12 * scale)
      throw SearchFailed("eigenvalue is not numerically simple");
    std::swap(a[k], a[pr]);
    for (std::size_t i = 0; i < n; ++i) std::swap(a[i][k], a[i][pc]);
    std::swap(colp[k], colp[pc]);
    for (std::size_t i = k + 1; i < n; ++i) {
      const std::complex<double> f = a[i][k] / a[k][k];
      for (std::size_t j = k; j < n; ++j) a[i][j] -= f * a[k][j];
    }
  }
  CVec xp(n);
  xp[n - 1] = {1.0, 0.0};
  for (std::size_t k = n - 1; k-- > 0;) {
    std::complex<double> s(0.0, 0.0);
    for (std::size_t j = k + 1; j < n; ++j) s += a[k][j] * xp[j];
    xp[k] = -s / a[k][k];
  }
  CVec x(n);
  for (std::size_t k = 0; k < n; ++k) x[colp[k]] = xp[k];
  double mx = 0.0;
  std::size_t mi = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (std::abs(x[i]) > mx) {
      mx = std::abs(x[i]);
      mi = i;
    }
  const std::complex<double> nrm = x[mi];
  for (auto& v : x) v /= nrm;
  return x;
}

} // namespace andetail

// Re-verifies a witness certificate from its raw data (M, z, k, delta),
// trusting nothing produced by the search: exact covector iteration for
// every retained index, strict positivity of every margin, and consistency
// of the recorded rates with a fresh spectral profile.
inline bool validate_witness(const WitnessCertificate& cert) {
  try {
    if (!(cert.delta > 0.0)) return false;
    if (cert.k.dim() != cert.M.dim() || cert.z.dim() != cert.M.dim()) return false;

    SpectralProfile prof = spectral_profile(cert.M, 1e-10);
    if (prof.exact_one) return false;
    const double max_lo = std::max(cert.mu_plus.lo, cert.mu_minus.lo);
    const double max_hi = std::max(cert.mu_plus.hi, cert.mu_minus.hi);
    if (max_hi < prof.mu.lo - 1e-9 || max_lo > prof.mu.hi + 1e-9) return false;

    std::vector<double> u(cert.z.dim());
    for (std::size_t i = 0; i < cert.z.dim(); ++i) u[i] = std::log(std::abs(cert.z.at(i)));

    auto check_side = [&](const GapSet& gs, const std::vector<long>& retained,
                          const std::vector<double>& margins, double mu_hi,
                          long sign) -> bool {
      if (retained.size() != margins.size()) return false;
      if (retained.empty()) return false;
      for (long j : retained)
        if (j < 0 || j > gs.horizon ||
            !std::binary_search(gs.members.begin(), gs.members.end(), j))
          return false;
      for (std::size_t i = 1; i < gs.members.size(); ++i)
        if (gs.members[i] - gs.members[i - 1] > std::max<long>(gs.max_gap, 1)) return false;
      for (std::size_t t = 0; t < retained.size(); ++t) {
        const long j = retained[t];
        LatticeVector r = covector_action(cert.k, cert.M, sign * j);
        double dot = 0.0;
        for (std::size_t i = 0; i < u.size(); ++i)
          dot += andetail::clamped_d(r.at(i)) * u[i];
        const double expo = static_cast<double>(j) * mu_hi;
        if (expo > 690.0) return false;
        const double margin = dot - cert.delta * std::exp(expo);
        if (!(margin > 0.0)) return false;
        if (std::abs(margin - margins[t]) > 1e-6 * std::max(1.0, std::abs(margin)))
          return false;
      }
      return true;
    };

    if (!check_side(cert.J_plus, cert.retained_plus, cert.margins_plus,
                    cert.mu_plus.hi, +1))
      return false;
    if (!check_side(cert.J_minus, cert.retained_minus, cert.margins_minus,
                    cert.mu_minus.hi, -1))
      return false;
    return true;
  } catch (const Error&) {
    return false;
  }
}

// Constructive witness search. Draws a log-vector u in the unit box with
// nonnegligible coefficients on the peripheral eigenvectors (the drawn seed
// and the number of draws are recorded), picks an integer covector k with
// <u'_+, k> > 3 delta and <u'_-, k> > 3 delta along the bisector of the two
// peripheral projections, builds the return sets via gap_set on the
// peripheral eigenvalue arguments, discards the finite prefix where the
// subdominant part still interferes, and verifies every margin by exact
// covector iteration up to the horizon.
inline WitnessCertificate witness_search(const IntMatrix& M, double tol, long horizon,
                                         std::uint64_t seed = 20240717ULL) {
  if (!(tol > 0.0)) throw NonPositiveMargin("tol must be positive");
  if (horizon < 2) throw SchemaViolation("horizon must be >= 2");
  const std::size_t d = M.dim();

  SpectralProfile prof = spectral_profile(M, std::min(tol, 1e-10));
  if (prof.exact_one)
    throw HypothesisViolated("witness search requires spectral radius > 1");

  IntPolynomial P = M.char_poly();
  std::vector<PreciseRoot> roots = certified_roots(P, 1e-12);
  for (const PreciseRoot& r : roots)
    if (r.multiplicity != 1)
      throw SearchFailed("repeated eigenvalues: no simple peripheral eigenbasis");

  // Eigen data, sorted by modulus descending.
  struct Eig {
    std::complex<double> lambda;
    andetail::CVec b;
  };
  std::vector<Eig> eigs;
  const auto Ad = M.to_double();
  double anorm = 1e-300;
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) anorm = std::max(anorm, std::abs(Ad[i][j]));
  for (const PreciseRoot& r : roots) {
    const std::complex<double> lambda(r.re.get_d(), r.im.get_d());
    andetail::CMat A(d, andetail::CVec(d));
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j)
        A[i][j] = std::complex<double>(Ad[i][j], 0.0) -
                  (i == j ? lambda : std::complex<double>(0.0, 0.0));
    andetail::CVec b = andetail::null_vector_dense(A);
    double resid = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      std::complex<double> s(0.0, 0.0);
      for (std::size_t j = 0; j < d; ++j) s += A[i][j] * b[j];
      resid = std::max(resid, std::abs(s));
    }
    if (resid > 1e-7 * anorm * std::max(1.0, std::abs(lambda)))
      throw SearchFailed("eigenvector residual too large");
    eigs.push_back({lambda, std::move(b)});
  }
  std::sort(eigs.begin(), eigs.end(),
            [](const Eig& x, const Eig& y) { return std::abs(x.lambda) > std::abs(y.lambda); });

  const double top = std::abs(eigs.front().lambda);
  const double bot = std::abs(eigs.back().lambda);
  std::vector<std::size_t> S, T;
  for (std::size_t i = 0; i < d; ++i) {
    if (std::abs(eigs[i].lambda) >= top * (1.0 - 1e-9)) S.push_back(i);
    if (std::abs(eigs[i].lambda) <= bot * (1.0 + 1e-9)) T.push_back(i);
  }

  // Eigenbasis matrix for coefficient solves.
  andetail::CMat V(d, andetail::CVec(d));
  for (std::size_t j = 0; j < d; ++j)
    for (std::size_t i = 0; i < d; ++i) V[i][j] = eigs[j].b[i];

  std::mt19937_64 rng(seed);
  auto unit_box = [&rng]() {
    return (static_cast<double>(rng() >> 11) / 9007199254740992.0) * 2.0 - 1.0;
  };

  int draws = 0;
  std::string last_failure = "witness search space exhausted";
  for (int attempt = 0; attempt < 6; ++attempt) {
    // Draw u with solid coefficients on every peripheral eigenvector.
    std::vector<double> u(d);
    andetail::CVec coef;
    bool ok = false;
    for (int t = 0; t < 64 && !ok; ++t) {
      for (std::size_t i = 0; i < d; ++i) u[i] = unit_box();
      ++draws;
      andetail::CVec rhs(d);
      for (std::size_t i = 0; i < d; ++i) rhs[i] = {u[i], 0.0};
      coef = andetail::solve_dense(V, rhs);
      double cmax = 0.0;
      for (const auto& cc : coef) cmax = std::max(cmax, std::abs(cc));
      if (cmax < 1e-6) continue;
      double cmin = std::numeric_limits<double>::infinity();
      for (std::size_t i : S) cmin = std::min(cmin, std::abs(coef[i]));
      for (std::size_t i : T) cmin = std::min(cmin, std::abs(coef[i]));
      ok = cmin >= 0.05 * cmax;
    }
    if (!ok) {
      last_failure = "no drawn point had solid peripheral coefficients";
      continue;
    }

    // Peripheral projections; both are real because conjugates pair up.
    auto projection = [&](const std::vector<std::size_t>& grp, std::vector<double>* out) {
      andetail::CVec acc(d, {0.0, 0.0});
      for (std::size_t i : grp)
        for (std::size_t l = 0; l < d; ++l) acc[l] += coef[i] * eigs[i].b[l];
      double nrm = 0.0, imag = 0.0;
      for (std::size_t l = 0; l < d; ++l) {
        nrm = std::max(nrm, std::abs(acc[l]));
        imag = std::max(imag, std::abs(acc[l].imag()));
      }
      if (nrm < 1e-12 || imag > 1e-6 * nrm) return false;
      out->assign(d, 0.0);
      for (std::size_t l = 0; l < d; ++l) (*out)[l] = acc[l].real();
      return true;
    };
    std::vector<double> up, um;
    if (!projection(S, &up) || !projection(T, &um)) {
      last_failure = "peripheral projections were not real";
      continue;
    }

    // Integer covector along the bisector of the two projections.
    auto norm2 = [](const std::vector<double>& v) {
      double s = 0.0;
      for (double x : v) s += x * x;
      return std::sqrt(s);
    };
    const double np = norm2(up), nm = norm2(um);
    std::vector<double> dir(d);
    for (std::size_t l = 0; l < d; ++l) dir[l] = up[l] / np + um[l] / nm;

    LatticeVector ktilde(d);
    double p_plus = 0.0, p_minus = 0.0;
    bool found_k = false;
    for (double t = 1.0; t <= 65536.0 && !found_k; t *= 2.0) {
      std::vector<mpz_class> ent(d);
      bool nonzero = false;
      double pp = 0.0, pm = 0.0;
      for (std::size_t l = 0; l < d; ++l) {
        const long v = std::lround(t * dir[l]);
        ent[l] = v;
        if (v != 0) nonzero = true;
        pp += up[l] * static_cast<double>(v);
        pm += um[l] * static_cast<double>(v);
      }
      if (!nonzero) continue;
      const double floor_k = 0.05 * std::min(np, nm);
      if (pp >= floor_k && pm >= floor_k) {
        ktilde = LatticeVector(std::move(ent));
        p_plus = pp;
        p_minus = pm;
        found_k = true;
      }
    }
    if (!found_k) {
      last_failure = "no integer covector found within the coefficient bound";
      continue;
    }
    const double delta = std::min(p_plus, p_minus) / 3.0001;

    // Return-set tolerances: a torus perturbation of size eps changes the
    // projection pairing by at most eps * W, so eps <= 0.99 delta / W keeps
    // the pairing above 2 delta on the return set.
    auto weight = [&](const std::vector<std::size_t>& grp) {
      double Wsum = 0.0;
      for (std::size_t i : grp) {
        std::complex<double> dotk(0.0, 0.0);
        for (std::size_t l = 0; l < d; ++l)
          dotk += eigs[i].b[l] * andetail::clamped_d(ktilde.at(l));
        Wsum += std::abs(coef[i]) * std::abs(dotk);
      }
      return Wsum;
    };
    const double Wp = weight(S), Wm = weight(T);
    const double eps_p = std::min(0.5, Wp > 0.0 ? 0.99 * delta / Wp : 0.5);
    const double eps_m = std::min(0.5, Wm > 0.0 ? 0.99 * delta / Wm : 0.5);

    auto torus_of = [&](const std::vector<std::size_t>& grp, bool invert) {
      std::vector<std::complex<double>> tc;
      for (std::size_t i : grp) {
        std::complex<double> unit = eigs[i].lambda / std::abs(eigs[i].lambda);
        tc.push_back(invert ? std::conj(unit) : unit);
      }
      return TorusPoint(std::move(tc), 1e-6);
    };
    GapSet Jp = gap_set(torus_of(S, false), eps_p, horizon);
    GapSet Jm = gap_set(torus_of(T, true), eps_m, horizon);

    // Margins by exact covector iteration; discard the failing prefix.
    auto margins_of = [&](const GapSet& gs, double mu_hi, long sign,
                          std::vector<long>* retained, std::vector<double>* margins,
                          long* discarded) -> bool {
      std::vector<double> all(gs.members.size());
      IntMatrix step = sign >= 0 ? M : M.inverse_unimodular();
      LatticeVector r = ktilde;
      long cur = 0;
      for (std::size_t t = 0; t < gs.members.size(); ++t) {
        const long j = gs.members[t];
        while (cur < j) {
          r = row_apply(r, step);
          ++cur;
        }
        double dot = 0.0;
        for (std::size_t i = 0; i < d; ++i) dot += andetail::clamped_d(r.at(i)) * u[i];
        const double expo = static_cast<double>(j) * mu_hi;
        all[t] = (expo > 690.0) ? -std::numeric_limits<double>::infinity()
                                : dot - delta * std::exp(expo);
      }
      std::size_t cut = 0;
      for (std::size_t t = all.size(); t-- > 0;)
        if (!(all[t] > 0.0)) {
          cut = t + 1;
          break;
        }
      if (cut >= all.size()) return false;
      retained->assign(gs.members.begin() + static_cast<long>(cut), gs.members.end());
      margins->assign(all.begin() + static_cast<long>(cut), all.end());
      *discarded = static_cast<long>(cut);
      return true;
    };

    WitnessCertificate cert(M,
                            ComplexPoint([&] {
                              std::vector<std::complex<double>> zc(d);
                              for (std::size_t i = 0; i < d; ++i)
                                zc[i] = {std::exp(u[i]), 0.0};
                              return zc;
                            }()),
                            ktilde);
    cert.delta = delta;
    cert.mu_plus = prof.mu_plus;
    cert.mu_minus = prof.mu_minus;
    cert.J_plus = Jp;
    cert.J_minus = Jm;
    cert.verified_horizon = horizon;
    cert.seed = seed;
    cert.draws = draws;
    if (!margins_of(Jp, prof.mu_plus.hi, +1, &cert.retained_plus, &cert.margins_plus,
                    &cert.discarded_prefix_plus)) {
      last_failure = "forward margins never became positive";
      continue;
    }
    if (!margins_of(Jm, prof.mu_minus.hi, -1, &cert.retained_minus, &cert.margins_minus,
                    &cert.discarded_prefix_minus)) {
      last_failure = "backward margins never became positive";
      continue;
    }
    if (!validate_witness(cert)) {
      last_failure = "internal validation rejected the certificate";
      continue;
    }
    return cert;
  }
  throw SearchFailed(last_failure);
}

// ---------------------------------------------------------------------------
// Harmonic measure of the vertical sides of a rectangle, at the center.
// ---------------------------------------------------------------------------
struct RectangleMeasure {
  double omega0 = 0.0;    // value at the center
  double decay_rate = 0.0; // fitted d(log omega0)/d(alpha), ~ -pi/(2 h')
  double residual = 0.0;  // verified stencil residual (relative)
  long grid_x = 0, grid_y = 0;
};

namespace andetail {

struct RectSolve {
  double omega0;
  double residual;
  long nx, ny;
};

// Second-order finite differences on [-alpha, alpha] x [-h', h'], boundary 1
// on the vertical sides and 0 on the horizontal ones. The discrete Laplace
// system is solved directly: a sine transform in y decouples the columns
// into tridiagonal systems in x (Thomas algorithm), and the assembled field
// is then re-checked against the five-point stencil.
inline RectSolve solve_rectangle(double alpha, double hprime, long grid) {
  long ny = grid + (grid % 2);
  long nx = std::lround(static_cast<double>(ny) * alpha / hprime);
  nx = std::max<long>(8, nx + (nx % 2));
  const double dx = 2.0 * alpha / static_cast<double>(nx);
  const double dy = 2.0 * hprime / static_cast<double>(ny);

  const std::size_t my = static_cast<std::size_t>(ny - 1); // interior rows
  const std::size_t mx = static_cast<std::size_t>(nx - 1); // interior cols

  // Sine table S[q][l] = sin(pi (q+1) (l+1) / ny).
  std::vector<std::vector<double>> S(my, std::vector<double>(my));
  for (std::size_t q = 0; q < my; ++q)
    for (std::size_t l = 0; l < my; ++l)
      S[q][l] = std::sin(M_PI * static_cast<double>(q + 1) * static_cast<double>(l + 1) /
                         static_cast<double>(ny));

  // Mode coefficients of the boundary data (the constant 1 on interior
  // nodes of a vertical side): b_q = (2/ny) sum_l S[q][l].
  std::vector<double> bq(my);
  for (std::size_t q = 0; q < my; ++q) {
    double s = 0.0;
    for (std::size_t l = 0; l < my; ++l) s += S[q][l];
    bq[q] = 2.0 / static_cast<double>(ny) * s;
  }

  // Per mode: u_{i-1} - (2 + sigma_q) u_i + u_{i+1} = 0 on i = 1..nx-1 with
  // u_0 = u_nx = b_q, where sigma_q = (4 dx^2 / dy^2) sin^2(pi q / (2 ny)).
  std::vector<std::vector<double>> modes(my, std::vector<double>(mx));
  std::vector<double> cdiag(mx), rhs(mx);
  for (std::size_t q = 0; q < my; ++q) {
    const double sq = std::sin(M_PI * static_cast<double>(q + 1) / (2.0 * static_cast<double>(ny)));
    const double sigma = 4.0 * dx * dx / (dy * dy) * sq * sq;
    const double diag = -(2.0 + sigma);
    for (std::size_t i = 0; i < mx; ++i) rhs[i] = 0.0;
    rhs[0] = -bq[q];
    rhs[mx - 1] -= bq[q];
    // Thomas sweep with off-diagonal 1.
    cdiag[0] = 1.0 / diag;
    rhs[0] = rhs[0] / diag;
    for (std::size_t i = 1; i < mx; ++i) {
      const double m = diag - cdiag[i - 1];
      cdiag[i] = 1.0 / m;
      rhs[i] = (rhs[i] - rhs[i - 1]) / m;
    }
    modes[q][mx - 1] = rhs[mx - 1];
    for (std::size_t i = mx - 1; i-- > 0;) modes[q][i] = rhs[i] - cdiag[i] * modes[q][i + 1];
  }

  // Assemble the field and verify the stencil.
  std::vector<std::vector<double>> u(static_cast<std::size_t>(nx) + 1,
                                     std::vector<double>(static_cast<std::size_t>(ny) + 1, 0.0));
  for (long l = 1; l < ny; ++l) {
    u[0][static_cast<std::size_t>(l)] = 1.0;
    u[static_cast<std::size_t>(nx)][static_cast<std::size_t>(l)] = 1.0;
  }
  for (std::size_t i = 0; i < mx; ++i)
    for (std::size_t l = 0; l < my; ++l) {
      double s = 0.0;
      for (std::size_t q = 0; q < my; ++q) s += modes[q][i] * S[q][l];
      u[i + 1][l + 1] = s;
    }

  double maxres = 0.0;
  for (std::size_t i = 1; i < static_cast<std::size_t>(nx); ++i)
    for (std::size_t l = 1; l < static_cast<std::size_t>(ny); ++l) {
      const double res = (u[i + 1][l] + u[i - 1][l] - 2.0 * u[i][l]) / (dx * dx) +
                         (u[i][l + 1] + u[i][l - 1] - 2.0 * u[i][l]) / (dy * dy);
      maxres = std::max(maxres, std::abs(res));
    }
  const double res_rel = maxres / (2.0 / (dx * dx) + 2.0 / (dy * dy));

  RectSolve out;
  out.omega0 = u[static_cast<std::size_t>(nx / 2)][static_cast<std::size_t>(ny / 2)];
  out.residual = res_rel;
  out.nx = nx;
  out.ny = ny;
  return out;
}

} // namespace andetail

// Harmonic measure omega0 of the vertical sides at the rectangle's center,
// with a fitted decay rate of log omega0 in alpha (from two wider solves);
// for tall comparisons the rate approaches -pi / (2 h').
inline RectangleMeasure rectangle_harmonic_measure(double alpha, double hprime, long grid) {
  if (!(alpha > 0.0) || !(hprime > 0.0))
    throw NonPositiveMargin("rectangle dimensions must be positive");
  if (grid < 64) throw SchemaViolation("grid must be >= 64");

  const andetail::RectSolve s0 = andetail::solve_rectangle(alpha, hprime, grid);
  if (s0.residual > 1e-9) throw NonConvergedSolve("stencil residual too large");

  const double a1 = alpha + hprime / 2.0;
  const double a2 = alpha + hprime;
  const andetail::RectSolve s1 = andetail::solve_rectangle(a1, hprime, grid);
  const andetail::RectSolve s2 = andetail::solve_rectangle(a2, hprime, grid);
  if (s1.residual > 1e-9 || s2.residual > 1e-9)
    throw NonConvergedSolve("stencil residual too large in the rate fit");
  if (!(s0.omega0 > 0.0) || !(s1.omega0 > 0.0) || !(s2.omega0 > 0.0))
    throw NonConvergedSolve("center value vanished");

  // Least-squares slope of log omega0 against alpha over the three solves.
  const double xs[3] = {alpha, a1, a2};
  const double ys[3] = {std::log(s0.omega0), std::log(s1.omega0), std::log(s2.omega0)};
  const double xbar = (xs[0] + xs[1] + xs[2]) / 3.0;
  const double ybar = (ys[0] + ys[1] + ys[2]) / 3.0;
  double num = 0.0, den = 0.0;
  for (int i = 0; i < 3; ++i) {
    num += (xs[i] - xbar) * (ys[i] - ybar);
    den += (xs[i] - xbar) * (xs[i] - xbar);
  }

  RectangleMeasure out;
  out.omega0 = s0.omega0;
  out.decay_rate = num / den;
  out.residual = s0.residual;
  out.grid_x = s0.nx;
  out.grid_y = s0.ny;
  return out;
}

} // namespace steinlab
