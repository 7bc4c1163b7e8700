#pragma once

#include <gmpxx.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <type_traits>
#include <vector>

#include "steinlab/errors.hpp"
#include "steinlab/int_polynomial.hpp"
#include "steinlab/interval.hpp"

namespace steinlab {

// A certified root disc in display precision. The true root lies within
// `radius` of `center`; `multiplicity` is exact (from squarefree structure).
struct RootCluster {
  std::complex<double> center;
  double radius = 0.0;
  int multiplicity = 1;
};

// A certified root disc at working precision. The Weierstrass discs
// D(center, cover_radius) taken over all roots jointly cover the true root
// set; D(center, exist_radius) is guaranteed to contain at least one root.
// abs_lo/abs_hi bound the modulus of a root associated with this disc.
struct PreciseRoot {
  mpf_class re, im;
  double cover_radius = 0.0;
  double exist_radius = 0.0;
  int multiplicity = 1;
  double abs_lo = 0.0;
  double abs_hi = 0.0;
};

namespace rootdetail {

template <class R> struct RealTraits;

template <> struct RealTraits<double> {
  static double make(int, double v) { return v; }
  static double from_mpz(int, const mpz_class& z) { return z.get_d(); }
  static double eps(int) { return std::ldexp(1.0, -52); }
  static double to_d(double v) { return v; }
};

template <> struct RealTraits<mpf_class> {
  static mpf_class make(int bits, double v) { return mpf_class(v, bits); }
  static mpf_class from_mpz(int bits, const mpz_class& z) {
    mpf_class r(0, bits);
    r = z;
    return r;
  }
  static double eps(int bits) { return std::ldexp(1.0, -(bits - 1)); }
  static double to_d(const mpf_class& v) { return v.get_d(); }
};

// Minimal complex-over-R; std::complex is only specified for the builtin
// floating types, so mpf_class goes through this instead.
template <class R> struct Cx {
  R re, im;
};

template <class R> Cx<R> cadd(const Cx<R>& a, const Cx<R>& b) {
  return {R(a.re + b.re), R(a.im + b.im)};
}
template <class R> Cx<R> csub(const Cx<R>& a, const Cx<R>& b) {
  return {R(a.re - b.re), R(a.im - b.im)};
}
template <class R> Cx<R> cmul(const Cx<R>& a, const Cx<R>& b) {
  return {R(a.re * b.re - a.im * b.im), R(a.re * b.im + a.im * b.re)};
}
template <class R> R cabs(const Cx<R>& a) {
  if constexpr (std::is_same_v<R, double>) {
    return std::hypot(a.re, a.im);
  } else {
    return R(sqrt(R(a.re * a.re + a.im * a.im)));
  }
}
template <class R> Cx<R> cdiv(const Cx<R>& a, const Cx<R>& b) {
  R n2(b.re * b.re + b.im * b.im);
  return {R((a.re * b.re + a.im * b.im) / n2), R((a.im * b.re - a.re * b.im) / n2)};
}

// Horner evaluation of value, derivative, and nonnegative majorants of both:
// the same recurrence run on absolute values bounds every intermediate, so a
// standard running-error argument turns the majorant into a rounding bound.
template <class R> struct EvalResult {
  Cx<R> p, dp;
  R maj_p, maj_dp;
};

template <class R>
EvalResult<R> horner(const std::vector<R>& c, const Cx<R>& z, int bits) {
  const R az = cabs(z);
  EvalResult<R> r{{RealTraits<R>::make(bits, 0.0), RealTraits<R>::make(bits, 0.0)},
                  {RealTraits<R>::make(bits, 0.0), RealTraits<R>::make(bits, 0.0)},
                  RealTraits<R>::make(bits, 0.0),
                  RealTraits<R>::make(bits, 0.0)};
  for (std::size_t i = c.size(); i-- > 0;) {
    r.dp = cadd(cmul(r.dp, z), r.p);
    r.maj_dp = R(r.maj_dp * az + r.maj_p);
    r.p = cmul(r.p, z);
    r.p.re = R(r.p.re + c[i]);
    R ac = c[i] >= 0 ? c[i] : R(-c[i]);
    r.maj_p = R(r.maj_p * az + ac);
  }
  return r;
}

// Initial moduli from the upper convex hull of (k, log2 |c_k|): the classic
// annulus estimate, which keeps wide-dynamic-range spectra (products of very
// large and very small roots) from stalling the iteration.
inline std::vector<double> initial_moduli(const std::vector<double>& log2abs,
                                          std::size_t n) {
  std::vector<std::pair<double, double>> pts; // (k, log2|c_k|)
  for (std::size_t k = 0; k <= n; ++k)
    if (std::isfinite(log2abs[k])) pts.emplace_back(static_cast<double>(k), log2abs[k]);
  std::vector<std::pair<double, double>> hull; // upper hull, left to right
  for (const auto& p : pts) {
    while (hull.size() >= 2) {
      auto& a = hull[hull.size() - 2];
      auto& b = hull[hull.size() - 1];
      if ((b.second - a.second) * (p.first - a.first) <=
          (p.second - a.second) * (b.first - a.first))
        hull.pop_back();
      else
        break;
    }
    hull.push_back(p);
  }
  std::vector<double> radii;
  radii.reserve(n);
  for (std::size_t e = 0; e + 1 < hull.size(); ++e) {
    const double dk = hull[e + 1].first - hull[e].first;
    const double slope = (hull[e].second - hull[e + 1].second) / dk;
    const double r = std::exp2(std::clamp(slope, -500.0, 500.0));
    for (long i = 0; i < static_cast<long>(dk); ++i) radii.push_back(r);
  }
  while (radii.size() < n) radii.push_back(1.0);
  return radii;
}

template <class R>
std::vector<Cx<R>> aberth(const std::vector<R>& c, const std::vector<double>& init_radii,
                          int bits, int stage_tag) {
  const std::size_t n = c.size() - 1;
  std::vector<Cx<R>> z(n);
  const double twist = 0.3779 + 0.41 * stage_tag;
  for (std::size_t i = 0; i < n; ++i) {
    const double ang =
        2.0 * M_PI * (static_cast<double>(i) / n) + twist + 0.13 * i / (n + 1.0);
    z[i] = {RealTraits<R>::make(bits, init_radii[i] * std::cos(ang)),
            RealTraits<R>::make(bits, init_radii[i] * std::sin(ang))};
  }
  const double eps = RealTraits<R>::eps(bits);
  const int max_iter = 160 + 60 * static_cast<int>(n);
  for (int it = 0; it < max_iter; ++it) {
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      EvalResult<R> ev = horner(c, z[i], bits);
      if (RealTraits<R>::to_d(cabs(ev.p)) == 0.0) continue;
      if (RealTraits<R>::to_d(cabs(ev.dp)) == 0.0) {
        z[i].re = R(z[i].re + RealTraits<R>::make(bits, 1e-3 * (1.0 + it)));
        worst = 1.0;
        continue;
      }
      Cx<R> newton = cdiv(ev.p, ev.dp);
      Cx<R> s{RealTraits<R>::make(bits, 0.0), RealTraits<R>::make(bits, 0.0)};
      bool collision = false;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        Cx<R> d = csub(z[i], z[j]);
        if (RealTraits<R>::to_d(cabs(d)) == 0.0) {
          collision = true;
          break;
        }
        Cx<R> one{RealTraits<R>::make(bits, 1.0), RealTraits<R>::make(bits, 0.0)};
        s = cadd(s, cdiv(one, d));
      }
      if (collision) {
        z[i].re = R(z[i].re + RealTraits<R>::make(bits, 1e-3 * (1.0 + it)));
        worst = 1.0;
        continue;
      }
      Cx<R> denom =
          csub(Cx<R>{RealTraits<R>::make(bits, 1.0), RealTraits<R>::make(bits, 0.0)},
               cmul(newton, s));
      const double dn = RealTraits<R>::to_d(cabs(denom));
      Cx<R> corr = (dn == 0.0) ? newton : cdiv(newton, denom);
      z[i] = csub(z[i], corr);
      const double rel =
          RealTraits<R>::to_d(cabs(corr)) / (1.0 + RealTraits<R>::to_d(cabs(z[i])));
      worst = std::max(worst, rel);
    }
    if (worst < 4.0 * eps) break;
  }
  return z;
}

struct DiscBounds {
  double cover = std::numeric_limits<double>::infinity();
  double exist = std::numeric_limits<double>::infinity();
  double abs_lo = 0.0;
  double abs_hi = std::numeric_limits<double>::infinity();
};

inline double dbl_up(double x) {
  return std::nextafter(std::nextafter(x, INFINITY), INFINITY);
}
inline double dbl_dn(double x) {
  return std::nextafter(std::nextafter(x, -INFINITY), -INFINITY);
}

// A-posteriori certification around the computed points. The evaluation
// error is absorbed via the Horner majorants; pair separations enter the
// denominator's relative error bound explicitly, so nearby centers lose
// certification (and force escalation) rather than soundness.
template <class R>
std::vector<DiscBounds> certify(const std::vector<R>& c, const std::vector<Cx<R>>& z,
                                int bits) {
  const std::size_t n = z.size();
  const double u = RealTraits<R>::eps(bits);
  std::vector<DiscBounds> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    EvalResult<R> ev = horner(c, z[i], bits);
    const double maj_p = RealTraits<R>::to_d(ev.maj_p);
    const double maj_dp = RealTraits<R>::to_d(ev.maj_dp);
    const double e_p = 8.0 * n * u * maj_p;
    const double e_dp = 8.0 * n * u * maj_dp;
    const double ap = RealTraits<R>::to_d(cabs(ev.p));
    const double adp = RealTraits<R>::to_d(cabs(ev.dp));
    const double az = RealTraits<R>::to_d(cabs(z[i]));

    Cx<R> prod{RealTraits<R>::make(bits, 1.0), RealTraits<R>::make(bits, 0.0)};
    double relerr_prod = 6.0 * n * u;
    bool degenerate = false;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      Cx<R> d = csub(z[i], z[j]);
      const double ad = RealTraits<R>::to_d(cabs(d));
      if (ad == 0.0) {
        degenerate = true;
        break;
      }
      relerr_prod += u * (az + RealTraits<R>::to_d(cabs(z[j]))) / ad;
      prod = cmul(prod, d);
    }
    if (degenerate || relerr_prod >= 0.5) continue;

    const double aprod = RealTraits<R>::to_d(cabs(prod));
    if (aprod > 0.0) {
      const double w_hi = (ap + e_p) / (aprod * (1.0 - relerr_prod));
      out[i].cover = dbl_up(n * w_hi * (1.0 + 8.0 * u));
    }
    const double pd_lo = adp - e_dp;
    if (pd_lo > 0.0)
      out[i].exist = dbl_up(n * (ap + e_p) / pd_lo * (1.0 + 8.0 * u));

    const double trunc = az * 1e-15; // double readout slack
    out[i].abs_hi = dbl_up(az + trunc + out[i].cover);
    out[i].abs_lo = std::max(0.0, dbl_dn(az - trunc - out[i].exist));
  }
  return out;
}

struct FactorInput {
  std::vector<mpz_class> coeffs; // monic, low to high
  int multiplicity = 1;
  int max_coeff_bits = 0;
  std::vector<double> log2abs;
};

template <class R>
bool try_stage(const FactorInput& f, int bits, int stage_tag, double rel_target,
               std::vector<PreciseRoot>& out) {
  const std::size_t n = f.coeffs.size() - 1;
  std::vector<R> c;
  c.reserve(f.coeffs.size());
  for (const auto& v : f.coeffs) c.push_back(RealTraits<R>::from_mpz(bits, v));
  std::vector<Cx<R>> z = aberth<R>(c, initial_moduli(f.log2abs, n), bits, stage_tag);
  std::vector<DiscBounds> b = certify<R>(c, z, bits);
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(b[i].cover) || !std::isfinite(b[i].exist)) return false;
    const double scale = std::max(1.0, RealTraits<R>::to_d(cabs(z[i])));
    if (b[i].cover > rel_target * scale || b[i].exist > rel_target * scale) return false;
  }
  const int out_bits = std::max(128, bits);
  for (std::size_t i = 0; i < n; ++i) {
    PreciseRoot r;
    r.re = mpf_class(z[i].re, out_bits);
    r.im = mpf_class(z[i].im, out_bits);
    r.cover_radius = b[i].cover;
    r.exist_radius = b[i].exist;
    r.multiplicity = f.multiplicity;
    r.abs_lo = b[i].abs_lo;
    r.abs_hi = b[i].abs_hi;
    out.push_back(std::move(r));
  }
  return true;
}

inline void solve_factor(const IntPolynomial& poly, int multiplicity, double rel_target,
                         std::vector<PreciseRoot>& out) {
  const std::size_t n = poly.degree();
  if (n == 0) return;
  FactorInput f;
  f.coeffs = poly.coeffs();
  f.multiplicity = multiplicity;
  f.log2abs.resize(n + 1);
  for (std::size_t k = 0; k <= n; ++k) {
    if (f.coeffs[k] == 0) {
      f.log2abs[k] = -std::numeric_limits<double>::infinity();
    } else {
      long e;
      const double m = mpz_get_d_2exp(&e, f.coeffs[k].get_mpz_t());
      f.log2abs[k] = std::log2(std::fabs(m)) + static_cast<double>(e);
      f.max_coeff_bits =
          std::max(f.max_coeff_bits,
                   static_cast<int>(mpz_sizeinbase(f.coeffs[k].get_mpz_t(), 2)));
    }
  }

  if (n == 1) {
    const mpz_class root = -f.coeffs[0]; // exact integer root
    const int bits = std::max(128, f.max_coeff_bits + 32);
    PreciseRoot r;
    r.re = RealTraits<mpf_class>::from_mpz(bits, root);
    r.im = mpf_class(0, bits);
    r.multiplicity = multiplicity;
    const double az = std::fabs(r.re.get_d());
    if (mpz_sizeinbase(root.get_mpz_t(), 2) <= 53) {
      r.abs_lo = r.abs_hi = az; // double readout is exact
    } else {
      r.abs_lo = dbl_dn(az - az * 1e-15);
      r.abs_hi = dbl_up(az + az * 1e-15);
    }
    out.push_back(std::move(r));
    return;
  }

  std::vector<int> ladder;
  if (f.max_coeff_bits <= 50) {
    ladder = {0, 128, 256, 512, 1024, 2048};
  } else {
    int b = f.max_coeff_bits + 96;
    for (int s = 0; s < 6; ++s) {
      ladder.push_back(b);
      b *= 2;
    }
  }
  for (std::size_t s = 0; s < ladder.size(); ++s) {
    const int bits = ladder[s];
    const bool ok =
        (bits == 0)
            ? try_stage<double>(f, 53, static_cast<int>(s), rel_target, out)
            : try_stage<mpf_class>(f, bits, static_cast<int>(s), rel_target, out);
    if (ok) return;
  }
  throw CertificationFailed("root certification did not reach the requested radius for " +
                            poly.pretty());
}

} // namespace rootdetail

// All roots of p with certified discs; rel_target bounds the certified radii
// relative to max(1, |root|). Multiple roots are removed exactly up front by
// squarefree decomposition, so every numeric solve sees simple roots only.
inline std::vector<PreciseRoot> certified_roots(const IntPolynomial& p,
                                                double rel_target) {
  if (p.degree() == 0) throw DegenerateDegreeZero("root solve needs degree >= 1");
  if (!p.is_monic()) throw SchemaViolation("root solve expects a monic polynomial");
  rel_target = std::clamp(rel_target, 1e-240, 0.125);
  std::vector<PreciseRoot> out;
  for (const auto& [factor, mult] : squarefree_decomposition(p))
    rootdetail::solve_factor(factor, mult, rel_target, out);
  return out;
}

inline RootCluster to_cluster(const PreciseRoot& r) {
  RootCluster c;
  c.center = {r.re.get_d(), r.im.get_d()};
  c.radius = r.cover_radius + std::abs(c.center) * 1e-15;
  c.multiplicity = r.multiplicity;
  return c;
}

struct RootRadiusResult {
  Interval modulus;               // certified enclosure of max |root|
  std::vector<RootCluster> roots; // display-precision discs, with multiplicity
};

// Certified enclosure of the maximum root modulus. tol is absolute for
// moduli up to 1 and relative above (a double endpoint cannot express an
// absolute width below one ulp of the value).
inline RootRadiusResult root_radius(const IntPolynomial& p, double tol) {
  if (p.degree() == 0)
    throw DegenerateDegreeZero("max root modulus needs degree >= 1");
  if (tol <= 0.0) throw NonPositiveMargin("tol must be positive");
  double target = std::max(tol / 8.0, 5e-18);
  for (int attempt = 0; attempt < 3; ++attempt) {
    std::vector<PreciseRoot> roots = certified_roots(p, target);
    double lo = 0.0, hi = 0.0;
    for (const auto& r : roots) {
      lo = std::max(lo, r.abs_lo);
      hi = std::max(hi, r.abs_hi);
    }
    if (hi - lo <= tol * std::max(1.0, hi)) {
      RootRadiusResult res;
      res.modulus = {lo, hi};
      res.roots.reserve(roots.size());
      for (const auto& r : roots) res.roots.push_back(to_cluster(r));
      return res;
    }
    target /= 64.0;
  }
  throw CertificationFailed("max root modulus enclosure did not converge for " +
                            p.pretty());
}

} // namespace steinlab
