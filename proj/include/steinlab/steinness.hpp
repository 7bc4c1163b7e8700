#pragma once

#include <cmath>
#include <optional>
#include <string>

#include "steinlab/errors.hpp"
#include "steinlab/int_matrix.hpp"
#include "steinlab/interval.hpp"
#include "steinlab/spectra.hpp"

namespace steinlab {

// Modulus of the base annulus: a finite conformal modulus m > 0, a
// once-infinite annulus (punctured disc), or the doubly infinite one (C*).
struct ModulusSpec {
  enum class Kind { Finite, Infinity, TwoInfinity };
  Kind kind = Kind::Finite;
  double m = 0.0; // valid iff kind == Finite

  static ModulusSpec finite(double m) {
    if (!(m > 0.0) || !std::isfinite(m))
      throw NonPositiveMargin("modulus must be a positive finite number");
    return {Kind::Finite, m};
  }
  static ModulusSpec infinity() { return {Kind::Infinity, 0.0}; }
  static ModulusSpec two_infinity() { return {Kind::TwoInfinity, 0.0}; }

  static ModulusSpec parse(const std::string& s) {
    if (s == "inf") return infinity();
    if (s == "2inf") return two_infinity();
    try {
      std::size_t pos = 0;
      double v = std::stod(s, &pos);
      if (pos != s.size()) throw SchemaViolation("trailing junk in modulus: " + s);
      return finite(v);
    } catch (const std::invalid_argument&) {
      throw SchemaViolation("cannot parse modulus: " + s);
    } catch (const std::out_of_range&) {
      throw SchemaViolation("modulus out of range: " + s);
    }
  }

  std::string to_string() const {
    switch (kind) {
      case Kind::Infinity: return "inf";
      case Kind::TwoInfinity: return "2inf";
      default: {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", m);
        return buf;
      }
    }
  }
};

// Enclosure of the critical modulus 2 pi^2 / log rho(M), or infinite when
// rho(M) = 1 exactly (every modulus is then subcritical).
struct CriticalModulus {
  bool infinite = false;
  Interval value{0.0, 0.0}; // valid iff !infinite
};

inline CriticalModulus critical_modulus(const IntMatrix& m, double tol) {
  if (tol <= 0.0) throw NonPositiveMargin("tol must be positive");
  double t = std::max(tol * 1e-3, 1e-14);
  for (int attempt = 0; attempt < 5; ++attempt, t = std::max(t / 100.0, 2e-15)) {
    SpectralProfile prof = spectral_profile(m, t);
    if (prof.exact_one) return {true, {0.0, 0.0}};
    Interval crit = div(two_pi_squared(), prof.mu);
    if (crit.width() <= tol * std::max(1.0, crit.hi)) return {false, crit};
  }
  throw CertificationFailed("critical modulus enclosure did not reach tol");
}

enum class SteinKind { Stein, NotStein, NotSteinBaseOnly, Indeterminate };

inline const char* to_string(SteinKind k) {
  switch (k) {
    case SteinKind::Stein: return "Stein";
    case SteinKind::NotStein: return "NotStein";
    case SteinKind::NotSteinBaseOnly: return "NotSteinBaseOnly";
    default: return "Indeterminate";
  }
}

struct SteinVerdict {
  SteinKind kind = SteinKind::Indeterminate;
  bool certified = false;
  double width = 0.0; // width of the m*mu enclosure when indeterminate
  CriticalModulus critical;
  SpectralProfile profile;
};

// Decide the criterion  m * log rho(M) <= 2 pi^2  for the total space over an
// annulus of the given modulus.
//
//   - rho(M) = 1 exactly: Stein for every modulus, including both infinite
//     kinds (the comparison is 0 <= 2 pi^2 regardless of m).
//   - rho(M) > 1 and the modulus is infinite: the product is +infinity, so
//     never Stein.  With an irreducible characteristic polynomial the failure
//     is sharp: every holomorphic function on the total space is a pullback
//     from the base, reported as NotSteinBaseOnly.
//   - rho(M) > 1, finite m: certified interval comparison of m*mu against
//     2 pi^2; equality is on the Stein side.  If the enclosure straddles the
//     threshold at this tol, the verdict is Indeterminate with the enclosure
//     width attached -- rerunning at smaller tol can only sharpen it.
inline SteinVerdict classify(const IntMatrix& m, const ModulusSpec& spec, double tol) {
  if (tol <= 0.0) throw NonPositiveMargin("tol must be positive");
  SteinVerdict v;
  const double scale =
      spec.kind == ModulusSpec::Kind::Finite ? std::max(1.0, spec.m) : 1.0;
  const double prof_tol = std::max(tol / (4.0 * scale), 2e-14);
  v.profile = spectral_profile(m, prof_tol);

  if (v.profile.exact_one) {
    v.kind = SteinKind::Stein;
    v.certified = true;
    v.critical = {true, {0.0, 0.0}};
    return v;
  }
  v.critical.infinite = false;
  v.critical.value = div(two_pi_squared(), v.profile.mu);

  const auto upgrade = [&]() {
    // The base-only statement needs an irreducible characteristic polynomial;
    // if the test is out of range (degree cap, precision), keep plain NotStein.
    try {
      return is_irreducible(m.char_poly());
    } catch (const Error&) {
      return false;
    }
  };

  if (spec.kind != ModulusSpec::Kind::Finite) {
    v.kind = upgrade() ? SteinKind::NotSteinBaseOnly : SteinKind::NotStein;
    v.certified = true;
    return v;
  }

  Interval lhs = mul(widened_point(spec.m), v.profile.mu);
  Interval thr = two_pi_squared();
  if (lhs.hi <= thr.lo) {
    v.kind = SteinKind::Stein;
    v.certified = true;
  } else if (lhs.lo > thr.hi) {
    v.kind = upgrade() ? SteinKind::NotSteinBaseOnly : SteinKind::NotStein;
    v.certified = true;
  } else {
    v.kind = SteinKind::Indeterminate;
    v.certified = false;
    v.width = lhs.width();
  }
  return v;
}

// Critical modulus of a bundle map whose expansion just clears the margin:
// 2 pi^2 / log(1 + margin).  Decreasing in the margin.
inline double mu_threshold(double mu_prime) {
  if (!(mu_prime > 0.0)) throw NonPositiveMargin("margin must be positive");
  const long double pi = 3.14159265358979323846264338327950288L;
  return static_cast<double>(2.0L * pi * pi / std::log1p(static_cast<long double>(mu_prime)));
}

} // namespace steinlab
