#pragma once

#include <algorithm>
#include <cmath>
#include <limits>

#include "steinlab/errors.hpp"

namespace steinlab {

// Closed interval [lo, hi] with outward-rounded arithmetic.  Every operation
// widens its result by one ulp per endpoint, which dominates the at-most-half-
// ulp rounding error of the underlying double op; transcendental calls are
// widened by two ulps since libm only promises faithful rounding.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  Interval() = default;
  Interval(double l, double h) : lo(l), hi(h) {}
  static Interval point(double x) { return {x, x}; }

  double width() const { return hi - lo; }
  double mid() const { return 0.5 * (lo + hi); }
  bool contains(double x) const { return lo <= x && x <= hi; }
  bool contains(const Interval& o) const { return lo <= o.lo && o.hi <= hi; }
};

namespace detail {

inline double step_down(double x) {
  return std::nextafter(x, -std::numeric_limits<double>::infinity());
}
inline double step_up(double x) {
  return std::nextafter(x, std::numeric_limits<double>::infinity());
}

} // namespace detail

inline Interval widen_ulp(const Interval& a, int ulps = 1) {
  Interval r = a;
  for (int i = 0; i < ulps; ++i) {
    r.lo = detail::step_down(r.lo);
    r.hi = detail::step_up(r.hi);
  }
  return r;
}

// A double constant treated as an interval: widened one ulp each way so the
// representation error of the decimal literal is covered.
inline Interval widened_point(double x) { return widen_ulp(Interval::point(x)); }

inline Interval add(const Interval& a, const Interval& b) {
  return widen_ulp({a.lo + b.lo, a.hi + b.hi});
}

inline Interval sub(const Interval& a, const Interval& b) {
  return widen_ulp({a.lo - b.hi, a.hi - b.lo});
}

inline Interval mul(const Interval& a, const Interval& b) {
  double c[4] = {a.lo * b.lo, a.lo * b.hi, a.hi * b.lo, a.hi * b.hi};
  return widen_ulp({*std::min_element(c, c + 4), *std::max_element(c, c + 4)});
}

// Division; the denominator must not straddle zero.
inline Interval div(const Interval& a, const Interval& b) {
  if (b.lo <= 0.0 && b.hi >= 0.0)
    throw CertificationFailed("interval division by an interval containing 0");
  double c[4] = {a.lo / b.lo, a.lo / b.hi, a.hi / b.lo, a.hi / b.hi};
  return widen_ulp({*std::min_element(c, c + 4), *std::max_element(c, c + 4)});
}

inline Interval max_interval(const Interval& a, const Interval& b) {
  return {std::max(a.lo, b.lo), std::max(a.hi, b.hi)};
}

inline Interval log_interval(const Interval& a) {
  if (a.lo <= 0.0) throw CertificationFailed("log of non-positive interval");
  return widen_ulp({std::log(a.lo), std::log(a.hi)}, 2);
}

inline Interval exp_interval(const Interval& a) {
  return widen_ulp({std::exp(a.lo), std::exp(a.hi)}, 2);
}

inline Interval neg(const Interval& a) { return {-a.hi, -a.lo}; }

// Integer power of an interval with non-negative endpoints.
inline Interval pow_interval(const Interval& a, long e) {
  if (a.lo < 0.0) throw CertificationFailed("pow of interval with negative lo");
  Interval r{1.0, 1.0};
  for (long i = 0; i < e; ++i) r = mul(r, a);
  return r;
}

// 2*pi^2, the threshold constant of the criterion; evaluated in long double
// and rounded outward.
inline Interval two_pi_squared() {
  const long double pi = 3.14159265358979323846264338327950288L;
  const long double v = 2.0L * pi * pi;
  const double mid = static_cast<double>(v);
  return widen_ulp(Interval::point(mid));
}

} // namespace steinlab
