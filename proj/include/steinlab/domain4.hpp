#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include <gmpxx.h>

#include "steinlab/actions.hpp"
#include "steinlab/errors.hpp"
#include "steinlab/int_matrix.hpp"
#include "steinlab/int_polynomial.hpp"
#include "steinlab/interval.hpp"
#include "steinlab/qlp.hpp"
#include "steinlab/roots.hpp"
#include "steinlab/spectra.hpp"

namespace steinlab {

// The pipeline's reference instance: a unimodular 4x4 matrix with two real
// eigenvalues and one complex pair, plus the seed vector whose orbit
// generates the polytope vertices.
inline IntMatrix default_base_matrix() {
  return IntMatrix::from_rows({{0, -2, -7, 9},
                               {0, -10, -20, 29},
                               {0, -13, -31, 43},
                               {-1, -11, -36, 47}});
}

inline LatticeVector default_seed() {
  return LatticeVector::from_ints({-14, -43, -62, -63});
}

// Certified spectral frame: two real eigenvalue enclosures with float
// eigenvectors sign-fixed into the negative orthant, and the rotation-
// dilation basis (w1, w2) of the invariant real 2-plane of the complex pair.
struct EigenFrame {
  Interval alpha1{0.0, 0.0}, alpha2{0.0, 0.0}; // real eigenvalues, alpha1 > alpha2
  Interval omega_re{0.0, 0.0}, omega_im{0.0, 0.0}; // pair member with Im > 0
  std::array<double, 4> v1{}, v2{}; // strictly negative entries
  std::array<double, 4> w1{}, w2{}; // Re/Im of a complex eigenvector
  double resid_v1 = 0.0, resid_v2 = 0.0, resid_plane = 0.0;
};

// Coefficients of u = a1 v1 + a2 v2 + ap w1 + app w2.
struct SeedDecomposition {
  double a1 = 0.0, a2 = 0.0, ap = 0.0, app = 0.0;
  double residual = 0.0;
};

// Exact tail certificate: a polyhedral cone with strictly negative rational
// generators that the step matrix maps into itself, plus the first exact
// iterate that enters the cone. By induction every later iterate stays in
// the cone, hence in the open negative orthant. All checks are exact
// rational LP feasibility, so no float enters the certified statement.
struct ConeCertificate {
  bool forward = true;          // true: steps by N; false: steps by N^{-1}
  long entry_index = 0;         // first |j| whose iterate enters the cone
  qlp::QMat generators;         // strictly negative columns
  std::vector<qlp::QVec> image_lambda; // step(generator_i) as a cone combination
  qlp::QVec entry_lambda;              // entering iterate as a cone combination
};

struct FindJResult {
  long J = 0;
  long worst_violation = -1; // max |j| with u_j outside the open negative orthant
  EigenFrame frame;
  SeedDecomposition seed_coeffs;
  ConeCertificate forward_tail, backward_tail;
};

namespace d4detail {

template <class S> struct Mag;
template <> struct Mag<double> {
  static double of(double v) { return std::fabs(v); }
};
template <> struct Mag<std::complex<double>> {
  static double of(const std::complex<double>& v) { return std::abs(v); }
};

template <class S> using Mat4 = std::array<std::array<S, 4>, 4>;

// Null vector of a numerically rank-3 matrix by full-pivot elimination.
template <class S>
std::array<S, 4> null_vector(Mat4<S> a) {
  std::array<std::size_t, 4> col{0, 1, 2, 3};
  for (std::size_t step = 0; step < 3; ++step) {
    std::size_t pi = step, pj = step;
    double best = -1.0;
    for (std::size_t i = step; i < 4; ++i)
      for (std::size_t j = step; j < 4; ++j)
        if (Mag<S>::of(a[i][j]) > best) {
          best = Mag<S>::of(a[i][j]);
          pi = i;
          pj = j;
        }
    if (best <= 0.0) break;
    std::swap(a[step], a[pi]);
    for (std::size_t i = 0; i < 4; ++i) std::swap(a[i][step], a[i][pj]);
    std::swap(col[step], col[pj]);
    for (std::size_t r = step + 1; r < 4; ++r) {
      const S f = a[r][step] / a[step][step];
      for (std::size_t c = step; c < 4; ++c) a[r][c] -= f * a[step][c];
    }
  }
  std::array<S, 4> x{};
  x[3] = S(1);
  for (int k = 2; k >= 0; --k) {
    S s = S(0);
    for (std::size_t j = k + 1; j < 4; ++j) s += a[k][j] * x[j];
    x[k] = -s / a[k][k];
  }
  std::array<S, 4> out{};
  for (std::size_t k = 0; k < 4; ++k) out[col[k]] = x[k];
  return out;
}

// Solve a 4x4 double system by full-pivot elimination.
inline std::array<double, 4> solve4(Mat4<double> a, std::array<double, 4> b) {
  std::array<std::size_t, 4> col{0, 1, 2, 3};
  for (std::size_t step = 0; step < 4; ++step) {
    std::size_t pi = step, pj = step;
    double best = -1.0;
    for (std::size_t i = step; i < 4; ++i)
      for (std::size_t j = step; j < 4; ++j)
        if (std::fabs(a[i][j]) > best) {
          best = std::fabs(a[i][j]);
          pi = i;
          pj = j;
        }
    if (best == 0.0) throw IllConditionedFrame("singular frame matrix");
    std::swap(a[step], a[pi]);
    std::swap(b[step], b[pi]);
    for (std::size_t i = 0; i < 4; ++i) std::swap(a[i][step], a[i][pj]);
    std::swap(col[step], col[pj]);
    for (std::size_t r = step + 1; r < 4; ++r) {
      const double f = a[r][step] / a[step][step];
      b[r] -= f * b[step];
      for (std::size_t c = step; c < 4; ++c) a[r][c] -= f * a[step][c];
    }
  }
  std::array<double, 4> x{};
  for (int k = 3; k >= 0; --k) {
    double s = b[k];
    for (std::size_t j = k + 1; j < 4; ++j) s -= a[k][j] * x[j];
    x[k] = s / a[k][k];
  }
  std::array<double, 4> out{};
  for (std::size_t k = 0; k < 4; ++k) out[col[k]] = x[k];
  return out;
}

inline Mat4<double> to_mat4(const IntMatrix& m) {
  Mat4<double> a{};
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) a[i][j] = m.at(i, j).get_d();
  return a;
}

inline std::array<double, 4> apply4(const Mat4<double>& a, const std::array<double, 4>& x) {
  std::array<double, 4> y{};
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) y[i] += a[i][j] * x[j];
  return y;
}

inline double inf_norm(const std::array<double, 4>& x) {
  double m = 0.0;
  for (double v : x) m = std::max(m, std::fabs(v));
  return m;
}

// Normalize to unit max-magnitude and flip into the negative orthant; empty
// result when the entries do not share one strict sign.
inline std::optional<std::array<double, 4>> orthant_normalize(std::array<double, 4> v) {
  double m = inf_norm(v);
  if (m == 0.0) return std::nullopt;
  for (double& x : v) x /= m;
  bool all_neg = true, all_pos = true;
  for (double x : v) {
    all_neg = all_neg && x < 0.0;
    all_pos = all_pos && x > 0.0;
  }
  if (all_pos)
    for (double& x : v) x = -x;
  else if (!all_neg)
    return std::nullopt;
  return v;
}

// Dyadic rationalization (denominator 2^16): exact once written, and small
// enough to keep the LP tableaus light.
inline mpq_class dyadic(double x) {
  mpq_class q(static_cast<long>(std::llround(std::ldexp(x, 16))), 65536L);
  q.canonicalize();
  return q;
}

inline qlp::QVec step_image(const IntMatrix& a, const qlp::QVec& g) {
  qlp::QVec y(4, 0);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) y[i] += mpq_class(a.at(i, j)) * g[j];
  return y;
}

// Rescale a rational vector by a power of two so its largest entry has
// magnitude in [1/2, 1); scaling does not change the ray it generates.
inline qlp::QVec ray_normalize(qlp::QVec v) {
  double m = 0.0;
  for (const auto& c : v) m = std::max(m, std::fabs(c.get_d()));
  if (m == 0.0) return v;
  int ex = 0;
  std::frexp(m, &ex);
  mpq_class s;
  if (ex >= 0)
    s = mpq_class(1, mpz_class(1) << ex);
  else
    s = mpq_class(mpz_class(1) << (-ex), 1);
  for (auto& c : v) c *= s;
  return v;
}

// Build an invariant polyhedral cone around the dominant eigenray of the
// step matrix: seed it with axis +/- c*dir for an orthonormal complement
// frame, then enrich it with any exact generator image that escapes, until
// the cone maps into itself. Every generator is certified strictly
// negative and every image containment is an exact LP certificate, so the
// resulting invariance is exact regardless of the float quality of the
// axis estimate.
inline ConeCertificate make_invariant_cone(const IntMatrix& step,
                                           const std::array<double, 4>& axis_in,
                                           bool forward) {
  std::array<double, 4> axis = axis_in;
  {
    double n2 = 0.0;
    for (double v : axis) n2 += v * v;
    n2 = std::sqrt(n2);
    for (double& v : axis) v /= n2;
  }
  std::vector<std::array<double, 4>> dirs;
  for (std::size_t e = 0; e < 4 && dirs.size() < 3; ++e) {
    std::array<double, 4> d{};
    d[e] = 1.0;
    double p = 0.0;
    for (std::size_t i = 0; i < 4; ++i) p += d[i] * axis[i];
    for (std::size_t i = 0; i < 4; ++i) d[i] -= p * axis[i];
    for (const auto& prev : dirs) {
      p = 0.0;
      for (std::size_t i = 0; i < 4; ++i) p += d[i] * prev[i];
      for (std::size_t i = 0; i < 4; ++i) d[i] -= p * prev[i];
    }
    double n2 = 0.0;
    for (double v : d) n2 += v * v;
    n2 = std::sqrt(n2);
    if (n2 < 1e-3) continue;
    for (double& v : d) v /= n2;
    dirs.push_back(d);
  }
  if (dirs.size() != 3)
    throw CertificationFailed("could not frame the axis complement");

  double min_axis = HUGE_VAL;
  for (double v : axis) min_axis = std::min(min_axis, std::fabs(v));

  for (double c : {0.25, 0.12, 0.06, 0.03}) {
    const double cc = c * min_axis;
    qlp::QMat gens;
    for (const auto& d : dirs)
      for (double sign : {1.0, -1.0}) {
        qlp::QVec g(4);
        for (std::size_t i = 0; i < 4; ++i) g[i] = dyadic(axis[i] + sign * cc * d[i]);
        gens.push_back(std::move(g));
      }
    auto all_negative = [](const qlp::QVec& g) {
      for (const auto& v : g)
        if (!(v < 0)) return false;
      return true;
    };
    bool viable = true;
    for (const auto& g : gens) viable = viable && all_negative(g);
    if (!viable) continue;

    bool closed = false;
    for (int round = 0; round < 40 && viable && !closed; ++round) {
      std::vector<qlp::QVec> escaped;
      for (const auto& g : gens) {
        qlp::QVec img = step_image(step, g);
        if (!qlp::cone_member(gens, img).feasible)
          escaped.push_back(ray_normalize(std::move(img)));
      }
      if (escaped.empty()) {
        closed = true;
        break;
      }
      for (auto& g : escaped) {
        if (!all_negative(g)) {
          viable = false;
          break;
        }
        gens.push_back(std::move(g));
      }
      if (gens.size() > 128) viable = false;
    }
    if (!viable || !closed) continue;

    ConeCertificate cert;
    cert.forward = forward;
    cert.generators = gens;
    for (const auto& g : gens) {
      qlp::Feasibility f = qlp::cone_member(gens, step_image(step, g));
      if (!f.feasible)
        throw CertificationFailed("cone closure lost on re-derivation");
      cert.image_lambda.push_back(std::move(f.lambda));
    }
    return cert;
  }
  throw CertificationFailed("no exact invariant cone certified for the tail");
}

inline bool strictly_negative(const LatticeVector& v) {
  for (std::size_t i = 0; i < v.dim(); ++i)
    if (v.at(i) >= 0) return false;
  return true;
}

inline qlp::QVec to_qvec(const LatticeVector& v) {
  qlp::QVec q(v.dim());
  for (std::size_t i = 0; i < v.dim(); ++i) q[i] = mpq_class(v.at(i));
  return q;
}

} // namespace d4detail

// Certified eigen-structure of a 4x4 unimodular matrix with two real
// eigenvalues and one complex pair (checked, not assumed).
inline EigenFrame eigen_frame(const IntMatrix& n, double tol = 1e-9) {
  if (n.dim() != 4) throw DimensionMismatch("pipeline needs a 4x4 matrix");
  if (!n.is_unimodular()) throw NotUnimodular("base matrix must have |det| = 1");
  const IntPolynomial p = n.char_poly();
  if (radical(p) != p) throw SpectrumShapeMismatch("repeated eigenvalues");
  if (count_real_roots(p) != 2)
    throw SpectrumShapeMismatch("expected exactly two real eigenvalues");

  struct RealRoot {
    double re, rad;
  };
  std::vector<RealRoot> reals;
  std::optional<RealRoot> cplx_re;
  std::optional<RealRoot> cplx_im;
  for (const PreciseRoot& r : certified_roots(p, 1e-14)) {
    const double re = r.re.get_d(), im = r.im.get_d();
    const double rad = r.cover_radius + 1e-15 * (std::fabs(re) + std::fabs(im));
    if (std::fabs(im) <= rad) {
      reals.push_back({re, rad});
    } else if (im > 0.0) {
      cplx_re = RealRoot{re, rad};
      cplx_im = RealRoot{im, rad};
    }
  }
  if (reals.size() != 2 || !cplx_re)
    throw SpectrumShapeMismatch("root pattern is not 2 real + 1 complex pair");
  if (reals[0].re < reals[1].re) std::swap(reals[0], reals[1]);

  EigenFrame f;
  f.alpha1 = {rootdetail::dbl_dn(reals[0].re - reals[0].rad),
              rootdetail::dbl_up(reals[0].re + reals[0].rad)};
  f.alpha2 = {rootdetail::dbl_dn(reals[1].re - reals[1].rad),
              rootdetail::dbl_up(reals[1].re + reals[1].rad)};
  f.omega_re = {rootdetail::dbl_dn(cplx_re->re - cplx_re->rad),
                rootdetail::dbl_up(cplx_re->re + cplx_re->rad)};
  f.omega_im = {rootdetail::dbl_dn(cplx_im->re - cplx_im->rad),
                rootdetail::dbl_up(cplx_im->re + cplx_im->rad)};

  const auto nd = d4detail::to_mat4(n);
  auto real_vec = [&](double alpha, double& resid) {
    d4detail::Mat4<double> a = nd;
    for (std::size_t i = 0; i < 4; ++i) a[i][i] -= alpha;
    auto v = d4detail::orthant_normalize(d4detail::null_vector(a));
    if (!v)
      throw SpectrumShapeMismatch("real eigenvector is not orthant-signed");
    auto img = d4detail::apply4(nd, *v);
    std::array<double, 4> diff{};
    for (std::size_t i = 0; i < 4; ++i) diff[i] = img[i] - alpha * (*v)[i];
    resid = d4detail::inf_norm(diff);
    return *v;
  };
  f.v1 = real_vec(f.alpha1.mid(), f.resid_v1);
  f.v2 = real_vec(f.alpha2.mid(), f.resid_v2);

  const std::complex<double> omega(f.omega_re.mid(), f.omega_im.mid());
  d4detail::Mat4<std::complex<double>> ac{};
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j)
      ac[i][j] = std::complex<double>(nd[i][j], 0.0) -
                 (i == j ? omega : std::complex<double>(0.0, 0.0));
  auto g = d4detail::null_vector(ac);
  double gm = 0.0;
  std::size_t gi = 0;
  for (std::size_t i = 0; i < 4; ++i)
    if (std::abs(g[i]) > gm) {
      gm = std::abs(g[i]);
      gi = i;
    }
  for (std::size_t i = 0; i < 4; ++i) g[i] /= g[gi];
  for (std::size_t i = 0; i < 4; ++i) {
    f.w1[i] = g[i].real();
    f.w2[i] = g[i].imag();
  }
  {
    const double a = omega.real(), b = omega.imag();
    auto i1 = d4detail::apply4(nd, f.w1);
    auto i2 = d4detail::apply4(nd, f.w2);
    std::array<double, 4> d1{}, d2{};
    for (std::size_t i = 0; i < 4; ++i) {
      d1[i] = i1[i] - (a * f.w1[i] - b * f.w2[i]);
      d2[i] = i2[i] - (b * f.w1[i] + a * f.w2[i]);
    }
    f.resid_plane = std::max(d4detail::inf_norm(d1), d4detail::inf_norm(d2));
  }
  if (f.resid_v1 > tol || f.resid_v2 > tol || f.resid_plane > tol)
    throw SpectrumShapeMismatch("eigen residuals exceed tolerance");
  return f;
}

// Coefficients of u in the frame basis, with reconstruction residual.
inline SeedDecomposition decompose_seed(const LatticeVector& u, const EigenFrame& f,
                                        double tol = 1e-9) {
  if (u.dim() != 4) throw DimensionMismatch("seed must be a 4-vector");
  d4detail::Mat4<double> b{};
  std::array<double, 4> rhs{};
  double scale = 0.0;
  for (std::size_t i = 0; i < 4; ++i) {
    b[i][0] = f.v1[i];
    b[i][1] = f.v2[i];
    b[i][2] = f.w1[i];
    b[i][3] = f.w2[i];
    rhs[i] = u.at(i).get_d();
    scale = std::max(scale, std::fabs(rhs[i]));
  }
  const auto a = d4detail::solve4(b, rhs);
  std::array<double, 4> rec{};
  for (std::size_t i = 0; i < 4; ++i)
    rec[i] = b[i][0] * a[0] + b[i][1] * a[1] + b[i][2] * a[2] + b[i][3] * a[3] - rhs[i];
  SeedDecomposition d;
  d.a1 = a[0];
  d.a2 = a[1];
  d.ap = a[2];
  d.app = a[3];
  d.residual = d4detail::inf_norm(rec);
  if (d.residual > tol * std::max(1.0, scale))
    throw IllConditionedFrame("seed reconstruction residual too large");
  return d;
}

// Smallest J such that u_j = N^j u lies in the open negative orthant for
// every |j| >= J - 4, certified: the finite range by exact integer
// iteration, the two tails by exact invariant-cone certificates.
inline FindJResult find_J(const IntMatrix& n, const LatticeVector& u,
                          long scan_cap = 200) {
  if (u.dim() != n.dim()) throw DimensionMismatch("matrix/seed dimension mismatch");
  FindJResult res;
  res.frame = eigen_frame(n);
  res.seed_coeffs = decompose_seed(u, res.frame);
  if (!(res.seed_coeffs.a1 > 0.0) || !(res.seed_coeffs.a2 > 0.0))
    throw CertificationFailed(
        "seed decomposition must have a1 > 0 and a2 > 0 for both tails to fall "
        "into the negative orthant");

  const IntMatrix ninv = n.inverse_unimodular();
  res.forward_tail = d4detail::make_invariant_cone(n, res.frame.v1, true);
  res.backward_tail = d4detail::make_invariant_cone(ninv, res.frame.v2, false);

  auto scan = [&](const IntMatrix& step, ConeCertificate& cert) {
    LatticeVector cur = u;
    long worst = -1;
    for (long j = 0; j <= scan_cap; ++j) {
      if (j > 0) cur = col_apply(step, cur);
      if (!d4detail::strictly_negative(cur)) {
        worst = j;
        continue;
      }
      qlp::Feasibility f = qlp::cone_member(cert.generators, d4detail::to_qvec(cur));
      if (f.feasible) {
        cert.entry_index = j;
        cert.entry_lambda = std::move(f.lambda);
        return worst;
      }
    }
    throw CertificationFailed("iterates never entered the certified cone within the scan cap");
  };
  const long worst_f = scan(n, res.forward_tail);
  const long worst_b = scan(ninv, res.backward_tail);
  res.worst_violation = std::max(worst_f, worst_b);
  res.J = res.worst_violation + 5;
  return res;
}

// Independent exact re-validation of a tail certificate against its step
// matrix and the seed: generators negative, images and entry re-derived.
inline bool validate_cone_certificate(const ConeCertificate& cert, const IntMatrix& n,
                                      const LatticeVector& u) {
  const IntMatrix step = cert.forward ? n : n.inverse_unimodular();
  for (const auto& g : cert.generators)
    for (const auto& v : g)
      if (!(v < 0)) return false;
  if (cert.image_lambda.size() != cert.generators.size()) return false;
  for (std::size_t i = 0; i < cert.generators.size(); ++i)
    if (!qlp::combination_matches(cert.generators, cert.image_lambda[i],
                                  d4detail::step_image(step, cert.generators[i]), false))
      return false;
  LatticeVector cur = u;
  for (long j = 0; j < cert.entry_index; ++j) cur = col_apply(step, cur);
  return qlp::combination_matches(cert.generators, cert.entry_lambda,
                                  d4detail::to_qvec(cur), false);
}

struct PolytopeVertex {
  long j = 0;
  int k = 0;
  long index = 0; // (2j+1)J + k
  std::vector<mpz_class> coords;
};

struct LogPolytope {
  IntMatrix base{4};
  LatticeVector seed{4};
  long J = 0;
  long H = 0;
  IntMatrix invariance{4}; // N^{2J}
  std::vector<PolytopeVertex> vertices;
};

struct PolytopeReport {
  bool invariance_ok = false;  // (i) exact index-shift action on the vertex list
  bool negativity_ok = false;  // (ii) listed vertices strictly negative ...
  bool tail_certified = false; //      ... and omitted |j| > H covered by the cone tails
  int affine_rank_seed = 0;    // rank of {u_k - u_0}
  int affine_rank_shifted = 0; // rank of {u_{J+k} - u_J}
  bool interior_ok = false;    // (iii) both ranks = 4
  long J_minimal = 0;
};

namespace d4detail {

// Exact iterate table: u_j for lo <= j <= hi.
inline std::vector<LatticeVector> iterate_table(const IntMatrix& n, const LatticeVector& u,
                                                long lo, long hi) {
  const IntMatrix ninv = n.inverse_unimodular();
  std::vector<LatticeVector> t(static_cast<std::size_t>(hi - lo + 1), LatticeVector(4));
  t[static_cast<std::size_t>(-lo)] = u;
  for (long j = 1; j <= hi; ++j)
    t[static_cast<std::size_t>(j - lo)] = col_apply(n, t[static_cast<std::size_t>(j - 1 - lo)]);
  for (long j = -1; j >= lo; --j)
    t[static_cast<std::size_t>(j - lo)] = col_apply(ninv, t[static_cast<std::size_t>(j + 1 - lo)]);
  return t;
}

inline int exact_rank4(const std::array<std::array<mpq_class, 4>, 4>& rows_in) {
  auto a = rows_in;
  int rank = 0;
  for (std::size_t coli = 0; coli < 4 && rank < 4; ++coli) {
    std::size_t piv = 4;
    for (std::size_t r = rank; r < 4; ++r)
      if (a[r][coli] != 0) {
        piv = r;
        break;
      }
    if (piv == 4) continue;
    std::swap(a[rank], a[piv]);
    for (std::size_t r = rank + 1; r < 4; ++r) {
      if (a[r][coli] == 0) continue;
      const mpq_class f = a[r][coli] / a[rank][coli];
      for (std::size_t c = coli; c < 4; ++c) a[r][c] -= f * a[rank][c];
    }
    ++rank;
  }
  return rank;
}

} // namespace d4detail

// Truncated vertex list of the invariant log-polytope with the three
// certified facts: invariance under N^{2J}, strict negativity (listed
// exactly, tail by certificate), and nonempty interior via exact affine
// rank 4.
inline std::pair<LogPolytope, PolytopeReport> build_polytope(const IntMatrix& n,
                                                             const LatticeVector& u,
                                                             long J, long H) {
  if (H < 1) throw NonPositiveMargin("truncation horizon must be >= 1");
  if (J < 1) throw NonPositiveMargin("index bound J must be >= 1");
  FindJResult fj = find_J(n, u);
  if (J < fj.J)
    throw CertificationFailed("requested J is below the certified minimum " +
                              std::to_string(fj.J));

  LogPolytope p;
  p.base = n;
  p.seed = u;
  p.J = J;
  p.H = H;
  p.invariance = n.pow(2 * J);

  const long lo = (-2 * H + 1) * J;
  const long hi = (2 * H + 1) * J + 4;
  const auto table = d4detail::iterate_table(n, u, lo, hi);
  auto at = [&](long idx) -> const LatticeVector& {
    return table[static_cast<std::size_t>(idx - lo)];
  };

  for (long j = -H; j <= H; ++j)
    for (int k = 0; k <= 4; ++k) {
      PolytopeVertex v;
      v.j = j;
      v.k = k;
      v.index = (2 * j + 1) * J + k;
      v.coords = at(v.index).entries();
      p.vertices.push_back(std::move(v));
    }

  PolytopeReport rep;
  rep.J_minimal = fj.J;

  rep.invariance_ok = true;
  for (long j = -H; j < H; ++j)
    for (int k = 0; k <= 4; ++k) {
      const LatticeVector img = col_apply(p.invariance, at((2 * j + 1) * J + k));
      rep.invariance_ok = rep.invariance_ok && img == at((2 * j + 3) * J + k);
    }

  rep.negativity_ok = true;
  for (const auto& v : p.vertices) {
    bool neg = true;
    for (const auto& c : v.coords) neg = neg && c < 0;
    rep.negativity_ok = rep.negativity_ok && neg;
  }
  rep.tail_certified = validate_cone_certificate(fj.forward_tail, n, u) &&
                       validate_cone_certificate(fj.backward_tail, n, u);

  auto affine_rank_at = [&](long base_idx) {
    std::array<std::array<mpq_class, 4>, 4> rows;
    for (int k = 1; k <= 4; ++k)
      for (std::size_t i = 0; i < 4; ++i)
        rows[k - 1][i] = mpq_class(at(base_idx + k).at(i) - at(base_idx).at(i));
    return d4detail::exact_rank4(rows);
  };
  rep.affine_rank_seed = affine_rank_at(0);
  rep.affine_rank_shifted = affine_rank_at(J);
  rep.interior_ok = rep.affine_rank_seed == 4 && rep.affine_rank_shifted == 4;
  if (!rep.interior_ok)
    throw RankDeficient("affine rank of the seed block is below 4: seed rank " +
                        std::to_string(rep.affine_rank_seed) + ", shifted rank " +
                        std::to_string(rep.affine_rank_shifted));
  return {std::move(p), rep};
}

struct ReinhardtReport {
  int samples = 0;
  bool forward_ok = false;   // action by N^{2J} keeps samples in the widened hull
  bool backward_ok = false;  // same for N^{-2J}
  bool barycenter_ok = false;
  std::array<double, 4> bbox_lo{}, bbox_hi{}; // log-coordinate bounding box
  Interval rho_m{0.0, 0.0};       // spectral radius profile of N^{2J}
  Interval alpha1_pow{0.0, 0.0};  // alpha1^{2J} from the frame
  bool rho_consistent = false;    // the two enclosures overlap
  double point_action_residual = 0.0; // monomial-action log consistency at unit scale
};

// Sample interior points of the truncated hull and verify, by exact
// rational LP, that the monomial action by N^{+-2J} keeps them inside the
// one-step-wider truncation. The log-coordinates are astronomically
// negative, so the action is applied to log-vectors exactly; the float
// monomial evaluation is spot-checked at unit scale against the base
// matrix.
inline ReinhardtReport verify_reinhardt_instance(const LogPolytope& p, int samples = 8,
                                                 std::uint64_t seed = 12345) {
  if (samples < 1) throw NonPositiveMargin("sample count must be >= 1");
  ReinhardtReport rep;
  rep.samples = samples;

  const long lo = (-2 * (p.H + 1) + 1) * p.J;
  const long hi = (2 * (p.H + 1) + 1) * p.J + 4;
  const auto table = d4detail::iterate_table(p.base, p.seed, lo, hi);
  auto at = [&](long idx) -> const LatticeVector& {
    return table[static_cast<std::size_t>(idx - lo)];
  };

  qlp::QMat wide_cols;
  for (long j = -(p.H + 1); j <= p.H + 1; ++j)
    for (int k = 0; k <= 4; ++k)
      wide_cols.push_back(d4detail::to_qvec(at((2 * j + 1) * p.J + k)));

  for (std::size_t i = 0; i < 4; ++i) {
    rep.bbox_lo[i] = HUGE_VAL;
    rep.bbox_hi[i] = -HUGE_VAL;
  }
  for (const auto& v : p.vertices)
    for (std::size_t i = 0; i < 4; ++i) {
      rep.bbox_lo[i] = std::min(rep.bbox_lo[i], v.coords[i].get_d());
      rep.bbox_hi[i] = std::max(rep.bbox_hi[i], v.coords[i].get_d());
    }

  const IntMatrix minv = p.invariance.inverse_unimodular();
  auto act = [&](const IntMatrix& m, const qlp::QVec& x) {
    qlp::QVec y(4, 0);
    for (std::size_t i = 0; i < 4; ++i)
      for (std::size_t j = 0; j < 4; ++j) y[i] += mpq_class(m.at(i, j)) * x[j];
    return y;
  };
  auto inside_wide = [&](const qlp::QVec& x) {
    return qlp::hull_member(wide_cols, x).feasible;
  };

  std::mt19937_64 rng(seed);
  auto unit = [&]() { return std::ldexp(static_cast<double>(rng() >> 11), -53); };
  rep.forward_ok = rep.backward_ok = true;
  for (int s = 0; s < samples; ++s) {
    qlp::QVec x(4, 0);
    mpq_class total = 0;
    for (const auto& v : p.vertices) {
      const mpq_class w = d4detail::dyadic(1.0 + unit());
      for (std::size_t i = 0; i < 4; ++i) x[i] += w * mpq_class(v.coords[i]);
      total += w;
    }
    for (auto& c : x) c /= total;
    if (!inside_wide(act(p.invariance, x)))
      throw MembershipFailure("forward action left the widened hull at sample " +
                              std::to_string(s));
    if (!inside_wide(act(minv, x)))
      throw MembershipFailure("backward action left the widened hull at sample " +
                              std::to_string(s));
  }

  {
    qlp::QVec b(4, 0);
    for (const auto& v : p.vertices)
      for (std::size_t i = 0; i < 4; ++i) b[i] += mpq_class(v.coords[i]);
    for (auto& c : b) c /= mpq_class(static_cast<long>(p.vertices.size()));
    rep.barycenter_ok = inside_wide(act(p.invariance, b)) && inside_wide(act(minv, b));
  }

  {
    SpectralProfile prof = spectral_profile(p.invariance, 1e-10);
    rep.rho_m = prof.rho;
    const EigenFrame f = eigen_frame(p.base);
    rep.alpha1_pow = pow_interval(f.alpha1, 2 * p.J);
    rep.rho_consistent = rep.rho_m.lo <= rep.alpha1_pow.hi && rep.alpha1_pow.lo <= rep.rho_m.hi;
  }

  {
    // Unit-scale monomial-action consistency: log|w| of the image under the
    // base matrix equals N * log|z| in floats.
    std::vector<std::complex<double>> zc;
    std::array<double, 4> x0{};
    for (std::size_t i = 0; i < 4; ++i) {
      x0[i] = -0.25 - 0.125 * static_cast<double>(i);
      zc.push_back(std::polar(std::exp(x0[i]), 0.3 * static_cast<double>(i + 1)));
    }
    const ComplexPoint z(zc);
    const ComplexPoint w = point_action(z, p.base, 1);
    const auto nx = d4detail::apply4(d4detail::to_mat4(p.base), x0);
    for (std::size_t i = 0; i < 4; ++i)
      rep.point_action_residual = std::max(
          rep.point_action_residual, std::fabs(std::log(std::abs(w.at(i))) - nx[i]));
  }
  return rep;
}

} // namespace steinlab
