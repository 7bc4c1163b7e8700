// Certified root isolation and spectral profiles, cross-checked against an
// independent Durand-Kerner double-precision root oracle and closed forms.
#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <random>

#include "steinlab/roots.hpp"
#include "steinlab/spectra.hpp"

#include "test_util.hpp"

using namespace steinlab;

namespace {
const double kGolden = (1.0 + std::sqrt(5.0)) / 2.0;

double plastic_number() {
  // Real root of x^3 - x - 1 by its Cardano closed form.
  const double s = std::sqrt(23.0 / 108.0);
  return std::cbrt(0.5 + s) + std::cbrt(0.5 - s);
}
} // namespace

TEST_CASE("root radius of x^d - 2 encloses 2^(1/d)", "[spectra]") {
  for (int d = 1; d <= 12; ++d) {
    std::vector<long> c(d + 1, 0);
    c[0] = -2;
    c[d] = 1;
    RootRadiusResult r = root_radius(IntPolynomial::from_int_coeffs(c), 1e-12);
    const double truth = std::pow(2.0, 1.0 / d);
    CHECK(r.modulus.lo <= truth * (1.0 + 1e-15));
    CHECK(r.modulus.hi >= truth * (1.0 - 1e-15));
    CHECK(r.modulus.width() <= 1e-10);
  }
}

TEST_CASE("root radius closed-form cross-checks", "[spectra]") {
  // (x-3)(x-1): radius 3, exactly representable.
  RootRadiusResult a =
      root_radius(IntPolynomial::from_int_coeffs({3, -4, 1}), 1e-12);
  CHECK(a.modulus.contains(3.0));
  CHECK(a.modulus.width() < 1e-11);

  // Golden ratio from x^2 - x - 1.
  RootRadiusResult b =
      root_radius(IntPolynomial::from_int_coeffs({-1, -1, 1}), 1e-13);
  CHECK(b.modulus.lo <= kGolden * (1.0 + 1e-15));
  CHECK(b.modulus.hi >= kGolden * (1.0 - 1e-15));

  // Any cyclotomic: radius 1 (here Phi_12).
  RootRadiusResult c = root_radius(cyclotomic(12), 1e-12);
  CHECK(c.modulus.contains(1.0));
  CHECK(c.modulus.width() < 1e-11);

  // Plastic number from x^3 - x - 1.
  RootRadiusResult p =
      root_radius(IntPolynomial::from_int_coeffs({-1, -1, 0, 1}), 1e-13);
  const double rho = plastic_number();
  CHECK(p.modulus.lo <= rho * (1.0 + 1e-14));
  CHECK(p.modulus.hi >= rho * (1.0 - 1e-14));
}

TEST_CASE("certified roots cover the Durand-Kerner oracle roots", "[spectra]") {
  std::mt19937_64 rng(23);
  std::uniform_int_distribution<long> coef(-6, 6);
  int checked = 0;
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<long> c(4 + (trial % 3), 0); // degrees 3..5
    for (auto& v : c) v = coef(rng);
    c.back() = 1;
    if (c.front() == 0) c.front() = 1;
    IntPolynomial p = IntPolynomial::from_int_coeffs(c);
    std::vector<PreciseRoot> certified = certified_roots(p, 1e-12);
    std::vector<std::complex<double>> oracle = testutil::dk_roots(testutil::poly_to_doubles(p));
    // Every oracle root must lie in some covering disc.
    for (const auto& z : oracle) {
      bool covered = false;
      for (const auto& r : certified) {
        const std::complex<double> ctr(r.re.get_d(), r.im.get_d());
        if (std::abs(z - ctr) <= r.cover_radius + 1e-9) covered = true;
      }
      CHECK(covered);
      ++checked;
    }
  }
  CHECK(checked > 60);
}

TEST_CASE("multiplicities from a squarefree split are exact", "[spectra]") {
  // (x-1)^3 (x+2)^2
  IntPolynomial p = IntPolynomial::from_int_coeffs({-1, 1});
  IntPolynomial q = IntPolynomial::from_int_coeffs({2, 1});
  IntPolynomial prod = p * p * p * q * q;
  std::vector<PreciseRoot> roots = certified_roots(prod, 1e-12);
  REQUIRE(roots.size() == 2);
  int mult3 = 0, mult2 = 0;
  for (const auto& r : roots) {
    if (r.multiplicity == 3) {
      ++mult3;
      CHECK(std::abs(r.re.get_d() - 1.0) < 1e-10);
    }
    if (r.multiplicity == 2) {
      ++mult2;
      CHECK(std::abs(r.re.get_d() + 2.0) < 1e-10);
    }
  }
  CHECK(mult3 == 1);
  CHECK(mult2 == 1);
}

TEST_CASE("cyclotomic-product dichotomy is decided exactly", "[spectra]") {
  CHECK(is_cyclotomic_product(cyclotomic(5) * cyclotomic(8)));
  CHECK(is_cyclotomic_product(IntPolynomial::from_int_coeffs({1, 2, 1}))); // (x+1)^2
  // A zero constant term means a zero root, outside the dichotomy's domain.
  CHECK_THROWS_AS(is_cyclotomic_product(IntPolynomial::power_of_x(3)), ZeroConstantTerm);
  CHECK_FALSE(is_cyclotomic_product(IntPolynomial::from_int_coeffs({-1, -1, 1})));
  CHECK_FALSE(is_cyclotomic_product(IntPolynomial::from_int_coeffs({-2, 0, 1})));
  // Lehmer's polynomial: house barely above 1, still not cyclotomic.
  CHECK_FALSE(is_cyclotomic_product(
      IntPolynomial::from_int_coeffs({1, 1, 0, -1, -1, -1, -1, -1, 0, 1, 1})));
}

TEST_CASE("spectral profile of the Fibonacci matrix", "[spectra]") {
  SpectralProfile prof = spectral_profile(IntMatrix::from_rows({{1, 1}, {1, 0}}), 1e-13);
  CHECK_FALSE(prof.exact_one);
  CHECK(prof.rho.lo <= kGolden * (1.0 + 1e-15));
  CHECK(prof.rho.hi >= kGolden * (1.0 - 1e-15));
  CHECK(prof.mu.contains(std::log(kGolden)));
  // Reciprocal spectrum: both directions grow at the same rate.
  CHECK(std::abs(prof.mu_plus.mid() - prof.mu_minus.mid()) < 1e-12);
  REQUIRE(prof.eigenvalues.size() == 2);
  for (const auto& e : prof.eigenvalues) CHECK(e.multiplicity == 1);
}

TEST_CASE("spectral profile flags exact-one spectra", "[spectra]") {
  CHECK(spectral_profile(IntMatrix::identity(3), 1e-12).exact_one);
  CHECK(spectral_profile(IntMatrix::from_rows({{0, -1}, {1, 0}}), 1e-12).exact_one);
  // Unipotent: (x-1)^2, all eigenvalues exactly one despite the Jordan block.
  SpectralProfile j = spectral_profile(IntMatrix::from_rows({{1, 1}, {0, 1}}), 1e-12);
  CHECK(j.exact_one);
  CHECK(j.rho.contains(1.0));
  CHECK(j.mu.contains(0.0));
}

TEST_CASE("asymmetric growth rates on the plastic companion matrix", "[spectra]") {
  // x^3 - x - 1: forward radius is the plastic number rho, the inverse has
  // radius sqrt(rho) (the complex pair has modulus rho^(-1/2), det = 1).
  SpectralProfile prof = spectral_profile(
      IntMatrix::from_rows({{0, 1, 0}, {0, 0, 1}, {1, 1, 0}}), 1e-13);
  const double rho = plastic_number();
  CHECK(prof.mu_plus.contains(std::log(rho)));
  CHECK(prof.mu_minus.contains(0.5 * std::log(rho)));
  CHECK(prof.mu.contains(std::log(rho)));
  CHECK(prof.mu.width() < 1e-11);
}

TEST_CASE("irreducibility over Z for small degrees", "[spectra]") {
  CHECK(is_irreducible(IntPolynomial::from_int_coeffs({-1, -1, 1})));
  CHECK(is_irreducible(IntPolynomial::from_int_coeffs({-2, 0, 1})));
  CHECK(is_irreducible(cyclotomic(12)));
  CHECK_FALSE(is_irreducible(IntPolynomial::from_int_coeffs({-1, 0, 1}))); // (x-1)(x+1)
  CHECK_FALSE(is_irreducible(cyclotomic(3) * cyclotomic(4)));
}

TEST_CASE("Sturm count of real roots", "[spectra]") {
  CHECK(count_real_roots(IntPolynomial::from_int_coeffs({-2, 0, 1})) == 2);
  CHECK(count_real_roots(IntPolynomial::from_int_coeffs({1, 0, 1})) == 0);  // x^2 + 1
  CHECK(count_real_roots(IntPolynomial::from_int_coeffs({-1, -1, 0, 1})) == 1);
  CHECK(count_real_roots(cyclotomic(1) * cyclotomic(2)) == 2);
}

TEST_CASE("spectral profile matches oracle on the embedded 4x4 matrix", "[spectra]") {
  IntMatrix n4 = IntMatrix::from_rows(
      {{0, -2, -7, 9}, {0, -10, -20, 29}, {0, -13, -31, 43}, {-1, -11, -36, 47}});
  SpectralProfile prof = spectral_profile(n4, 1e-12);
  std::vector<std::complex<double>> oracle =
      testutil::dk_roots(testutil::poly_to_doubles(n4.char_poly()));
  REQUIRE(prof.eigenvalues.size() == 4);
  // Each oracle eigenvalue lies in one reported cluster.
  for (const auto& z : oracle) {
    bool found = false;
    for (const auto& e : prof.eigenvalues)
      if (std::abs(z - e.center) <= e.radius + 1e-8) found = true;
    CHECK(found);
  }
  double rho_oracle = 0.0;
  for (const auto& z : oracle) rho_oracle = std::max(rho_oracle, std::abs(z));
  CHECK(prof.rho.lo <= rho_oracle + 1e-9);
  CHECK(prof.rho.hi >= rho_oracle - 1e-9);
}
