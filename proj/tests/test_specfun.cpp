#include "doctest.h"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/bessel.hpp>
#include <boost/math/special_functions/ellint_1.hpp>
#include <random>

#include "diracbath/selfenergy.hpp"
#include "diracbath/specfun.hpp"

using namespace diracbath;
using namespace diracbath::specfun;

namespace {

// Defining integral of K(m), adaptive Gauss-Kronrod.
cplx k_integral(cplx m) {
  auto f = [m](double th) -> cplx {
    const double s = std::sin(th);
    return 1.0 / std::sqrt(1.0 - m * s * s);
  };
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, pi / 2, 20, 1e-12);
}

double rel(cplx a, cplx b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST_CASE("ellipk reference values") {
  CHECK(std::abs(ellipk(0.0) - pi / 2) < 1e-15);
  CHECK(std::abs(ellipk(0.5) - 1.85407467730137191843) < 1e-14);
  CHECK(rel(ellipk({0.3, 0.4}), k_integral({0.3, 0.4})) < 1e-10);

  // mpmath, 30 digits
  CHECK(rel(ellipk({0.3, 0.4}), {1.65024192564194005, 0.20951070412398676288}) < 1e-13);
  CHECK(rel(ellipk({-5.0, 2.0}), {0.93709962147929175198, 0.092354535756330769404}) < 1e-13);
  CHECK(rel(ellipk({1.5, -0.2}), {1.665049907097888599, -1.2165633550808420328}) < 1e-13);
  CHECK(rel(ellipk({0.999, 1e-3}), {4.6679002113944480703, 0.39187954998388547631}) < 1e-12);
  CHECK(rel(ellipk(-100.0), {0.36821924860914103292, 0.0}) < 1e-13);
  CHECK(rel(ellipk({3.0, 1e-6}), {1.0010774912745502129, 1.1714198776985234006}) < 1e-9);
}

TEST_CASE("ellipk on the real line below 1 matches Boost") {
  for (double m = -50.0; m < 0.999; m += 0.137) {
    const double k = std::sqrt(std::abs(m));
    double ref;
    if (m >= 0) {
      ref = boost::math::ellint_1(k);
    } else {
      // K(-a) = K(a/(1+a)) / sqrt(1+a)
      const double a = -m;
      ref = boost::math::ellint_1(std::sqrt(a / (1 + a))) / std::sqrt(1 + a);
    }
    CHECK(std::abs(ellipk(m).real() - ref) <= 1e-13 * ref);
    CHECK(ellipk(m).imag() == 0.0);
  }
}

TEST_CASE("ellipk rejects the cut") {
  CHECK_THROWS_AS(ellipk(1.0), DomainError);
  CHECK_THROWS_AS(ellipk(2.5), DomainError);
  CHECK_THROWS_AS(ellipk_complement(-1.0), DomainError);
  CHECK_NOTHROW(ellipk({2.5, 1e-9}));
}

TEST_CASE("ellipk against quadrature on a random complex sample") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  int n = 0;
  while (n < 100) {
    const cplx m(u(rng), u(rng));
    if (std::abs(m) > 2.0) continue;
    // distance to the cut [1, inf)
    const double dist = m.real() >= 1.0 ? std::abs(m.imag()) : std::abs(m - 1.0);
    if (dist < 1e-3) continue;
    ++n;
    CHECK(rel(ellipk(m), k_integral(m)) < 1e-10);
    CHECK(std::abs(ellipk(std::conj(m)) - std::conj(ellipk(m))) < 1e-13 * std::abs(ellipk(m)));
  }
}

TEST_CASE("sheet combinations") {
  const cplx m(0.3, 0.4);
  const cplx K = ellipk(m), Kc = ellipk(1.0 - m);
  SUBCASE("sheet I, Im k Im z^2 < 0 is K") {
    CHECK(std::abs(ellipk_sheet(m, Sheet::I, {1, -1, 1}) - K) < 1e-15);
    CHECK(std::abs(ellipk_sheet(m, Sheet::I, {-1, 1, -1}) - K) < 1e-15);
  }
  SUBCASE("sheet I, both positive") {
    CHECK(std::abs(ellipk_sheet(m, Sheet::I, {1, 1, 1}) - (K + 2.0 * I * Kc)) < 1e-14);
    CHECK(std::abs(ellipk_sheet(m, Sheet::I, {-1, -1, 1}) - (K - 2.0 * I * Kc)) < 1e-14);
  }
  SUBCASE("sheet II") {
    CHECK(std::abs(ellipk_sheet(m, Sheet::II, {1, 1, -1}) - (-3.0 * K + 2.0 * I * Kc)) < 1e-14);
    CHECK(std::abs(ellipk_sheet(m, Sheet::II, {1, 1, 1}) - (K + 2.0 * I * Kc)) < 1e-14);
  }
  SUBCASE("resolved IV and V coefficients") {
    CHECK(sheet_coefficients(Sheet::IV, {1, 1, 1}).p == 3);
    CHECK(sheet_coefficients(Sheet::IV, {1, 1, 1}).q == 2);
    CHECK(sheet_coefficients(Sheet::IV, {1, -1, 1}).q == -4);
    CHECK(sheet_coefficients(Sheet::V, {1, -1, 1}).q == -2);
    CHECK(sheet_coefficients(Sheet::V, {1, 1, 1}).q == 4);
  }
  CHECK_THROWS_AS(sheet_coefficients(Sheet::I, {0, 1, 1}), DomainError);
  CHECK(sheet_from_string("IV") == Sheet::IV);
  CHECK(to_string(Sheet::III) == "III");
  CHECK_THROWS_AS(sheet_from_string("VI"), ValidationError);
}

// Sheet I is analytic off the real axis; its value must not jump across the vertical detour lines.
TEST_CASE("sheet I continuous across detour lines") {
  for (double a : selfenergy::anchors)
    for (double y : {-2.0, -0.3, -1e-2, 1e-2, 0.3, 2.0}) {
      const cplx l = selfenergy::sigma_e_closed(cplx(a - 1e-11, y), 1.0, Sheet::I).value;
      const cplx r = selfenergy::sigma_e_closed(cplx(a + 1e-11, y), 1.0, Sheet::I).value;
      CHECK(std::abs(l - r) <= 1e-8);
    }
}

// Each continued sheet must be smooth in the strip below its segment.
TEST_CASE("continued sheets continuous inside their strips") {
  struct Strip {
    double lo, hi;
    Sheet s;
  };
  const double h = 1e-5;
  for (const Strip st : {Strip{-3, -1, Sheet::II}, Strip{-1, 0, Sheet::IV}, Strip{0, 1, Sheet::V}, Strip{1, 3, Sheet::III}}) {
    double worst = 0.0;
    for (double x = st.lo + 0.02; x < st.hi - 0.01; x += 0.0173)
      for (double y = -0.005; y > -3.0; y *= 1.31) {
        const cplx z(x, y);
        const cplx s0 = selfenergy::sigma_e_closed(z, 1.0, st.s).value;
        for (cplx d : {cplx(h, 0), cplx(0, h)}) {
          const cplx s1 = selfenergy::sigma_e_closed(z + d, 1.0, st.s).value;
          const double dist = std::min({std::abs(z - st.lo), std::abs(z - st.hi)});
          worst = std::max(worst, std::abs(s1 - s0) * dist / h);
        }
      }
    CHECK(worst < 1.0);
  }
}

// The continuation below a band segment joins sheet I above it.
TEST_CASE("continuation matches sheet I across the real band") {
  for (double x = -2.95; x < 2.95; x += 0.05) {
    if (std::abs(std::abs(x) - 1.0) < 0.02 || std::abs(x) < 0.02) continue;
    const double eps = 1e-9;
    const cplx up = selfenergy::sigma_e_closed(cplx(x, eps), 1.0, Sheet::I).value;
    const cplx down = selfenergy::sigma_e_closed(cplx(x, -eps), 1.0, selfenergy::sheet_below(x)).value;
    CHECK(std::abs(up - down) < 1e-6);
  }
}

TEST_CASE("bessel J0 and J1") {
  CHECK(bessel_j(0, 0.0) == 1.0);
  CHECK(bessel_j(1, 0.0) == 0.0);
  CHECK(std::abs(bessel_j(0, 2.404825557695773)) < 1e-10);
  for (double x : {0.1, 1.0, 3.7, 7.99, 8.01, 25.0, 400.0}) {
    CHECK(std::abs(bessel_j(0, x) - boost::math::cyl_bessel_j(0, x)) <= 1e-12 * std::max(1.0, std::abs(bessel_j(0, x))));
    CHECK(std::abs(bessel_j(1, x) - boost::math::cyl_bessel_j(1, x)) <= 1e-12 * std::max(1.0, std::abs(bessel_j(1, x))));
  }
  CHECK_THROWS_AS(bessel_j(2, 1.0), ValidationError);
  CHECK_THROWS_AS(bessel_j(0, -1.0), DomainError);
}

TEST_CASE("bessel sequence against Boost") {
  for (double x : {0.1, 1.0, 7.3, 50.0, 1000.0, 6600.0}) {
    const int n = int(x + 10 * std::cbrt(x) + 30);
    const auto v = bessel_j_sequence(x, n);
    REQUIRE(v.size() == std::size_t(n) + 1);
    double worst = 0.0;
    for (int k = 0; k <= n; k += n / 41 + 1) worst = std::max(worst, std::abs(v[k] - boost::math::cyl_bessel_j(k, x)));
    CHECK(worst < 1e-12);
  }
  const auto z = bessel_j_sequence(0.0, 3);
  CHECK(z[0] == 1.0);
  CHECK(z[3] == 0.0);
}

TEST_CASE("hankel H1 of order 1") {
  CHECK_THROWS_AS(hankel1_1(0.0), DomainError);
  // small-argument limit
  for (double x : {1e-3, 1e-5, 1e-7}) CHECK(std::abs(x * hankel1_1(x) - (-2.0 * I / pi)) < 2 * x);

  // integral representations at x = 1
  using boost::math::quadrature::gauss_kronrod;
  const double x = 1.0;
  const double j1 = gauss_kronrod<double, 61>::integrate([&](double th) { return std::cos(th - x * std::sin(th)); }, 0.0, pi, 20, 1e-15) / pi;
  const double y1a = gauss_kronrod<double, 61>::integrate([&](double th) { return std::sin(x * std::sin(th) - th); }, 0.0, pi, 20, 1e-15) / pi;
  const double y1b = gauss_kronrod<double, 61>::integrate([&](double t) { return 2.0 * std::sinh(t) * std::exp(-x * std::sinh(t)); }, 0.0, 40.0, 20, 1e-15) / pi;
  CHECK(std::abs(hankel1_1(x) - cplx(j1, y1a - y1b)) < 1e-10);

  // mpmath values on both sides of the seam
  CHECK(rel(hankel1_1({2.0, 1.0}), {0.19121655078657474232, -0.096248131988248557508}) < 1e-12);
  CHECK(rel(hankel1_1({20.0, -3.0}), {1.5718722684066551665, -3.1890866385901591967}) < 1e-12);
  CHECK(rel(hankel1_1({0.3, 0.01}), {0.080038213688351472175, -2.2859766900285835635}) < 1e-12);
  CHECK(rel(hankel1_1({13.9, 0.5}), {0.068736877775912319567, -0.110354611589314765}) < 1e-10);
  CHECK(rel(hankel1_1({14.1, -0.5}), {0.24940143071218507001, -0.24587155648433719078}) < 1e-10);
  CHECK(rel(hankel1_1(30.0), {-0.11875106261662293652, 0.084425570661747234891}) < 1e-12);

  // continuity on the positive real axis, including the seam
  for (double xr : {0.5, 3.0, hankel_seam, 20.0}) {
    const cplx a = hankel1_1({xr, 1e-9}), b = hankel1_1({xr, -1e-9});
    CHECK(std::abs(a - b) < 1e-7);
  }
  const cplx lo = hankel1_1(hankel_seam * (1 - 1e-12)), hi = hankel1_1(hankel_seam * (1 + 1e-12));
  CHECK(std::abs(lo - hi) < 1e-10);
  // real x: J1 and Y1 from Boost
  for (double xr : {0.7, 5.0, 13.0, 15.0, 60.0}) {
    const cplx ref(boost::math::cyl_bessel_j(1, xr), boost::math::cyl_neumann(1, xr));
    CHECK(std::abs(hankel1_1(xr) - ref) < 1e-11);
  }
}
