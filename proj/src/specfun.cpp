// specfun.cpp: elliptic K via complex AGM, Hankel H1 via series and asymptotics
#include "diracbath/specfun.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace diracbath::specfun {

namespace {

constexpr double eps = std::numeric_limits<double>::epsilon();
constexpr double euler_gamma = 0.57721566490153286061;

}  // namespace

std::string_view to_string(Sheet s) noexcept {
  switch (s) {
    case Sheet::I: return "I";
    case Sheet::II: return "II";
    case Sheet::III: return "III";
    case Sheet::IV: return "IV";
    case Sheet::V: return "V";
  }
  return "?";
}

Sheet sheet_from_string(std::string_view s) {
  if (s == "I") return Sheet::I;
  if (s == "II") return Sheet::II;
  if (s == "III") return Sheet::III;
  if (s == "IV") return Sheet::IV;
  if (s == "V") return Sheet::V;
  throw ValidationError("unknown sheet '" + std::string(s) + "'");
}

// Region table. Sheet I is the physical sheet; II lies under (-3,-1), IV under
// (-1,0), V under (0,1), III under (1,3). Each entry was fixed by continuity of
// the self-energy along the detour lines and across the cut curves of K.
SheetCoefficients sheet_coefficients(Sheet sheet, const RegionSigns& s) {
  auto pm = [](int v) { return v == 1 || v == -1; };
  if (!pm(s.sign_im_z2) || !pm(s.sign_im_kz) || !pm(s.sign_re_kz))
    throw DomainError("sheet_coefficients: region signs must be +1 or -1");
  switch (sheet) {
    case Sheet::I:
      if (s.sign_im_kz * s.sign_im_z2 < 0) return {1, 0};
      return s.sign_im_kz > 0 ? SheetCoefficients{1, 2} : SheetCoefficients{1, -2};
    case Sheet::II:
      return s.sign_re_kz > 0 ? SheetCoefficients{1, 2} : SheetCoefficients{-3, 2};
    case Sheet::III:
      return s.sign_re_kz > 0 ? SheetCoefficients{1, -2} : SheetCoefficients{-3, -2};
    case Sheet::IV:
      return s.sign_im_kz > 0 ? SheetCoefficients{3, 2} : SheetCoefficients{3, -4};
    case Sheet::V:
      return s.sign_im_kz < 0 ? SheetCoefficients{3, -2} : SheetCoefficients{3, 4};
  }
  throw DomainError("sheet_coefficients: sheet not in table");
}

cplx ellipk_quadrature(cplx m) {
  using boost::math::quadrature::gauss_kronrod;
  auto f = [m](double th) -> cplx {
    const double s = std::sin(th);
    return 1.0 / std::sqrt(1.0 - m * s * s);
  };
  double err = 0;
  cplx v = gauss_kronrod<double, 31>::integrate(f, 0.0, pi / 2, 25, 1e-14, &err);
  if (err > 1e-9 * std::abs(v)) throw NumericalFailure("ellipk_quadrature: tolerance not reached");
  return v;
}

cplx ellipk_complement(cplx mc) {
  if (mc.imag() == 0.0 && mc.real() <= 0.0)
    throw DomainError("ellipk: parameter on the branch cut m >= 1");
  if (!std::isfinite(mc.real()) || !std::isfinite(mc.imag()))
    throw DomainError("ellipk: non-finite parameter");
  cplx a = 1.0, b = std::sqrt(mc);
  for (int it = 0; it < 80; ++it) {
    if (std::abs(a - b) <= 4 * eps * std::abs(a)) return pi / (a + b);
    if (std::abs(std::arg(b / a)) > pi - 1e-6) return ellipk_quadrature(1.0 - mc);
    const cplx an = 0.5 * (a + b);
    cplx bn = std::sqrt(a) * std::sqrt(b);
    if (std::abs(an - bn) > std::abs(an + bn)) bn = -bn;
    a = an;
    b = bn;
  }
  throw NumericalFailure("ellipk: AGM did not converge");
}

cplx ellipk(cplx m) {
  if (m.imag() == 0.0 && m.real() >= 1.0)
    throw DomainError("ellipk: parameter on the branch cut m >= 1");
  return ellipk_complement(1.0 - m);
}

cplx ellipk_sheet(cplx m, cplx one_minus_m, Sheet sheet, const RegionSigns& signs) {
  const auto [p, q] = sheet_coefficients(sheet, signs);
  cplx v = 0.0;
  if (p != 0) v += double(p) * ellipk_complement(one_minus_m);
  if (q != 0) v += double(q) * I * ellipk_complement(m);
  return v;
}

cplx ellipk_sheet(cplx m, Sheet sheet, const RegionSigns& signs) {
  return ellipk_sheet(m, 1.0 - m, sheet, signs);
}

double bessel_j(int order, double x) {
  if (order != 0 && order != 1) throw ValidationError("bessel_j: order must be 0 or 1");
  if (!(x >= 0.0)) throw DomainError("bessel_j: x must be >= 0");
  return std::cyl_bessel_j(double(order), x);
}

std::vector<double> bessel_j_sequence(double x, int nmax) {
  if (nmax < 0) throw ValidationError("bessel_j_sequence: nmax must be >= 0");
  if (!(x >= 0.0)) throw DomainError("bessel_j_sequence: x must be >= 0");
  std::vector<double> out(std::size_t(nmax) + 1, 0.0);
  if (x == 0.0) {
    out[0] = 1.0;
    return out;
  }
  const double top = std::max(double(nmax), x);
  int start = int(top + 20.0 + 2.0 * std::sqrt(40.0 * top));
  start += start % 2;
  double jp = 0.0, j = 1e-300, norm = 0.0;
  for (int k = start; k > 0; --k) {
    const double jm = 2.0 * k / x * j - jp;
    jp = j;
    j = jm;
    if (k - 1 <= nmax) out[std::size_t(k - 1)] = j;
    if ((k - 1) % 2 == 0 && k - 1 > 0) norm += 2.0 * j;
    if (std::abs(j) > 1e250) {
      j *= 1e-250;
      jp *= 1e-250;
      norm *= 1e-250;
      for (int i = k - 1; i <= nmax; ++i) out[std::size_t(i)] *= 1e-250;
    }
  }
  norm += j;
  for (double& v : out) v /= norm;
  return out;
}

namespace {

// J1 + i Y1 from the ascending series.
cplx hankel1_series(cplx x) {
  const cplx h = 0.5 * x, q = -h * h;
  cplx term = h;  // (x/2)^{2k+1} (-1)^k / (k!(k+1)!)
  cplx j1 = 0.0, rest = 0.0;
  double psi_k1 = -euler_gamma, psi_k2 = 1.0 - euler_gamma;
  for (int k = 0; k < 200; ++k) {
    j1 += term;
    rest += (psi_k1 + psi_k2) * term;
    const cplx next = term * q / double((k + 1) * (k + 2));
    psi_k1 += 1.0 / (k + 1);
    psi_k2 += 1.0 / (k + 2);
    term = next;
    if (std::abs(term) < 1e-18 * std::abs(j1) && k > 2) break;
  }
  const cplx y1 = (2.0 / pi) * j1 * std::log(h) - 2.0 / (pi * x) - rest / pi;
  return j1 + I * y1;
}

cplx hankel1_asymptotic(cplx x) {
  // sum_k i^k a_k(1) / x^k with a_k = prod_{j<=k} (4 - (2j-1)^2) / (k! 8^k)
  cplx sum = 1.0, term = 1.0;
  double last = 1e300;
  for (int k = 1; k < 60; ++k) {
    const double c = (4.0 - double(2 * k - 1) * (2 * k - 1)) / (8.0 * k);
    term *= I * c / x;
    const double mag = std::abs(term);
    if (mag > last) break;
    sum += term;
    last = mag;
    if (mag < 1e-17 * std::abs(sum)) break;
  }
  return std::sqrt(2.0 / (pi * x)) * std::exp(I * (x - 0.75 * pi)) * sum;
}

}  // namespace

cplx hankel1_1(cplx x) {
  if (x == 0.0) throw DomainError("hankel1_1: pole at x = 0");
  return std::abs(x) < hankel_seam ? hankel1_series(x) : hankel1_asymptotic(x);
}

}  // namespace diracbath::specfun
