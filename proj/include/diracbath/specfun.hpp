// specfun.hpp: complete elliptic integral K for complex parameter, its sheet
// combinations, and the Bessel/Hankel functions used by the asymptotic formulas
#pragma once

#include <vector>

#include <string_view>

#include "diracbath/common.hpp"

namespace diracbath::specfun {

enum class Sheet { I, II, III, IV, V };

std::string_view to_string(Sheet s) noexcept;
Sheet sheet_from_string(std::string_view s);

// Signs of Im[z^2], Im[k(z)], Re[k(z)], each +1 or -1.
struct RegionSigns {
  int sign_im_z2 = 1;
  int sign_im_kz = 1;
  int sign_re_kz = 1;
};

// Coefficients of p K(m) + q i K(1-m).
struct SheetCoefficients {
  int p = 1;
  int q = 0;
};

SheetCoefficients sheet_coefficients(Sheet sheet, const RegionSigns& signs);

// Principal K(m); throws DomainError on the cut m in [1, inf).
cplx ellipk(cplx m);

// K(1 - mc), accurate when m is close to 1 or huge; cut at mc in (-inf, 0].
cplx ellipk_complement(cplx mc);

// p K(m) + q i K(1-m) for the region given by signs.
cplx ellipk_sheet(cplx m, Sheet sheet, const RegionSigns& signs);

// Same combination with both parameters supplied; skips terms with zero coefficient.
cplx ellipk_sheet(cplx m, cplx one_minus_m, Sheet sheet, const RegionSigns& signs);

// Defining-integral quadrature of K(m), used as fallback when the AGM is ambiguous.
cplx ellipk_quadrature(cplx m);

// J_0 and J_1 for real x >= 0.
double bessel_j(int order, double x);

// J_0(x) .. J_nmax(x) for real x >= 0 by Miller's backward recurrence.
std::vector<double> bessel_j_sequence(double x, int nmax);

// H_1^(1)(x) = J_1(x) + i Y_1(x), principal branch.
cplx hankel1_1(cplx x);

inline constexpr double hankel_seam = 14.0;

}  // namespace diracbath::specfun
