// selfenergy.hpp: single-emitter and collective self-energies, Markov
// quantities, and the residue/scaling formulas built on them
#pragma once

#include <utility>

#include "diracbath/lattice.hpp"
#include "diracbath/specfun.hpp"

namespace diracbath::selfenergy {

using lattice::BathModel;
using lattice::IVec2;
using specfun::Sheet;

enum class Source { finite_sum, closed_form, near_dirac_expansion };

struct SelfEnergyValue {
  cplx z;
  cplx value;
  Sheet sheet = Sheet::I;
  Source source = Source::closed_form;
  int N = 0;  // lattice size for finite sums, 0 otherwise
};

// Non-analytic energies of the continuum self-energy.
inline constexpr double anchors[5] = {-3.0, -1.0, 0.0, 1.0, 3.0};

// Which side of a vertical line through the anchor is meant when Re z equals the anchor.
enum class Side { none, left, right };

// z = anchor + offset, with the offset carried separately so that points
// closer to a singular energy than one ulp remain distinguishable.
struct AnchoredEnergy {
  double anchor = 0.0;
  cplx offset{};
  Side side = Side::none;
  cplx z() const noexcept { return anchor + offset; }
};

AnchoredEnergy nearest_anchor(cplx z) noexcept;

// Quantities entering the closed form at one energy.
struct ClosedFormKernel {
  cplx w;              // sqrt(z^2)
  cplx C, k;
  cplx m, one_minus_m;  // k^2 and 1 - k^2, both from factored forms
  specfun::RegionSigns signs;
};

ClosedFormKernel closed_form_kernel(const AnchoredEnergy& e);

// Energy region of the real axis and the sheet used below it.
Sheet sheet_below(double x) noexcept;

SelfEnergyValue sigma_e_finite(cplx z, double g, const BathModel& model);
SelfEnergyValue sigma_e_closed(cplx z, double g, Sheet sheet);
cplx sigma_e_closed(const AnchoredEnergy& e, double g, Sheet sheet);
SelfEnergyValue sigma_e_near_zero(cplx E, double g);

// Boundary value Sigma(E + i0+) on sheet I.
inline constexpr double boundary_eta = 1e-8;
cplx sigma_e_upper(double E, double g);
cplx sigma_e_upper(double anchor, double offset, double g);
inline double gamma_e(double E, double g) { return -2.0 * sigma_e_upper(E, g).imag(); }
inline double lamb_shift(double E, double g) { return sigma_e_upper(E, g).real(); }

enum class MarkovStatus { regular, marginal, divergent };

struct MarkovPole {
  cplx z;
  MarkovStatus status = MarkovStatus::regular;
  double gamma() const noexcept { return -2.0 * z.imag(); }
};

MarkovPole markov_pole(double delta, double g);
MarkovPole markov_pole(double anchor, double offset, double g);

enum class Pair { AA, BB, AB, BA };

struct CollectiveIndex {
  Pair beta = Pair::AB;
  IVec2 n12{0, 0};
};

std::string_view to_string(Pair p) noexcept;
Pair pair_from_string(std::string_view s);

SelfEnergyValue sigma12_finite(cplx z, double g, const BathModel& model, const CollectiveIndex& idx);

// Sigma_e, Sigma_12 and their z-derivatives at real z, from one fused grid pass.
struct CollectiveSums {
  double sigma_e = 0, dsigma_e = 0;
  double sigma_12 = 0, dsigma_12 = 0;
};
CollectiveSums collective_sums(double z, double g, const BathModel& model, const CollectiveIndex& idx);

double jab_markov_asymptotic(const IVec2& n12, double g);

// Small-distance-independent asymptotic of Sigma_12^AB via H_1^(1), valid for |z| << J.
cplx sigma12_ab_asymptotic(cplx z, const IVec2& n12, double g);

double g_of_n(const BathModel& model);
double g_of_n_approx(int N) noexcept;

struct GPm {
  double value = 0;
  double imag = 0;  // vanishes by k -> -k symmetry
};
GPm g_pm(const BathModel& model, const IVec2& n12, int sign);

double residue_r0(double g, const BathModel& model);
double residue_subradiant_aa(int n, double g);

}  // namespace diracbath::selfenergy
