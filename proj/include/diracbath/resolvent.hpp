// resolvent.hpp: spectral decomposition of the single-emitter amplitude:
// poles on all sheets, residues, branch-cut detours and the C_e(t) sum
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "diracbath/selfenergy.hpp"

namespace diracbath::resolvent {

using selfenergy::AnchoredEnergy;
using specfun::Sheet;

enum class PoleKind { real_BS_upper, real_BS_lower, qBS, unstable };

std::string_view to_string(PoleKind k) noexcept;

struct Pole {
  cplx z;
  PoleKind kind = PoleKind::unstable;
  Sheet sheet = Sheet::I;
  cplx residue;
  AnchoredEnergy at;  // same energy, offset kept relative to the nearest singular point
};

struct BranchCut {
  double anchor = 0.0;
  Sheet left = Sheet::I;
  Sheet right = Sheet::I;
};

struct SpectralDecomposition {
  std::vector<Pole> poles;
  std::vector<BranchCut> branch_cuts;
  double delta = 0.0;
  double g = 0.0;
  std::vector<std::string> notes;  // per-seed non-convergence and similar reports
};

const std::vector<BranchCut>& detour_lines();

// Pole equation z - delta - Sigma_sheet(z).
cplx pole_function(const AnchoredEnergy& e, double delta, double g, Sheet sheet);

// d Sigma_sheet / dz by a five-point stencil scaled to the distance from the nearest singular energy.
cplx sigma_derivative(const AnchoredEnergy& e, double g, Sheet sheet);

// d Sigma / dz on sheet I at real x outside the band, by complex step.
double sigma_derivative_complex_step(double x, double g);

cplx residue_at(cplx z, double delta, double g, Sheet sheet);
cplx residue_at(const AnchoredEnergy& e, double g, Sheet sheet);

SpectralDecomposition find_poles(double delta, double g);

struct CutValue {
  cplx value;
  double error = 0.0;       // quadrature error estimate
  double depth = 0.0;       // truncation depth Y
  double tail_bound = 0.0;  // e^{-Y t}
};

CutValue branch_cut_contribution(double anchor, double t, double delta, double g);

// Bound on the neglected horizontal closures at depth Y below the band.
double closure_bound(double t, double depth, double delta, double g);

// C_e(t); with a finite model the z = 0 residue R_0(N) is added at delta = 0.
std::vector<cplx> ce_resolvent(const std::vector<double>& t, double delta, double g,
                               const std::optional<selfenergy::BathModel>& finite = std::nullopt);
std::vector<cplx> ce_resolvent(const SpectralDecomposition& dec, const std::vector<double>& t,
                               const std::optional<selfenergy::BathModel>& finite = std::nullopt);

std::vector<cplx> markov_ce(const std::vector<double>& t, double delta, double g);

// Leading late-time form of the middle-cut term at delta = 0.
double mbc_asymptotic(double t, double g);

}  // namespace diracbath::resolvent
