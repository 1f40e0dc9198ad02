// resolvent.cpp: pole search, residues and branch-cut detours for C_e(t)
#include "diracbath/resolvent.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <cstdio>

namespace diracbath::resolvent {

using selfenergy::Side;

std::string_view to_string(PoleKind k) noexcept {
  switch (k) {
    case PoleKind::real_BS_upper: return "real_BS_upper";
    case PoleKind::real_BS_lower: return "real_BS_lower";
    case PoleKind::qBS: return "qBS";
    case PoleKind::unstable: return "unstable";
  }
  return "?";
}

const std::vector<BranchCut>& detour_lines() {
  static const std::vector<BranchCut> lines = {
      {-3.0, Sheet::I, Sheet::II},  {-1.0, Sheet::II, Sheet::IV}, {0.0, Sheet::IV, Sheet::V},
      {1.0, Sheet::V, Sheet::III},  {3.0, Sheet::III, Sheet::I},
  };
  return lines;
}

namespace {

AnchoredEnergy shifted(const AnchoredEnergy& e, cplx d) { return {e.anchor, e.offset + d, e.side}; }

cplx sigma(const AnchoredEnergy& e, double g, Sheet s) { return selfenergy::sigma_e_closed(e, g, s); }

}  // namespace

cplx pole_function(const AnchoredEnergy& e, double delta, double g, Sheet sheet) {
  return (e.anchor - delta) + e.offset - sigma(e, g, sheet);
}

cplx sigma_derivative(const AnchoredEnergy& e, double g, Sheet sheet) {
  const double dist = std::abs(e.offset);
  if (dist == 0.0) throw DomainError("sigma_derivative: z is a non-analytic point");
  const double h = 2e-3 * std::min(1.0, dist);
  // step vertically when a horizontal step could cross Re z = 0, where sqrt(z^2) switches branch
  const double re = e.anchor + e.offset.real();
  const cplx dir = std::abs(re) <= 4 * h ? I : cplx(1.0);
  const cplx d = h * dir;
  const cplx fp1 = sigma(shifted(e, d), g, sheet), fm1 = sigma(shifted(e, -d), g, sheet);
  const cplx fp2 = sigma(shifted(e, 2.0 * d), g, sheet), fm2 = sigma(shifted(e, -2.0 * d), g, sheet);
  return (8.0 * (fp1 - fm1) - (fp2 - fm2)) / (12.0 * d);
}

double sigma_derivative_complex_step(double x, double g) {
  if (std::abs(x) <= 3.0) throw DomainError("complex step derivative requires |x| > 3");
  const AnchoredEnergy e = selfenergy::nearest_anchor(x);
  const double h = 1e-20 * std::min(1.0, std::abs(e.offset));
  return sigma(shifted(e, cplx(0.0, h)), g, Sheet::I).imag() / h;
}

cplx residue_at(const AnchoredEnergy& e, double g, Sheet sheet) {
  const cplx denom = 1.0 - sigma_derivative(e, g, sheet);
  if (std::abs(denom) < 1e-10) throw NumericalFailure("residue_at: defective pole, |1 - dSigma| < 1e-10");
  return 1.0 / denom;
}

cplx residue_at(cplx z, double delta, double g, Sheet sheet) {
  const AnchoredEnergy e = selfenergy::nearest_anchor(z);
  const cplx F = pole_function(e, delta, g, sheet);
  if (std::abs(F) > 1e-6 * (1.0 + std::abs(z))) throw ValidationError("residue_at: z is not a root of the pole equation");
  return residue_at(e, g, sheet);
}

namespace {

struct Strip {
  double lo, hi;
  Sheet sheet;
};

constexpr Strip strips[4] = {{-3.0, -1.0, Sheet::II}, {-1.0, 0.0, Sheet::IV}, {0.0, 1.0, Sheet::V}, {1.0, 3.0, Sheet::III}};

// Real bound state outside the band on the side of `edge` (+3 or -3).
Pole bound_state(double edge, double delta, double g, std::vector<std::string>& notes) {
  const double s = edge > 0 ? 1.0 : -1.0;
  auto F = [&](double u) {
    const AnchoredEnergy e{edge, cplx(s * std::exp(u), 0.0), Side::none};
    return s * pole_function(e, delta, g, Sheet::I).real();
  };
  const double u_lo = std::log(1e-300);
  double u_hi = 0.0;
  while (F(u_hi) <= 0.0) {
    u_hi += 1.0;
    if (u_hi > 60) throw NumericalFailure("find_poles: bound state bracket not found");
  }
  double u;
  if (F(u_lo) >= 0.0) {
    u = u_lo;
    notes.push_back("bound state closer than 1e-300 to the band edge; offset clamped");
  } else {
    std::uintmax_t iters = 300;
    auto r = boost::math::tools::toms748_solve(F, u_lo, u_hi, boost::math::tools::eps_tolerance<double>(52), iters);
    u = 0.5 * (r.first + r.second);
  }
  Pole p;
  p.at = {edge, cplx(s * std::exp(u), 0.0), Side::none};
  p.z = p.at.z();
  p.kind = edge > 0 ? PoleKind::real_BS_upper : PoleKind::real_BS_lower;
  p.sheet = Sheet::I;
  p.residue = residue_at(p.at, g, Sheet::I);
  return p;
}

std::optional<cplx> newton(cplx z, double delta, double g, Sheet sheet) {
  try {
    for (int it = 0; it < 60; ++it) {
      const AnchoredEnergy e = selfenergy::nearest_anchor(z);
      const cplx F = pole_function(e, delta, g, sheet);
      const cplx dF = 1.0 - sigma_derivative(e, g, sheet);
      cplx dz = -F / dF;
      const double cap = 0.5;
      if (std::abs(dz) > cap) dz *= cap / std::abs(dz);
      cplx zn = z + dz;
      if (zn.imag() >= 0.0) zn = cplx(zn.real(), 0.5 * z.imag());
      z = zn;
      if (!std::isfinite(z.real()) || !std::isfinite(z.imag()) || std::abs(z) > 50) return std::nullopt;
      if (std::abs(dz) < 1e-14 * (1.0 + std::abs(z))) break;
    }
    const cplx F = pole_function(selfenergy::nearest_anchor(z), delta, g, sheet);
    if (std::abs(F) > 1e-10) return std::nullopt;
    return z;
  } catch (const DomainError&) {
    return std::nullopt;
  }
}

}  // namespace

SpectralDecomposition find_poles(double delta, double g) {
  if (!(g > 0.0)) throw ValidationError("find_poles: g must be positive");
  if (!std::isfinite(delta)) throw ValidationError("find_poles: detuning must be finite");
  SpectralDecomposition dec;
  dec.delta = delta;
  dec.g = g;
  dec.branch_cuts = detour_lines();

  dec.poles.push_back(bound_state(3.0, delta, g, dec.notes));
  dec.poles.push_back(bound_state(-3.0, delta, g, dec.notes));
  if (delta == 0.0) dec.poles.push_back({0.0, PoleKind::qBS, Sheet::I, 0.0, {0.0, 0.0, Side::none}});

  const auto mp = selfenergy::markov_pole(delta, g);
  std::vector<Pole> ups;
  for (const Strip& st : strips) {
    std::vector<cplx> seeds;
    if (mp.status == selfenergy::MarkovStatus::regular && mp.z.real() > st.lo && mp.z.real() < st.hi)
      seeds.push_back(mp.z);
    seeds.push_back(cplx(st.lo, -0.1));
    seeds.push_back(cplx(st.hi, -0.1));
    seeds.push_back(cplx(0.5 * (st.lo + st.hi), -0.1));
    for (int ix = 1; ix <= 6; ++ix)
      for (double y : {0.02, 0.1, 0.3, 0.7, 1.5})
        seeds.push_back(cplx(st.lo + (st.hi - st.lo) * ix / 7.0, -y));
    int failed = 0;
    for (cplx s : seeds) {
      if (s == cplx(0.0, 0.0)) continue;
      const auto r = newton(s, delta, g, st.sheet);
      if (!r) {
        ++failed;
        continue;
      }
      const cplx z = *r;
      if (!(z.imag() < -1e-13 && z.real() > st.lo && z.real() < st.hi)) continue;
      const bool dup = std::any_of(ups.begin(), ups.end(), [&](const Pole& p) {
        return p.sheet == st.sheet && std::abs(p.z - z) <= 1e-9 * (1.0 + std::abs(z));
      });
      if (dup) continue;
      Pole p;
      p.at = selfenergy::nearest_anchor(z);
      p.z = z;
      p.kind = PoleKind::unstable;
      p.sheet = st.sheet;
      p.residue = residue_at(p.at, g, st.sheet);
      ups.push_back(p);
    }
    if (failed > 0) {
      char buf[96];
      std::snprintf(buf, sizeof buf, "sheet %s: %d of %zu seeds did not converge", specfun::to_string(st.sheet).data(),
                    failed, seeds.size());
      dec.notes.push_back(buf);
    }
  }
  dec.poles.insert(dec.poles.end(), ups.begin(), ups.end());
  std::sort(dec.poles.begin(), dec.poles.end(), [](const Pole& a, const Pole& b) {
    return a.z.real() != b.z.real() ? a.z.real() < b.z.real() : a.z.imag() < b.z.imag();
  });
  return dec;
}

namespace {

template <class F>
void adaptive_gk(F& f, double a, double b, double tol, int depth, cplx& sum, double& err) {
  double e = 0.0, l1 = 0.0;
  const cplx v = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, a, b, 0, 0.0, &e, &l1);
  if (e <= std::max(tol, 1e-11 * l1) || depth >= 18) {
    sum += v;
    err += e;
    return;
  }
  const double m = 0.5 * (a + b);
  adaptive_gk(f, a, m, 0.5 * tol, depth + 1, sum, err);
  adaptive_gk(f, m, b, 0.5 * tol, depth + 1, sum, err);
}

double cut_depth(double t) { return t > 0.0 ? std::min(std::max(40.0 / t, 20.0), 1e8) : 1e8; }

}  // namespace

double closure_bound(double t, double depth, double delta, double g) {
  // |G| <= 1/(Y - |delta| - |Sigma|) on the closures, |Sigma| <= g^2 there
  const double gmax = 1.0 / std::max(depth - std::abs(delta) - g * g, 1e-300);
  return 2.0 * 6.0 * gmax * std::exp(-depth * t) / (2.0 * pi);
}

CutValue branch_cut_contribution(double anchor, double t, double delta, double g) {
  if (!(t >= 0.0)) throw ValidationError("branch_cut_contribution: t must be >= 0");
  const auto& lines = detour_lines();
  const auto it = std::find_if(lines.begin(), lines.end(), [&](const BranchCut& b) { return b.anchor == anchor; });
  if (it == lines.end()) throw ValidationError("branch_cut_contribution: anchor must be one of 0, +-1, +-3");
  const BranchCut cut = *it;

  const double Y = cut_depth(t);
  const bool log_tail = anchor == 0.0 && delta == 0.0;
  const double y_lo = log_tail ? std::min(1e-12, t > 0 ? 1e-8 / t : 1e-12) : 1e-16;

  auto jump = [&](double y) -> cplx {
    const cplx off(0.0, -y);
    const AnchoredEnergy L{anchor, off, Side::left}, R{anchor, off, Side::right};
    const cplx base = (anchor - delta) + off;
    const cplx gl = 1.0 / (base - sigma(L, g, cut.left));
    const cplx gr = 1.0 / (base - sigma(R, g, cut.right));
    return gl - gr;
  };
  auto integrand = [&](double s) -> cplx {
    const double y = std::exp(s);
    return jump(y) * std::exp(-y * t) * y;
  };

  const double s0 = std::log(y_lo), s1 = std::log(Y);
  const int pieces = std::max(1, int(std::ceil(s1 - s0)));
  const double abs_tol = 1e-13 / pieces;
  cplx total = 0.0;
  double err_total = 0.0;
  for (int j = 0; j < pieces; ++j) {
    const double a = s0 + (s1 - s0) * j / pieces, b = s0 + (s1 - s0) * (j + 1) / pieces;
    adaptive_gk(integrand, a, b, abs_tol, 0, total, err_total);
  }
  if (log_tail) {
    const double am = g * g / (pi * sqrt3), b = 2.0 * pi * am;
    const double u0 = 1.0 - 2.0 * am * std::log(y_lo / 3.0);
    total += -std::atan(b / u0) / am;
  }
  if (err_total > 1e-9) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "branch_cut_contribution: quadrature error %.3e at anchor %g, t = %g", err_total,
                  anchor, t);
    throw NumericalFailure(buf);
  }
  CutValue v;
  v.value = -std::exp(cplx(0.0, -anchor * t)) * total / (2.0 * pi);
  v.error = err_total / (2.0 * pi);
  v.depth = Y;
  v.tail_bound = std::exp(-Y * t);
  return v;
}

std::vector<cplx> ce_resolvent(const SpectralDecomposition& dec, const std::vector<double>& t,
                               const std::optional<selfenergy::BathModel>& finite) {
  double r0 = 0.0;
  if (finite && dec.delta == 0.0) r0 = selfenergy::residue_r0(dec.g, *finite);
  std::vector<cplx> out(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    cplx c = r0;
    for (const Pole& p : dec.poles)
      if (p.kind != PoleKind::qBS) c += p.residue * std::exp(-I * p.z * t[i]);
    for (const BranchCut& b : dec.branch_cuts) c += branch_cut_contribution(b.anchor, t[i], dec.delta, dec.g).value;
    out[i] = c;
  }
  return out;
}

std::vector<cplx> ce_resolvent(const std::vector<double>& t, double delta, double g,
                               const std::optional<selfenergy::BathModel>& finite) {
  return ce_resolvent(find_poles(delta, g), t, finite);
}

std::vector<cplx> markov_ce(const std::vector<double>& t, double delta, double g) {
  const auto mp = selfenergy::markov_pole(delta, g);
  if (mp.status == selfenergy::MarkovStatus::divergent)
    throw DomainError("markov_ce: Markov pole diverges at this detuning");
  std::vector<cplx> out(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) out[i] = std::exp(-I * mp.z * t[i]);
  return out;
}

double mbc_asymptotic(double t, double g) { return -pi * sqrt3 / (2.0 * g * g * std::log(3.0 * t)); }

}  // namespace diracbath::resolvent
