// selfenergy.cpp: finite-N momentum sums and the continuum closed form
#include "diracbath/selfenergy.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "diracbath/gridsum.hpp"

namespace diracbath::selfenergy {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();
constexpr double nan = std::numeric_limits<double>::quiet_NaN();

void require_no_dirac(const BathModel& model, const char* who) {
  if (model.contains_dirac_point())
    throw DomainError(std::string(who) + ": N = " + std::to_string(model.N()) +
                      " is a multiple of 3, the Dirac points lie on the grid");
}

bool is_anchor(cplx z) noexcept {
  if (z.imag() != 0.0) return false;
  for (double a : anchors)
    if (z.real() == a) return true;
  return false;
}

// Dispersion table e^{ik_i} for the grid.
struct GridTables {
  int N;
  std::vector<cplx> e;
  explicit GridTables(int n) : N(n), e(lattice::phase_table(n, 1)) {}
  cplx f(int i1, int i2) const noexcept { return 1.0 + e[i1] + e[i2]; }
};

double norm2(cplx c) noexcept { return c.real() * c.real() + c.imag() * c.imag(); }

[[noreturn]] void resonance(const char* who, cplx z) {
  throw DomainError(std::string(who) + ": z = (" + std::to_string(z.real()) + ", " +
                    std::to_string(z.imag()) + ") is resonant with a grid eigenvalue");
}

// Sum over the grid of X_k / (z^2 - |f|^2), complex z.
template <class X>
cplx resolvent_sum(cplx z, int N, X&& x, bool& resonant) {
  GridTables tab(N);
  const cplx z2 = z * z;
  const double zz = norm2(z);
  bool hit = false;
  auto out = gridsum::reduce<2>(N, [&](int i1, gridsum::RowAccumulator<2>& acc) {
    for (int i2 = 0; i2 < N; ++i2) {
      const cplx f = tab.f(i1, i2);
      const double w2 = norm2(f);
      const cplx d = z2 - w2;
      const double dd = norm2(d);
      if (dd <= 2e-28 * (zz + w2)) hit = true;
      const cplx t = x(i1, i2, f) * std::conj(d) / dd;
      acc.add({t.real(), t.imag()});
    }
  });
  resonant = hit;
  return {out[0], out[1]};
}

}  // namespace

AnchoredEnergy nearest_anchor(cplx z) noexcept {
  double best = anchors[0];
  for (double a : anchors)
    if (std::abs(z - a) < std::abs(z - best)) best = a;
  return {best, z - best, Side::none};
}

Sheet sheet_below(double x) noexcept {
  if (x < -3.0 || x > 3.0) return Sheet::I;
  if (x < -1.0) return Sheet::II;
  if (x < 0.0) return Sheet::IV;
  if (x < 1.0) return Sheet::V;
  return Sheet::III;
}

namespace {

struct Orientation {
  int s;
  double sa;
};

Orientation orientation(const AnchoredEnergy& e) {
  const double rz = e.anchor + e.offset.real();
  int s = 1;
  if (rz < 0.0 || (rz == 0.0 && e.side == Side::left)) s = -1;
  return {s, s * e.anchor};
}

struct KParts {
  cplx w, wm1, wm3, wp1, wp3, C, k;
};

KParts k_parts(const Orientation& o, cplx offset) {
  const cplx so = double(o.s) * offset;
  KParts p;
  p.w = o.sa + so;
  p.wm1 = (o.sa - 1.0) + so;
  p.wm3 = (o.sa - 3.0) + so;
  p.wp1 = (o.sa + 1.0) + so;
  p.wp3 = (o.sa + 3.0) + so;
  if (p.w == 0.0 || p.wm1 == 0.0 || p.wm3 == 0.0)
    throw DomainError("sigma_e_closed: z is a non-analytic point (0, +-1, +-3)");
  p.C = 8.0 / (p.wm1 * std::sqrt(p.wm1) * std::sqrt(p.wp3));
  p.k = 0.5 * p.C * std::sqrt(p.w);
  return p;
}

int sign_or_tie(double v, double scale, int& tie) {
  if (std::abs(v) > 1e-14 * scale) return v > 0 ? 1 : -1;
  tie = 1;
  return 0;
}

}  // namespace

ClosedFormKernel closed_form_kernel(const AnchoredEnergy& e) {
  const Orientation o = orientation(e);
  const KParts p = k_parts(o, e.offset);

  ClosedFormKernel kern;
  kern.w = p.w;
  kern.C = p.C;
  kern.k = p.k;
  const cplx r = 1.0 / p.wm1;
  const cplx r3 = r * r * r;
  kern.m = 16.0 * p.w / p.wp3 * r3;
  kern.one_minus_m = p.wm3 * (p.wp1 * p.wp1 * p.wp1) / p.wp3 * r3;
  auto finite = [](cplx c) { return std::isfinite(c.real()) && std::isfinite(c.imag()); };
  if (!finite(kern.m) || !finite(kern.one_minus_m) || !finite(kern.C))
    throw DomainError("sigma_e_closed: z too close to a non-analytic point");

  // Im z within 1e-14 |offset| of zero resolves toward the lower half-plane
  const double imz = e.offset.imag();
  const int sgn_imz = imz > 1e-14 * std::abs(e.offset) ? 1 : -1;
  kern.signs.sign_im_z2 = o.s * sgn_imz;

  int tie = 0;
  const double kabs = std::abs(p.k);
  int sim = sign_or_tie(p.k.imag(), kabs, tie);
  int sre = sign_or_tie(p.k.real(), kabs, tie);
  if (tie) {
    const double h = 1e-12 * std::min(1.0, std::abs(e.offset));
    const KParts q = k_parts(o, e.offset - cplx(0.0, h));
    if (sim == 0) sim = q.k.imag() > 0 ? 1 : -1;
    if (sre == 0) sre = q.k.real() > 0 ? 1 : -1;
  }
  kern.signs.sign_im_kz = sim;
  kern.signs.sign_re_kz = sre;
  return kern;
}

cplx sigma_e_closed(const AnchoredEnergy& e, double g, Sheet sheet) {
  const ClosedFormKernel kern = closed_form_kernel(e);
  const cplx K = specfun::ellipk_sheet(kern.m, kern.one_minus_m, sheet, kern.signs);
  return g * g / (4.0 * pi) * e.z() * kern.C * K;
}

SelfEnergyValue sigma_e_closed(cplx z, double g, Sheet sheet) {
  if (is_anchor(z)) throw DomainError("sigma_e_closed: z is a non-analytic point (0, +-1, +-3)");
  return {z, sigma_e_closed(nearest_anchor(z), g, sheet), sheet, Source::closed_form, 0};
}

SelfEnergyValue sigma_e_near_zero(cplx E, double g) {
  if (std::abs(E) > 0.1) throw ValidationError("sigma_e_near_zero: requires |E| <= 0.1 J");
  if (E == 0.0) return {E, 0.0, Sheet::I, Source::near_dirac_expansion, 0};
  const cplx v = 2.0 * g * g / (pi * sqrt3) * E * std::log(-I * E / 3.0);
  return {E, v, Sheet::I, Source::near_dirac_expansion, 0};
}

cplx sigma_e_upper(double anchor, double offset, double g) {
  if (offset == 0.0) throw DomainError("sigma_e_upper: E is a non-analytic point");
  const double x = anchor + offset;
  const bool outside = std::abs(x) > 3.0 || (std::abs(anchor) == 3.0 && anchor * offset > 0);
  if (outside) {
    const cplx v = sigma_e_closed(AnchoredEnergy{anchor, offset, Side::none}, g, Sheet::I);
    return {v.real(), 0.0};
  }
  const double eta = boundary_eta * std::min(1.0, std::abs(offset));
  return sigma_e_closed(AnchoredEnergy{anchor, cplx(offset, eta), Side::none}, g, Sheet::I);
}

cplx sigma_e_upper(double E, double g) {
  if (is_anchor(E)) throw DomainError("sigma_e_upper: E is a non-analytic point (0, +-1, +-3)");
  const AnchoredEnergy a = nearest_anchor(E);
  return sigma_e_upper(a.anchor, a.offset.real(), g);
}

MarkovPole markov_pole(double anchor, double offset, double g) {
  if (offset == 0.0) {
    if (anchor == 0.0) return {0.0, MarkovStatus::marginal};
    if (std::abs(anchor) == 1.0) return {cplx(anchor, -inf), MarkovStatus::divergent};
    if (std::abs(anchor) == 3.0) return {cplx(nan, 0.0), MarkovStatus::divergent};
  }
  return {anchor + offset + sigma_e_upper(anchor, offset, g), MarkovStatus::regular};
}

MarkovPole markov_pole(double delta, double g) {
  if (!std::isfinite(delta)) throw ValidationError("markov_pole: detuning must be finite");
  const AnchoredEnergy a = nearest_anchor(delta);
  return markov_pole(a.anchor, a.offset.real(), g);
}

SelfEnergyValue sigma_e_finite(cplx z, double g, const BathModel& model) {
  const int N = model.N();
  if (z == 0.0) {
    require_no_dirac(model, "sigma_e_finite");
    return {z, 0.0, Sheet::I, Source::finite_sum, N};
  }
  bool resonant = false;
  const cplx s = resolvent_sum(z, N, [](int, int, cplx) { return cplx(1.0); }, resonant);
  if (resonant) resonance("sigma_e_finite", z);
  return {z, g * g / (double(N) * N) * z * s, Sheet::I, Source::finite_sum, N};
}

std::string_view to_string(Pair p) noexcept {
  switch (p) {
    case Pair::AA: return "AA";
    case Pair::BB: return "BB";
    case Pair::AB: return "AB";
    case Pair::BA: return "BA";
  }
  return "?";
}

Pair pair_from_string(std::string_view s) {
  if (s == "AA") return Pair::AA;
  if (s == "BB") return Pair::BB;
  if (s == "AB") return Pair::AB;
  if (s == "BA") return Pair::BA;
  throw ValidationError("unknown sublattice pair '" + std::string(s) + "'");
}

SelfEnergyValue sigma12_finite(cplx z, double g, const BathModel& model, const CollectiveIndex& idx) {
  const int N = model.N();
  if (z == 0.0) require_no_dirac(model, "sigma12_finite");
  const bool same = idx.beta == Pair::AA || idx.beta == Pair::BB;
  if (same && z == 0.0) return {z, 0.0, Sheet::I, Source::finite_sum, N};
  const auto p1 = lattice::phase_table(N, idx.n12[0]);
  const auto p2 = lattice::phase_table(N, idx.n12[1]);
  bool resonant = false;
  cplx s;
  switch (idx.beta) {
    case Pair::AA:
    case Pair::BB:
      s = resolvent_sum(z, N, [&](int i1, int i2, cplx) { return p1[i1] * p2[i2]; }, resonant);
      s *= z;
      break;
    case Pair::AB:
      s = resolvent_sum(z, N, [&](int i1, int i2, cplx f) { return std::conj(f) * p1[i1] * p2[i2]; }, resonant);
      break;
    case Pair::BA:
      s = resolvent_sum(z, N, [&](int i1, int i2, cplx f) { return f * p1[i1] * p2[i2]; }, resonant);
      break;
  }
  if (resonant) resonance("sigma12_finite", z);
  return {z, g * g / (double(N) * N) * s, Sheet::I, Source::finite_sum, N};
}

CollectiveSums collective_sums(double z, double g, const BathModel& model, const CollectiveIndex& idx) {
  const int N = model.N();
  if (z == 0.0) require_no_dirac(model, "collective_sums");
  GridTables tab(N);
  const auto p1 = lattice::phase_table(N, idx.n12[0]);
  const auto p2 = lattice::phase_table(N, idx.n12[1]);
  const double z2 = z * z;
  const bool same = idx.beta == Pair::AA || idx.beta == Pair::BB;
  const double conj_sign = idx.beta == Pair::BA ? -1.0 : 1.0;
  bool hit = false;
  auto out = gridsum::reduce<4>(N, [&](int i1, gridsum::RowAccumulator<4>& acc) {
    const cplx e1 = tab.e[i1], ph1 = p1[i1];
    for (int i2 = 0; i2 < N; ++i2) {
      const cplx f = 1.0 + e1 + tab.e[i2];
      const double w2 = norm2(f);
      const double d = z2 - w2;
      if (d * d <= 2e-28 * (z2 + w2)) hit = true;
      const cplx ph = ph1 * p2[i2];
      double x;
      if (same)
        x = ph.real();
      else  // Re(conj(f) e^{ikn}) for AB, Re(f e^{ikn}) for BA
        x = f.real() * ph.real() + conj_sign * f.imag() * ph.imag();
      const double r = 1.0 / d;
      acc.add({r, r * r, x * r, x * r * r});
    }
  });
  if (hit) resonance("collective_sums", z);
  const double pref = g * g / (double(N) * N);
  CollectiveSums s;
  s.sigma_e = pref * z * out[0];
  s.dsigma_e = pref * (out[0] - 2.0 * z2 * out[1]);
  if (same) {
    s.sigma_12 = pref * z * out[2];
    s.dsigma_12 = pref * (out[2] - 2.0 * z2 * out[3]);
  } else {
    s.sigma_12 = pref * out[2];
    s.dsigma_12 = pref * (-2.0 * z * out[3]);
  }
  return s;
}

namespace {

double angular_factor(const IVec2& n12, double& mabs) {
  const auto m = lattice::rescaled_separation(n12);
  mabs = std::hypot(m[0], m[1]);
  const double th = 2.0 * pi / 3.0 * (n12[0] - n12[1]);
  return (m[0] * std::cos(th) - m[1] * std::sin(th)) / mabs;
}

}  // namespace

double jab_markov_asymptotic(const IVec2& n12, double g) {
  if (n12[0] == 0 && n12[1] == 0) throw ValidationError("jab_markov_asymptotic: n12 must be nonzero");
  double mabs = 0;
  const double ang = angular_factor(n12, mabs);
  return g * g * sqrt3 / (pi * mabs) * ang;
}

cplx sigma12_ab_asymptotic(cplx z, const IVec2& n12, double g) {
  if (z == 0.0) return jab_markov_asymptotic(n12, g);
  double mabs = 0;
  if (n12[0] == 0 && n12[1] == 0) throw ValidationError("sigma12_ab_asymptotic: n12 must be nonzero");
  const double ang = angular_factor(n12, mabs);
  return I * g * g * z / sqrt3 * specfun::hankel1_1(2.0 * z * mabs / 3.0) * ang;
}

double g_of_n(const BathModel& model) {
  require_no_dirac(model, "g_of_n");
  const int N = model.N();
  GridTables tab(N);
  auto out = gridsum::reduce<1>(N, [&](int i1, gridsum::RowAccumulator<1>& acc) {
    for (int i2 = 0; i2 < N; ++i2) acc.add({1.0 / norm2(tab.f(i1, i2))});
  });
  return out[0] / (double(N) * N);
}

double g_of_n_approx(int N) noexcept { return 0.2 + 2.0 / (pi * sqrt3) * std::log(double(N)); }

GPm g_pm(const BathModel& model, const IVec2& n12, int sign) {
  require_no_dirac(model, "g_pm");
  if (sign != 1 && sign != -1) throw ValidationError("g_pm: sign must be +1 or -1");
  const int N = model.N();
  GridTables tab(N);
  const auto p1 = lattice::phase_table(N, n12[0]);
  const auto p2 = lattice::phase_table(N, n12[1]);
  auto out = gridsum::reduce<2>(N, [&](int i1, gridsum::RowAccumulator<2>& acc) {
    for (int i2 = 0; i2 < N; ++i2) {
      const double r = 1.0 / norm2(tab.f(i1, i2));
      const cplx ph = p1[i1] * p2[i2];
      acc.add({(1.0 + sign * ph.real()) * r, sign * ph.imag() * r});
    }
  });
  const double n2 = double(N) * N;
  return {out[0] / n2, out[1] / n2};
}

double residue_r0(double g, const BathModel& model) { return 1.0 / (1.0 + g * g * g_of_n(model)); }

double residue_subradiant_aa(int n, double g) {
  if (n < 1) throw ValidationError("residue_subradiant_aa: n must be >= 1");
  return 1.0 / (1.0 + g * g * (0.6 + 2.0 / (sqrt3 * pi) * std::log(double(n))));
}

}  // namespace diracbath::selfenergy
