// collective.cpp: exchange poles J_AB(n12; N) and related two-emitter quantities
#include "diracbath/collective.hpp"

#include <cmath>
#include <cstdio>

namespace diracbath::collective {

namespace {

void require_offgrid(const BathModel& model, const char* who) {
  if (model.contains_dirac_point())
    throw ValidationError(std::string(who) + ": N divisible by 3 puts the Dirac points on the grid");
}

selfenergy::CollectiveIndex index(const IVec2& n12, Pair beta) { return {beta, n12}; }

// Real root of z - Sigma_e(z) - s Sigma_12(z) inside the gap around z = 0.
double newton_real(const BathModel& model, const IVec2& n12, Pair beta, double g, int s, double seed, int& iters) {
  const auto idx = index(n12, beta);
  double z = seed;
  for (int it = 1; it <= 100; ++it) {
    const auto c = selfenergy::collective_sums(z, g, model, idx);
    const double F = z - c.sigma_e - s * c.sigma_12;
    const double dF = 1.0 - c.dsigma_e - s * c.dsigma_12;
    if (!(dF != 0.0) || !std::isfinite(dF)) break;
    const double step = -F / dF;
    double zn = z + step;
    // stay on the branch between the innermost bath levels
    if (std::abs(zn) > 2.0 * std::abs(z) + 1e-3) zn = z + std::copysign(std::abs(z) + 1e-3, step);
    z = zn;
    iters += 1;
    if (std::abs(step) <= 1e-15 * std::max(std::abs(z), 1e-300) || F == 0.0) return z;
  }
  char buf[128];
  std::snprintf(buf, sizeof buf, "solve_collective_pole: Newton did not converge for n12 = (%d, %d)", n12[0], n12[1]);
  throw NumericalFailure(buf);
}

cplx residue_from(double dsigma_e, double dsigma_12, int s) {
  const double d = 1.0 - dsigma_e - s * dsigma_12;
  if (std::abs(d) < 1e-10) throw NumericalFailure("residues_pm: defective pole, |1 - dSigma| < 1e-10");
  return 1.0 / d;
}

}  // namespace

std::pair<cplx, cplx> residues_pm(const BathModel& model, const IVec2& n12, Pair beta, double g,
                                  std::pair<double, double> z_pm) {
  require_offgrid(model, "residues_pm");
  const auto idx = index(n12, beta);
  const auto cp = selfenergy::collective_sums(z_pm.first, g, model, idx);
  const auto cm = z_pm.second == z_pm.first ? cp : selfenergy::collective_sums(z_pm.second, g, model, idx);
  auto check = [](double z, const selfenergy::CollectiveSums& c, int s) {
    if (std::abs(z - c.sigma_e - s * c.sigma_12) > 1e-9 * std::max(1.0, std::abs(z)))
      throw ValidationError("residues_pm: z is not a root of the pole equation");
  };
  check(z_pm.first, cp, +1);
  check(z_pm.second, cm, -1);
  return {residue_from(cp.dsigma_e, cp.dsigma_12, +1), residue_from(cm.dsigma_e, cm.dsigma_12, -1)};
}

CollectivePoleResult solve_collective_pole(const BathModel& model, const IVec2& n12, Pair beta, double g,
                                           bool plus_only) {
  require_offgrid(model, "solve_collective_pole");
  if (!(g >= 0.0)) throw ValidationError("solve_collective_pole: g must be >= 0");
  if (n12[0] == 0 && n12[1] == 0 && (beta == Pair::AA || beta == Pair::BB))
    throw ValidationError("solve_collective_pole: same-sublattice emitters need distinct sites");
  CollectivePoleResult r;
  r.n12 = n12;
  r.beta = beta;
  r.N = model.N();
  if (g == 0.0) {
    r.z_plus = r.z_minus = 0.0;
    r.r_plus = r.r_minus = 1.0;
    return r;
  }
  if (beta == Pair::AA || beta == Pair::BB) {
    // Sigma_e and Sigma_12 are both odd in z, so z = 0 solves both branches
    const auto c = selfenergy::collective_sums(0.0, g, model, index(n12, beta));
    r.z_plus = r.z_minus = 0.0;
    r.r_plus = residue_from(c.dsigma_e, c.dsigma_12, +1);
    r.r_minus = residue_from(c.dsigma_e, c.dsigma_12, -1);
    return r;
  }
  const auto c0 = selfenergy::collective_sums(0.0, g, model, index(n12, beta));
  const double r0 = 1.0 / (1.0 - c0.dsigma_e);
  const double seed = r0 * c0.sigma_12;
  if (seed == 0.0) {
    r.z_plus = r.z_minus = 0.0;
    r.r_plus = residue_from(c0.dsigma_e, c0.dsigma_12, +1);
    r.r_minus = residue_from(c0.dsigma_e, c0.dsigma_12, -1);
    return r;
  }
  const double zp = newton_real(model, n12, beta, g, +1, seed, r.iterations);
  if (plus_only) {
    const auto c = selfenergy::collective_sums(zp, g, model, index(n12, beta));
    r.z_plus = zp;
    r.z_minus = -zp;
    r.r_plus = r.r_minus = residue_from(c.dsigma_e, c.dsigma_12, +1);
    r.note = "minus branch from z -> -z symmetry";
    return r;
  }
  const double zm = newton_real(model, n12, beta, g, -1, -seed, r.iterations);
  r.z_plus = zp;
  r.z_minus = zm;
  const auto [rp, rm] = residues_pm(model, n12, beta, g, {zp, zm});
  r.r_plus = rp;
  r.r_minus = rm;
  return r;
}

CollectivePoleResult continuum_collective_pole(const IVec2& n12, Pair beta) {
  CollectivePoleResult r;
  r.n12 = n12;
  r.beta = beta;
  r.N = 0;
  r.z_plus = r.z_minus = 0.0;
  r.r_plus = r.r_minus = 0.0;
  r.note = "thermodynamic limit";
  return r;
}

MarkovPopulations markov_populations(const std::vector<double>& t, double j_plus, double j_minus, double gamma_plus,
                                     double gamma_minus) {
  MarkovPopulations out;
  out.p1.reserve(t.size());
  out.p2.reserve(t.size());
  for (double ti : t) {
    const double ep = std::exp(-gamma_plus * ti), em = std::exp(-gamma_minus * ti);
    const double cross = 2.0 * std::exp(-0.5 * (gamma_plus + gamma_minus) * ti) * std::cos((j_plus - j_minus) * ti);
    out.p1.push_back(0.25 * (ep + em + cross));
    out.p2.push_back(0.25 * (ep + em - cross));
  }
  return out;
}

Eigen::MatrixXd effective_coupling_matrix(const BathModel& model, const std::vector<IVec2>& positions_a,
                                          const std::vector<IVec2>& positions_b, double g, std::optional<bool> fast) {
  require_offgrid(model, "effective_coupling_matrix");
  const int N = model.N();
  auto valid = [N](const IVec2& p) { return p[0] >= 0 && p[0] < N && p[1] >= 0 && p[1] < N; };
  for (const auto& p : positions_a)
    if (!valid(p)) throw ValidationError("effective_coupling_matrix: position outside [0, N)");
  for (const auto& p : positions_b)
    if (!valid(p)) throw ValidationError("effective_coupling_matrix: position outside [0, N)");
  const std::size_t na = positions_a.size(), nb = positions_b.size();
  const bool use_fast = fast.value_or(na * nb > 50);
  double r0 = 0.0;
  if (use_fast) r0 = selfenergy::residue_r0(g, model);
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(Eigen::Index(na + nb), Eigen::Index(na + nb));
  for (std::size_t i = 0; i < na; ++i)
    for (std::size_t j = 0; j < nb; ++j) {
      const IVec2 n12{positions_a[i][0] - positions_b[j][0], positions_a[i][1] - positions_b[j][1]};
      double v;
      if (use_fast)
        v = r0 * selfenergy::collective_sums(0.0, g, model, index(n12, Pair::AB)).sigma_12;
      else
        v = solve_collective_pole(model, n12, Pair::AB, g).z_plus.real();
      m(Eigen::Index(i), Eigen::Index(na + j)) = v;
      m(Eigen::Index(na + j), Eigen::Index(i)) = v;
    }
  return m;
}

}  // namespace diracbath::collective
