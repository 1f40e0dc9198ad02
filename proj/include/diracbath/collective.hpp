// collective.hpp: two-emitter poles and residues, Markov populations and the many-emitter coupling matrix
#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "diracbath/selfenergy.hpp"

namespace diracbath::collective {

using lattice::BathModel;
using lattice::IVec2;
using selfenergy::Pair;

struct CollectivePoleResult {
  cplx z_plus, z_minus;
  cplx r_plus, r_minus;
  IVec2 n12{0, 0};
  Pair beta = Pair::AB;
  int N = 0;
  int iterations = 0;
  std::string note;
};

// Roots of z = Sigma_e(z) +- Sigma_12(z; n12) from finite-N sums at delta = 0.
// plus_only skips the second Newton solve and sets z_- = -z_+, r_- = r_+ (exact for AB and BA).
CollectivePoleResult solve_collective_pole(const BathModel& model, const IVec2& n12, Pair beta, double g,
                                           bool plus_only = false);

// Thermodynamic limit: the exchange pole collapses onto z = 0 with vanishing weight.
CollectivePoleResult continuum_collective_pole(const IVec2& n12, Pair beta);

std::pair<cplx, cplx> residues_pm(const BathModel& model, const IVec2& n12, Pair beta, double g,
                                  std::pair<double, double> z_pm);

struct MarkovPopulations {
  std::vector<double> p1, p2;
};

MarkovPopulations markov_populations(const std::vector<double>& t, double j_plus, double j_minus, double gamma_plus,
                                     double gamma_minus);

// Couplings J_AB(n_A - m_B; N) between every A and B emitter; rows and columns list A emitters first.
// fast uses R_0 Sigma_12(0); unset selects it above 50 pairs.
Eigen::MatrixXd effective_coupling_matrix(const BathModel& model, const std::vector<IVec2>& positions_a,
                                          const std::vector<IVec2>& positions_b, double g,
                                          std::optional<bool> fast = std::nullopt);

}  // namespace diracbath::collective
