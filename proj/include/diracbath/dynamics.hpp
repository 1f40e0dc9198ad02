// dynamics.hpp: single-excitation propagation on finite lattices, population maps and losses
#pragma once

#include <vector>

#include "diracbath/lattice.hpp"

namespace diracbath::dynamics {

using lattice::BathModel;
using lattice::IVec2;

enum class Sublattice { A, B };

struct EmitterSpec {
  IVec2 site{0, 0};
  Sublattice sublattice = Sublattice::A;
  double delta = 0.0;  // units of J
  double g = 0.0;      // units of J
};

// Emitter at the lattice centre (N/2, N/2).
EmitterSpec centred_emitter(const BathModel& model, double delta, double g, Sublattice s = Sublattice::A);

struct SingleExcitationState {
  std::vector<cplx> emitter_amps;
  std::vector<cplx> bath_amps_k;  // N^2 A-band amplitudes followed by N^2 B-band amplitudes
  double time = 0.0;

  double norm2() const;
};

// Excitation in the emitters with the given amplitudes, bath in vacuum.
SingleExcitationState initial_state(const BathModel& model, const std::vector<cplx>& emitter_amps);

// Matrix-free H acting on the flat vector [emitters | A band | B band].
class HamiltonianAction {
 public:
  HamiltonianAction(const BathModel& model, std::vector<EmitterSpec> emitters);

  const BathModel& model() const noexcept { return model_; }
  const std::vector<EmitterSpec>& emitters() const noexcept { return emitters_; }
  std::size_t dim() const noexcept { return dim_; }
  std::size_t num_emitters() const noexcept { return emitters_.size(); }

  void apply(const cplx* in, cplx* out) const;
  std::vector<cplx> apply(const std::vector<cplx>& in) const;

  // Upper bound on the spectral radius of H.
  double spectral_bound() const noexcept { return bound_; }

 private:
  BathModel model_;
  std::vector<EmitterSpec> emitters_;
  std::size_t nk_ = 0, dim_ = 0;
  std::vector<cplx> f_;                    // f(k) per grid point
  std::vector<std::vector<cplx>> phase_;   // e^{ik.n_j}/N per emitter
  double bound_ = 0.0;
};

HamiltonianAction build_hamiltonian_action(const BathModel& model, const std::vector<EmitterSpec>& emitters);

std::vector<cplx> flatten(const SingleExcitationState& s);
SingleExcitationState unflatten(const std::vector<cplx>& v, std::size_t num_emitters, double time);

double energy(const HamiltonianAction& h, const SingleExcitationState& s);

enum class Integrator { chebyshev, rk4 };

struct PopulationMap {
  int N = 0;
  std::vector<double> A, B;  // row-major over (n1, n2)
  double total() const;
};

struct Snapshot {
  double time = 0.0;
  PopulationMap map;
};

struct EvolveOptions {
  Integrator integrator = Integrator::chebyshev;
  std::vector<double> snapshot_times;  // must also appear in the record grid
};

struct Trajectory {
  std::vector<double> t;
  std::vector<std::vector<cplx>> amps;  // amps[i][j]: emitter j at t[i]
  std::vector<Snapshot> snapshots;
  double max_norm_drift = 0.0;
};

// Propagates `state` in place through the record times, all >= state.time and increasing.
Trajectory evolve(SingleExcitationState& state, const HamiltonianAction& h, const std::vector<double>& records,
                  const EvolveOptions& opts = {});

// Emitter amplitudes <e_j| e^{-iHt} |psi0> for an emitter-only initial state, by a Chebyshev
// moment series; one H application per moment (half as many for a single emitter).
std::vector<std::vector<cplx>> emitter_series(const HamiltonianAction& h, const std::vector<cplx>& initial,
                                              const std::vector<double>& t);

// C_e(t) for one emitter starting excited.
std::vector<cplx> single_emitter_ce(const BathModel& model, const EmitterSpec& e, const std::vector<double>& t);

PopulationMap bath_population_map(const SingleExcitationState& state, const BathModel& model);

// Populations within `radius` (lattice units) of the A site of cell `centre`, minimum-image distances.
struct SublatticeTotals {
  double A = 0.0, B = 0.0;
};
SublatticeTotals population_near(const PopulationMap& map, const IVec2& centre, double radius);

// Max over min of the population in `bins` equal angular sectors of the annulus rmin <= r < rmax.
double anisotropy_ratio(const PopulationMap& map, const IVec2& centre, double rmin, double rmax, int bins);

struct TwoEmitterSeries {
  std::vector<double> t;
  std::vector<cplx> c1, c2;
};

TwoEmitterSeries evolve_two_emitters(const BathModel& model, const EmitterSpec& e1, const EmitterSpec& e2,
                                     const std::vector<double>& t, cplx c1_0 = 1.0, cplx c2_0 = 0.0);

struct LossWeighted {
  std::vector<double> t;
  std::vector<std::vector<double>> emitter;  // e^{-gamma t}|C_j|^2
  std::vector<double> bath;                  // e^{-gamma t}(1 - sum_j |C_j|^2)
  std::vector<double> ground;                // 1 - e^{-gamma t}
  double trace(std::size_t i) const;
};

LossWeighted apply_losses(const std::vector<double>& t, const std::vector<std::vector<cplx>>& amps,
                          double gamma_loss);

}  // namespace diracbath::dynamics
