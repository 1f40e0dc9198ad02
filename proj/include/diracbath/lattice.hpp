// lattice.hpp: honeycomb bath geometry, dispersion and momentum grids
#pragma once

#include <array>
#include <vector>

#include "diracbath/common.hpp"

namespace diracbath::lattice {

using Vec2 = std::array<double, 2>;
using IVec2 = std::array<int, 2>;

inline constexpr Vec2 a1{1.5, sqrt3 / 2};
inline constexpr Vec2 a2{1.5, -sqrt3 / 2};
inline constexpr Vec2 b1{1.0 / 3.0, 1.0 / sqrt3};
inline constexpr Vec2 b2{1.0 / 3.0, -1.0 / sqrt3};

// Lattice of N x N unit cells with two sublattices and hopping J.
// Energies are kept in units of J internally; J only rescales input and output.
class BathModel {
 public:
  explicit BathModel(int N, double J = 1.0);

  int N() const noexcept { return N_; }
  double J() const noexcept { return J_; }
  std::size_t num_k() const noexcept { return std::size_t(N_) * std::size_t(N_); }
  bool contains_dirac_point() const noexcept { return N_ % 3 == 0; }

 private:
  int N_;
  double J_;
};

// Integer offset of grid index i, in [-floor(N/2), N - floor(N/2)).
inline int grid_offset(int N, int i) noexcept { return i - N / 2; }
inline double grid_momentum(int N, int i) noexcept {
  return 2.0 * pi * grid_offset(N, i) / N;
}

struct MomentumGrid {
  int N = 0;
  std::vector<Vec2> points;  // row-major over (m1, m2)
};

MomentumGrid momentum_grid(const BathModel& model);

// Scan for a grid point with |f(k)| < 1e-12.
bool contains_dirac_point(const MomentumGrid& grid);

enum class Valley { plus, minus };

struct DiracData {
  Vec2 K_plus, K_minus;
  std::array<cplx, 2> h_plus, h_minus;
  std::array<cplx, 2> hp_plus, hp_minus;  // isotropic coordinates (-1, +-i)
};

const DiracData& dirac_data();

// 1 + e^{ik1} + e^{ik2}, in units of J.
cplx dispersion(const Vec2& k) noexcept;

cplx f_k(const BathModel& model, const Vec2& k) noexcept;
cplx linearized_f(const BathModel& model, const Vec2& dq, Valley which) noexcept;

// ((3/2)(n1+n2), (sqrt3/2)(n1-n2))
Vec2 rescaled_separation(const IVec2& n12) noexcept;

// e^{i k_i s} for every grid index i.
std::vector<cplx> phase_table(int N, int s);

}  // namespace diracbath::lattice
