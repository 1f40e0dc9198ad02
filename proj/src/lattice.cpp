// lattice.cpp: honeycomb bath geometry
#include "diracbath/lattice.hpp"

#include <cmath>
#include <string>

namespace diracbath::lattice {

BathModel::BathModel(int N, double J) : N_(N), J_(J) {
  if (N < 2) throw ValidationError("BathModel: N must be >= 2, got " + std::to_string(N));
  if (!(J > 0.0) || !std::isfinite(J)) throw ValidationError("BathModel: J must be positive");
}

MomentumGrid momentum_grid(const BathModel& model) {
  const int N = model.N();
  MomentumGrid grid;
  grid.N = N;
  grid.points.reserve(model.num_k());
  for (int i1 = 0; i1 < N; ++i1)
    for (int i2 = 0; i2 < N; ++i2)
      grid.points.push_back({grid_momentum(N, i1), grid_momentum(N, i2)});
  return grid;
}

bool contains_dirac_point(const MomentumGrid& grid) {
  for (const auto& k : grid.points)
    if (std::abs(dispersion(k)) < 1e-12) return true;
  return false;
}

const DiracData& dirac_data() {
  static const DiracData data = [] {
    const double t = 2.0 * pi / 3.0;
    const cplx ep = std::polar(1.0, t), em = std::polar(1.0, -t);
    DiracData d;
    d.K_plus = {t, -t};
    d.K_minus = {-t, t};
    d.h_plus = {I * ep, I * em};
    d.h_minus = {I * em, I * ep};
    d.hp_plus = {-1.0, I};
    d.hp_minus = {-1.0, -I};
    return d;
  }();
  return data;
}

cplx dispersion(const Vec2& k) noexcept {
  return 1.0 + std::polar(1.0, k[0]) + std::polar(1.0, k[1]);
}

cplx f_k(const BathModel& model, const Vec2& k) noexcept { return model.J() * dispersion(k); }

cplx linearized_f(const BathModel& model, const Vec2& dq, Valley which) noexcept {
  const auto& h = which == Valley::plus ? dirac_data().h_plus : dirac_data().h_minus;
  return model.J() * (h[0] * dq[0] + h[1] * dq[1]);
}

Vec2 rescaled_separation(const IVec2& n12) noexcept {
  return {1.5 * (n12[0] + n12[1]), sqrt3 / 2 * (n12[0] - n12[1])};
}

std::vector<cplx> phase_table(int N, int s) {
  std::vector<cplx> tab(N);
  for (int i = 0; i < N; ++i) {
    // exact integer reduction keeps large s well conditioned
    long long m = (long long)grid_offset(N, i) * s % N;
    tab[i] = std::polar(1.0, 2.0 * pi * double(m) / N);
  }
  return tab;
}

}  // namespace diracbath::lattice
