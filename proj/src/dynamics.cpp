// dynamics.cpp: Chebyshev and RK4 propagation in the momentum basis
#include "diracbath/dynamics.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <numeric>

#include "diracbath/specfun.hpp"

namespace diracbath::dynamics {

EmitterSpec centred_emitter(const BathModel& model, double delta, double g, Sublattice s) {
  return {{model.N() / 2, model.N() / 2}, s, delta, g};
}

double SingleExcitationState::norm2() const {
  double s = 0.0;
  for (const cplx& c : emitter_amps) s += std::norm(c);
  for (const cplx& c : bath_amps_k) s += std::norm(c);
  return s;
}

SingleExcitationState initial_state(const BathModel& model, const std::vector<cplx>& emitter_amps) {
  SingleExcitationState s;
  s.emitter_amps = emitter_amps;
  s.bath_amps_k.assign(2 * model.num_k(), 0.0);
  return s;
}

HamiltonianAction::HamiltonianAction(const BathModel& model, std::vector<EmitterSpec> emitters)
    : model_(model), emitters_(std::move(emitters)) {
  if (emitters_.empty()) throw ValidationError("hamiltonian: at least one emitter required");
  const int N = model_.N();
  for (std::size_t j = 0; j < emitters_.size(); ++j) {
    const auto& e = emitters_[j];
    if (e.site[0] < 0 || e.site[0] >= N || e.site[1] < 0 || e.site[1] >= N)
      throw ValidationError("hamiltonian: emitter site outside [0, N)");
    if (!std::isfinite(e.delta) || !std::isfinite(e.g)) throw ValidationError("hamiltonian: non-finite parameter");
    for (std::size_t i = 0; i < j; ++i)
      if (emitters_[i].site == e.site && emitters_[i].sublattice == e.sublattice)
        throw ValidationError("hamiltonian: two emitters on the same site and sublattice");
  }
  nk_ = model_.num_k();
  dim_ = emitters_.size() + 2 * nk_;
  f_.resize(nk_);
  const auto e1 = lattice::phase_table(N, 1);
  for (int i1 = 0; i1 < N; ++i1)
    for (int i2 = 0; i2 < N; ++i2) f_[std::size_t(i1) * N + i2] = 1.0 + e1[i1] + e1[i2];
  double dmax = 0.0, g2 = 0.0;
  for (const auto& e : emitters_) {
    const auto p1 = lattice::phase_table(N, e.site[0]), p2 = lattice::phase_table(N, e.site[1]);
    std::vector<cplx> ph(nk_);
    for (int i1 = 0; i1 < N; ++i1)
      for (int i2 = 0; i2 < N; ++i2) ph[std::size_t(i1) * N + i2] = p1[i1] * p2[i2] / double(N);
    phase_.push_back(std::move(ph));
    dmax = std::max(dmax, std::abs(e.delta));
    g2 += e.g * e.g;
  }
  bound_ = 1.01 * (3.0 + dmax + std::sqrt(g2));
}

void HamiltonianAction::apply(const cplx* in, cplx* out) const {
  const std::size_t ne = emitters_.size();
  const cplx* a = in + ne;
  const cplx* b = a + nk_;
  cplx* oa = out + ne;
  cplx* ob = oa + nk_;
  for (std::size_t k = 0; k < nk_; ++k) {
    oa[k] = f_[k] * b[k];
    ob[k] = std::conj(f_[k]) * a[k];
  }
  for (std::size_t j = 0; j < ne; ++j) {
    const auto& e = emitters_[j];
    const cplx* band = e.sublattice == Sublattice::A ? a : b;
    cplx* oband = e.sublattice == Sublattice::A ? oa : ob;
    const cplx* ph = phase_[j].data();
    const cplx cj = e.g * in[j];
    cplx acc = 0.0;
    for (std::size_t k = 0; k < nk_; ++k) {
      acc += std::conj(ph[k]) * band[k];
      oband[k] += ph[k] * cj;
    }
    out[j] = e.delta * in[j] + e.g * acc;
  }
}

std::vector<cplx> HamiltonianAction::apply(const std::vector<cplx>& in) const {
  if (in.size() != dim_) throw ValidationError("hamiltonian: vector has the wrong dimension");
  std::vector<cplx> out(dim_);
  apply(in.data(), out.data());
  return out;
}

HamiltonianAction build_hamiltonian_action(const BathModel& model, const std::vector<EmitterSpec>& emitters) {
  return HamiltonianAction(model, emitters);
}

std::vector<cplx> flatten(const SingleExcitationState& s) {
  std::vector<cplx> v(s.emitter_amps);
  v.insert(v.end(), s.bath_amps_k.begin(), s.bath_amps_k.end());
  return v;
}

SingleExcitationState unflatten(const std::vector<cplx>& v, std::size_t num_emitters, double time) {
  SingleExcitationState s;
  s.emitter_amps.assign(v.begin(), v.begin() + std::ptrdiff_t(num_emitters));
  s.bath_amps_k.assign(v.begin() + std::ptrdiff_t(num_emitters), v.end());
  s.time = time;
  return s;
}

double energy(const HamiltonianAction& h, const SingleExcitationState& s) {
  const auto v = flatten(s);
  const auto hv = h.apply(v);
  cplx e = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) e += std::conj(v[i]) * hv[i];
  return e.real();
}

namespace {

std::size_t chebyshev_terms(double x) { return std::size_t(x + 10.0 * std::cbrt(x) + 30.0); }

// psi <- exp(-i H tau) psi, tau small enough that r tau stays moderate.
void chebyshev_step(const HamiltonianAction& h, std::vector<cplx>& psi, double tau) {
  const double r = h.spectral_bound();
  const std::size_t M = chebyshev_terms(r * tau);
  const auto J = specfun::bessel_j_sequence(r * tau, int(M));
  const std::size_t n = psi.size();
  std::vector<cplx> prev = psi, cur(n), next(n), acc(n);
  h.apply(prev.data(), cur.data());
  for (auto& c : cur) c /= r;
  for (std::size_t i = 0; i < n; ++i) acc[i] = J[0] * prev[i] + 2.0 * (-I) * J[1] * cur[i];
  cplx phase = -I;
  for (std::size_t m = 2; m <= M; ++m) {
    h.apply(cur.data(), next.data());
    for (std::size_t i = 0; i < n; ++i) next[i] = 2.0 * next[i] / r - prev[i];
    phase *= -I;
    const cplx c = 2.0 * phase * J[m];
    for (std::size_t i = 0; i < n; ++i) acc[i] += c * next[i];
    std::swap(prev, cur);
    std::swap(cur, next);
  }
  psi.swap(acc);
}

void rk4_step(const HamiltonianAction& h, std::vector<cplx>& psi, double dt, std::vector<cplx> (&w)[5]) {
  const std::size_t n = psi.size();
  auto deriv = [&](const std::vector<cplx>& in, std::vector<cplx>& out) {
    h.apply(in.data(), out.data());
    for (auto& c : out) c *= -I;
  };
  auto& [k1, k2, k3, k4, tmp] = w;
  deriv(psi, k1);
  for (std::size_t i = 0; i < n; ++i) tmp[i] = psi[i] + 0.5 * dt * k1[i];
  deriv(tmp, k2);
  for (std::size_t i = 0; i < n; ++i) tmp[i] = psi[i] + 0.5 * dt * k2[i];
  deriv(tmp, k3);
  for (std::size_t i = 0; i < n; ++i) tmp[i] = psi[i] + dt * k3[i];
  deriv(tmp, k4);
  for (std::size_t i = 0; i < n; ++i) psi[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
}

double norm2(const std::vector<cplx>& v) {
  double s = 0.0;
  for (const cplx& c : v) s += std::norm(c);
  return s;
}

}  // namespace

Trajectory evolve(SingleExcitationState& state, const HamiltonianAction& h, const std::vector<double>& records,
                  const EvolveOptions& opts) {
  const std::size_t ne = h.num_emitters();
  if (state.emitter_amps.size() != ne || state.bath_amps_k.size() != 2 * h.model().num_k())
    throw ValidationError("evolve: state does not match the Hamiltonian");
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (!(records[i] >= state.time)) throw ValidationError("evolve: record time earlier than the state time");
    if (i > 0 && !(records[i] > records[i - 1])) throw ValidationError("evolve: record times must increase");
  }
  Trajectory tr;
  std::vector<cplx> psi = flatten(state);
  const double n0 = norm2(psi);
  const double r = h.spectral_bound();
  std::vector<cplx> work[5];
  if (opts.integrator == Integrator::rk4)
    for (auto& w : work) w.resize(psi.size());
  double t = state.time;
  for (double target : records) {
    const double span = target - t;
    if (span > 0) {
      if (opts.integrator == Integrator::chebyshev) {
        const int pieces = std::max(1, int(std::ceil(r * span / 200.0)));
        for (int p = 0; p < pieces; ++p) chebyshev_step(h, psi, span / pieces);
      } else {
        const int steps = std::max(1, int(std::ceil(span * r / 0.05)));
        for (int s = 0; s < steps; ++s) {
          rk4_step(h, psi, span / steps, work);
          if (s % 100 == 99 && std::abs(norm2(psi) - n0) > 1e-6)
            throw NumericalFailure("evolve: norm drift above 1e-6");
        }
      }
      t = target;
    }
    const double drift = std::abs(norm2(psi) - n0);
    tr.max_norm_drift = std::max(tr.max_norm_drift, drift);
    if (drift > 1e-6) throw NumericalFailure("evolve: norm drift above 1e-6");
    tr.t.push_back(t);
    tr.amps.emplace_back(psi.begin(), psi.begin() + std::ptrdiff_t(ne));
    for (double ts : opts.snapshot_times)
      if (std::abs(ts - t) <= 1e-12 * std::max(1.0, std::abs(t)))
        tr.snapshots.push_back({t, bath_population_map(unflatten(psi, ne, t), h.model())});
  }
  state = unflatten(psi, ne, t);
  return tr;
}

std::vector<std::vector<cplx>> emitter_series(const HamiltonianAction& h, const std::vector<cplx>& initial,
                                              const std::vector<double>& t) {
  const std::size_t ne = h.num_emitters();
  if (initial.size() != ne) throw ValidationError("emitter_series: one initial amplitude per emitter required");
  for (double ti : t)
    if (!(ti >= 0.0)) throw ValidationError("emitter_series: times must be >= 0");
  const double r = h.spectral_bound();
  const double tmax = t.empty() ? 0.0 : *std::max_element(t.begin(), t.end());
  const std::size_t M = chebyshev_terms(r * tmax);
  const std::size_t dim = h.dim();

  // mu[n][j] = <e_j| T_n(H/r) |psi0>
  std::vector<std::vector<cplx>> mu(M + 1, std::vector<cplx>(ne));
  std::vector<cplx> prev(dim, 0.0), cur(dim), next(dim);
  std::copy(initial.begin(), initial.end(), prev.begin());
  const bool doubling = ne == 1 && initial[0] != 0.0;
  const std::size_t steps = doubling ? M / 2 + 1 : M;
  h.apply(prev.data(), cur.data());
  for (auto& c : cur) c /= r;
  auto dot = [&](const std::vector<cplx>& x, const std::vector<cplx>& y) {
    cplx s = 0.0;
    for (std::size_t i = 0; i < dim; ++i) s += std::conj(x[i]) * y[i];
    return s;
  };
  if (doubling) {
    // T_{2n} = 2 T_n^2 - 1 and T_{2n+1} = 2 T_{n+1} T_n - T_1
    const cplx a = initial[0];
    const double n0 = std::norm(a);
    const cplx nu1 = cur[0] / a;
    mu[0][0] = 1.0;
    if (M >= 1) mu[1][0] = nu1;
    for (std::size_t n = 1; n <= steps; ++n) {
      // prev = v_{n-1}, cur = v_n
      if (2 * n <= M) mu[2 * n][0] = 2.0 * dot(cur, cur) / n0 - 1.0;
      if (2 * n - 1 <= M && n >= 2) mu[2 * n - 1][0] = 2.0 * dot(cur, prev) / n0 - nu1;
      h.apply(cur.data(), next.data());
      for (std::size_t i = 0; i < dim; ++i) next[i] = 2.0 * next[i] / r - prev[i];
      std::swap(prev, cur);
      std::swap(cur, next);
    }
    for (auto& m : mu) m[0] *= a;
  } else {
    for (std::size_t j = 0; j < ne; ++j) mu[0][j] = prev[j];
    if (M >= 1)
      for (std::size_t j = 0; j < ne; ++j) mu[1][j] = cur[j];
    for (std::size_t n = 2; n <= M; ++n) {
      h.apply(cur.data(), next.data());
      for (std::size_t i = 0; i < dim; ++i) next[i] = 2.0 * next[i] / r - prev[i];
      for (std::size_t j = 0; j < ne; ++j) mu[n][j] = next[j];
      std::swap(prev, cur);
      std::swap(cur, next);
    }
  }

  std::vector<std::vector<cplx>> out(t.size(), std::vector<cplx>(ne));
  for (std::size_t i = 0; i < t.size(); ++i) {
    const std::size_t m = std::min(M, chebyshev_terms(r * t[i]));
    const auto J = specfun::bessel_j_sequence(r * t[i], int(m));
    std::vector<cplx> c(ne, 0.0);
    cplx phase = 1.0;
    for (std::size_t n = 0; n <= m; ++n) {
      const cplx w = (n == 0 ? 1.0 : 2.0) * phase * J[n];
      for (std::size_t j = 0; j < ne; ++j) c[j] += w * mu[n][j];
      phase *= -I;
    }
    double s = 0.0;
    for (const cplx& v : c) s += std::norm(v);
    if (s > 1.0 + 1e-6) throw NumericalFailure("emitter_series: emitter population exceeds 1");
    out[i] = c;
  }
  return out;
}

std::vector<cplx> single_emitter_ce(const BathModel& model, const EmitterSpec& e, const std::vector<double>& t) {
  const HamiltonianAction h(model, {e});
  const auto s = emitter_series(h, {1.0}, t);
  std::vector<cplx> out(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) out[i] = s[i][0];
  return out;
}

double PopulationMap::total() const {
  return std::accumulate(A.begin(), A.end(), 0.0) + std::accumulate(B.begin(), B.end(), 0.0);
}

namespace {
std::mutex fftw_planner;
}

PopulationMap bath_population_map(const SingleExcitationState& state, const BathModel& model) {
  const int N = model.N();
  const std::size_t nk = model.num_k();
  if (state.bath_amps_k.size() != 2 * nk) throw ValidationError("bath_population_map: state does not match model");
  PopulationMap map;
  map.N = N;
  map.A.resize(nk);
  map.B.resize(nk);
  auto* buf = reinterpret_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * nk));
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(fftw_planner);
    plan = fftw_plan_dft_2d(N, N, buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
  }
  const double scale = 1.0 / (double(N) * double(N));
  for (int band = 0; band < 2; ++band) {
    const cplx* src = state.bath_amps_k.data() + band * nk;
    for (std::size_t k = 0; k < nk; ++k) {
      buf[k][0] = src[k].real();
      buf[k][1] = src[k].imag();
    }
    fftw_execute(plan);
    auto& dst = band == 0 ? map.A : map.B;
    for (std::size_t k = 0; k < nk; ++k) dst[k] = (buf[k][0] * buf[k][0] + buf[k][1] * buf[k][1]) * scale;
  }
  {
    std::lock_guard<std::mutex> lock(fftw_planner);
    fftw_destroy_plan(plan);
  }
  fftw_free(buf);
  return map;
}

namespace {

// Physical offset of site (cell + sublattice shift) from the A site of `centre`, minimum image.
lattice::Vec2 offset(int N, const IVec2& centre, int n1, int n2, bool b_site) {
  auto wrap = [N](int d) {
    d %= N;
    if (d < -N / 2) d += N;
    if (d >= N - N / 2) d -= N;
    return d;
  };
  const int d1 = wrap(n1 - centre[0]), d2 = wrap(n2 - centre[1]);
  lattice::Vec2 r{d1 * lattice::a1[0] + d2 * lattice::a2[0], d1 * lattice::a1[1] + d2 * lattice::a2[1]};
  if (b_site) r[0] += 1.0;
  return r;
}

template <class F>
void for_each_site(const PopulationMap& map, const IVec2& centre, F&& f) {
  const int N = map.N;
  for (int n1 = 0; n1 < N; ++n1)
    for (int n2 = 0; n2 < N; ++n2) {
      const std::size_t i = std::size_t(n1) * N + n2;
      f(offset(N, centre, n1, n2, false), map.A[i], false);
      f(offset(N, centre, n1, n2, true), map.B[i], true);
    }
}

}  // namespace

SublatticeTotals population_near(const PopulationMap& map, const IVec2& centre, double radius) {
  SublatticeTotals out;
  for_each_site(map, centre, [&](const lattice::Vec2& r, double p, bool b) {
    if (std::hypot(r[0], r[1]) <= radius) (b ? out.B : out.A) += p;
  });
  return out;
}

double anisotropy_ratio(const PopulationMap& map, const IVec2& centre, double rmin, double rmax, int bins) {
  if (bins < 2 || !(rmax > rmin)) throw ValidationError("anisotropy_ratio: need bins >= 2 and rmax > rmin");
  std::vector<double> sector(std::size_t(bins), 0.0);
  for_each_site(map, centre, [&](const lattice::Vec2& r, double p, bool) {
    const double d = std::hypot(r[0], r[1]);
    if (d < rmin || d >= rmax) return;
    const double th = std::atan2(r[1], r[0]) + pi;
    const int k = std::min(bins - 1, int(th / (2.0 * pi) * bins));
    sector[std::size_t(k)] += p;
  });
  const auto [lo, hi] = std::minmax_element(sector.begin(), sector.end());
  return *lo > 0.0 ? *hi / *lo : std::numeric_limits<double>::infinity();
}

TwoEmitterSeries evolve_two_emitters(const BathModel& model, const EmitterSpec& e1, const EmitterSpec& e2,
                                     const std::vector<double>& t, cplx c1_0, cplx c2_0) {
  if (e1.site == e2.site && e1.sublattice == e2.sublattice)
    throw ValidationError("evolve_two_emitters: emitters must occupy distinct sites");
  const HamiltonianAction h(model, {e1, e2});
  const auto s = emitter_series(h, {c1_0, c2_0}, t);
  TwoEmitterSeries out;
  out.t = t;
  for (const auto& v : s) {
    out.c1.push_back(v[0]);
    out.c2.push_back(v[1]);
  }
  return out;
}

double LossWeighted::trace(std::size_t i) const {
  double s = bath[i] + ground[i];
  for (const auto& e : emitter) s += e[i];
  return s;
}

LossWeighted apply_losses(const std::vector<double>& t, const std::vector<std::vector<cplx>>& amps,
                          double gamma_loss) {
  if (!(gamma_loss >= 0.0)) throw ValidationError("apply_losses: gamma_loss must be >= 0");
  if (amps.size() != t.size()) throw ValidationError("apply_losses: series length mismatch");
  LossWeighted out;
  out.t = t;
  const std::size_t ne = amps.empty() ? 0 : amps[0].size();
  out.emitter.assign(ne, std::vector<double>(t.size()));
  out.bath.resize(t.size());
  out.ground.resize(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double w = std::exp(-gamma_loss * t[i]);
    double pe = 0.0;
    for (std::size_t j = 0; j < ne; ++j) {
      const double p = std::norm(amps[i][j]);
      out.emitter[j][i] = w * p;
      pe += p;
    }
    out.bath[i] = w * std::max(0.0, 1.0 - pe);
    out.ground[i] = 1.0 - w;
  }
  return out;
}

}  // namespace diracbath::dynamics
