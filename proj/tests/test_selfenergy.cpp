#include "doctest.h"

#include "diracbath/selfenergy.hpp"

using namespace diracbath;
using namespace diracbath::selfenergy;

namespace {

// Plain double loop over the grid, no tables or compensation.
cplx direct_sum(cplx z, double g, int N, Pair beta, IVec2 n) {
  cplx s = 0.0;
  for (int a = 0; a < N; ++a)
    for (int b = 0; b < N; ++b) {
      const double k1 = 2 * pi * (a - N / 2) / N, k2 = 2 * pi * (b - N / 2) / N;
      const cplx f = 1.0 + std::exp(I * k1) + std::exp(I * k2);
      const cplx ph = std::exp(I * (k1 * n[0] + k2 * n[1]));
      cplx D = z;
      if (beta == Pair::AB) D = std::conj(f);
      if (beta == Pair::BA) D = f;
      s += D * ph / (z * z - std::norm(f));
    }
  return g * g * s / double(N * N);
}

double direct_g(int N) {
  double s = 0.0;
  for (int a = 0; a < N; ++a)
    for (int b = 0; b < N; ++b) {
      const cplx f = 1.0 + std::exp(I * (2 * pi * (a - N / 2) / N)) + std::exp(I * (2 * pi * (b - N / 2) / N));
      s += 1.0 / std::norm(f);
    }
  return s / double(N * N);
}

}  // namespace

TEST_CASE("finite self-energy against a direct loop") {
  for (cplx z : {cplx(0.4, 0.3), cplx(-2.2, 0.05), cplx(3.7, 0.0), cplx(1.1, -0.4)}) {
    const cplx ref = direct_sum(z, 0.3, 40, Pair::AA, {0, 0});
    CHECK(std::abs(sigma_e_finite(z, 0.3, BathModel(40)).value - ref) < 1e-13);
  }
  CHECK(sigma_e_finite(0.0, 0.3, BathModel(64)).value == cplx(0.0));
  CHECK_THROWS_AS(sigma_e_finite(0.0, 0.3, BathModel(63)), DomainError);
  // grid eigenvalue |f(0)| = 3
  CHECK_THROWS_AS(sigma_e_finite(3.0, 0.3, BathModel(16)), DomainError);
  const auto v = sigma_e_finite({0.2, 0.1}, 0.3, BathModel(16));
  CHECK(v.source == Source::finite_sum);
  CHECK(v.N == 16);
}

TEST_CASE("collective sums against a direct loop") {
  const BathModel m(32);
  for (Pair b : {Pair::AA, Pair::BB, Pair::AB, Pair::BA})
    for (IVec2 n : {IVec2{0, 0}, IVec2{1, 1}, IVec2{2, -3}})
      for (cplx z : {cplx(0.3, 0.2), cplx(-1.7, 0.01), cplx(4.0, 0.0)}) {
        const cplx ref = direct_sum(z, 0.2, 32, b, n);
        CHECK(std::abs(sigma12_finite(z, 0.2, m, {b, n}).value - ref) < 1e-13);
      }
  // fused real-axis sums and their derivatives
  const BathModel m2(40);
  for (Pair b : {Pair::AA, Pair::AB, Pair::BA}) {
    const CollectiveIndex idx{b, {2, 1}};
    const double z = 0.37, h = 1e-5;
    const auto s = collective_sums(z, 0.2, m2, idx);
    CHECK(s.sigma_e == doctest::Approx(sigma_e_finite(z, 0.2, m2).value.real()).epsilon(1e-12));
    CHECK(s.sigma_12 == doctest::Approx(sigma12_finite(z, 0.2, m2, idx).value.real()).epsilon(1e-12));
    const double d12 = (collective_sums(z + h, 0.2, m2, idx).sigma_12 - collective_sums(z - h, 0.2, m2, idx).sigma_12) / (2 * h);
    const double de = (collective_sums(z + h, 0.2, m2, idx).sigma_e - collective_sums(z - h, 0.2, m2, idx).sigma_e) / (2 * h);
    CHECK(s.dsigma_12 == doctest::Approx(d12).epsilon(1e-6));
    CHECK(s.dsigma_e == doctest::Approx(de).epsilon(1e-6));
  }
}

TEST_CASE("oddness and reflection") {
  const BathModel m(64);
  const double g = 0.7, tol = 1e-10 * g * g;
  for (cplx z : {cplx(0.3, 0.2), cplx(-2.5, 0.7), cplx(1.2, -0.05), cplx(5.0, 0.3)}) {
    CHECK(std::abs(sigma_e_finite(-z, g, m).value + sigma_e_finite(z, g, m).value) <= tol);
    CHECK(std::abs(sigma_e_closed(-z, g, Sheet::I).value + sigma_e_closed(z, g, Sheet::I).value) <= tol);
    CHECK(std::abs(sigma_e_closed(std::conj(z), g, Sheet::I).value - std::conj(sigma_e_closed(z, g, Sheet::I).value)) <= tol);
    CHECK(std::abs(sigma_e_finite(std::conj(z), g, m).value - std::conj(sigma_e_finite(z, g, m).value)) <= tol);
  }
}

TEST_CASE("closed form against large finite sums") {
  const double g = 0.1;
  // finite-size error falls at least like 1/N away from the band
  for (cplx z : {cplx(0.5, 0.1), cplx(-1.0, 0.05), cplx(2.0, -0.3), cplx(3.0, 0.05)}) {
    const cplx c = sigma_e_closed(z, g, Sheet::I).value;
    const double e256 = std::abs(sigma_e_finite(z, g, BathModel(256)).value - c);
    const double e512 = std::abs(sigma_e_finite(z, g, BathModel(512)).value - c);
    CHECK(e512 <= 5e-3 * g * g);
    CHECK(e512 <= 0.5 * e256 + 1e-14);
  }
  // close to the real axis inside the band a larger grid is needed
  const cplx z(2.5, 1e-2);
  CHECK(std::abs(sigma_e_finite(z, g, BathModel(512)).value - sigma_e_closed(z, g, Sheet::I).value) <= 3e-3 * g * g);
  const cplx zb(2.5, 1e-3);
  CHECK(std::abs(sigma_e_finite(zb, g, BathModel(4096)).value - sigma_e_closed(zb, g, Sheet::I).value) <= 3e-3 * g * g);
}

TEST_CASE("closed form rejects non-analytic points") {
  for (double a : anchors) CHECK_THROWS_AS(sigma_e_closed(a, 0.1, Sheet::I), DomainError);
  CHECK_NOTHROW(sigma_e_closed(AnchoredEnergy{1.0, cplx(0.0, 1e-30)}, 0.1, Sheet::I));
  CHECK_NOTHROW(sigma_e_closed(cplx(1.0, 1e-12), 0.1, Sheet::I));
}

TEST_CASE("near-Dirac expansion") {
  CHECK(sigma_e_near_zero(0.0, 0.3).value == cplx(0.0));
  const double g = 0.3;
  const cplx v = sigma_e_near_zero(0.05, g).value;
  CHECK(v.imag() == doctest::Approx(-g * g / sqrt3 * 0.05).epsilon(1e-14));
  CHECK(v.real() == doctest::Approx(g * g / (pi * sqrt3) * 0.05 * std::log(0.05 * 0.05 / 9)).epsilon(1e-14));
  for (double E : {1e-3, 0.02, 0.07}) {
    const cplx p = sigma_e_near_zero(E, g).value, q = sigma_e_near_zero(-E, g).value;
    CHECK(p.real() == doctest::Approx(-q.real()).epsilon(1e-14));
    CHECK(p.imag() == doctest::Approx(q.imag()).epsilon(1e-14));
  }
  CHECK_THROWS_AS(sigma_e_near_zero(0.2, g), ValidationError);
  // agreement with the closed form in its window
  const cplx c = sigma_e_upper(0.01, g);
  CHECK(std::abs(c - sigma_e_near_zero(0.01, g).value) / std::abs(c) < 5e-2);
}

TEST_CASE("boundary values") {
  const double g = 1.0;
  CHECK(gamma_e(3.5, g) == 0.0);
  CHECK(gamma_e(-4.0, g) == 0.0);
  for (double E = -3.4; E < 3.4; E += 0.0137) {
    if (std::abs(std::abs(E) - 1.0) < 1e-9 || std::abs(std::abs(E) - 3.0) < 1e-9 || std::abs(E) < 1e-9) continue;
    const double ge = gamma_e(E, g);
    CHECK(ge >= 0.0);
    if (std::abs(E) > 3.0) CHECK(ge == 0.0);
  }
  // eta independence: moving eta by a factor 2 changes nothing at 1e-6
  for (double E : {-2.2, -0.4, 0.3, 1.7, 2.9}) {
    const AnchoredEnergy a = nearest_anchor(E);
    const double eta = boundary_eta * std::min(1.0, std::abs(a.offset.real()));
    const cplx s1 = sigma_e_closed(AnchoredEnergy{a.anchor, cplx(a.offset.real(), eta)}, g, Sheet::I);
    const cplx s2 = sigma_e_closed(AnchoredEnergy{a.anchor, cplx(a.offset.real(), eta / 2)}, g, Sheet::I);
    CHECK(std::abs(s1 - s2) < 1e-6);
  }
  CHECK_THROWS_AS(sigma_e_upper(1.0, g), DomainError);
}

TEST_CASE("decay rate diverges logarithmically at the van Hove energies") {
  const double g = 0.6;
  for (double side : {1.0, -1.0}) {
    double prev = 0.0;
    for (double d : {1e-1, 1e-2, 1e-4, 1e-8, 1e-16, 1e-30}) {
      const double ge = -2.0 * sigma_e_upper(1.0, side * d, g).imag();
      CHECK(ge > prev);
      prev = ge;
    }
    const double ref = -2.0 * sigma_e_upper(1.0, side * 1e-2, g).imag();
    CHECK(-2.0 * sigma_e_upper(1.0, side * 1e-30, g).imag() > 10.0 * ref);
    // only logarithmic: two decades closer adds a bounded amount
    const double a = -2.0 * sigma_e_upper(1.0, side * 1e-4, g).imag();
    CHECK(a < 2.0 * ref);
  }
}

TEST_CASE("Markov pole") {
  const auto z0 = markov_pole(0.0, 0.3);
  CHECK(z0.z == cplx(0.0));
  CHECK(z0.status == MarkovStatus::marginal);
  for (double g : {0.01, 0.3, 2.0}) CHECK(markov_pole(3.5, g).z.imag() == 0.0);
  CHECK(markov_pole(1.0, 0.3).status == MarkovStatus::divergent);
  CHECK(markov_pole(-1.0, 0.3).status == MarkovStatus::divergent);
  const auto zm = markov_pole(2.5, 0.1);
  CHECK(zm.status == MarkovStatus::regular);
  CHECK(zm.z.real() == doctest::Approx(2.5 + lamb_shift(2.5, 0.1)));
  CHECK(zm.gamma() == doctest::Approx(gamma_e(2.5, 0.1)));
}

TEST_CASE("collective self-energy special cases") {
  const BathModel m(64);
  const cplx z(0.4, 0.2);
  CHECK(std::abs(sigma12_finite(z, 0.2, m, {Pair::AA, {0, 0}}).value - sigma_e_finite(z, 0.2, m).value) < 1e-15);
  for (IVec2 n : {IVec2{1, 1}, IVec2{3, -2}}) {
    CHECK(sigma12_finite(0.0, 0.2, m, {Pair::AA, n}).value == cplx(0.0));
    CHECK(sigma12_finite(0.0, 0.2, m, {Pair::BB, n}).value == cplx(0.0));
  }
  // AB is real at real z; BA(n) is AB(-n)
  for (IVec2 n : {IVec2{1, 1}, IVec2{2, -1}, IVec2{0, 3}})
    for (double x : {0.0, 0.35, 4.0}) {
      const cplx ab = sigma12_finite(x, 0.2, m, {Pair::AB, n}).value;
      const cplx ba = sigma12_finite(x, 0.2, m, {Pair::BA, {-n[0], -n[1]}}).value;
      CHECK(std::abs(ab.imag()) < 1e-15);
      CHECK(std::abs(ab - ba) < 1e-15);
      CHECK(std::abs(ab - std::conj(ba)) < 1e-15);
    }
}

TEST_CASE("exchange coupling at zero energy against its asymptotic form") {
  const double g = 0.1;
  const BathModel m(512);
  const double exact = sigma12_finite(0.0, g, m, {Pair::AB, {1, 1}}).value.real();
  const double asym = jab_markov_asymptotic({1, 1}, g);
  CHECK(asym == doctest::Approx(g * g / (pi * sqrt3)).epsilon(1e-14));
  CHECK(exact > 0.0);
  // n = 1 sits at the edge of validity; the ratio is 3/2
  CHECK(exact / asym == doctest::Approx(1.5).epsilon(2e-3));
  // and tends to one with distance
  double prev = exact / asym;
  for (int n : {3, 6, 12}) {
    const double r = sigma12_finite(0.0, g, BathModel(1024), {Pair::AB, {n, n}}).value.real() / jab_markov_asymptotic({n, n}, g);
    CHECK(std::abs(r - 1.0) < std::abs(prev - 1.0));
    prev = r;
  }
  CHECK(std::abs(prev - 1.0) < 0.1);
}

TEST_CASE("asymptotic exchange coupling") {
  const double g = 0.2;
  for (int n = 1; n <= 9; ++n) {
    CHECK(jab_markov_asymptotic({n, n}, g) == doctest::Approx(g * g / (pi * sqrt3 * n)).epsilon(1e-13));
    const double v = jab_markov_asymptotic({n, -n}, g);
    const double pattern[3] = {-sqrt3 / 2, sqrt3 / 2, 0.0};
    CHECK(v == doctest::Approx(-g * g / (pi * n) * pattern[(n - 1) % 3]).epsilon(1e-12));
    CHECK(std::abs(v + g * g / (pi * n) * std::sin(4 * pi * n / 3)) < 1e-14);
  }
  CHECK(std::abs(jab_markov_asymptotic({3, -3}, g)) < 1e-17);
  CHECK_THROWS_AS(jab_markov_asymptotic({0, 0}, g), ValidationError);
  // small-z Hankel form joins the z = 0 value
  const cplx s = sigma12_ab_asymptotic(1e-6, {4, 4}, g);
  CHECK(std::abs(s - jab_markov_asymptotic({4, 4}, g)) < 1e-6 * g * g);
}

TEST_CASE("g(N)") {
  for (int N : {4, 16, 31}) CHECK(g_of_n(BathModel(N)) == doctest::Approx(direct_g(N)).epsilon(1e-12));
  for (int N : {128, 256, 512, 1024}) {
    const double ge = g_of_n(BathModel(N));
    CHECK(ge > 0.0);
    CHECK(std::abs(ge - g_of_n_approx(N)) <= 0.05);
  }
  const double step = g_of_n(BathModel(1024)) - g_of_n(BathModel(512));
  CHECK(step == doctest::Approx(2.0 / (pi * sqrt3) * std::log(2.0)).epsilon(0.05));
  CHECK_THROWS_AS(g_of_n(BathModel(99)), DomainError);
}

TEST_CASE("g_pm") {
  // n1 - n2 = 3m: antisymmetric sum saturates
  for (IVec2 n : {IVec2{1, 1}, IVec2{2, -1}, IVec2{3, 3}}) {
    const double a = g_pm(BathModel(512), n, -1).value, b = g_pm(BathModel(1024), n, -1).value;
    CHECK(std::abs(b - a) / b < 0.02);
    CHECK(std::abs(g_pm(BathModel(512), n, -1).imag) < 1e-12);
    CHECK(std::abs(g_pm(BathModel(512), n, 1).imag) < 1e-12);
  }
  CHECK(g_pm(BathModel(1024), {1, 1}, -1).value == doctest::Approx(0.6).epsilon(0.05));
  // e^{iK.n} != 1: grows like log N in both channels
  for (int s : {1, -1}) {
    const double a = g_pm(BathModel(256), {1, 0}, s).value, b = g_pm(BathModel(1024), {1, 0}, s).value;
    CHECK((b - a) / std::log(4.0) == doctest::Approx(2.0 / (pi * sqrt3)).epsilon(0.15));
  }
  CHECK_THROWS_AS(g_pm(BathModel(64), {1, 1}, 0), ValidationError);
}

TEST_CASE("residues from g(N)") {
  const BathModel m(512);
  CHECK(residue_r0(0.0, m) == 1.0);
  const double r = residue_r0(0.1, m);
  CHECK(r == doctest::Approx(1.0 / (1.0 + 0.01 * direct_g(512))).epsilon(1e-12));
  CHECK(r == doctest::Approx(0.976).epsilon(1e-3));
  double prev = 1.0;
  for (int N : {16, 64, 256, 1024}) {
    const double v = residue_r0(0.3, BathModel(N));
    CHECK(v < prev);
    prev = v;
  }
  CHECK(residue_subradiant_aa(1, 0.3) == doctest::Approx(1.0 / (1.0 + 0.6 * 0.09)).epsilon(1e-15));
  CHECK(residue_subradiant_aa(7, 0.0) == 1.0);
  // 1/R - 1 grows like log n
  const double a = 1.0 / residue_subradiant_aa(10, 0.5) - 1.0, b = 1.0 / residue_subradiant_aa(1000, 0.5) - 1.0;
  CHECK((b - a) / (0.25 * std::log(100.0)) == doctest::Approx(2.0 / (sqrt3 * pi)).epsilon(1e-12));
  CHECK_THROWS_AS(residue_subradiant_aa(0, 0.1), ValidationError);
}

TEST_CASE("pair names") {
  for (Pair p : {Pair::AA, Pair::BB, Pair::AB, Pair::BA}) CHECK(pair_from_string(to_string(p)) == p);
  CHECK_THROWS_AS(pair_from_string("AC"), ValidationError);
}
