#include <cmath>
#include <random>

#include "doctest.h"
#include "fixture.hpp"
#include "pv5/errors.hpp"
#include "pv5/uniform_asym.hpp"

using namespace pv5;
using pv5::test::cx;
using pv5::test::oracle;
using pv5::test::rel;

namespace {

PVState leading_large_t(double t) { return PVState::make(t, -1.0 - 4.0 / t, -t / 8.0, std::exp(t / 2.0)); }

// F rebuilt from A, B, C with centred differences.
Complex f_by_differences(const ScalarODECoeffs& sc, Complex eta) {
  const double h = 1e-4;
  auto A = [&](Complex e) { return sc.A().value(e); };
  auto C = [&](Complex e) { return sc.C().value(e); };
  const Complex a = A(eta), b = sc.B().value(eta), c = C(eta);
  const Complex a1 = (A(eta + h) - A(eta - h)) / (2 * h);
  const Complex c1 = (C(eta + h) - C(eta - h)) / (2 * h);
  const Complex c2 = (C(eta + h) - 2.0 * c + C(eta - h)) / (h * h);
  return a * a + b * c - a1 + a * c1 / c + 0.75 * (c1 / c) * (c1 / c) - 0.5 * c2 / c;
}

}  // namespace

TEST_CASE("scalar reduction: C-zero and finite-difference check") {
  const PVState zero = PVState::make(0.3, Complex(-0.5, 0.1), 0.0, 1.0);
  CHECK_THROWS_AS(scalar_reduce(ScalarVariant::direct, zero), Error);

  std::mt19937 rng(3);
  std::uniform_real_distribution<double> d(-2.0, 2.0);
  for (int i = 0; i < 12; ++i) {
    const PVState s = PVState::make(0.5 + std::abs(d(rng)), Complex(d(rng), d(rng)) - 2.5, Complex(d(rng), d(rng)),
                                    Complex(d(rng), d(rng)) + 3.0);
    for (ScalarVariant v : {ScalarVariant::direct, ScalarVariant::tilde, ScalarVariant::hat}) {
      const ScalarODECoeffs sc = scalar_reduce(v, s);
      const Complex eta(d(rng) + 3.0, d(rng) + 2.5);
      INFO(to_string(v));
      CHECK(rel(f_by_differences(sc, eta), sc.F(eta)) < 1e-6);
    }
  }
}

TEST_CASE("scalar reduction: model parts and remainders") {
  const double t = 40.0;
  const PVState s = leading_large_t(t);
  for (ScalarVariant v : {ScalarVariant::tilde, ScalarVariant::hat}) {
    const ScalarODECoeffs sc = scalar_reduce(v, s);
    // remainder is O(1/η²) against a model of size t²/4
    for (double e : {10.0, 20.0, 40.0}) CHECK(std::abs(sc.g(Complex(e, 0.0))) * e * e < 2.0 * t * t);
    CHECK(std::abs(sc.g(Complex(0.0, 10.0)) / sc.model(Complex(0.0, 10.0))) < 0.05);
  }
  // zero-v values of the gauge entries
  const ScalarODECoeffs tz = scalar_reduce(ScalarVariant::tilde, PVState::make(2.0, -0.5, 0.0, 1.0));
  CHECK(std::abs(tz.C().value(3.0) + 2.0) < 1e-15);

  // direct variant: g = t / (2 (y - 1) η²) + O(η⁻³) along a ray
  const PVState small = PVState::make(0.05, Complex(-0.9, 0.2), Complex(0.1, 0.3), Complex(0.2, 1.0));
  const ScalarODECoeffs sd = scalar_reduce(ScalarVariant::direct, small);
  const Complex lead = small.t / (2.0 * (small.y - 1.0));
  double hi = 0.0;
  for (double r : {20.0, 50.0, 100.0, 200.0, 400.0}) {
    const Complex eta(0.0, r);
    hi = std::max(hi, std::abs((sd.g(eta) - lead / (eta * eta)) * eta * eta * eta / (small.v * small.t)));
  }
  CHECK(hi < 10.0);
  CHECK(rel(sd.g(Complex(0.0, 1e4)) * -1e8, lead) < 1e-3);
}

TEST_CASE("whittaker model coefficients") {
  const auto& f = oracle()["seed_at_zero"];
  const auto& w = oracle()["whittaker_model_coeffs"];
  const PVState s = seed_at_zero(f["t"].get<double>(), SeedZero::make(cx(f["sigma"]), cx(f["r"])));
  const WhittakerCoefficients c = whittaker_model_coeffs(s, s.t);
  CHECK(rel(c.alpha, cx(w["alpha"])) < 1e-10);
  CHECK(rel(c.beta, cx(w["beta"])) < 1e-10);
  CHECK(rel(c.c1, cx(w["c1"])) < 1e-10);
  CHECK(rel(c.c2, cx(w["c2"])) < 1e-10);
  CHECK(c.c3 == c.beta);

  // α = 0 exactly when v = t y / (1 - y)²: c1 vanishes through 1/Γ(α/2)
  const double t = 0.1;
  const Complex y(-0.8, 0.3);
  const PVState z = PVState::make(t, y, t * y / ((1.0 - y) * (1.0 - y)), Complex(0.5, 0.5));
  const WhittakerCoefficients cz = whittaker_model_coeffs(z, t);
  CHECK(std::abs(cz.alpha) < 1e-6);
  CHECK(std::abs(cz.c1) < std::abs(cz.alpha) * std::abs(cz.beta) / t);
}

TEST_CASE("large-t coefficients") {
  for (double t : {20.0, 40.0, 80.0}) {
    const LargeTCoefficients c = large_t_coeffs(t);
    CHECK(rel(c.d3 / c.d1, -kI / kPi) < 1e-14);
    CHECK(std::abs(c.M - 1.0) < 1e-14);
    CHECK(rel(c.M, -c.d1 * c.d2) < 1e-14);
    CHECK(c.e1 == c.d1);
    CHECK(c.e3 == c.d2);
    CHECK(c.e4 == c.d3);
    CHECK(rel(c.e2, -2.0 * kPi * kI * c.d2) < 1e-15);
    const Complex u_hat(0.3, -1.2);
    const Complex u = u_hat * std::exp(t / 2.0);
    CHECK(rel(-2.0 * kPi * kI * c.d2 * u / c.d1, -2.0 * kI * u_hat) < 1e-13);
  }
}

TEST_CASE("closed-form multipliers") {
  const Complex sigma = cx(oracle()["sigma_star"]);
  CHECK(s1_small_t(0.0, 2.0) == 0.0);
  CHECK(s2_small_t(0.0, 2.0) == 0.0);
  CHECK(std::abs(s1_small_t(sigma, -kI) - 2.0 * kI) < 1e-14);
  CHECK(std::abs(s2_small_t(sigma, -kI) + 2.0 * kI) < 1e-14);
  CHECK(std::abs(s1_large_t(1.0) - 2.0 * kI) < 1e-15);
  CHECK(std::abs(s2_large_t(1.0) + 2.0 * kI) < 1e-15);
  CHECK(std::abs(s1_large_t(kI) - 2.0) < 1e-15);
  CHECK(std::abs(s2_large_t(kI) - 2.0) < 1e-15);
  CHECK_THROWS_AS(s1_large_t(0.0), Error);

  std::mt19937 rng(17);
  std::uniform_real_distribution<double> d(-2.0, 2.0);
  for (int i = 0; i < 20; ++i) {
    const Complex sg(d(rng) / 2.0, d(rng)), r1(d(rng), d(rng)), r2(d(rng), d(rng)), uh(d(rng), d(rng));
    const Complex p1 = s1_small_t(sg, r1) * s2_small_t(sg, r1);
    const Complex p2 = s1_small_t(sg, r2) * s2_small_t(sg, r2);
    const Complex sn = std::sin(sg * kPi / 2.0);
    CHECK(std::abs(p1 - p2) <= 1e-12 * (1.0 + std::abs(p1)));
    CHECK(std::abs(p1 + 4.0 * sn * sn) <= 1e-12 * (1.0 + std::abs(p1)));
    CHECK(std::abs(s1_large_t(uh) * s2_large_t(uh) - 4.0) < 1e-13);
  }
}

TEST_CASE("connection solve") {
  const ConnectionResult c = connection_solve(1.0);
  CHECK(std::abs(c.sigma - Complex(0.0, 0.5610998527)) < 1e-9);
  CHECK(std::abs(c.sigma - cx(oracle()["sigma_star"])) < 1e-15);
  CHECK(std::abs(c.r + kI) < 1e-15);
  CHECK(std::abs(c.mirror_sigma + c.sigma) < 1e-15);
  const ConnectionResidual res = connection_check(c.sigma, c.r, 1.0);
  CHECK(std::abs(res.s1) < 1e-12);
  CHECK(std::abs(res.s2) < 1e-12);
  const ConnectionResidual mirror = connection_check(c.mirror_sigma, c.mirror_r, 1.0);
  CHECK(std::abs(mirror.s1) < 1e-12);
  CHECK(std::abs(mirror.s2) < 1e-12);

  double prev = 0.0;
  for (double delta : {1e-3, 1e-2, 1e-1}) {
    const ConnectionResidual p = connection_check(c.sigma + delta, c.r, 1.0);
    const double n = std::abs(p.s1) + std::abs(p.s2);
    CHECK(n > prev);
    prev = n;
  }

  std::mt19937 rng(23);
  std::uniform_real_distribution<double> d(-2.0, 2.0);
  for (int i = 0; i < 10; ++i) {
    const Complex uh(d(rng), d(rng));
    const ConnectionResult ci = connection_solve(uh);
    CHECK(std::abs(s1_small_t(ci.sigma, ci.r) - s1_large_t(uh)) < 1e-12 * std::abs(s1_large_t(uh)));
    CHECK(std::abs(s2_small_t(ci.sigma, ci.r) - s2_large_t(uh)) < 1e-12 * std::abs(s2_large_t(uh)));
    const ConnectionResult back = connection_from_multipliers(s1_large_t(uh), s2_large_t(uh));
    CHECK(std::abs(back.sigma - ci.sigma) < 1e-12);
    CHECK(std::abs(back.r - ci.r) < 1e-12 * std::abs(ci.r));
  }
  CHECK_THROWS_AS(connection_solve(0.0), Error);
  CHECK_THROWS_AS(connection_from_multipliers(0.0, 1.0), Error);
}

TEST_CASE("bessel model solutions") {
  const double t = 40.0;
  const ScalarODECoeffs sc = scalar_reduce(ScalarVariant::tilde, leading_large_t(t));
  std::mt19937 rng(29);
  std::uniform_real_distribution<double> r(1.0, 12.0), th(0.2, 2.2);
  double worst_res = 0.0, worst_w = 0.0;
  for (int i = 0; i < 20; ++i) {
    const Complex eta = std::polar(r(rng), th(rng));
    const double h = 1e-3 / t;
    for (ModelBranch b : {ModelBranch::plus, ModelBranch::minus}) {
      auto phi = [&](Complex e) { return bessel_model_solution(b, SectorArg(e), t); };
      const Jet p0 = phi(eta);
      const Complex d2 = (phi(eta + h).value - 2.0 * p0.value + phi(eta - h).value) / (h * h);
      worst_res = std::max(worst_res, std::abs(d2 - sc.model(eta) * p0.value) / std::abs(sc.model(eta) * p0.value));
      const Complex d1 = (phi(eta + h).value - phi(eta - h).value) / (2.0 * h);
      CHECK(rel(p0.deriv, d1) < 1e-6);
    }
    // Wronskian where K1 and I1 are not both dominant
    if (eta.real() > 0.0) {
      const Jet p = bessel_model_solution(ModelBranch::plus, SectorArg(eta), t);
      const Jet m = bessel_model_solution(ModelBranch::minus, SectorArg(eta), t);
      worst_w = std::max(worst_w, std::abs(p.value * m.deriv - p.deriv * m.value - 1.0));
    }
  }
  CHECK(worst_res <= 1e-6);
  CHECK(worst_w <= 1e-10);

  // far along arg η = π/2: φ₊ ≈ (π/t)^{1/2} e^{t/4} e^{-tλ/2}, λ = η + 1/2
  double prev = 1.0;
  for (double e : {10.0, 100.0, 1000.0}) {
    const Complex eta(0.0, e), lambda = eta + 0.5;
    const Complex approx = std::sqrt(kPi / t) * std::exp(t / 4.0 - t * lambda / 2.0);
    const double err = rel(bessel_model_solution(ModelBranch::plus, SectorArg(eta), t).value, approx);
    CHECK(err < prev);
    CHECK(err < 3.0 * t / (16.0 * e));
    prev = err;
  }
  // recessive / dominant split as t grows at fixed η
  double prev_p = 1e300, prev_m = 0.0;
  for (double tt : {20.0, 40.0, 80.0}) {
    const SectorArg eta(Complex(1.0, 2.0));
    const double p = std::abs(bessel_model_solution(ModelBranch::plus, eta, tt).value);
    const double m = std::abs(bessel_model_solution(ModelBranch::minus, eta, tt).value);
    CHECK(p < prev_p);
    CHECK(m > prev_m);
    prev_p = p;
    prev_m = m;
  }
  CHECK_THROWS_AS(bessel_model_solution(ModelBranch::plus, SectorArg(Complex(0.5)), t), Error);
  CHECK_THROWS_AS(bessel_model_solution(ModelBranch::minus, SectorArg(Complex(0.0)), t), Error);
}

TEST_CASE("whittaker model solutions") {
  const Complex alpha(0.0, 0.58);
  const double t = 0.05;
  const PVState s = PVState::make(t, Complex(-0.2, 0.9), Complex(0.3, 0.1), 1.0);
  const ScalarODECoeffs sc = scalar_reduce(ScalarVariant::direct, s);
  const Complex a = sc.alpha();
  std::vector<Complex> wr;
  for (double r : {0.7, 3.0, 9.0, 25.0}) {
    const SectorArg eta(r, 1.2);
    const double h = 1e-4;
    for (ModelBranch b : {ModelBranch::plus, ModelBranch::minus}) {
      auto psi = [&](double rr) { return whittaker_model_solution(b, SectorArg(rr, 1.2), a).value; };
      const Complex step = std::polar(1.0, 1.2);
      const Complex d2 = (psi(r + h) - 2.0 * psi(r) + psi(r - h)) / (h * h * step * step);
      CHECK(std::abs(d2 - sc.model(eta.value()) * psi(r)) < 1e-5 * std::abs(sc.model(eta.value()) * psi(r)));
    }
    const Jet m = whittaker_model_solution(ModelBranch::plus, eta, a);
    const Jet w = whittaker_model_solution(ModelBranch::minus, eta, a);
    wr.push_back(m.value * w.deriv - m.deriv * w.value);
  }
  for (Complex x : wr) CHECK(rel(x, wr[0]) < 1e-8);
  (void)alpha;
}

TEST_CASE("approximant error") {
  // exact model: only the integrator error remains
  const PVState s20 = seed_at_infinity_series(20.0, {1.0});
  ApproximantOptions exact;
  exact.exact_model = true;
  exact.samples = 60;
  CHECK(approximant_error(ScalarVariant::tilde, s20, eta_ray(kPi / 2, 100.0, 1000.0), exact).max_rel_error <= 1e-8);

  ApproximantOptions o;
  o.samples = 60;
  const double e20 = approximant_error(ScalarVariant::tilde, s20, eta_ray(kPi / 2, 100.0, 1000.0), o).max_rel_error;
  const PVState s40 = seed_at_infinity_series(40.0, {1.0});
  const double e40 = approximant_error(ScalarVariant::tilde, s40, eta_ray(kPi / 2, 200.0, 2000.0), o).max_rel_error;
  CHECK(e40 < e20);
  CHECK(e20 < 1e-3);
  const double h40 = approximant_error(ScalarVariant::hat, s40, eta_ray(kPi / 2, 200.0, 2000.0), o).max_rel_error;
  CHECK(h40 < e20);

  // approaching the turning point η = 1/2 the tilde approximant stays off
  const double c40 =
      approximant_error(ScalarVariant::tilde, s40, {Complex(0.5, 2.0), Complex(0.5, 0.01)}, o).max_rel_error;
  CHECK(c40 > 0.05);

  // small-t Whittaker approximant improves as t decreases
  const Trajectory tr = integrate(seed_at_infinity_series(40.0, {1.0}), 0.05);
  const double w1 = approximant_error(ScalarVariant::direct, tr.state_at(0.2), eta_ray(kPi / 2, 1.0, 30.0), o).max_rel_error;
  const double w2 = approximant_error(ScalarVariant::direct, tr.back(), eta_ray(kPi / 2, 1.0, 30.0), o).max_rel_error;
  CHECK(w2 < w1);

  CHECK_THROWS_AS(approximant_error(ScalarVariant::tilde, s20, {Complex(1.0, 1.0), Complex(1.0, -1.0)}, o), Error);
  CHECK_THROWS_AS(approximant_error(ScalarVariant::hat, s20, {Complex(-1.0, 1.0), Complex(-1.0, -1.0)}, o), Error);
  CHECK_NOTHROW(approximant_error(ScalarVariant::hat, s20, {Complex(1.0, 1.0), Complex(1.0, -1.0)}, o));
  CHECK_THROWS_AS(approximant_error(ScalarVariant::tilde, s20, {Complex(0.0, 1.0)}, o), Error);
}

TEST_CASE("eta ray") {
  const std::vector<Complex> r = eta_ray(kPi / 2, 5.0, 50.0);
  REQUIRE(r.size() == 2);
  CHECK(std::abs(r[0] - Complex(0.0, 5.0)) < 1e-14);
  CHECK(std::abs(r[1] - Complex(0.0, 50.0)) < 1e-13);
}
