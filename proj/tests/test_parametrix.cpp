#include "test_main.hpp"

#include <cmath>
#include <numbers>

#include "kinfp/parametrix.hpp"

using namespace kinfp;

namespace {

const KernelSpec kGen{1.0, Convention::Generator};

// Closed-form law of the kinetic SDE with constant drift c in d = 1.
double constant_drift_density(double c, double s, const PhasePoint& z, double t, const PhasePoint& y) {
  const double g = t - s;
  const double mx = z.x[0] + g * z.v[0] + 0.5 * c * g * g, mv = z.v[0] + c * g;
  return eval_P(kGen, s, PhasePoint::scalar(mx - g * mv, mv), t, y);
}

}  // namespace

TEST_CASE("configuration validation") {
  ParametrixConfig cfg;
  CHECK_NOTHROW(cfg.validate(0.5));
  cfg.eps = 0.9;
  CHECK_THROWS_AS(cfg.validate(0.5), std::invalid_argument);
  cfg.eps = 0.2;
  cfg.eta = 1.5;
  CHECK_THROWS_AS(cfg.validate(0.5), std::invalid_argument);
  cfg.eta = 0.5;
  cfg.depth = -1;
  CHECK_THROWS_AS(cfg.validate(0.5), std::invalid_argument);
  cfg.depth = 3;
  cfg.space_order = 1;
  CHECK_THROWS_AS(cfg.validate(0.5), std::invalid_argument);
}

TEST_CASE("zero drift collapses to the Gaussian") {
  Parametrix par(zero_field(1), ParametrixConfig{});
  const auto z = PhasePoint::scalar(0.2, -0.4);
  for (double t : {0.1, 0.5, 1.0})
    for (double a : {-1.0, 0.0, 2.0}) {
      const auto y = PhasePoint::scalar(a, 0.5 * a);
      const double P = eval_P(kGen, 0.0, z, t, y);
      const auto p = par.eval_p(0.0, z, t, y);
      CHECK(std::fabs(p.value - P) <= 1e-12 * P);
      CHECK(p.tail_bound == 0.0);
      CHECK(par.phi1(0.0, z, t, y) == 0.0);
      const auto m = par.mc_eval_p(0.0, z, t, y);
      CHECK(m.value == P);
      CHECK(m.se == 0.0);
    }
}

TEST_CASE("phi1 is the drift against the kernel gradient") {
  Parametrix par(constant_field(Vec{0.7}), ParametrixConfig{});
  const auto z = PhasePoint::scalar(0.3, 1.0);
  CHECK(std::fabs(par.phi1(0.0, z, 0.8, shift(0.8, z))) <= 1e-14);
  const auto y = PhasePoint::scalar(1.0, 0.2);
  CHECK(par.phi1(0.0, z, 0.8, y) == doctest::Approx(0.7 * grad_v_P(kGen, 0.0, z, 0.8, y)[0]));
  CHECK(par.phi_terms(0.0, z, 0.8, y, 1)[0] == doctest::Approx(par.phi1(0.0, z, 0.8, y)).epsilon(1e-12));
  CHECK_THROWS(par.phi1(0.5, z, 0.5, y));
}

TEST_CASE("constant drift matches the shifted Gaussian and improves with depth") {
  const double c = 0.5;
  Parametrix par(constant_field(Vec{c}), ParametrixConfig{});
  const auto z = PhasePoint::scalar(0.3, -0.2);
  std::vector<double> worst(4, 0.0);
  for (double t : {0.25, 0.5, 1.0}) {
    const double mx = z.x[0] + t * z.v[0] + 0.5 * c * t * t, mv = z.v[0] + c * t;
    const Block L = covariance_block(2.0, t).cholesky();
    for (double a : {-1.5, -0.75, 0.0, 0.75, 1.5})
      for (double b : {-1.5, -0.75, 0.0, 0.75, 1.5}) {
        const auto y = PhasePoint::scalar(mx + L.xx * a, mv + L.xv * a + L.vv * b);
        const double exact = constant_drift_density(c, 0.0, z, t, y);
        const auto p = par.eval_p(0.0, z, t, y);
        for (int n = 0; n <= 3; ++n) worst[n] = std::max(worst[n], std::fabs(p.partial[n] - exact) / exact);
      }
  }
  MESSAGE("relative errors by depth: " << worst[0] << " " << worst[1] << " " << worst[2] << " " << worst[3]);
  CHECK(worst[3] <= 1e-2);
  for (int n = 1; n <= 3; ++n) CHECK(worst[n] < worst[n - 1]);
}

TEST_CASE("phi2 against an adaptive quadrature oracle") {
  // frozen from tests/oracles/phi2_constant_drift.py (adaptive quad in time, dense Gauss-Legendre in space)
  struct Row {
    double x, v, phi2;
  };
  const Row rows[] = {
      {-0.5, -0.5, -0.03435003003875149}, {-0.5, 0.0, -0.04166869276110421}, {-0.5, 0.5, -0.030658110814599612},
      {0.0, -0.5, -0.0858750750968771},   {0.0, 0.0, -0.08821262326748698},  {0.0, 0.5, -0.08587507509687711},
      {0.5, -0.5, -0.030658110814599605}, {0.5, 0.0, -0.04166869276110421},  {0.5, 0.5, -0.034350030038751485},
  };
  const double c = 0.8, t = 1.0;
  const DriftField f = constant_field(Vec{c});
  ParametrixConfig cfg;
  cfg.time_order = 16;
  Parametrix par(f, cfg);
  const auto z = PhasePoint::scalar(0.0, 0.0);
  for (const Row& r : rows) {
    const auto y = PhasePoint::scalar(r.x, r.v);
    const double ours = par.phi_terms(0.0, z, t, y, 2)[1];
    CHECK(std::fabs(ours - r.phi2) <= 1e-4 * std::fabs(r.phi2));
    const TargetKernel phi1_to_y = [&](double tau, const PhasePoint& eta) { return par.phi1(tau, eta, t, y); };
    CHECK(phi_next(f, kGen, phi1_to_y, 0.0, z, t, y, 16, 3) == doctest::Approx(ours).epsilon(1e-10));
  }
}

TEST_CASE("normalisation for the Hoelder field") {
  Parametrix par(holder_field(1, 1.0, 0.5, 1), ParametrixConfig{});
  for (const auto& z : {PhasePoint::scalar(0.0, 0.0), PhasePoint::scalar(1.0, -1.0)}) {
    const auto v = par.integrate_against(0.0, z, 1.0, [](const PhasePoint&) { return 1.0; }, 8);
    CHECK(std::fabs(v.back() - 1.0) <= 1e-2);
  }
}

TEST_CASE("Monte Carlo estimator agrees with tensor quadrature") {
  ParametrixConfig cfg;
  cfg.mc_paths = 40000;
  Parametrix par(constant_field(Vec{0.5}), cfg);
  const auto z = PhasePoint::scalar(0.3, -0.2);
  for (const auto& y : {PhasePoint::scalar(0.4, 0.2), PhasePoint::scalar(-0.5, -0.8)}) {
    const auto tensor = par.eval_p(0.0, z, 1.0, y);
    const auto mc = par.mc_eval_p(0.0, z, 1.0, y);
    CHECK(std::fabs(mc.value - tensor.value) <= 3.0 * mc.se);
    CHECK_FALSE(mc.unreliable);
  }
  // d = 2 smoke run: forward estimator of the total mass
  ParametrixConfig c2;
  c2.depth = 2;
  Parametrix par2(oscillatory_field(2, 0.5), c2);
  const PhasePoint z2(Vec{0.1, -0.2}, Vec{0.3, 0.0});
  const auto mass = par2.mc_integrate_against(0.0, z2, 1.0, [](const PhasePoint&) { return 1.0; }, 20000);
  CHECK(std::fabs(mass.value - 1.0) <= 0.05);
  CHECK_THROWS_AS(par2.eval_p(0.0, z2, 1.0, z2), DimensionError);
}

TEST_CASE("bound functions") {
  BoundConstants b;
  CHECK(H_function(1.0, 0.5, PhasePoint::scalar(0, 0), 0.0, 1.0) == 0.0);
  CHECK(summability_S(b) == doctest::Approx(0.2 * std::riemann_zeta(1.5)));
  CHECK(summability_S(b) < 1.0);
  b.eps = 0.9;
  CHECK_THROWS(K_constant(b));
  b.eps = 0.2;
  CHECK_THROWS(H_function(1.0, 1.5, PhasePoint::scalar(0, 0), 1.0, 1.0));
  // the Gamma(n/2) factor eventually wins
  const double n0 = decreasing_from(b, 0.5, PhasePoint::scalar(0.3, 0.3));
  CHECK(n0 > 0);
  MESSAGE("induction coefficients decrease from n0 = " << n0);
  const double cb = fit_c_beta(1.0, 0.5, Convention::Generator, 10000, 3);
  CHECK(std::isfinite(cb));
  CHECK(cb > 0.0);
  const auto rep = summability_report(b, 2.0);
  CHECK(rep.summable);
  CHECK(rep.ratio_below_one_from > 0);
}

TEST_CASE("series diagnostics for constant drift") {
  Parametrix par(constant_field(Vec{0.5}), ParametrixConfig{});
  const auto grid = whitened_grid(kGen, PhasePoint::scalar(0.0, 0.0), {0.5, 1.0}, {-1.0, 0.0, 1.0});
  const auto rep = series_convergence_report(par, grid, 4, 2.0);
  CHECK(rep.below_bound);
  CHECK(rep.ratio_consistent);
  CHECK(rep.S < 1.0);
  for (double e : rep.empirical_sup) CHECK(std::isfinite(e));

  Parametrix zero(zero_field(1), ParametrixConfig{});
  const auto zr = series_convergence_report(zero, grid, 3, 2.0);
  for (double e : zr.empirical_sup) CHECK(e == 0.0);
}

TEST_CASE("Gaussian sandwich") {
  const auto grid = whitened_grid(kGen, PhasePoint::scalar(0.0, 0.0), {0.25, 1.0}, {-1.5, 0.0, 1.5});
  Parametrix zero(zero_field(1), ParametrixConfig{});
  const auto s0 = gaussian_sandwich_check(zero, grid, 1e-9, {0.5, 1.0, 2.0});
  CHECK(s0.C_upper == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(s0.c_lower == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(s0.lambda_lower == 1.0);
  Parametrix cst(constant_field(Vec{0.5}), ParametrixConfig{});
  const auto s1 = gaussian_sandwich_check(cst, grid, 0.1, {0.25, 0.5, 1.0, 2.0, 4.0});
  CHECK(s1.pass);
}
