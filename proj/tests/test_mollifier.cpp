#include "test_main.hpp"

#include <cmath>

#include "kinfp/mollifier.hpp"

using namespace kinfp;

namespace {

double smooth(const SpaceTimePoint& p) {
  return std::exp(-(p.t - 1.0) * (p.t - 1.0) - p.x[0] * p.x[0] - 0.5 * p.v[0] * p.v[0]);
}

double smooth_y(const SpaceTimePoint& p) { return smooth(p) * (-2.0 * (p.t - 1.0) - 2.0 * p.x[0] * p.v[0]); }

std::vector<SpaceTimePoint> grid() {
  std::vector<SpaceTimePoint> g;
  for (double t : {0.6, 1.0, 1.5})
    for (double x : {-0.5, 0.3})
      for (double v : {-1.0, 0.7}) g.push_back(SpaceTimePoint::scalar(t, x, v));
  return g;
}

}  // namespace

TEST_CASE("kernel normalisation and support") {
  for (std::size_t d : {1u, 2u}) {
    const MollifierKernel k(d);
    CHECK(k.r0() == doctest::Approx(1.0 / (1.0 + 2.0 * d)));
    CHECK(k.rho(MollifierKernel::center(d)) == doctest::Approx(k.norm() * std::exp(-1.0)));
    const std::size_t points = d == 1 ? 31 : 25;
    for (double eps : {1.0, 0.3}) CHECK(std::abs(integrate_rho_eps(k, eps, points) - 1.0) <= 1e-6);
    const SupportCheck s = support_check(k, 0.5, 50000, 3);
    CHECK(s.inside_support > 0);
    CHECK(s.outside_ball == 0);
    CHECK(s.min_value >= 0.0);
    double total = 0.0;
    for (double w : k.weights()) total += w;
    CHECK(total == doctest::Approx(1.0));
  }
}

TEST_CASE("convolution reproduces affine functions") {
  const MollifierKernel k(1);
  const SpaceTimeField one = [](const SpaceTimePoint&) { return 3.0; };
  CHECK(group_convolve(k, 0.3, one, SpaceTimePoint::scalar(1.0, 0.2, 0.1)) == doctest::Approx(3.0));
  CHECK_THROWS_AS(group_convolve(k, 0.3, one, SpaceTimePoint::scalar(0.2, 0.0, 0.0)), std::invalid_argument);
}

TEST_CASE("support-side convolution of a narrow bump approaches the scaled kernel") {
  const MollifierKernel k(1);
  const double w = 0.01, eps = 0.3;
  const SpaceTimePoint lo = SpaceTimePoint::scalar(0.0, -w * w * w, -w), hi = SpaceTimePoint::scalar(w * w, w * w * w, w);
  const SpaceTimePoint b0 = SpaceTimePoint::scalar(0.5 * w * w, 0.0, 0.0);
  const SpaceTimeField narrow = [&](const SpaceTimePoint& p) {
    const double s = std::pow((p.t - b0.t) / (0.5 * w * w), 2) + std::pow(p.x[0] / (w * w * w), 2) + std::pow(p.v[0] / w, 2);
    return s < 1.0 ? std::exp(-1.0 / (1.0 - s)) : 0.0;
  };
  // mass of the bump: the ellipsoid semi-axes times the unit-ball integral 1 / (norm r0^6)
  const double l1 = 0.5 * std::pow(w, 6) / (k.norm() * std::pow(k.r0(), 6));
  for (const auto& q : {SpaceTimePoint::scalar(1.5, 0.0, 0.0), SpaceTimePoint::scalar(1.52, 0.004, 0.1)}) {
    const SpaceTimePoint p = compose(dilate(eps, q), b0);
    const double coarse = group_convolve_over_support(k, eps, narrow, lo, hi, 6, p);
    const double fine = group_convolve_over_support(k, eps, narrow, lo, hi, 10, p);
    CHECK(coarse == doctest::Approx(fine).epsilon(1e-3));
    CHECK(fine == doctest::Approx(l1 * k.rho_eps(eps, compose(p, inverse(b0)))).epsilon(0.03));
  }
}

TEST_CASE("the vector field commutes with the convolution") {
  const MollifierKernel k(1);
  for (double h : {1e-2, 1e-3}) {
    const CommutationReport r = commutation_check(k, 0.3, smooth, smooth_y, grid(), h);
    CHECK(r.points == 12);
    CHECK(r.pass);
  }
  const SpaceTimeField aff = [](const SpaceTimePoint& p) { return 1.0 + 2.0 * p.t - p.x[0] + 3.0 * p.v[0]; };
  const SpaceTimeField yaff = [](const SpaceTimePoint& p) { return 2.0 - p.v[0]; };
  const CommutationReport a = commutation_check(k, 0.3, aff, yaff, grid(), 1e-3);
  CHECK(a.max_residual <= 1e-6);
  CHECK(a.pass);
  CHECK_THROWS_AS(commutation_check(k, 0.5, aff, yaff, {SpaceTimePoint::scalar(0.6, 0.0, 0.0)}, 1e-3),
                  std::invalid_argument);
}

TEST_CASE("derivative bounds scale with eps") {
  const MollifierKernel k(1);
  const double w = 0.01;
  const SpaceTimePoint lo = SpaceTimePoint::scalar(0.0, -w * w * w, -w), hi = SpaceTimePoint::scalar(w * w, w * w * w, w);
  const SpaceTimeField narrow = [&](const SpaceTimePoint& p) {
    const double s = std::pow((p.t - 0.5 * w * w) / (0.5 * w * w), 2) + std::pow(p.x[0] / (w * w * w), 2) +
                     std::pow(p.v[0] / w, 2);
    return s < 1.0 ? std::exp(-1.0 / (1.0 - s)) : 0.0;
  };
  const DerivativeBoundReport r = derivative_bound_check(k, {0.5, 0.35, 0.25, 0.18}, narrow, lo, hi, 1.0);
  CHECK(r.rows.size() == 4);
  CHECK(r.pass);
  CHECK(r.spread_t <= 3.0);
  CHECK(r.spread_x <= 3.0);
  CHECK(r.spread_v <= 3.0);
  CHECK(r.slope_t == doctest::Approx(-8.0).epsilon(0.05));
  CHECK(r.slope_x == doctest::Approx(-9.0).epsilon(0.05));
  CHECK(r.slope_v == doctest::Approx(-7.0).epsilon(0.05));
}

TEST_CASE("mollified time integrals converge along a flow") {
  SimConfig cfg;
  cfg.paths = 2000;
  cfg.dt = 0.01;
  cfg.store_every = 5;
  cfg.seed = 4;
  cfg.scheme = Scheme::ExactTransport;
  const DriftField f = oscillatory_field(1, 1.0);
  const PathEnsemble e = euler_maruyama(f, cfg);
  const EmpiricalFlow flow = empirical_flow(e);
  const SpaceTimeField drift = [&](const SpaceTimePoint& p) { return f.eval(p.t, p.phase())[0]; };
  const SpaceTimeField G = [](const SpaceTimePoint& p) { return std::exp(-0.5 * (p.x[0] * p.x[0] + p.v[0] * p.v[0])); };
  const MollifierKernel k(1, 6);
  const CaratheodoryReport r = caratheodory_limit_check(k, drift, G, flow, 10, {0.4, 0.2, 0.1, 0.05});
  CHECK(r.rows.size() == 4);
  CHECK(r.decreasing);
  CHECK(r.pass);
  CHECK_THROWS_AS(caratheodory_limit_check(k, drift, G, flow, 1, {0.4}), std::invalid_argument);
}
