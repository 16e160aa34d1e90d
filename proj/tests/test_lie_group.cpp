#include "test_main.hpp"

#include <cmath>

#include "kinfp/lie_group.hpp"
#include "kinfp/rng.hpp"

using namespace kinfp;

namespace {

SpaceTimePoint random_point(Stream& rng, std::size_t d) {
  SpaceTimePoint p(d);
  p.t = rng.normal();
  for (std::size_t i = 0; i < d; ++i) {
    p.x[i] = rng.normal();
    p.v[i] = rng.normal();
  }
  return p;
}

double max_diff(const SpaceTimePoint& a, const SpaceTimePoint& b) {
  double m = std::fabs(a.t - b.t);
  for (std::size_t i = 0; i < a.dim(); ++i) m = std::max({m, std::fabs(a.x[i] - b.x[i]), std::fabs(a.v[i] - b.v[i])});
  return m;
}

}  // namespace

TEST_CASE("compose, inverse and dilate on fixed points") {
  const auto a = SpaceTimePoint::scalar(1, 0, 1);
  const auto b = SpaceTimePoint::scalar(1, 0, 0);
  const auto c = compose(a, b);
  CHECK(c.t == 2.0);
  CHECK(c.x[0] == 1.0);
  CHECK(c.v[0] == 1.0);

  const auto p = SpaceTimePoint::scalar(2, 1, 1);
  const auto pi = inverse(p);
  CHECK(pi.t == -2.0);
  CHECK(pi.x[0] == 1.0);
  CHECK(pi.v[0] == -1.0);
  CHECK(max_diff(compose(p, pi), identity(1)) == 0.0);
  CHECK(max_diff(inverse(identity(1)), identity(1)) == 0.0);

  const auto q = dilate(2.0, SpaceTimePoint::scalar(1, 1, 1));
  CHECK(q.t == 4.0);
  CHECK(q.x[0] == 8.0);
  CHECK(q.v[0] == 2.0);
  CHECK(homogeneous_norm(q) == doctest::Approx(6.0).epsilon(1e-15));
  CHECK_THROWS_AS(dilate(0.0, q), std::invalid_argument);
  CHECK_THROWS_AS(compose(SpaceTimePoint(1), SpaceTimePoint(2)), DimensionError);
}

TEST_CASE("shift is the transport flow") {
  const auto z = shift(2.0, PhasePoint::scalar(1, 3));
  CHECK(z.x[0] == 7.0);
  CHECK(z.v[0] == 3.0);
  const auto w = PhasePoint::scalar(0.3, -1.2);
  const auto a = shift(0.4, shift(0.7, w)), b = shift(1.1, w);
  CHECK(a.x[0] == doctest::Approx(b.x[0]).epsilon(1e-15));
}

TEST_CASE("group axioms, automorphism and homogeneity on random triples") {
  for (std::size_t d : {1u, 2u, 3u}) {
    Stream rng(42, d);
    for (int n = 0; n < 10000; ++n) {
      const auto a = random_point(rng, d), b = random_point(rng, d), c = random_point(rng, d);
      CHECK(max_diff(compose(compose(a, b), c), compose(a, compose(b, c))) <= 1e-12);
      CHECK(max_diff(compose(a, identity(d)), a) == 0.0);
      CHECK(max_diff(compose(a, inverse(a)), identity(d)) <= 1e-12);
      CHECK(max_diff(compose(inverse(a), a), identity(d)) <= 1e-12);
      const double r = std::exp(rng.normal());
      CHECK(max_diff(dilate(r, compose(a, b)), compose(dilate(r, a), dilate(r, b))) <= 1e-12 * (1 + r * r * r) * 10);
      CHECK(std::fabs(homogeneous_norm(dilate(r, a)) - r * homogeneous_norm(a)) <= 1e-12 * r * homogeneous_norm(a));
      CHECK(std::fabs(quasi_distance(compose(c, a), compose(c, b)) - quasi_distance(a, b)) <=
            1e-12 * (1 + quasi_distance(a, b)) * 10);
      CHECK(max_diff(inverse(inverse(a)), a) <= 1e-15);
      CHECK(max_diff(dilate(r, dilate(1.0 / r, a)), a) <= 1e-12);
    }
  }
}

TEST_CASE("quasi-triangle constant is measured and finite") {
  const GroupConstants gc = measure_group_constants(1, 10000, 7);
  CHECK(gc.homogeneous_dimension == 6);
  CHECK(std::isfinite(gc.quasi_triangle_k));
  CHECK(gc.quasi_triangle_k >= 1.0);
  CHECK(quasi_distance(SpaceTimePoint::scalar(1, 2, 3), SpaceTimePoint::scalar(1, 2, 3)) == 0.0);
}

TEST_CASE("Lie derivative by central differences") {
  const auto p = SpaceTimePoint::scalar(0, 0, 3);
  CHECK(lie_derivative_fd([](const SpaceTimePoint& q) { return q.x[0]; }, p, 1e-3) == doctest::Approx(3.0));
  CHECK(lie_derivative_fd([](const SpaceTimePoint& q) { return q.t; }, p, 1e-3) == doctest::Approx(1.0));
  const auto q = SpaceTimePoint::scalar(0.7, -0.4, 1.9);
  CHECK(std::fabs(lie_derivative_fd([](const SpaceTimePoint& s) { return s.x[0] - s.t * s.v[0]; }, q, 1e-3)) <= 1e-12);

  // (t x^2 v) has Yf = x^2 v + 2 t x v^2; error ratio near 4 under halving.
  auto f = [](const SpaceTimePoint& s) { return s.t * s.t * s.t * s.x[0] * s.x[0] * s.v[0]; };
  const double t = q.t, x = q.x[0], v = q.v[0];
  const double exact = 3 * t * t * x * x * v + 2 * t * t * t * x * v * v;
  const double e1 = std::fabs(lie_derivative_fd(f, q, 1e-2) - exact);
  const double e2 = std::fabs(lie_derivative_fd(f, q, 5e-3) - exact);
  CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.05));
  CHECK_THROWS(lie_derivative_fd(f, q, 0.0));
}

TEST_CASE("Hoelder seminorm estimator") {
  std::vector<std::pair<PhasePoint, PhasePoint>> pairs;
  Stream rng(3);
  for (int i = 0; i < 2000; ++i)
    pairs.emplace_back(PhasePoint::scalar(rng.normal(), rng.normal()), PhasePoint::scalar(rng.normal(), rng.normal()));
  CHECK(holder_seminorm_estimate([](const PhasePoint&) { return 2.0; }, pairs, 0.5) == 0.0);
  const double lv = holder_seminorm_estimate([](const PhasePoint& z) { return z.v[0]; }, pairs, 1.0);
  CHECK(lv > 0.0);
  CHECK(lv <= 1.0 + 1e-12);
  const double alpha = 0.6;
  const double ln = holder_seminorm_estimate([alpha](const PhasePoint& z) { return std::pow(b_norm(z), alpha); }, pairs,
                                             alpha);
  CHECK(ln <= 1.0 + 1e-9);
  pairs.emplace_back(PhasePoint::scalar(1, 1), PhasePoint::scalar(1, 1));
  CHECK_THROWS(holder_seminorm_estimate([](const PhasePoint&) { return 0.0; }, pairs, 0.5));
}
