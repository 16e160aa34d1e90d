#include "test_main.hpp"

#include <cmath>

#include "kinfp/drift_fields.hpp"
#include "kinfp/rng.hpp"

using namespace kinfp;

TEST_CASE("built-in fields evaluate as declared") {
  const auto z = PhasePoint::scalar(2.0, -1.0);
  CHECK(zero_field(1).eval(0.3, z)[0] == 0.0);
  CHECK(constant_field(Vec{0.7}).eval(0.3, z)[0] == 0.7);
  CHECK(oscillatory_field(1, 0.5).eval(0.0, z)[0] == doctest::Approx(0.5 * std::sin(1.0)));
  const auto h = holder_field(1, 1.0, 0.5, 3);
  CHECK(std::fabs(h.eval(0.0, z)[0]) == doctest::Approx(std::pow(b_norm(z), 0.5)));
  CHECK(h.eval(0.0, PhasePoint::scalar(0, 0))[0] == 0.0);
  CHECK_THROWS_AS(DriftField("bad", 1, [](double, const PhasePoint&, double* o) { o[0] = 0; }, 1.0, 1.5,
                             [](double) { return HolderData{1, 1}; }),
                  std::invalid_argument);
  CHECK_THROWS_AS(DriftField("bad", 1, [](double, const PhasePoint&, double* o) { o[0] = 0; }, 1.0, 0.5,
                             [](double) { return HolderData{1, 0.4}; }),
                  std::invalid_argument);
  DriftField nan("nan", 1, [](double, const PhasePoint&, double* o) { o[0] = std::nan(""); }, 1.0, 0.5,
                 [](double) { return HolderData{1, 1}; });
  CHECK_THROWS_AS(nan.eval(0.0, z), NonFiniteDrift);
}

TEST_CASE("holder profile is C1 at r = 1 and dominated by r^beta") {
  for (double beta : {0.2, 0.5, 0.8}) {
    const double e = 1e-7;
    const double left = (holder_profile(1.0, beta) - holder_profile(1.0 - e, beta)) / e;
    const double right = (holder_profile(1.0 + e, beta) - holder_profile(1.0, beta)) / e;
    CHECK(left == doctest::Approx(right).epsilon(1e-5));
    for (double r = 0.001; r < 5; r *= 1.3) CHECK(holder_profile(r, beta) <= 1.0 + std::pow(r, beta));
  }
}

TEST_CASE("growth estimates") {
  const auto z = estimate_growth(zero_field(1), 1000.0, 400);
  CHECK(z.c_hat == 0.0);
  CHECK(z.pass);
  const auto c = estimate_growth(constant_field(Vec{-0.8}), 1000.0, 400);
  CHECK(std::fabs(c.beta_hat) <= 1e-12);
  CHECK(c.pass);
  for (double beta : {0.3, 0.5, 0.7}) {
    const auto g = estimate_growth(holder_field(1, 0.7, beta, 1), 1000.0, 2000);
    CHECK(std::fabs(g.beta_hat - beta) <= 0.05);
    CHECK(g.pass);
  }
  const auto o = estimate_growth(oscillatory_field(1, 0.4), 1000.0, 400);
  CHECK(o.pass);
  CHECK_THROWS(estimate_growth(zero_field(1), 1000.0, 10));
}

TEST_CASE("local Hoelder estimates") {
  const std::vector<double> tg{0.0, 0.5, 1.0};
  CHECK(estimate_local_holder(constant_field(Vec{1.0}), 5.0, tg, 500, 1.0).L_hat == 0.0);
  DriftField vf("v", 1, [](double, const PhasePoint& z, double* o) { o[0] = z.v[0]; }, 1.0, 0.5,
                [](double) { return HolderData{1.0, 1.0}; });
  for (double R : {1.0, 5.0, 50.0}) CHECK(estimate_local_holder(vf, R, tg, 2000, 1.0).L_hat <= 1.0 + 1e-9);
  const auto h = holder_field(1, 1.0, 0.5, 2);
  const auto e = estimate_local_holder(h, 5.0, tg, 5000, 1.0);
  CHECK(std::isfinite(e.L_hat));
  CHECK(e.L_hat <= h.holder(5.0).L * (1 + 1e-9));
}

TEST_CASE("validators are monotone in the sample size") {
  const auto h = holder_field(1, 1.0, 0.5, 2);
  const std::vector<double> tg{0.0};
  double prev_l = 0.0, prev_c = 0.0;
  for (std::size_t n : {100u, 200u, 400u, 800u}) {
    const double l = estimate_local_holder(h, 3.0, tg, n, 1.0).L_hat;
    const double c = estimate_growth(h, 100.0, n).c_hat;
    CHECK(l >= prev_l);
    CHECK(c >= prev_c);
    prev_l = l;
    prev_c = c;
  }
}

TEST_CASE("cutoff drift") {
  const auto h = holder_field(1, 1.0, 0.5, 2);
  const auto hc = cutoff_drift(h, 3.0);
  Stream rng(1);
  for (int i = 0; i < 5000; ++i) {
    const auto z = PhasePoint::scalar(4 * rng.normal(), 4 * rng.normal());
    const double r = euclidean_norm(z);
    const double f = h.eval(0, z)[0], fc = hc.eval(0, z)[0];
    if (r <= 3.0) CHECK(fc == f);
    if (r >= 4.0) CHECK(fc == 0.0);
    CHECK(std::fabs(fc) <= hc.sup_norm());
  }
  double prev = 1.0, max_jump = 0.0;
  for (int i = 0; i <= 20000; ++i) {
    const double w = cutoff_weight(3.0 + i / 20000.0, 3.0, 1.0);
    CHECK(w >= 0.0);
    CHECK(w <= 1.0);
    max_jump = std::max(max_jump, std::fabs(w - prev));
    prev = w;
  }
  CHECK(max_jump < 1e-3);
  CHECK(hc.bounded());
}
