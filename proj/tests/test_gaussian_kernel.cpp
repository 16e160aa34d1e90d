#include "test_main.hpp"

#include <cmath>
#include <numbers>

#include <boost/math/quadrature/sinh_sinh.hpp>

#include "kinfp/gaussian_kernel.hpp"
#include "kinfp/rng.hpp"
#include "kinfp/stats.hpp"

using namespace kinfp;

namespace {
const KernelSpec kGen{1.0, Convention::Generator};
const KernelSpec kPaper{1.0, Convention::Paper};
}  // namespace

TEST_CASE("covariance blocks in both conventions") {
  const auto p = covariance(1.0, 1.0, Convention::Paper, 1);
  CHECK(p.block.xx == doctest::Approx(1.0 / 3.0));
  CHECK(p.block.xv == doctest::Approx(0.5));
  CHECK(p.block.vv == doctest::Approx(1.0));
  CHECK(p.det == doctest::Approx(1.0 / 12.0).epsilon(1e-14));

  const auto g = covariance(1.0, 1.0, Convention::Generator, 1);
  CHECK(g.block.xx == doctest::Approx(2.0 / 3.0));
  CHECK(g.block.xv == doctest::Approx(1.0));
  CHECK(g.block.vv == doctest::Approx(2.0));
  CHECK(g.det == doctest::Approx(1.0 / 3.0).epsilon(1e-14));

  // the closed forms agree with direct 2x2 algebra; the determinant scales as lambda^{2d}
  for (double lambda : {0.3, 1.0, 2.5}) {
    for (double t : {0.01, 0.4, 3.0}) {
      const auto c = covariance(lambda, t, Convention::Paper, 2);
      CHECK(c.det == doctest::Approx(std::pow(c.block.det(), 2)).epsilon(1e-12));
      CHECK(c.det == doctest::Approx(std::pow(lambda, 4) * std::pow(t, 8) / 144.0).epsilon(1e-12));
      const Block inv = c.block.inverse();
      CHECK(c.inv.xx == doctest::Approx(inv.xx).epsilon(1e-12));
      CHECK(c.inv.xv == doctest::Approx(inv.xv).epsilon(1e-12));
      CHECK(c.inv.vv == doctest::Approx(inv.vv).epsilon(1e-12));
    }
  }
  CHECK_THROWS(covariance(1.0, 0.0, Convention::Paper, 1));
  CHECK_THROWS(covariance(-1.0, 1.0, Convention::Paper, 1));
}

TEST_CASE("peak value and positivity") {
  const auto z = PhasePoint::scalar(0.2, -0.7);
  const double peak = eval_P(kGen, 0.0, z, 1.0, shift(1.0, z));
  CHECK(peak == doctest::Approx(1.0 / (2.0 * std::numbers::pi * std::sqrt(1.0 / 3.0))).epsilon(1e-13));
  CHECK(peak == doctest::Approx(0.275664).epsilon(1e-6));
  CHECK(log_P(kGen, 0.0, z, 0.01, PhasePoint::scalar(50.0, 50.0)) < -700.0);
  CHECK(std::isfinite(log_P(kGen, 0.0, z, 0.01, PhasePoint::scalar(50.0, 50.0))));
  CHECK_THROWS(eval_P(kGen, 1.0, z, 1.0, z));
}

TEST_CASE("normalization in y and z against sinh-sinh quadrature") {
  const auto z = PhasePoint::scalar(0.4, 1.1);
  const auto y = PhasePoint::scalar(-0.3, 0.5);
  for (const auto& k : {kGen, kPaper}) {
    const auto n = normalization_check(k, 0.2, z, 1.0, y);
    CHECK(std::fabs(n.over_y - 1.0) <= 1e-8);
    CHECK(std::fabs(n.over_z - 1.0) <= 1e-8);
  }
  boost::math::quadrature::sinh_sinh<double> ss;
  const double gap = 0.5;
  const PhasePoint m = shift(gap, z);
  const double total = ss.integrate([&](double a) {
    return ss.integrate([&](double b) {
      const double p = eval_P(kGen, 0.0, z, gap, PhasePoint::scalar(m.x[0] + a, m.v[0] + b));
      return std::isfinite(p) ? p : 0.0;
    });
  });
  CHECK(std::fabs(total - 1.0) <= 1e-8);
}

TEST_CASE("analytic v-gradient matches central differences") {
  Stream rng(11);
  for (int n = 0; n < 100; ++n) {
    const auto z = PhasePoint::scalar(rng.normal(), rng.normal());
    const double gap = 0.1 + rng.uniform();
    const auto m = shift(gap, z);
    const auto y = PhasePoint::scalar(m.x[0] + 0.5 * rng.normal() * gap, m.v[0] + 0.5 * rng.normal());
    const double g = grad_v_P(kGen, 0.0, z, gap, y)[0];
    const double h = 1e-5;
    auto zp = z, zm = z;
    zp.v[0] += h;
    zm.v[0] -= h;
    const double fd = (eval_P(kGen, 0.0, zp, gap, y) - eval_P(kGen, 0.0, zm, gap, y)) / (2 * h);
    CHECK(std::fabs(g - fd) <= 1e-6 * std::max(std::fabs(g), 1e-3 * eval_P(kGen, 0.0, z, gap, y)));
  }
  const auto z = PhasePoint::scalar(0.5, 0.5);
  CHECK(std::fabs(grad_v_P(kGen, 0.0, z, 1.0, shift(1.0, z))[0]) <= 1e-15);
}

TEST_CASE("fitted gradient constant is finite") {
  const double c = fit_gradient_constant(kGen, 0.1, 0.01, 1.0);
  CHECK(std::isfinite(c));
  CHECK(c > 0.0);
}

TEST_CASE("translation covariance and dilation scaling") {
  Stream rng(5);
  for (int n = 0; n < 200; ++n) {
    const auto z = PhasePoint::scalar(rng.normal(), rng.normal());
    const auto y = PhasePoint::scalar(rng.normal(), rng.normal());
    const double s = rng.uniform(), t = s + 0.05 + rng.uniform();
    const double p = eval_P(kGen, s, z, t, y);
    // left translation by g acts on both space-time points
    const auto g = SpaceTimePoint::scalar(rng.normal(), rng.normal(), rng.normal());
    const auto a = compose(g, SpaceTimePoint(s, z)), b = compose(g, SpaceTimePoint(t, y));
    CHECK(eval_P(kGen, a.t, a.phase(), b.t, b.phase()) == doctest::Approx(p).epsilon(1e-9));
    const double r = 0.5 + rng.uniform() * 2.0;
    const auto da = dilate(r, SpaceTimePoint(s, z)), db = dilate(r, SpaceTimePoint(t, y));
    const double scaled = eval_P(kGen, da.t, da.phase(), db.t, db.phase());
    CHECK(std::fabs(scaled * std::pow(r, 4.0) - p) <= 1e-10 * std::max(p, 1e-300) + 1e-300);
  }
}

TEST_CASE("Chapman-Kolmogorov: closed form and quadrature") {
  Stream rng(9);
  for (int n = 0; n < 100; ++n) {
    const double s = rng.uniform(), tau = s + 0.05 + rng.uniform(), t = tau + 0.05 + rng.uniform();
    const auto z = PhasePoint::scalar(rng.normal(), rng.normal());
    const auto m = shift(t - s, z);
    const auto y = PhasePoint::scalar(m.x[0] + 0.3 * rng.normal(), m.v[0] + 0.5 * rng.normal());
    const auto r = chapman_kolmogorov_check(kGen, s, tau, t, z, y, n < 10);
    CHECK(r.closed_form <= 1e-12);
    if (n < 10) CHECK(r.quadrature <= 1e-6);
  }
  // composition with a nearly degenerate first factor
  const auto z = PhasePoint::scalar(0.1, 0.2);
  const auto r = chapman_kolmogorov_check(kGen, 0.0, 1e-6, 1.0, z, PhasePoint::scalar(0.3, 0.1), false);
  CHECK(r.closed_form <= 1e-12);
  CHECK_THROWS(chapman_kolmogorov_check(kGen, 0.5, 0.2, 1.0, z, z));
}

TEST_CASE("backward equation residual arbitrates the convention") {
  const std::vector<double> gaps{0.05, 0.2, 0.5, 1.0};
  const std::vector<double> offsets{-2.0, -1.0, 0.0, 0.7, 1.5};
  const auto g = kernel_pde_residual(kGen, gaps, offsets);
  CHECK(g.with_lambda <= 1e-4);
  CHECK(g.with_half_lambda > 1e-2);
  const auto p = kernel_pde_residual(kPaper, gaps, offsets);
  CHECK(p.with_half_lambda <= 1e-4);
  CHECK(p.with_lambda > 1e-2);
  CHECK(p.diagnostic.find("factor-2") != std::string::npos);
}

TEST_CASE("sampling: moments, determinism and KS projections") {
  const auto z = PhasePoint::scalar(0.5, -1.0);
  const std::size_t n = 200000;
  const auto a = sample(kGen, 0.0, z, 1.0, n, 77);
  const auto b = sample(kGen, 0.0, z, 1.0, n, 77);
  bool same = true;
  for (std::size_t i = 0; i < n; ++i) same = same && a[i].x[0] == b[i].x[0] && a[i].v[0] == b[i].v[0];
  CHECK(same);
  std::vector<double> xs(n), vs(n);
  for (std::size_t i = 0; i < n; ++i) {
    xs[i] = a[i].x[0];
    vs[i] = a[i].v[0];
  }
  const auto m = shift(1.0, z);
  const auto mx = mean_se(xs), mv = mean_se(vs);
  CHECK(std::fabs(mx.mean - m.x[0]) <= 4 * mx.se);
  CHECK(std::fabs(mv.mean - m.v[0]) <= 4 * mv.se);
  const auto cxx = covariance_se(xs, xs), cxv = covariance_se(xs, vs), cvv = covariance_se(vs, vs);
  CHECK(std::fabs(cxx.mean - 2.0 / 3.0) <= 4 * cxx.se);
  CHECK(std::fabs(cxv.mean - 1.0) <= 4 * cxv.se);
  CHECK(std::fabs(cvv.mean - 2.0) <= 4 * cvv.se);

  std::vector<double> proj(100000);
  const double ux = 0.6, uv = 0.8;
  for (std::size_t i = 0; i < proj.size(); ++i) proj[i] = ux * a[i].x[0] + uv * a[i].v[0];
  const double pm = ux * m.x[0] + uv * m.v[0];
  const double psd = std::sqrt(ux * ux * 2.0 / 3.0 + 2 * ux * uv * 1.0 + uv * uv * 2.0);
  const auto ks = ks_one_sample(proj, [&](double q) { return normal_cdf((q - pm) / psd); });
  CHECK(ks.p_value > 0.01);
}
