#include "test_main.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "kinfp/langevin_sim.hpp"
#include "kinfp/stats.hpp"

using namespace kinfp;

namespace {

SimConfig base_config(std::size_t paths, double dt, std::uint64_t seed = 5) {
  SimConfig cfg;
  cfg.paths = paths;
  cfg.dt = dt;
  cfg.seed = seed;
  cfg.init = InitialLaw::at(PhasePoint::scalar(0.0, 0.0));
  return cfg;
}

std::vector<double> column(const PathEnsemble& e, std::size_t ti, std::size_t coord) {
  std::vector<double> out(e.paths);
  for (std::size_t p = 0; p < e.paths; ++p) out[p] = e.at(ti, coord, p);
  return out;
}

// Strong sublinear growth so that small balls are left quickly.
DriftField steep_field() { return holder_field(1, 6.0, 0.9, 17); }

}  // namespace

TEST_CASE("configuration validation") {
  SimConfig cfg = base_config(10, 0.01);
  CHECK_NOTHROW(cfg.validate());
  CHECK(cfg.steps() == 100);
  cfg.dt = 0.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.dt = 0.03;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.dt = 0.01;
  cfg.radii = {4.0, 2.0};
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.radii = {2.0, 4.0};
  cfg.paths = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.paths = 10;
  cfg.store_every = 3;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.store_every = 4;
  CHECK_NOTHROW(cfg.validate());
  CHECK_THROWS_AS(euler_maruyama(zero_field(2), base_config(10, 0.01)), DimensionError);
}

TEST_CASE("driftless covariance at the horizon") {
  const double T = 1.0, sigma = 1.0;
  SimConfig cfg = base_config(40000, 0.01);
  cfg.scheme = Scheme::ExactTransport;
  cfg.store_every = 100;
  const PathEnsemble e = euler_maruyama(zero_field(1), cfg);
  REQUIRE(e.times.size() == 2);
  const auto x = column(e, 1, 0), v = column(e, 1, 1);
  const MeanSE vxx = covariance_se(x, x), vxv = covariance_se(x, v), vvv = covariance_se(v, v);
  CHECK(std::abs(vxx.mean - 2.0 * sigma * T * T * T / 3.0) <= 4.0 * vxx.se);
  CHECK(std::abs(vxv.mean - sigma * T * T) <= 4.0 * vxv.se);
  CHECK(std::abs(vvv.mean - 2.0 * sigma * T) <= 4.0 * vvv.se);

  SimConfig em = base_config(40000, 0.002);
  em.store_every = 500;
  const PathEnsemble f = euler_maruyama(zero_field(1), em);
  const auto fx = column(f, 1, 0);
  const MeanSE exx = covariance_se(fx, fx);
  CHECK(std::abs(exx.mean - 2.0 / 3.0) <= 4.0 * exx.se + 2.0 * em.dt);
}

TEST_CASE("constant drift means") {
  const double c = 1.5;
  SimConfig cfg = base_config(20000, 0.01);
  cfg.scheme = Scheme::ExactTransport;
  cfg.init = InitialLaw::at(PhasePoint::scalar(0.5, -0.3));
  cfg.store_every = 50;
  const PathEnsemble e = euler_maruyama(constant_field(Vec{c}), cfg);
  const MeanSE mx = mean_se(column(e, 2, 0)), mv = mean_se(column(e, 2, 1));
  CHECK(std::abs(mv.mean - (-0.3 + c)) <= 3.0 * mv.se);
  CHECK(std::abs(mx.mean - (0.5 - 0.3 + 0.5 * c)) <= 3.0 * mx.se);
}

TEST_CASE("halving the step reduces the weak error") {
  const double c = 2.0;
  const double exact = 0.5 * c;
  std::vector<double> err;
  for (double dt : {0.1, 0.05, 0.025}) {
    SimConfig cfg = base_config(20000, dt, 3);
    cfg.store_every = cfg.steps();
    const PathEnsemble e = euler_maruyama(constant_field(Vec{c}), cfg);
    err.push_back(std::abs(mean_se(column(e, 1, 0)).mean - exact));
  }
  CHECK(err[1] < err[0]);
  CHECK(err[2] < err[1]);
}

TEST_CASE("cutoff weight transitions smoothly") {
  CHECK(cutoff_weight(1.0, 2.0, 1.0) == 1.0);
  CHECK(cutoff_weight(2.0, 2.0, 1.0) == 1.0);
  CHECK(cutoff_weight(3.0, 2.0, 1.0) == 0.0);
  CHECK(cutoff_weight(5.0, 2.0, 1.0) == 0.0);
  double prev = 1.0;
  for (double r = 2.0; r <= 3.0; r += 0.05) {
    const double w = cutoff_weight(r, 2.0, 1.0);
    CHECK(w <= prev + 1e-15);
    CHECK(w >= 0.0);
    prev = w;
  }
}

TEST_CASE("cutoff ladder") {
  SimConfig cfg = base_config(400, 0.005, 11);
  cfg.T = 0.5;
  cfg.radii = {1.5, 3.0, 6.0, 12.0, 24.0, 48.0};
  const DriftField f = steep_field();
  const PathEnsemble e = localized_solve(f, cfg);
  std::size_t restarted = 0;
  for (std::size_t p = 0; p < cfg.paths; ++p) {
    const auto& ex = e.exit_steps[p];
    REQUIRE(!ex.empty());
    CHECK(ex.back() == kNoExit);
    for (std::size_t j = 0; j + 1 < ex.size(); ++j) {
      CHECK(ex[j] >= 0);
      if (j + 2 < ex.size()) CHECK(ex[j + 1] >= ex[j]);
    }
    if (ex.size() > 1) ++restarted;
  }
  CHECK(restarted > 0);

  SUBCASE("stored path equals the rerun at the final radius") {
    for (std::size_t p : {0u, 7u, 123u}) {
      const double radius = cfg.radii[e.exit_steps[p].size() - 1];
      const FinePath fp = single_path(f, cfg, p, radius);
      REQUIRE(fp.states.size() == cfg.steps() + 1);
      for (std::size_t k = 0; k < e.times.size(); ++k) {
        CHECK(fp.states[k].x[0] == e.at(k, 0, p));
        CHECK(fp.states[k].v[0] == e.at(k, 1, p));
      }
    }
  }
  SUBCASE("exhaustion reports the failing path") {
    SimConfig tight = cfg;
    tight.radii = {1.0};
    try {
      localized_solve(f, tight);
      FAIL("expected LadderExhausted");
    } catch (const LadderExhausted& ex) {
      CHECK(ex.path == 0);
      CHECK(ex.predicted_radius > 1.0);
    }
  }
}

TEST_CASE("moment bounds") {
  SUBCASE("bounded field: Doob bounds and the envelope") {
    SimConfig cfg = base_config(4000, 0.01, 2);
    cfg.init.kind = InitialLaw::Kind::Gaussian;
    const DriftField f = oscillatory_field(1, 1.0);
    const PathEnsemble e = euler_maruyama(f, cfg);
    const MomentReport r = moment_bound_check(e, f, 1.0, 1.0);
    CHECK(r.doob_applicable);
    CHECK_FALSE(r.used_cutoff_sup);
    CHECK(r.doob_pass);
    CHECK(r.envelope_violations == 0);
    CHECK(r.worst_envelope_ratio < 1.0);
    CHECK(r.pass);
  }
  SUBCASE("two dimensions") {
    SimConfig cfg = base_config(2000, 0.01, 4);
    cfg.init = InitialLaw::at(PhasePoint({0.3, -0.2}, {0.1, 0.0}));
    const DriftField f = oscillatory_field(2, 0.7);
    const MomentReport r = moment_bound_check(euler_maruyama(f, cfg), f, 1.0, 1.0);
    CHECK(r.pass);
  }
  SUBCASE("unbounded field uses the largest cutoff") {
    SimConfig cfg = base_config(500, 0.005, 8);
    cfg.T = 0.5;
    cfg.radii = {3.0, 6.0, 12.0, 24.0, 48.0};
    const DriftField f = steep_field();
    const MomentReport r = moment_bound_check(localized_solve(f, cfg), f, 1.0, 0.5);
    CHECK(r.used_cutoff_sup);
    CHECK(r.doob_pass);
  }
}

TEST_CASE("runs are deterministic in the seed") {
  SimConfig cfg = base_config(300, 0.01, 21);
  cfg.init.kind = InitialLaw::Kind::Gaussian;
  const DriftField f = oscillatory_field(1, 1.0);
  const PathEnsemble a = euler_maruyama(f, cfg), b = euler_maruyama(f, cfg);
  CHECK(*a.data == *b.data);
  cfg.seed = 22;
  const PathEnsemble c = euler_maruyama(f, cfg);
  CHECK(*a.data != *c.data);
}

TEST_CASE("empirical flows") {
  SimConfig cfg = base_config(5000, 0.01, 6);
  cfg.scheme = Scheme::ExactTransport;
  cfg.store_every = 10;
  const PathEnsemble e = euler_maruyama(zero_field(1), cfg);
  const EmpiricalFlow flow = empirical_flow(e, {0, 5, 10});
  CHECK(flow.coupled());
  CHECK(flow.times().size() == 3);
  CHECK(flow.times()[2] == doctest::Approx(1.0));
  for (std::size_t ti = 0; ti < 3; ++ti) CHECK(flow.mass(ti) == doctest::Approx(1.0));
  CHECK(flow.sample(1, 17).v[0] == e.at(5, 1, 17));

  // V_T ~ N(0, 2) with sigma = 1
  const KSResult ks = ks_one_sample(column(e, 10, 1), [](double x) { return normal_cdf(x / std::sqrt(2.0)); });
  CHECK(ks.p_value > 1e-3);

  const EmpiricalFlow ind = flow_from_samples({0.0, 1.0}, {{PhasePoint::scalar(0, 0), PhasePoint::scalar(1, 1)},
                                                           {PhasePoint::scalar(2, 2), PhasePoint::scalar(3, 1)}});
  CHECK_FALSE(ind.coupled());
  CHECK(ind.mass(0) == doctest::Approx(1.0));
  CHECK(ind.mass(1) == doctest::Approx(1.0));
}

TEST_CASE("weak formulation residual") {
  SimConfig cfg = base_config(20000, 0.005, 13);
  cfg.init.kind = InitialLaw::Kind::Gaussian;
  cfg.init.sd_x = 0.5;
  cfg.init.sd_v = 0.5;
  cfg.store_every = 2;
  const DriftField f = oscillatory_field(1, 1.0);
  const PathEnsemble e = euler_maruyama(f, cfg);
  const EmpiricalFlow flow = empirical_flow(e);
  const TestFunction psi = TestFunction::gaussian(PhasePoint::scalar(0.2, 0.1), 0.8);
  for (std::size_t ti : {0u, 25u, 50u, 100u}) {
    const WeakResidual r = weak_solution_residual(flow, f, 1.0, psi, ti, 0.0);
    CHECK(r.pass);
  }
  CHECK_THROWS_AS(weak_solution_residual(flow, f, 1.0, TestFunction(1), 10), std::invalid_argument);
}

TEST_CASE("binary path files round trip") {
  SimConfig cfg = base_config(64, 0.01, 3);
  cfg.init = InitialLaw::at(PhasePoint({0.1, 0.2}, {-0.3, 0.4}));
  cfg.store_every = 25;
  const PathEnsemble e = euler_maruyama(oscillatory_field(2, 1.0), cfg);
  const auto file = std::filesystem::temp_directory_path() / "kinfp_paths_roundtrip.bin";
  write_paths_binary(e, file.string());
  CHECK(std::filesystem::file_size(file) == 8 + 3 * 8 + 5 * 8 + 5 * 4 * 64 * 8);
  const PathEnsemble r = read_paths_binary(file.string());
  CHECK(r.d == 2);
  CHECK(r.paths == 64);
  CHECK(r.times == e.times);
  CHECK(*r.data == *e.data);
  std::filesystem::remove(file);
  CHECK_THROWS(read_paths_binary(file.string()));
}

TEST_CASE("Groenwall envelope formula") {
  const double env = gronwall_envelope(2.0, 1, 1.0, 1.0, 1.0, 0.5);
  CHECK(env == doctest::Approx((1.0 + 2.0 * 3.0 + std::sqrt(2.0) * 0.5) * std::exp(3.0)));
}
