// Copyright 2026 The kinfp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "kinfp/drift_fields.hpp"
#include "kinfp/stats.hpp"
#include "kinfp/test_functions.hpp"

namespace kinfp {

struct InitialLaw {
  enum class Kind { Point, Gaussian, Samples };
  Kind kind = Kind::Point;
  PhasePoint point = PhasePoint::scalar(0.0, 0.0);  // location, or mean of the Gaussian
  double sd_x = 1.0;
  double sd_v = 1.0;
  std::vector<PhasePoint> samples;  // path i starts at samples[i % size]

  std::size_t dim() const;
  static InitialLaw at(const PhasePoint& z);
};

/// Reads whitespace/comma separated rows x_1..x_d v_1..v_d.
std::vector<PhasePoint> load_samples_csv(const std::string& path, std::size_t d);

enum class Scheme {
  EulerMaruyama,
  ExactTransport  // exact in law for constant drift: samples the (V, X) increments jointly
};

struct SimConfig {
  double sigma = 1.0;
  double T = 1.0;
  double dt = 0.01;
  std::size_t paths = 10000;
  std::uint64_t seed = 1;
  InitialLaw init;
  std::vector<double> radii;  // cutoff ladder for localized_solve
  double smoothness = 1.0;
  Scheme scheme = Scheme::EulerMaruyama;
  std::size_t store_every = 1;

  std::size_t steps() const;
  /// Throws std::invalid_argument on dt <= 0, T / dt not integral, unsorted radii, zero paths or a
  /// store stride that does not divide the step count.
  void validate() const;
};

/// Sentinel exit step: the path stayed inside the ball through T.
inline constexpr std::int64_t kNoExit = -1;

struct PathEnsemble {
  std::size_t d = 1;
  std::size_t paths = 0;
  double dt = 0.0;
  std::size_t steps = 0;
  std::size_t store_every = 1;
  bool shared_noise = true;  // ladder restarts reuse each path's stream
  Scheme scheme = Scheme::EulerMaruyama;
  std::vector<double> times;
  std::shared_ptr<std::vector<double>> data;  // [time][coordinate][path], coordinates x_1..x_d v_1..v_d
  std::vector<std::uint8_t> failed;
  std::vector<double> radii;
  /// Per path, one exit step per ladder radius tried (kNoExit for the radius that contained it).
  std::vector<std::vector<std::int64_t>> exit_steps;
  std::vector<double> sup_x, sup_v, sup_z;  // running maxima over every step (Euclidean)
  std::vector<double> sup_noise;            // max_k |B(t_k)|

  double at(std::size_t ti, std::size_t coord, std::size_t path) const {
    return (*data)[(ti * 2 * d + coord) * paths + path];
  }
  PhasePoint state(std::size_t ti, std::size_t path) const;
  std::size_t failed_count() const;
};

class NonFinitePaths : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class LadderExhausted : public std::runtime_error {
 public:
  LadderExhausted(std::size_t path, double last_radius, double predicted_radius);
  std::size_t path;
  double predicted_radius;
};

/// Plain time stepping of dX = V dt, dV = F dt + sqrt(2 sigma) dB; each path draws from Stream(seed, path).
PathEnsemble euler_maruyama(const DriftField& field, const SimConfig& cfg);

/// Cutoff ladder: run each path with F * eta_n for the radii in turn, restarting from time 0 with the
/// same noise after every exit from the Euclidean ball of radius n. Throws LadderExhausted.
PathEnsemble localized_solve(const DriftField& field, const SimConfig& cfg);

struct FinePath {
  std::vector<PhasePoint> states;  // every step
  std::int64_t exit_step = kNoExit;
  bool failed = false;
};

/// One path at full resolution, optionally with the drift cut off at `radius` (radius <= 0: none).
FinePath single_path(const DriftField& field, const SimConfig& cfg, std::size_t path, double radius);

/// Upper bound on sup_t |X| + |V| along a path for Euler-Maruyama with drift growth constant C:
/// (|X0| + |V0| + C (2 + d) T + sqrt(2 sigma) max|B|) exp((1 + C sqrt(d)) T).
double gronwall_envelope(double growth_c, std::size_t d, double sigma, double T, double z0_norm_sum,
                         double max_noise);

/// Weighted samples at a sequence of times. Flows built from an ensemble share its storage and are
/// coupled: sample i at every time belongs to path i.
class EmpiricalFlow {
 public:
  EmpiricalFlow(std::size_t d, std::vector<double> times, std::shared_ptr<const std::vector<double>> data,
                std::size_t samples, std::vector<std::size_t> slots, bool coupled,
                std::vector<std::vector<double>> weights = {});

  std::size_t dim() const { return d_; }
  std::size_t size() const { return n_; }
  const std::vector<double>& times() const { return times_; }
  bool coupled() const { return coupled_; }

  double coord(std::size_t ti, std::size_t c, std::size_t i) const {
    return (*data_)[(slots_[ti] * 2 * d_ + c) * n_ + i];
  }
  PhasePoint sample(std::size_t ti, std::size_t i) const;
  double weight(std::size_t ti, std::size_t i) const {
    return weights_.empty() ? 1.0 / static_cast<double>(n_) : weights_[ti][i];
  }
  double mass(std::size_t ti) const;

 private:
  std::size_t d_;
  std::vector<double> times_;
  std::shared_ptr<const std::vector<double>> data_;
  std::size_t n_;
  std::vector<std::size_t> slots_;
  bool coupled_;
  std::vector<std::vector<double>> weights_;
};

/// Uniform-weight flow on the stored time indices `subgrid` (all stored times when empty).
EmpiricalFlow empirical_flow(const PathEnsemble& ens, const std::vector<std::size_t>& subgrid = {});

/// Flow made of independent weighted clouds, one per time.
EmpiricalFlow flow_from_samples(std::vector<double> times, const std::vector<std::vector<PhasePoint>>& clouds);

struct WeakResidual {
  double t = 0.0;
  double residual = 0.0;
  double se = 0.0;
  double budget = 0.0;  // n_se * se + bias allowance
  bool pass = false;
};

/// psi(Z_t) - psi(Z_0) - int_0^t (v . grad_x psi + F . grad_v psi + sigma Lap_v psi)(Z_s) ds per path,
/// time integral by the trapezoid rule on the flow's times; mean with SE. Needs a coupled flow.
WeakResidual weak_solution_residual(const EmpiricalFlow& flow, const DriftField& field, double sigma,
                                    const TestFunction& psi, std::size_t ti, double bias_allowance = 0.0,
                                    double n_se = 3.0);

struct MomentReport {
  double m1_x0 = 0.0, m1_v0 = 0.0;
  double sup_norm_used = 0.0;  // ||F||_inf, or the cutoff sup for unbounded fields
  bool used_cutoff_sup = false;
  double bound_v = 0.0, bound_x = 0.0, bound_z = 0.0;  // Doob-type bounds on E sup
  double mean_sup_v = 0.0, mean_sup_x = 0.0, mean_sup_z = 0.0;
  double se_sup_v = 0.0, se_sup_x = 0.0, se_sup_z = 0.0;
  bool doob_applicable = false;
  bool doob_pass = false;
  std::size_t envelope_violations = 0;
  double worst_envelope_ratio = 0.0;  // max over paths of sup|Z| / envelope
  bool pass = false;
};

/// Empirical E sup |V|, E sup |X|, E sup |Z| against the Doob-type bounds (bounded fields or a ladder
/// whose largest cutoff is bounded) and the per-path Groenwall envelope (any field).
MomentReport moment_bound_check(const PathEnsemble& ens, const DriftField& field, double sigma, double T);

/// Binary layout: "KFPPATH1", u64 d, u64 paths, u64 n_times, n_times f64 times, then for each time and
/// each coordinate x_1..x_d v_1..v_d the f64 values of all paths; little-endian throughout.
void write_paths_binary(const PathEnsemble& ens, const std::string& path);
PathEnsemble read_paths_binary(const std::string& path);

}  // namespace kinfp
