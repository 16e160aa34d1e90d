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

#include <cstddef>
#include <memory>
#include <mutex>
#include <vector>

#include "kinfp/drift_fields.hpp"
#include "kinfp/gaussian_kernel.hpp"
#include "kinfp/lie_group.hpp"
#include "kinfp/parametrix.hpp"
#include "kinfp/test_functions.hpp"

namespace kinfp {

class EmpiricalFlow;

/// Terminal value problem  sigma Lap_v u + Y u + F . grad_v u = Psi on (0, T),  u(T) = g,
/// with source Psi(t, z) = (T - t)^{-gamma} psi(z).
struct BackwardProblem {
  double T = 1.0;
  TestFunction g;    // empty means g = 0
  TestFunction psi;  // empty means psi = 0
  double gamma = 0.0;
  double beta_psi = 0.5;
  double beta_g = 0.0;

  /// Throws std::invalid_argument unless T > 0, gamma in [0, 1), beta_psi in (0, alpha), beta_g in [0, 2 + beta_psi].
  void validate(double alpha) const;
  std::size_t dim() const;
  double source(double t, const PhasePoint& z) const;
};

struct BackwardConfig {
  double sigma = 1.0;
  Convention convention = Convention::Generator;
  int depth = 3;                  // fixed-point corrections for the drift
  std::size_t grid_t = 17;        // table nodes on [0, T]
  std::size_t grid_z = 33;        // table nodes per phase coordinate
  double box = 6.0;               // tables cover [-box, box]^2; gradients vanish outside
  std::size_t time_order = 8;     // Gauss-Legendre nodes for the correction integrals
  std::size_t space_order = 12;   // nodes per coordinate for the correction integrals (panel rule in x)
  std::size_t source_order = 16;  // Gauss-Legendre nodes for the driftless source integral
  std::size_t bump_order = 12;    // Gauss-Hermite nodes per coordinate for bump expectations

  void validate() const;
};

/// Driftless solution and its v-gradient at one point.
struct DriftlessValue {
  double value = 0.0;
  Vec grad_v;
};

/// E[h(Y)] and E[grad h(Y)] for Y ~ N(mean, block covariance): exact for Gaussian terms,
/// Gauss-Hermite or Gauss-Legendre on the support for bumps. A zero `cov` evaluates at the mean.
struct Expectation {
  double value = 0.0;
  Vec dx, dv;
};
Expectation test_function_expectation(const TestFunction& h, const PhasePoint& mean, const Block& cov,
                                      std::size_t bump_order);

/// Solution of the problem with F = 0 (any d), with its v-gradient.
DriftlessValue driftless_solution(const BackwardProblem& pb, const KernelSpec& k, double t, const PhasePoint& z,
                                  std::size_t source_order = 16, std::size_t bump_order = 12);

/// Fixed-point solver for d = 1: the v-gradient D of u solves
///   D = grad_v U0 + int_t^T int grad_v P(t,z; tau,w) F(tau,w) D(tau,w) dw dtau,
/// iterated `depth` times on a (t, x, v) table; u = U0 + int int P F D.
class BackwardSolver {
 public:
  BackwardSolver(DriftField field, BackwardProblem problem, BackwardConfig cfg);

  const BackwardProblem& problem() const { return pb_; }
  const BackwardConfig& config() const { return cfg_; }
  const DriftField& field() const { return field_; }
  KernelSpec kernel() const { return {cfg_.sigma, cfg_.convention}; }

  /// u(t, z) by quadrature over the gradient table.
  double u(double t, const PhasePoint& z) const;
  /// Tricubic interpolation of a u table (cheap; for large sample sets).
  double u_table(double t, const PhasePoint& z) const;
  /// Interpolated v-gradient of u.
  double grad_v(double t, const PhasePoint& z) const;

 private:
  struct Table {
    std::size_t nt = 0, nz = 0;
    double T = 1.0, box = 1.0;
    std::vector<double> data;
    double& at(std::size_t i, std::size_t j, std::size_t l) { return data[(i * nz + j) * nz + l]; }
    double interp(double t, double x, double v) const;
  };
  double correction(double t, double x, double v, const Table& D, bool gradient) const;

  DriftField field_;
  BackwardProblem pb_;
  BackwardConfig cfg_;
  double scale_;
  Table grad_;  // D_{depth - 1}; empty for F = 0
  Table next_;  // D_depth, the gradient of u
  mutable Table u_;  // built on first use of u_table
  std::shared_ptr<std::once_flag> u_once_ = std::make_shared<std::once_flag>();
};

/// u(t, z) from the representation with p evaluated by the parametrix (d = 1); slow cross-check.
double solve_u_direct(const Parametrix& par, const BackwardProblem& pb, double t, const PhasePoint& z,
                      std::size_t time_order = 6, std::size_t space_order = 6);

using SourceField = std::function<double(const SpaceTimePoint&)>;

struct ResidualReport {
  double max_residual = 0.0;  // normalised by sup |Psi| + 1 over the grid
  double max_raw = 0.0;
  double sup_source = 0.0;
  std::size_t points = 0;
};

/// max |sigma Lap_v u + Y u + F . grad_v u - Psi| over the grid by central differences (step h).
ResidualReport strong_lie_residual(const SpaceTimeField& u, const DriftField& field, double sigma,
                                   const SourceField& source, const std::vector<SpaceTimePoint>& grid, double h);

struct DualityPoint {
  double t = 0.0;
  double mean = 0.0;  // int u(t) dmu_t - int g dmu_T + int_t^T int psi dmu_s ds
  double se = 0.0;
  bool pass = false;
};

/// Evaluates the duality identity at each stored time index in `time_indices` (gamma = 0 only).
std::vector<DualityPoint> duality_identity_check(const BackwardSolver& solver, const EmpiricalFlow& flow,
                                                 const std::vector<std::size_t>& time_indices, double n_se = 3.0);

struct GradientBound {
  double c_beta_psi = 0.0;
  double sup_u = 0.0;
  double sup_grad_v = 0.0;
  double C_u = 0.0;  // smallest constant with sup|u| + sup|grad_v u| <= C_u C_beta(psi)
  bool pass = false;
};

GradientBound gradient_bound_check(const BackwardSolver& solver, const std::vector<SpaceTimePoint>& grid);

struct TerminalAttainment {
  std::vector<double> gaps;  // T - t
  std::vector<double> sup_error;
  double rate = 0.0;  // log-log slope of sup_error against gaps
};

TerminalAttainment terminal_attainment(const BackwardSolver& solver, const std::vector<double>& gaps,
                                       const std::vector<PhasePoint>& compact);

/// ||u(t)||_{L1} / ||psi||_{L1} with u integrated by Gauss-Legendre on the solver box (d = 1).
double l1_ratio(const BackwardSolver& solver, double t, std::size_t order = 24);

}  // namespace kinfp
