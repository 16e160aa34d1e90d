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
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "kinfp/drift_fields.hpp"
#include "kinfp/gaussian_kernel.hpp"
#include "kinfp/series_bounds.hpp"

namespace kinfp {

enum class EvalMode { Tensor, MonteCarlo };

struct ParametrixConfig {
  double sigma = 1.0;
  int depth = 3;
  double delta = 0.1;
  double eps = 0.2;
  double eta = 0.5;
  std::size_t time_order = 6;
  std::size_t space_order = 3;
  EvalMode mode = EvalMode::Tensor;
  std::size_t mc_paths = 20000;
  std::uint64_t seed = 1;
  Convention convention = Convention::Generator;
  double c_beta = 1.0;
  double grad_const = 0.0;  // <= 0: fitted on construction
  double horizon = 1.0;
  double tail_tolerance = 1e-2;

  /// Throws std::invalid_argument unless N >= 0, orders >= 2, eta in (0, 1/beta - 1) and S < 1.
  void validate(double beta) const;
};

struct PValue {
  double value = 0.0;
  double tail_bound = 0.0;
  bool negative = false;
  bool tail_warning = false;
  std::vector<double> partial;  // p_0 .. p_N
};

struct MCValue {
  double value = 0.0;
  double se = 0.0;
  bool unreliable = false;
  std::vector<double> term_means;  // contribution of each series term
  std::vector<double> term_se;
};

struct YBox {
  double x_lo = 0.0, x_hi = 0.0, v_lo = 0.0, v_hi = 0.0;
};

using TargetKernel = std::function<double(double tau, const PhasePoint& eta)>;

class Parametrix {
 public:
  Parametrix(DriftField field, ParametrixConfig cfg);

  const DriftField& field() const { return field_; }
  const ParametrixConfig& config() const { return cfg_; }
  KernelSpec kernel() const { return {cfg_.sigma, cfg_.convention}; }
  BoundConstants bound_constants() const;

  double phi1(double s, const PhasePoint& z, double t, const PhasePoint& y) const;
  /// phi_1 .. phi_n at (s, z; t, y) by nested tensor quadrature (d = 1).
  std::vector<double> phi_terms(double s, const PhasePoint& z, double t, const PhasePoint& y, int n) const;

  PValue eval_p(double s, const PhasePoint& z, double t, const PhasePoint& y) const;
  MCValue mc_eval_p(double s, const PhasePoint& z, double t, const PhasePoint& y) const;

  /// Dispatches on the configured mode; the tail bound is only filled for Tensor mode.
  PValue p(double s, const PhasePoint& z, double t, const PhasePoint& y) const;

  /// int p(s, z; t, y) psi(y) dy (d = 1); entry k is the depth-k truncation. Gauss-Hermite around the
  /// driftless law by default, Gauss-Legendre on the box when psi is supported in one.
  std::vector<double> integrate_against(double s, const PhasePoint& z, double t,
                                        const std::function<double(const PhasePoint&)>& psi, std::size_t order = 12,
                                        const std::optional<YBox>& box = std::nullopt) const;
  /// Same integral by forward Monte Carlo over the series (any d).
  MCValue mc_integrate_against(double s, const PhasePoint& z, double t,
                               const std::function<double(const PhasePoint&)>& psi, std::size_t paths) const;

 private:
  void levels(double t_a, double ax, double av, double t, double yx, double yv, int kmax, double* out) const;

  DriftField field_;
  ParametrixConfig cfg_;
  double scale_;
};

/// One Volterra step int_s^t int phi_1(s,z; tau,eta) phi_k(tau,eta; t,y) deta dtau for an arbitrary phi_k
/// (d = 1), with nodes centred on the Gaussian bridge between (s,z) and (t,y).
double phi_next(const DriftField& field, const KernelSpec& k, const TargetKernel& phi_k, double s,
                const PhasePoint& z, double t, const PhasePoint& y, std::size_t time_order, std::size_t space_order);

struct EvalPoint {
  double s = 0.0;
  PhasePoint z;
  double t = 1.0;
  PhasePoint y;
};

struct SeriesDiagnostics {
  std::vector<double> empirical_sup;  // sup_n over the evaluation set of |phi_n|
  std::vector<double> bound_sup;      // sup of the induction bound over the same set
  std::vector<double> worst_ratio;    // max over points of |phi_n| / bound_n
  std::vector<double> term_ratio;     // sup |phi_{n+1}| / sup |phi_n|
  double K = 0.0;
  double J = 0.0;
  double S = 0.0;
  double c_beta = 0.0;
  double grad_const = 0.0;
  double tail_bound = 0.0;
  SummabilityReport summability;
  bool below_bound = false;
  bool ratio_consistent = false;
};

SeriesDiagnostics series_convergence_report(const Parametrix& par, const std::vector<EvalPoint>& eval_set, int n_max,
                                            double compact_radius);

struct SandwichResult {
  double C_upper = 0.0;
  double c_lower = 0.0;
  double lambda_lower = 0.0;
  double min_p = 0.0;
  std::vector<EvalPoint> negative_at;
  bool pass = false;
};

/// Fits C with p <= C P^{sigma+eps_up} and the best (c, lambda) with c P^lambda <= p.
SandwichResult gaussian_sandwich_check(const Parametrix& par, const std::vector<EvalPoint>& grid, double eps_up,
                                       const std::vector<double>& lambda_grid);

/// Offsets (a, b) in the whitened coordinates of the driftless law, times and base point.
std::vector<EvalPoint> whitened_grid(const KernelSpec& k, const PhasePoint& z, const std::vector<double>& times,
                                     const std::vector<double>& offsets);

}  // namespace kinfp
