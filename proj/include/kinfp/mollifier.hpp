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
#include <vector>

#include "kinfp/langevin_sim.hpp"
#include "kinfp/lie_group.hpp"

namespace kinfp {

/// Smooth bump rho on R^{1+2d} supported in the quasi-ball of radius 1 around c = (3/2, 0, 0).
///
/// With q = c^{-1} o a and r0 = 1 / (1 + 2d), rho(a) = norm * exp(-1 / (1 - |u|^2)) where
/// u = (q_t / r0^2, q_x / r0^3, q_v / r0). On the support |q_t|^{1/2} + sum |q_x|^{1/3} + sum |q_v| < 1.
class MollifierKernel {
 public:
  explicit MollifierKernel(std::size_t d, std::size_t order = 0);

  std::size_t dim() const { return d_; }
  double r0() const { return r0_; }
  double norm() const { return norm_; }
  static SpaceTimePoint center(std::size_t d);

  double rho(const SpaceTimePoint& a) const;
  /// eps^{-4d-2} rho(Phi_{1/eps} a).
  double rho_eps(double eps, const SpaceTimePoint& a) const;

  /// Quadrature nodes a_k (in the unscaled kernel variable) and weights w_k rho(a_k).
  const std::vector<SpaceTimePoint>& nodes() const { return nodes_; }
  const std::vector<double>& weights() const { return weights_; }

 private:
  std::size_t d_;
  double r0_;
  double norm_;
  std::vector<SpaceTimePoint> nodes_;
  std::vector<double> weights_;
};

/// int rho_eps by a nested double-exponential rule over the scaled ellipsoid, coordinate by coordinate,
/// with the given number of points per coordinate.
double integrate_rho_eps(const MollifierKernel& k, double eps, std::size_t points);

struct SupportCheck {
  std::size_t samples = 0;
  std::size_t inside_support = 0;
  std::size_t outside_ball = 0;  // positive rho_eps outside Phi_eps(B_1(c)): must be 0
  double min_value = 0.0;        // must be >= 0
};

/// Uniform rejection sampling on a box enclosing the scaled support.
SupportCheck support_check(const MollifierKernel& k, double eps, std::size_t samples, std::uint64_t seed);

/// f_eps(p) = int rho(a) f(Phi_eps(a)^{-1} o p) da over the kernel nodes; needs p.t > (5/2) eps^2.
double group_convolve(const MollifierKernel& k, double eps, const SpaceTimeField& f, const SpaceTimePoint& p);

/// Same convolution written as int rho_eps(p o b^{-1}) f(b) db, integrated by Gauss-Legendre over a box
/// containing the support of f; resolves f much narrower than the kernel.
double group_convolve_over_support(const MollifierKernel& k, double eps, const SpaceTimeField& f,
                                   const SpaceTimePoint& lo, const SpaceTimePoint& hi, std::size_t order,
                                   const SpaceTimePoint& p);

struct CommutationReport {
  double max_residual = 0.0;  // max |Y(f_eps) - (Yf)_eps|
  double max_budget = 0.0;
  std::size_t violations = 0;
  std::size_t points = 0;
  bool pass = false;
};

/// Y(f_eps) by lie_derivative_fd against the convolution of the known Yf. The per-point budget is the
/// Richardson estimate 2 |D_h - D_2h| of the difference error plus rounding.
CommutationReport commutation_check(const MollifierKernel& k, double eps, const SpaceTimeField& f,
                                    const SpaceTimeField& yf, const std::vector<SpaceTimePoint>& grid, double h);

struct DerivativeRow {
  double eps = 0.0;
  double max_dt = 0.0, max_dx = 0.0, max_dv = 0.0;
  double C_t = 0.0, C_x = 0.0, C_v = 0.0;  // max times eps^{4d+4}, eps^{4d+5}, eps^{4d+3} / T over ||f||_1
};

struct DerivativeBoundReport {
  std::vector<DerivativeRow> rows;
  double spread_t = 0.0, spread_x = 0.0, spread_v = 0.0;  // max / min of each fitted constant
  double slope_t = 0.0, slope_x = 0.0, slope_v = 0.0;     // log-log slopes of the maxima against eps
  bool pass = false;                                      // every spread within the factor
};

/// Sweeps eps with f a bump supported in [lo, hi], compactly supported in time before T.
DerivativeBoundReport derivative_bound_check(const MollifierKernel& k, const std::vector<double>& eps_list,
                                             const SpaceTimeField& f, const SpaceTimePoint& lo,
                                             const SpaceTimePoint& hi, double T, double factor = 3.0);

struct CaratheodoryRow {
  double eps = 0.0;
  double difference = 0.0;  // |int int G f_eps dmu ds - int int G f dmu ds|
  double se = 0.0;          // SE of the per-path difference
};

struct CaratheodoryReport {
  double reference = 0.0;  // int_t^T int G f dmu_s ds
  double reference_se = 0.0;
  std::vector<CaratheodoryRow> rows;
  bool decreasing = false;
  bool pass = false;  // decreasing and the last entry within n_se reference SE
};

/// Time integral over the flow's times from index `from` onward by the trapezoid rule.
CaratheodoryReport caratheodory_limit_check(const MollifierKernel& k, const SpaceTimeField& f,
                                            const SpaceTimeField& G, const EmpiricalFlow& flow, std::size_t from,
                                            const std::vector<double>& eps_list, double n_se = 3.0);

}  // namespace kinfp
