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

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "kinfp/lie_group.hpp"

namespace kinfp {

class NonFiniteDrift : public std::runtime_error {
 public:
  NonFiniteDrift(const std::string& field, double t, const PhasePoint& z);
};

/// Declared local Hoelder data on a compact of radius R.
struct HolderData {
  double L = 0.0;
  double alpha = 1.0;
};

/// Drift F(t, z) with declared growth and local Hoelder constants.
///
/// Growth: |F(t,z)| <= C (1 + ||z||_B^beta).
/// Hoelder: |F(t,z1) - F(t,z2)| <= L(R) ||z1 - z2||_B^alpha on compacts of radius R.
class DriftField {
 public:
  using Evaluator = std::function<void(double t, const PhasePoint& z, double* out)>;
  using HolderProvider = std::function<HolderData(double radius)>;

  DriftField(std::string name, std::size_t d, Evaluator f, double growth_c, double beta, HolderProvider holder);

  const std::string& name() const { return name_; }
  std::size_t dim() const { return d_; }
  double growth_constant() const { return growth_c_; }
  double beta() const { return beta_; }
  HolderData holder(double radius) const { return holder_(radius); }

  /// Finite sup-norm when the field is bounded, otherwise infinity.
  double sup_norm() const { return sup_norm_; }
  bool bounded() const { return std::isfinite(sup_norm_); }
  bool is_zero() const { return zero_; }

  DriftField& with_sup_norm(double s) {
    sup_norm_ = s;
    return *this;
  }
  DriftField& mark_zero() {
    zero_ = true;
    return *this;
  }

  /// Checked evaluation; throws NonFiniteDrift.
  Vec eval(double t, const PhasePoint& z) const;

  /// Unchecked evaluation into out[0..d).
  void eval_into(double t, const PhasePoint& z, double* out) const { f_(t, z, out); }

 private:
  std::string name_;
  std::size_t d_;
  Evaluator f_;
  double growth_c_;
  double beta_;
  HolderProvider holder_;
  double sup_norm_ = std::numeric_limits<double>::infinity();
  bool zero_ = false;
};

DriftField zero_field(std::size_t d, double beta = 0.5);
DriftField constant_field(const Vec& c, double beta = 0.5);

/// F_i = a sin(x_i + v_i + t); bounded, Lipschitz in ||.||_B with L = 2a.
DriftField oscillatory_field(std::size_t d, double amplitude, double beta = 0.5);

/// F = c g(||z||_B) u with g(r) = r^beta for r >= 1 and the C^1 quadratic
/// (2 - beta) r - (1 - beta) r^2 below; u a unit direction drawn from the seed.
DriftField holder_field(std::size_t d, double c, double beta, std::uint64_t direction_seed);

/// Holder profile g used by holder_field.
double holder_profile(double r, double beta);

struct GrowthEstimate {
  double c_hat = 0.0;
  double beta_hat = 0.0;
  double residual = 0.0;
  bool pass = false;
};

/// Regression of log max|F| on log ||z||_B over shells in [1, max_radius].
GrowthEstimate estimate_growth(const DriftField& f, double max_radius, std::size_t n, std::uint64_t seed = 1);

struct HolderEstimate {
  double L_hat = 0.0;
  double alpha_hat = 0.0;
  std::size_t pairs_used = 0;
};

/// Sampled local Hoelder ratio at exponent alpha on {||z||_B <= radius}.
HolderEstimate estimate_local_holder(const DriftField& f, double radius, const std::vector<double>& t_grid,
                                     std::size_t pair_count, double alpha, std::uint64_t seed = 1);

/// Smooth radial cutoff: 1 on |z| <= n, 0 on |z| >= n + 1 (Euclidean norm).
double cutoff_weight(double euclid_norm, double n, double smoothness);

/// F_n = F * eta_n.
DriftField cutoff_drift(const DriftField& f, double n, double smoothness = 1.0);

/// Sup of ||z||_B over the Euclidean ball of radius R (upper bound for d > 1).
double b_norm_bound_on_ball(std::size_t d, double R);

}  // namespace kinfp
