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

#include "kinfp/gaussian_kernel.hpp"

namespace kinfp {

/// Inputs of the closed-form series bounds.
struct BoundConstants {
  std::size_t d = 1;
  double sigma = 1.0;
  double delta = 0.1;
  double beta = 0.5;
  double eps = 0.2;      // epsilon_n = eps * n^{eta - 1/beta}
  double eta = 0.5;
  double horizon = 1.0;  // T
  double c_beta = 1.0;
  double grad_const = 1.0;  // C of the Gaussian derivative bound
  double drift_const = 1.0; // C_T(F)
  Convention convention = Convention::Generator;
};

double epsilon_n(const BoundConstants& b, int n);
/// S = sum_n epsilon_n = eps * zeta(1/beta - eta).
double summability_S(const BoundConstants& b);
double epsilon_partial_sum(const BoundConstants& b, int n);

/// H_{sigma,beta}(y; t) with y = (xi, nu); Euclidean norms of xi and nu.
double H_function(double sigma, double beta, const PhasePoint& y, double t, double c_beta);
double J_function(double T, double sigma, double beta, double c_beta, std::size_t d);
double K_constant(const BoundConstants& b);

/// log of the coefficient of the Gaussian in the n-th induction bound.
double log_induction_coefficient(const BoundConstants& b, int n, double gap, const PhasePoint& y);
/// Kernel parameter (sigma + delta) / (1 - sum_{j<=n} eps_j)^{1/d} of the n-th bound.
double induction_kernel_parameter(const BoundConstants& b, int n);
/// Full right-hand side of the n-th induction bound at (s, z; t, y).
double induction_bound(const BoundConstants& b, int n, double s, const PhasePoint& z, double t, const PhasePoint& y);

/// Bound on the neglected terms of p after depth N, using
/// int P^sigma P^{lambda'} <= (lambda'/sigma)^d P^{lambda'} and summing up to N + extra terms.
double tail_bound(const BoundConstants& b, int depth, double s, const PhasePoint& z, double t, const PhasePoint& y,
                  int extra = 200);

/// First n0 after which the induction coefficients keep decreasing; found by a geometric search over real n
/// up to n_cap, -1 if none.
double decreasing_from(const BoundConstants& b, double gap, const PhasePoint& y, double n_cap = 1e100);

/// Majorant constants of the uniform-convergence argument on a compact
/// {M^{-1} <= t - s <= T, ||z||_B, ||y||_B <= M}.
struct SummabilityReport {
  double S = 0.0;
  double K = 0.0;
  double M1 = 0.0, M2 = 0.0, M4 = 0.0, M5 = 0.0;
  double final_ratio = 0.0;        // a_{n+1} / a_n at n_max for the S1 + S2 majorant
  double ratio_below_one_from = -1;  // first n after which the ratio stays below 1
  bool summable = false;
};
SummabilityReport summability_report(const BoundConstants& b, double M, int n_max = 400);

/// Largest ratio ||z||_B^beta exp(-q/2) / H_{sigma,beta}(y; t-s) (with C_beta = 1)
/// over random (z, y, s, t); the fitted C_beta.
double fit_c_beta(double sigma, double beta, Convention conv, std::size_t samples, std::uint64_t seed);

}  // namespace kinfp
