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
#include <string>
#include <utility>
#include <vector>

#include "kinfp/gaussian_kernel.hpp"
#include "kinfp/langevin_sim.hpp"
#include "kinfp/parametrix.hpp"

namespace kinfp {

enum class W1Method { Exact1D, Sliced, Coupling };

std::string to_string(W1Method m);

struct W1Estimate {
  double value = 0.0;
  W1Method method = W1Method::Exact1D;
  std::size_t directions = 0;
  double se = 0.0;  // over directions, sliced only
};

/// Exact W1 between two empirical measures on the line: the integral of |F_a - F_b|.
/// Sizes may differ; for equal sizes this is the mean gap of the sorted samples.
double w1_1d(std::vector<double> a, std::vector<double> b);

/// Mean of w1_1d over k random unit directions in R^{2d}; a lower bound for W1.
W1Estimate w1_sliced(const std::vector<PhasePoint>& a, const std::vector<PhasePoint>& b, std::size_t k,
                     std::uint64_t seed);

/// mean_i |a_i - b_i| for equally sized, index-coupled clouds; an upper bound for W1.
W1Estimate w1_coupling_bound(const std::vector<PhasePoint>& a, const std::vector<PhasePoint>& b);

std::vector<PhasePoint> flow_cloud(const EmpiricalFlow& flow, std::size_t ti);

struct ContinuityModulus {
  std::vector<double> sliced_ratio;    // W1 lower estimate / sqrt(dt) per adjacent pair
  std::vector<double> coupling_ratio;  // upper estimate / sqrt(dt); empty unless the flow is coupled
  double max_sliced = 0.0;
  double max_coupling = 0.0;
  bool finite = false;
};

ContinuityModulus flow_continuity_modulus(const EmpiricalFlow& flow, std::size_t directions = 16,
                                          std::uint64_t seed = 1);

/// int p(s, z; t, eta) g(eta) d eta.
using KernelIntegrator =
    std::function<double(double s, const PhasePoint& z, double t, const std::function<double(const PhasePoint&)>& g)>;

/// Driftless kernel by tensor Gauss-Hermite of the given order (any d up to 2).
KernelIntegrator gaussian_integrator(const KernelSpec& k, std::size_t order = 20);
/// Deepest truncation of Parametrix::integrate_against.
KernelIntegrator parametrix_integrator(const Parametrix& par, std::size_t order = 8);

struct NarrowDeltaReport {
  std::string name;
  std::vector<double> gaps;
  std::vector<double> difference;  // |int p g - g(y)| at (t - gap, z_gap)
  bool decreasing = false;
  bool pass = false;
};

/// Approaches (t, y) along z_s = (y_x - (t - s) y_v, y_v) for the listed gaps t - s.
std::vector<NarrowDeltaReport> narrow_delta_check(
    const KernelIntegrator& p, const PhasePoint& y, double t,
    const std::vector<std::pair<std::string, std::function<double(const PhasePoint&)>>>& tests,
    const std::vector<double>& gaps, double tolerance = 1e-2);

}  // namespace kinfp
