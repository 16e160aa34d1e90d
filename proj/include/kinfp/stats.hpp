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

#include <functional>
#include <span>
#include <vector>

namespace kinfp {

/// Pairwise (cascade) summation; result does not depend on how the input was produced.
double pairwise_sum(std::span<const double> a);

struct MeanSE {
  double mean = 0.0;
  double se = 0.0;
  double sd = 0.0;
};

MeanSE mean_se(std::span<const double> a);

/// Sample covariance of two equally long series, with the SE of the estimate.
MeanSE covariance_se(std::span<const double> a, std::span<const double> b);

double normal_cdf(double x);

/// Asymptotic Kolmogorov distribution tail P(K > lambda).
double kolmogorov_tail(double lambda);

struct KSResult {
  double statistic = 0.0;
  double p_value = 0.0;
};

KSResult ks_one_sample(std::vector<double> sample, const std::function<double(double)>& cdf);
KSResult ks_two_sample(std::vector<double> a, std::vector<double> b);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual_rms = 0.0;
};

LinearFit least_squares(std::span<const double> x, std::span<const double> y);

}  // namespace kinfp
