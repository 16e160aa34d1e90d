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
#include <string>
#include <vector>

#include "kinfp/lie_group.hpp"

namespace kinfp {

/// Scaling of the kinetic covariance.
///
/// Paper:     lambda * [[t^3/3, t^2/2], [t^2/2, t]] per coordinate pair.
/// Generator: twice that, the law of dX = V dt, dV = sqrt(2 lambda) dB.
enum class Convention { Paper, Generator };

std::string to_string(Convention c);
Convention convention_from_string(const std::string& s);

/// Symmetric 2x2 block [[xx, xv], [xv, vv]] shared by every coordinate pair.
struct Block {
  double xx = 0.0, xv = 0.0, vv = 0.0;

  double det() const { return xx * vv - xv * xv; }
  Block inverse() const;
  /// Lower Cholesky factor [[l11, 0], [l21, l22]] stored as (xx=l11, xv=l21, vv=l22).
  Block cholesky() const;
};

/// Covariance of the kinetic Gaussian in dimension d (block diagonal in
/// coordinate pairs (x_i, v_i)).
struct KineticCovariance {
  std::size_t d = 1;
  Block block;
  Block inv;
  double det = 0.0;      // full 2d x 2d determinant
  double log_det = 0.0;

  /// Row-major 2d x 2d matrix in ordering (x_1..x_d, v_1..v_d).
  std::vector<double> dense() const;
};

/// Diffusion scale of the covariance for parameter lambda.
double convention_scale(double lambda, Convention c);

Block covariance_block(double scale, double t);
KineticCovariance covariance(double lambda, double t, Convention c, std::size_t d);

/// e^{tB} applied to a block covariance: [[1,t],[0,1]] C [[1,0],[t,1]].
Block transport_block(const Block& c, double t);

struct KernelSpec {
  double lambda = 1.0;
  Convention convention = Convention::Generator;
};

double log_P(const KernelSpec& k, double s, const PhasePoint& z, double t, const PhasePoint& y);
double eval_P(const KernelSpec& k, double s, const PhasePoint& z, double t, const PhasePoint& y);

/// Gradient of P in the v-components of the backward point z.
Vec grad_v_P(const KernelSpec& k, double s, const PhasePoint& z, double t, const PhasePoint& y);

/// grad_v log P, i.e. grad_v_P / P; finite even where P underflows.
Vec grad_v_log_P(const KernelSpec& k, double s, const PhasePoint& z, double t, const PhasePoint& y);

/// Peak value ((2 pi)^{2d} det)^{-1/2} of P at time gap t - s.
double peak_P(const KernelSpec& k, double gap, std::size_t d);

std::vector<PhasePoint> sample(const KernelSpec& k, double s, const PhasePoint& z, double t, std::size_t n,
                               std::uint64_t seed);

struct ChapmanKolmogorovResult {
  double closed_form = 0.0;  // relative residual of the composed-covariance density
  double quadrature = 0.0;   // relative residual of adaptive quadrature in eta (d = 1)
};

ChapmanKolmogorovResult chapman_kolmogorov_check(const KernelSpec& k, double s, double tau, double t,
                                                 const PhasePoint& z, const PhasePoint& y,
                                                 bool with_quadrature = true);

struct PdeResidual {
  Convention convention = Convention::Generator;
  double with_lambda = 0.0;       // max |(lambda Lap_v + Y) P| / peak
  double with_half_lambda = 0.0;  // max |(lambda/2 Lap_v + Y) P| / peak
  std::size_t points = 0;
  std::string diagnostic;
};

/// Finite-difference residual of the backward equation in (s, z) for fixed
/// (t, y) on a grid of time gaps and whitened offsets, d = 1 or more.
PdeResidual kernel_pde_residual(const KernelSpec& k, const std::vector<double>& gaps,
                                const std::vector<double>& offsets, std::size_t d = 1);

/// Smallest C with |dP/dv_1| <= C (t-s)^{-1/2} P^{lambda+delta} on a grid of gaps
/// in [gap_min, gap_max] and whitened offsets in [-offset_max, offset_max]^{2}.
double fit_gradient_constant(const KernelSpec& k, double delta, double gap_min, double gap_max,
                             double offset_max = 8.0, std::size_t n_gap = 10, std::size_t n_offset = 41);

/// Marginal integrals of P over y and over z by nested adaptive Gauss-Kronrod (d = 1).
struct NormalizationResult {
  double over_y = 0.0;
  double over_z = 0.0;
};
NormalizationResult normalization_check(const KernelSpec& k, double s, const PhasePoint& z, double t,
                                        const PhasePoint& y);

}  // namespace kinfp
