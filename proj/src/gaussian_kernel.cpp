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

#include "kinfp/gaussian_kernel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "kinfp/bridge.hpp"
#include "kinfp/rng.hpp"

namespace kinfp {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

void require_order(double s, double t) {
  if (!(t > s)) throw std::invalid_argument("kinetic kernel requires t > s");
}

double quad_form(const Block& inv, double rx, double rv) {
  return inv.xx * rx * rx + 2.0 * inv.xv * rx * rv + inv.vv * rv * rv;
}

double log_density_block(const Block& cov, const PhasePoint& mean, const PhasePoint& y) {
  const Block inv = cov.inverse();
  const double d = static_cast<double>(y.dim());
  double q = 0.0;
  for (std::size_t i = 0; i < y.dim(); ++i) q += quad_form(inv, y.x[i] - mean.x[i], y.v[i] - mean.v[i]);
  return -0.5 * q - d * kLog2Pi - 0.5 * d * std::log(cov.det());
}

template <class F>
double gk(F f, double a, double b) {
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 15, 1e-13);
}

}  // namespace

std::string to_string(Convention c) { return c == Convention::Paper ? "paper" : "generator"; }

Convention convention_from_string(const std::string& s) {
  if (s == "paper") return Convention::Paper;
  if (s == "generator") return Convention::Generator;
  throw std::invalid_argument("unknown covariance convention: " + s);
}

Block Block::inverse() const {
  const double dt = det();
  if (!(dt > 0.0)) throw std::domain_error("Block::inverse: matrix not positive definite");
  return {vv / dt, -xv / dt, xx / dt};
}

Block Block::cholesky() const {
  if (!(xx > 0.0)) throw std::domain_error("Block::cholesky: matrix not positive definite");
  const double l11 = std::sqrt(xx);
  const double l21 = xv / l11;
  const double rem = vv - l21 * l21;
  return {l11, l21, std::sqrt(std::max(rem, 0.0))};
}

std::vector<double> KineticCovariance::dense() const {
  const std::size_t n = 2 * d;
  std::vector<double> m(n * n, 0.0);
  for (std::size_t i = 0; i < d; ++i) {
    m[i * n + i] = block.xx;
    m[i * n + d + i] = block.xv;
    m[(d + i) * n + i] = block.xv;
    m[(d + i) * n + d + i] = block.vv;
  }
  return m;
}

double convention_scale(double lambda, Convention c) {
  if (!(lambda > 0.0)) throw std::invalid_argument("diffusion parameter must be positive");
  return c == Convention::Generator ? 2.0 * lambda : lambda;
}

Block covariance_block(double scale, double t) {
  return {scale * t * t * t / 3.0, scale * t * t / 2.0, scale * t};
}

KineticCovariance covariance(double lambda, double t, Convention c, std::size_t d) {
  if (!(t > 0.0)) throw std::invalid_argument("covariance: time gap must be positive");
  const double k = convention_scale(lambda, c);
  KineticCovariance cov;
  cov.d = d;
  cov.block = covariance_block(k, t);
  // closed forms: det = k^2 t^4 / 12 per block
  const double block_det = k * k * t * t * t * t / 12.0;
  cov.inv = {12.0 / (k * t * t * t), -6.0 / (k * t * t), 4.0 / (k * t)};
  cov.det = std::pow(block_det, static_cast<double>(d));
  cov.log_det = static_cast<double>(d) * std::log(block_det);
  return cov;
}

Block transport_block(const Block& c, double t) {
  return {c.xx + 2.0 * t * c.xv + t * t * c.vv, c.xv + t * c.vv, c.vv};
}

double log_P(const KernelSpec& k, double s, const PhasePoint& z, double t, const PhasePoint& y) {
  require_order(s, t);
  if (z.dim() != y.dim()) throw DimensionError("log_P: dimension mismatch");
  const double gap = t - s;
  const KineticCovariance cov = covariance(k.lambda, gap, k.convention, z.dim());
  double q = 0.0;
  for (std::size_t i = 0; i < z.dim(); ++i)
    q += quad_form(cov.inv, y.x[i] - z.x[i] - gap * z.v[i], y.v[i] - z.v[i]);
  return -0.5 * q - static_cast<double>(z.dim()) * kLog2Pi - 0.5 * cov.log_det;
}

double eval_P(const KernelSpec& k, double s, const PhasePoint& z, double t, const PhasePoint& y) {
  return std::exp(log_P(k, s, z, t, y));
}

Vec grad_v_log_P(const KernelSpec& k, double s, const PhasePoint& z, double t, const PhasePoint& y) {
  require_order(s, t);
  const double gap = t - s;
  const KineticCovariance cov = covariance(k.lambda, gap, k.convention, z.dim());
  Vec g(z.dim());
  for (std::size_t i = 0; i < z.dim(); ++i) {
    const double rx = y.x[i] - z.x[i] - gap * z.v[i];
    const double rv = y.v[i] - z.v[i];
    const double wx = cov.inv.xx * rx + cov.inv.xv * rv;
    const double wv = cov.inv.xv * rx + cov.inv.vv * rv;
    g[i] = gap * wx + wv;
  }
  return g;
}

Vec grad_v_P(const KernelSpec& k, double s, const PhasePoint& z, double t, const PhasePoint& y) {
  Vec g = grad_v_log_P(k, s, z, t, y);
  const double p = eval_P(k, s, z, t, y);
  for (double& c : g) c *= p;
  return g;
}

double peak_P(const KernelSpec& k, double gap, std::size_t d) {
  const KineticCovariance cov = covariance(k.lambda, gap, k.convention, d);
  return std::exp(-static_cast<double>(d) * kLog2Pi - 0.5 * cov.log_det);
}

std::vector<PhasePoint> sample(const KernelSpec& k, double s, const PhasePoint& z, double t, std::size_t n,
                               std::uint64_t seed) {
  require_order(s, t);
  if (n < 1) throw std::invalid_argument("sample: n must be positive");
  const double gap = t - s;
  const Block L = covariance_block(convention_scale(k.lambda, k.convention), gap).cholesky();
  const PhasePoint mean = shift(gap, z);
  constexpr std::size_t kChunk = 4096;
  std::vector<PhasePoint> out(n, PhasePoint(z.dim()));
  for (std::size_t c0 = 0; c0 < n; c0 += kChunk) {
    Stream rng(seed, c0 / kChunk, 0x5a);
    for (std::size_t j = c0; j < std::min(n, c0 + kChunk); ++j) {
      for (std::size_t i = 0; i < z.dim(); ++i) {
        const double g1 = rng.normal(), g2 = rng.normal();
        out[j].x[i] = mean.x[i] + L.xx * g1;
        out[j].v[i] = mean.v[i] + L.xv * g1 + L.vv * g2;
      }
    }
  }
  return out;
}

ChapmanKolmogorovResult chapman_kolmogorov_check(const KernelSpec& k, double s, double tau, double t,
                                                 const PhasePoint& z, const PhasePoint& y, bool with_quadrature) {
  if (!(s < tau && tau < t)) throw std::invalid_argument("chapman_kolmogorov_check: need s < tau < t");
  const double scale = convention_scale(k.lambda, k.convention);
  ChapmanKolmogorovResult res;
  const Block first = transport_block(covariance_block(scale, tau - s), t - tau);
  const Block second = covariance_block(scale, t - tau);
  const Block composed{first.xx + second.xx, first.xv + second.xv, first.vv + second.vv};
  const PhasePoint mean = shift(t - tau, shift(tau - s, z));
  const double direct = log_P(k, s, z, t, y);
  res.closed_form = std::fabs(std::expm1(log_density_block(composed, mean, y) - direct));
  if (with_quadrature) {
    if (z.dim() != 1) throw DimensionError("chapman_kolmogorov_check: quadrature route needs d = 1");
    const BridgeBlock br = bridge_block(scale, tau - s, t - tau, z.x[0], z.v[0], y.x[0], y.v[0]);
    const double sx = std::sqrt(br.cov.xx);
    const double cond_sd = std::sqrt(std::max(br.cov.vv - br.cov.xv * br.cov.xv / br.cov.xx, 1e-300));
    constexpr double w = 14.0;
    auto inner = [&](double ex) {
      const double cm = br.mean_v + br.cov.xv / br.cov.xx * (ex - br.mean_x);
      return gk([&](double ev) {
                  const PhasePoint eta = PhasePoint::scalar(ex, ev);
                  return std::exp(log_P(k, s, z, tau, eta) + log_P(k, tau, eta, t, y) - direct);
                },
                cm - w * cond_sd, cm + w * cond_sd);
    };
    res.quadrature = std::fabs(gk(inner, br.mean_x - w * sx, br.mean_x + w * sx) - 1.0);
  }
  return res;
}

PdeResidual kernel_pde_residual(const KernelSpec& k, const std::vector<double>& gaps,
                                const std::vector<double>& offsets, std::size_t d) {
  PdeResidual res;
  res.convention = k.convention;
  const double t = 1.0;
  PhasePoint y(d);
  for (std::size_t i = 0; i < d; ++i) {
    y.x[i] = 0.3;
    y.v[i] = -0.2;
  }
  for (double gap : gaps) {
    const double s = t - gap;
    const Block L = covariance_block(convention_scale(k.lambda, k.convention), gap).cholesky();
    const double peak = peak_P(k, gap, d);
    const double h = 1e-4 * gap;
    const double hv = 1e-4 * std::sqrt(gap);
    for (double a : offsets) {
      for (double b : offsets) {
        // backward point whose forward mean sits at a whitened offset from y
        PhasePoint z(d);
        for (std::size_t i = 0; i < d; ++i) {
          const double mx = y.x[i] - L.xx * a, mv = y.v[i] - (L.xv * a + L.vv * b);
          z.v[i] = mv;
          z.x[i] = mx - gap * mv;
        }
        auto P = [&](const SpaceTimePoint& p) { return eval_P(k, p.t, p.phase(), t, y); };
        const double yder = lie_derivative_fd(P, SpaceTimePoint(s, z), h);
        double lap = 0.0;
        const double p0 = eval_P(k, s, z, t, y);
        for (std::size_t i = 0; i < d; ++i) {
          PhasePoint zp = z, zm = z;
          zp.v[i] += hv;
          zm.v[i] -= hv;
          lap += (eval_P(k, s, zp, t, y) - 2.0 * p0 + eval_P(k, s, zm, t, y)) / (hv * hv);
        }
        res.with_lambda = std::max(res.with_lambda, std::fabs(k.lambda * lap + yder) / peak);
        res.with_half_lambda = std::max(res.with_half_lambda, std::fabs(0.5 * k.lambda * lap + yder) / peak);
        ++res.points;
      }
    }
  }
  if (k.convention == Convention::Paper)
    res.diagnostic = "paper covariance solves (lambda/2) Lap_v + Y, not lambda Lap_v + Y: factor-2 mismatch";
  else
    res.diagnostic = "generator covariance solves lambda Lap_v + Y";
  return res;
}

double fit_gradient_constant(const KernelSpec& k, double delta, double gap_min, double gap_max, double offset_max,
                             std::size_t n_gap, std::size_t n_offset) {
  if (!(delta > 0.0)) throw std::invalid_argument("fit_gradient_constant: delta must be positive");
  const KernelSpec wide{k.lambda + delta, k.convention};
  const PhasePoint z = PhasePoint::scalar(0.0, 0.0);
  double best = 0.0;
  for (std::size_t g = 0; g < n_gap; ++g) {
    const double gap = n_gap == 1 ? gap_min
                                  : gap_min * std::pow(gap_max / gap_min, static_cast<double>(g) / (n_gap - 1.0));
    const Block L = covariance_block(convention_scale(k.lambda, k.convention), gap).cholesky();
    for (std::size_t i = 0; i < n_offset; ++i) {
      for (std::size_t j = 0; j < n_offset; ++j) {
        const double a = -offset_max + 2.0 * offset_max * i / (n_offset - 1.0);
        const double b = -offset_max + 2.0 * offset_max * j / (n_offset - 1.0);
        const PhasePoint y = PhasePoint::scalar(L.xx * a, L.xv * a + L.vv * b);
        const double ratio = std::fabs(grad_v_log_P(k, 0.0, z, gap, y)[0]) * std::sqrt(gap) *
                             std::exp(log_P(k, 0.0, z, gap, y) - log_P(wide, 0.0, z, gap, y));
        best = std::max(best, ratio);
      }
    }
  }
  return best;
}

NormalizationResult normalization_check(const KernelSpec& k, double s, const PhasePoint& z, double t,
                                        const PhasePoint& y) {
  if (z.dim() != 1) throw DimensionError("normalization_check: d = 1 only");
  const double gap = t - s;
  const Block c = covariance_block(convention_scale(k.lambda, k.convention), gap);
  constexpr double w = 14.0;
  NormalizationResult r;
  {
    const PhasePoint m = shift(gap, z);
    const double sx = std::sqrt(c.xx), cs = std::sqrt(c.vv - c.xv * c.xv / c.xx);
    r.over_y = gk(
        [&](double yx) {
          const double cm = m.v[0] + c.xv / c.xx * (yx - m.x[0]);
          return gk([&](double yv) { return eval_P(k, s, z, t, PhasePoint::scalar(yx, yv)); }, cm - w * cs,
                    cm + w * cs);
        },
        m.x[0] - w * sx, m.x[0] + w * sx);
  }
  {
    const double sv = std::sqrt(c.vv), cs = std::sqrt(c.xx - c.xv * c.xv / c.vv);
    r.over_z = gk(
        [&](double zv) {
          const double rv = y.v[0] - zv;
          const double cm = y.x[0] - gap * zv - c.xv / c.vv * rv;
          return gk([&](double zx) { return eval_P(k, s, PhasePoint::scalar(zx, zv), t, y); }, cm - w * cs,
                    cm + w * cs);
        },
        y.v[0] - w * sv, y.v[0] + w * sv);
  }
  return r;
}

}  // namespace kinfp
