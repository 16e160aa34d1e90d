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

#include "kinfp/drift_fields.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "kinfp/rng.hpp"
#include "kinfp/stats.hpp"

namespace kinfp {

namespace {

std::string describe(double t, const PhasePoint& z) {
  std::ostringstream os;
  os.precision(17);
  os << "(t=" << t;
  for (std::size_t i = 0; i < z.dim(); ++i) os << ", x" << i << "=" << z.x[i];
  for (std::size_t i = 0; i < z.dim(); ++i) os << ", v" << i << "=" << z.v[i];
  os << ")";
  return os.str();
}

// Point with ||z||_B = r: Dirichlet split of r over the 2d gauge terms.
PhasePoint shell_point(std::size_t d, double r, Stream& rng) {
  std::vector<double> w(2 * d);
  double total = 0.0;
  for (double& e : w) {
    e = -std::log(rng.uniform());
    total += e;
  }
  PhasePoint z(d);
  for (std::size_t i = 0; i < d; ++i) {
    const double sx = rng.uniform() < 0.5 ? -1.0 : 1.0;
    const double sv = rng.uniform() < 0.5 ? -1.0 : 1.0;
    const double a = r * w[i] / total;
    z.x[i] = sx * a * a * a;
    z.v[i] = sv * r * w[d + i] / total;
  }
  return z;
}

double vec_norm(const Vec& a) {
  double s = 0.0;
  for (double c : a) s += c * c;
  return std::sqrt(s);
}

}  // namespace

NonFiniteDrift::NonFiniteDrift(const std::string& field, double t, const PhasePoint& z)
    : std::runtime_error("drift '" + field + "' returned a non-finite value at " + describe(t, z)) {}

DriftField::DriftField(std::string name, std::size_t d, Evaluator f, double growth_c, double beta,
                       HolderProvider holder)
    : name_(std::move(name)), d_(d), f_(std::move(f)), growth_c_(growth_c), beta_(beta), holder_(std::move(holder)) {
  if (d_ < 1) throw std::invalid_argument("DriftField: d must be >= 1");
  if (!(growth_c_ >= 0.0)) throw std::invalid_argument("DriftField: growth constant must be nonnegative");
  if (!(beta_ > 0.0 && beta_ < 1.0)) throw std::invalid_argument("DriftField: beta must lie in (0,1)");
  const HolderData h = holder_(1.0);
  if (!(h.alpha > beta_ && h.alpha <= 1.0)) throw std::invalid_argument("DriftField: need beta < alpha <= 1");
}

Vec DriftField::eval(double t, const PhasePoint& z) const {
  if (z.dim() != d_) throw DimensionError("DriftField::eval: dimension mismatch");
  Vec out(d_, 0.0);
  f_(t, z, out.data());
  for (double c : out)
    if (!std::isfinite(c)) throw NonFiniteDrift(name_, t, z);
  return out;
}

DriftField zero_field(std::size_t d, double beta) {
  DriftField f(
      "zero", d, [d](double, const PhasePoint&, double* out) { std::fill(out, out + d, 0.0); }, 0.0, beta,
      [](double) { return HolderData{0.0, 1.0}; });
  f.with_sup_norm(0.0).mark_zero();
  return f;
}

DriftField constant_field(const Vec& c, double beta) {
  const double norm = vec_norm(c);
  DriftField f(
      "constant", c.size(), [c](double, const PhasePoint&, double* out) { std::copy(c.begin(), c.end(), out); },
      norm, beta, [](double) { return HolderData{0.0, 1.0}; });
  f.with_sup_norm(norm);
  if (norm == 0.0) f.mark_zero();
  return f;
}

DriftField oscillatory_field(std::size_t d, double amplitude, double beta) {
  const double a = std::fabs(amplitude);
  DriftField f(
      "oscillatory", d,
      [d, amplitude](double t, const PhasePoint& z, double* out) {
        for (std::size_t i = 0; i < d; ++i) out[i] = amplitude * std::sin(z.x[i] + z.v[i] + t);
      },
      a * std::sqrt(static_cast<double>(d)), beta, [a](double) { return HolderData{2.0 * a, 1.0}; });
  f.with_sup_norm(a * std::sqrt(static_cast<double>(d)));
  return f;
}

double holder_profile(double r, double beta) {
  if (r >= 1.0) return std::pow(r, beta);
  return (2.0 - beta) * r - (1.0 - beta) * r * r;
}

DriftField holder_field(std::size_t d, double c, double beta, std::uint64_t direction_seed) {
  Stream rng(direction_seed, 0, 0xd1);
  Vec u(d);
  double n = 0.0;
  do {
    n = 0.0;
    for (double& e : u) {
      e = rng.normal();
      n += e * e;
    }
  } while (n < 1e-12);
  for (double& e : u) e /= std::sqrt(n);
  const double L = std::fabs(c) * (2.0 - beta);
  return DriftField(
      "holder", d,
      [u, c, beta, d](double, const PhasePoint& z, double* out) {
        const double g = c * holder_profile(b_norm(z), beta);
        for (std::size_t i = 0; i < d; ++i) out[i] = g * u[i];
      },
      std::fabs(c), beta, [L](double) { return HolderData{L, 1.0}; });
}

GrowthEstimate estimate_growth(const DriftField& f, double max_radius, std::size_t n, std::uint64_t seed) {
  if (n < 100) throw std::invalid_argument("estimate_growth: need n >= 100");
  if (!(max_radius > 1.0)) throw std::invalid_argument("estimate_growth: max_radius must exceed 1");
  constexpr std::size_t kShells = 20;
  std::vector<double> shell_max(kShells, 0.0);
  std::vector<double> radii(kShells);
  for (std::size_t s = 0; s < kShells; ++s) radii[s] = std::pow(max_radius, static_cast<double>(s) / (kShells - 1.0));
  GrowthEstimate est;
  for (std::size_t k = 0; k < n; ++k) {
    Stream rng(seed, k, 0x9a);
    const std::size_t s = k % kShells;
    const double t = rng.uniform();
    const PhasePoint z = shell_point(f.dim(), radii[s], rng);
    const double m = vec_norm(f.eval(t, z));
    shell_max[s] = std::max(shell_max[s], m);
    est.c_hat = std::max(est.c_hat, m / (1.0 + std::pow(b_norm(z), f.beta())));
  }
  std::vector<double> lx, ly;
  for (std::size_t s = 0; s < kShells; ++s) {
    if (shell_max[s] > 0.0) {
      lx.push_back(std::log(radii[s]));
      ly.push_back(std::log(shell_max[s]));
    }
  }
  if (lx.size() >= 2) {
    const LinearFit fit = least_squares(lx, ly);
    est.beta_hat = fit.slope;
    est.residual = fit.residual_rms;
  }
  est.pass = est.beta_hat <= f.beta() + 0.05 && est.c_hat <= 1.01 * f.growth_constant() + 1e-300;
  if (f.growth_constant() == 0.0) est.pass = est.c_hat == 0.0;
  return est;
}

HolderEstimate estimate_local_holder(const DriftField& f, double radius, const std::vector<double>& t_grid,
                                     std::size_t pair_count, double alpha, std::uint64_t seed) {
  if (pair_count < 100) throw std::invalid_argument("estimate_local_holder: need pair_count >= 100");
  if (t_grid.empty()) throw std::invalid_argument("estimate_local_holder: empty time grid");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("estimate_local_holder: alpha outside (0,1]");
  constexpr std::size_t kBins = 8;
  const double min_scale = 1e-4 * radius;
  std::vector<double> bin_max(kBins, 0.0);
  HolderEstimate est;
  for (std::size_t k = 0; k < pair_count; ++k) {
    Stream rng(seed, k, 0x4c);
    const double t = t_grid[k % t_grid.size()];
    const PhasePoint z1 = shell_point(f.dim(), radius * rng.uniform(), rng);
    const double u = rng.uniform();
    const double scale = min_scale * std::pow(radius / min_scale, u);
    const PhasePoint z2 = z1 + shell_point(f.dim(), scale, rng);
    const double dist = b_norm(z2 - z1);
    if (dist == 0.0) continue;
    const Vec f1 = f.eval(t, z1), f2 = f.eval(t, z2);
    double diff = 0.0;
    for (std::size_t i = 0; i < f.dim(); ++i) diff += (f2[i] - f1[i]) * (f2[i] - f1[i]);
    diff = std::sqrt(diff);
    est.L_hat = std::max(est.L_hat, diff / std::pow(dist, alpha));
    const std::size_t b = std::min(kBins - 1, static_cast<std::size_t>(u * kBins));
    bin_max[b] = std::max(bin_max[b], diff);
    ++est.pairs_used;
  }
  if (est.pairs_used == 0) throw std::invalid_argument("estimate_local_holder: all sampled pairs coincide");
  std::vector<double> lx, ly;
  for (std::size_t b = 0; b < kBins; ++b) {
    if (bin_max[b] > 0.0) {
      lx.push_back(std::log(min_scale) + (b + 0.5) / kBins * std::log(radius / min_scale));
      ly.push_back(std::log(bin_max[b]));
    }
  }
  est.alpha_hat = lx.size() >= 2 ? least_squares(lx, ly).slope : alpha;
  return est;
}

double cutoff_weight(double r, double n, double smoothness) {
  if (r <= n) return 1.0;
  if (r >= n + 1.0) return 0.0;
  const double s = r - n;
  auto bump = [smoothness](double u) { return u <= 0.0 ? 0.0 : std::exp(-smoothness / u); };
  const double a = bump(1.0 - s), b = bump(s);
  return a / (a + b);
}

double b_norm_bound_on_ball(std::size_t d, double R) {
  if (d == 1) {
    // maximize |x|^{1/3} + |v| on x^2 + v^2 = R^2
    double best = 0.0;
    constexpr int kSteps = 20000;
    for (int i = 0; i <= kSteps; ++i) {
      const double th = 0.5 * 3.14159265358979323846 * i / kSteps;
      best = std::max(best, std::cbrt(R * std::cos(th)) + R * std::sin(th));
    }
    return best * (1.0 + 1e-6);
  }
  const double dd = static_cast<double>(d);
  return dd * std::cbrt(R) + std::sqrt(dd) * R;
}

DriftField cutoff_drift(const DriftField& f, double n, double smoothness) {
  if (!(n >= 1.0)) throw std::invalid_argument("cutoff_drift: radius must be >= 1");
  if (!(smoothness > 0.0)) throw std::invalid_argument("cutoff_drift: smoothness must be positive");
  const std::size_t d = f.dim();
  DriftField base = f;
  DriftField out(
      f.name() + "_cut" + std::to_string(static_cast<long long>(n)), d,
      [base, n, smoothness, d](double t, const PhasePoint& z, double* o) {
        const double w = cutoff_weight(euclidean_norm(z), n, smoothness);
        if (w == 0.0) {
          std::fill(o, o + d, 0.0);
          return;
        }
        base.eval_into(t, z, o);
        if (w != 1.0)
          for (std::size_t i = 0; i < d; ++i) o[i] *= w;
      },
      f.growth_constant(), f.beta(), [base](double r) { return base.holder(r); });
  const double sup = f.bounded() ? f.sup_norm()
                                 : f.growth_constant() * (1.0 + std::pow(b_norm_bound_on_ball(d, n + 1.0), f.beta()));
  out.with_sup_norm(sup);
  return out;
}

}  // namespace kinfp
