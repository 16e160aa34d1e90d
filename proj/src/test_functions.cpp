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

#include "kinfp/test_functions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "kinfp/quadrature.hpp"

namespace kinfp {

namespace {

double bump_profile(double s) { return s >= 1.0 ? 0.0 : std::exp(1.0 - 1.0 / (1.0 - s)); }

// |grad| of a unit-amplitude bump as a function of the distance to its centre.
double bump_grad_radial(double rho, double R) {
  const double s = rho * rho / (R * R);
  if (s >= 1.0) return 0.0;
  return bump_profile(s) * 2.0 * rho / (R * R * (1.0 - s) * (1.0 - s));
}

double sphere_area(std::size_t n) {  // surface of the unit sphere in R^n
  return 2.0 * std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n);
}

}  // namespace

TestFunction TestFunction::bump(const PhasePoint& center, double radius, double amplitude) {
  if (!(radius > 0.0)) throw std::invalid_argument("TestFunction::bump: radius must be positive");
  TestFunction f(center.dim());
  f.terms_.push_back({Kind::Bump, amplitude, center, radius});
  return f;
}

TestFunction TestFunction::gaussian(const PhasePoint& center, double width, double amplitude) {
  if (!(width > 0.0)) throw std::invalid_argument("TestFunction::gaussian: width must be positive");
  TestFunction f(center.dim());
  f.terms_.push_back({Kind::Gaussian, amplitude, center, width});
  return f;
}

TestFunction TestFunction::operator+(const TestFunction& o) const {
  if (empty()) return o;
  if (o.empty()) return *this;
  if (d_ != o.d_) throw DimensionError("TestFunction sum: dimension mismatch");
  TestFunction r = *this;
  r.terms_.insert(r.terms_.end(), o.terms_.begin(), o.terms_.end());
  return r;
}

TestFunction TestFunction::scaled(double a) const {
  TestFunction r = *this;
  for (Term& t : r.terms_) t.amplitude *= a;
  return r;
}

double TestFunction::value(const PhasePoint& z) const {
  double out = 0.0;
  for (const Term& term : terms_) {
    double rho2 = 0.0;
    for (std::size_t i = 0; i < d_; ++i) {
      const double a = z.x[i] - term.center.x[i], b = z.v[i] - term.center.v[i];
      rho2 += a * a + b * b;
    }
    const double w2 = term.width * term.width;
    out += term.amplitude * (term.kind == Kind::Bump ? bump_profile(rho2 / w2) : std::exp(-0.5 * rho2 / w2));
  }
  return out;
}

Jet TestFunction::jet(const PhasePoint& z) const {
  Jet j;
  j.dx.assign(d_, 0.0);
  j.dv.assign(d_, 0.0);
  const double dd = static_cast<double>(d_);
  for (const Term& term : terms_) {
    double rho2 = 0.0, rv2 = 0.0;
    for (std::size_t i = 0; i < d_; ++i) {
      const double a = z.x[i] - term.center.x[i], b = z.v[i] - term.center.v[i];
      rho2 += a * a + b * b;
      rv2 += b * b;
    }
    const double w2 = term.width * term.width;
    double phi = 0.0, g = 0.0, lap = 0.0;
    if (term.kind == Kind::Bump) {
      const double s = rho2 / w2;
      if (s >= 1.0) continue;
      phi = term.amplitude * bump_profile(s);
      const double om = 1.0 - s;
      g = -2.0 / (w2 * om * om);
      lap = phi * (g * g * rv2 - 8.0 * rv2 / (w2 * w2 * om * om * om) + dd * g);
    } else {
      phi = term.amplitude * std::exp(-0.5 * rho2 / w2);
      g = -1.0 / w2;
      lap = phi * (rv2 / (w2 * w2) - dd / w2);
    }
    j.value += phi;
    for (std::size_t i = 0; i < d_; ++i) {
      j.dx[i] += phi * g * (z.x[i] - term.center.x[i]);
      j.dv[i] += phi * g * (z.v[i] - term.center.v[i]);
    }
    j.lap_v += lap;
  }
  return j;
}

double TestFunction::sup_abs() const {
  double s = 0.0;
  for (const Term& t : terms_) s += std::fabs(t.amplitude);
  return s;
}

double TestFunction::sup_grad() const {
  double s = 0.0;
  for (const Term& t : terms_) {
    if (t.kind == Kind::Gaussian) {
      s += std::fabs(t.amplitude) * std::exp(-0.5) / t.width;
    } else {
      double best = 0.0;
      constexpr int kSteps = 200000;
      for (int i = 1; i < kSteps; ++i) best = std::max(best, bump_grad_radial(t.width * i / kSteps, t.width));
      s += std::fabs(t.amplitude) * best;
    }
  }
  return s;
}

double TestFunction::l1_norm() const {
  const std::size_t n = 2 * d_;
  double s = 0.0;
  for (const Term& t : terms_) {
    if (t.kind == Kind::Gaussian) {
      s += std::fabs(t.amplitude) * std::pow(2.0 * std::numbers::pi * t.width * t.width, static_cast<double>(d_));
    } else {
      const Rule r = gauss_legendre_on(200, 0.0, t.width);
      double radial = 0.0;
      for (std::size_t i = 0; i < r.size(); ++i) {
        const double rho = r.nodes[i];
        radial += r.weights[i] * bump_profile(rho * rho / (t.width * t.width)) * std::pow(rho, n - 1.0);
      }
      s += std::fabs(t.amplitude) * sphere_area(n) * radial;
    }
  }
  return s;
}

bool TestFunction::all_gaussian() const {
  return std::all_of(terms_.begin(), terms_.end(), [](const Term& t) { return t.kind == Kind::Gaussian; });
}

double TestFunction::gaussian_expectation(const PhasePoint& mean, const Block& cov) const {
  if (!all_gaussian()) return std::numeric_limits<double>::quiet_NaN();
  double out = 0.0;
  for (const Term& t : terms_) {
    const double w2 = t.width * t.width;
    const Block sum{cov.xx + w2, cov.xv, cov.vv + w2};
    const Block inv = sum.inverse();
    // det(I + cov / w^2) = det(sum) / w^4
    const double factor = w2 / std::sqrt(sum.det());
    double val = t.amplitude;
    for (std::size_t i = 0; i < d_; ++i) {
      const double a = mean.x[i] - t.center.x[i], b = mean.v[i] - t.center.v[i];
      val *= factor * std::exp(-0.5 * (inv.xx * a * a + 2.0 * inv.xv * a * b + inv.vv * b * b));
    }
    out += val;
  }
  return out;
}

double c_beta_psi(double sup_psi, double sup_grad, double beta) {
  return std::max(std::pow(2.0, 1.0 - beta) * sup_psi * std::pow(sup_grad, beta), sup_grad);
}

double c_beta_psi(const TestFunction& psi, double beta) { return c_beta_psi(psi.sup_abs(), psi.sup_grad(), beta); }

}  // namespace kinfp
