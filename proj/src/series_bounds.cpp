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

#include "kinfp/series_bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <functional>
#include <stdexcept>

#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "kinfp/rng.hpp"

namespace kinfp {

namespace {

void check_ranges(const BoundConstants& b) {
  if (!(b.beta > 0.0 && b.beta < 1.0)) throw std::invalid_argument("series bounds: beta must lie in (0,1)");
  if (!(b.eta > 0.0 && b.eta < 1.0 / b.beta - 1.0))
    throw std::invalid_argument("series bounds: eta must lie in (0, 1/beta - 1)");
  if (!(b.eps > 0.0)) throw std::invalid_argument("series bounds: eps must be positive");
}

double euclid(const Vec& a) {
  double s = 0.0;
  for (double c : a) s += c * c;
  return std::sqrt(s);
}

// log of 1 + H for the j-th epsilon (real j so the asymptotic searches can use it)
double log_one_plus_h(const BoundConstants& b, double j, const PhasePoint& y) {
  const double eps_j = b.eps * std::pow(j, b.eta - 1.0 / b.beta);
  const double sig = (b.sigma + b.delta) / std::pow(eps_j, 1.0 / static_cast<double>(b.d));
  return std::log1p(H_function(sig, b.beta, y, b.horizon, b.c_beta));
}

// log of c_{n+1} / c_n
double log_coefficient_ratio(const BoundConstants& b, double n, double gap, const PhasePoint& y, double S, double K) {
  const double dd = static_cast<double>(b.d);
  return std::log(K) + 0.5 * std::log(std::numbers::pi * gap) + std::log(dd * b.drift_const * b.grad_const) -
         0.5 * std::log(1.0 - S) + std::log(boost::math::tgamma_delta_ratio(0.5 * n, 0.5)) +
         log_one_plus_h(b, n + 1.0, y);
}

// Smallest real n in [1, cap] where f(n) < 0 and f stays negative on a geometric sweep beyond; -1 if none.
double first_negative(const std::function<double(double)>& f, double cap) {
  double n = 1.0;
  while (n < cap && f(n) >= 0.0) n *= 2.0;
  if (!(n < cap)) return -1.0;
  double lo = std::max(1.0, n / 2.0), hi = n;
  if (f(lo) < 0.0) hi = lo;
  while (hi - lo > std::max(1.0, 1e-9 * hi)) {
    const double mid = std::floor(0.5 * (lo + hi));
    (f(mid) < 0.0 ? hi : lo) = mid;
  }
  for (double m = hi; m < cap / 4.0; m *= 4.0)
    if (!(f(4.0 * m) < 0.0)) return -1.0;
  return std::ceil(hi);
}

}  // namespace

double epsilon_n(const BoundConstants& b, int n) {
  if (n < 1) throw std::invalid_argument("epsilon_n: n >= 1");
  return b.eps * std::pow(static_cast<double>(n), b.eta - 1.0 / b.beta);
}

double summability_S(const BoundConstants& b) {
  check_ranges(b);
  return b.eps * std::riemann_zeta(1.0 / b.beta - b.eta);
}

double epsilon_partial_sum(const BoundConstants& b, int n) {
  double s = 0.0;
  for (int j = 1; j <= n; ++j) s += epsilon_n(b, j);
  return s;
}

double H_function(double sigma, double beta, const PhasePoint& y, double t, double c_beta) {
  if (!(beta > 0.0 && beta < 1.0)) throw std::invalid_argument("H_function: beta must lie in (0,1)");
  const double dd = static_cast<double>(y.dim());
  const double xi = euclid(y.x), nu = euclid(y.v);
  const double base = nu + std::cbrt(xi + t * nu) +
                      std::sqrt((beta * std::pow(sigma, dd) + std::cbrt(beta) * std::pow(sigma, dd / 3.0)) * t);
  return c_beta * std::pow(base, beta);
}

double J_function(double T, double sigma, double beta, double c_beta, std::size_t d) {
  if (!(beta > 0.0 && beta < 1.0)) throw std::invalid_argument("J_function: beta must lie in (0,1)");
  const double dd = static_cast<double>(d);
  const double inner = (beta * std::pow(sigma, dd) + std::cbrt(beta) * std::pow(sigma, dd / 3.0)) * T;
  return c_beta * (std::pow(T, beta / 3.0) + std::pow(inner, beta / 2.0));
}

double K_constant(const BoundConstants& b) {
  const double S = summability_S(b);
  if (!(S < 1.0)) throw std::invalid_argument("K_constant: S >= 1");
  const double e1 = epsilon_n(b, 1);
  const double sig = (b.sigma + b.delta) / std::pow(e1, 1.0 / static_cast<double>(b.d));
  return std::sqrt(1.0 + e1 / (1.0 - S)) *
         (1.0 + J_function(b.horizon, sig, b.beta, b.c_beta, b.d) + b.c_beta * (1.0 + std::pow(b.horizon, b.beta / 3.0)));
}

double induction_kernel_parameter(const BoundConstants& b, int n) {
  return (b.sigma + b.delta) / std::pow(1.0 - epsilon_partial_sum(b, n), 1.0 / static_cast<double>(b.d));
}

double log_induction_coefficient(const BoundConstants& b, int n, double gap, const PhasePoint& y) {
  if (n < 1) throw std::invalid_argument("induction bound: n >= 1");
  const double S = summability_S(b);
  if (!(S < 1.0)) throw std::invalid_argument("induction bound: S >= 1");
  const double base = static_cast<double>(b.d) * b.drift_const * b.grad_const;
  if (base == 0.0) return -std::numeric_limits<double>::infinity();
  const double K = K_constant(b);
  double out = (n - 1) * std::log(K) + 0.5 * n * std::log(std::numbers::pi) + 0.5 * (n - 2) * std::log(gap) -
               std::lgamma(0.5 * n) + n * std::log(base) - 0.5 * n * std::log(1.0 - S);
  for (int j = 1; j <= n; ++j) out += log_one_plus_h(b, j, y);
  return out;
}

double induction_bound(const BoundConstants& b, int n, double s, const PhasePoint& z, double t, const PhasePoint& y) {
  const double lc = log_induction_coefficient(b, n, t - s, y);
  if (!std::isfinite(lc)) return 0.0;
  const KernelSpec k{induction_kernel_parameter(b, n), b.convention};
  return std::exp(lc + log_P(k, s, z, t, y));
}

double tail_bound(const BoundConstants& b, int depth, double s, const PhasePoint& z, double t, const PhasePoint& y,
                  int extra) {
  const double S = summability_S(b);
  if (!(S < 1.0)) throw std::invalid_argument("tail_bound: S >= 1");
  const double base = static_cast<double>(b.d) * b.drift_const * b.grad_const;
  if (base == 0.0) return 0.0;
  const double gap = t - s;
  const double dd = static_cast<double>(b.d);
  const double log_k = std::log(K_constant(b));
  double h_sum = 0.0, eps_sum = 0.0, total = 0.0;
  for (int n = 1; n <= depth + extra; ++n) {
    h_sum += log_one_plus_h(b, n, y);
    eps_sum += epsilon_n(b, n);
    if (n <= depth) continue;
    // the time integral of (t - tau)^{(n-2)/2} gives 2 gap^{n/2} / n
    const double lc = (n - 1) * log_k + 0.5 * n * std::log(std::numbers::pi) - std::lgamma(0.5 * n) +
                      n * std::log(base) - 0.5 * n * std::log(1.0 - S) + h_sum + std::log(2.0 / n) +
                      0.5 * n * std::log(gap);
    const double lam = (b.sigma + b.delta) / std::pow(1.0 - eps_sum, 1.0 / dd);
    total += std::exp(lc + dd * std::log(lam / b.sigma) + log_P({lam, b.convention}, s, z, t, y));
    if (!std::isfinite(total)) return std::numeric_limits<double>::infinity();
  }
  return total;
}

double decreasing_from(const BoundConstants& b, double gap, const PhasePoint& y, double n_cap) {
  const double S = summability_S(b);
  const double K = K_constant(b);
  if (b.drift_const * b.grad_const == 0.0) return 1.0;
  return first_negative([&](double n) { return log_coefficient_ratio(b, n, gap, y, S, K); }, n_cap);
}

SummabilityReport summability_report(const BoundConstants& b, double M, int n_max) {
  SummabilityReport r;
  r.S = summability_S(b);
  r.K = K_constant(b);
  const double dd = static_cast<double>(b.d);
  const double T = b.horizon;
  const double tb = std::pow(T, b.beta / 3.0);
  r.M1 = r.K * dd * b.drift_const * b.grad_const * std::sqrt(std::numbers::pi * T) *
         (1.0 + b.c_beta * (tb + (1.0 + tb) * std::pow(M, b.beta))) / std::sqrt(1.0 - r.S);
  r.M2 = std::pow(12.0, dd / 2.0) * std::pow(M, 1.0 + 2.0 * dd) / (r.K * std::pow(b.sigma + b.delta, dd / 2.0));
  const double a = 0.5 * (1.0 - b.eta * b.beta);
  auto jn = [&](double n) {
    const double en = b.eps * std::pow(n, b.eta - 1.0 / b.beta);
    return J_function(T, (b.sigma + b.delta) / std::pow(en, 1.0 / dd), b.beta, b.c_beta, b.d);
  };
  r.M4 = 0.0;
  for (int n = 1; n <= n_max; ++n) r.M4 = std::max(r.M4, jn(n) / (1.0 + std::pow(n, a)));
  r.M5 = r.M1 * r.M4;
  if (r.M5 == 0.0) {
    r.summable = true;
    r.ratio_below_one_from = 1.0;
    return r;
  }
  // log a_n for the S1 + S2 majorant, valid for real n >= 1
  auto log_a = [&](double n) {
    return n * std::log(r.M5) + 0.25 * std::log(n) + 0.5 * n * std::log(2.0) - 0.5 * std::lgamma(n + 1.0) +
           n * std::log1p(std::pow(n, a));
  };
  // log(a_{n+1} / a_n); the derivative form avoids cancellation once n + 1 == n in floating point
  auto log_ratio = [&](double n) {
    if (n < 1e6) return log_a(n + 1.0) - log_a(n);
    const double na = std::pow(n, a);
    return std::log(r.M5) + 0.25 / n + 0.5 * std::log(2.0) - 0.5 * boost::math::digamma(n + 1.0) +
           std::log1p(na) + a * na / (1.0 + na);
  };
  r.final_ratio = std::exp(log_ratio(n_max));
  r.ratio_below_one_from = first_negative(log_ratio, 1e100);
  r.summable = r.ratio_below_one_from > 0.0 && b.eta * b.beta > 0.0;
  return r;
}

double fit_c_beta(double sigma, double beta, Convention conv, std::size_t samples, std::uint64_t seed) {
  const KernelSpec k{sigma, conv};
  double best = 0.0;
  for (std::size_t i = 0; i < samples; ++i) {
    Stream rng(seed, i, 0xcb);
    const PhasePoint z = PhasePoint::scalar(3.0 * rng.normal(), 3.0 * rng.normal());
    const double gap = 0.01 * std::pow(200.0, rng.uniform());
    const PhasePoint m = shift(gap, z);
    const Block L = covariance_block(convention_scale(sigma, conv), gap).cholesky();
    const double a = 2.0 * rng.normal(), c = 2.0 * rng.normal();
    const PhasePoint y = PhasePoint::scalar(m.x[0] + L.xx * a, m.v[0] + L.xv * a + L.vv * c);
    const double q = -2.0 * (log_P(k, 0.0, z, gap, y) - log_P(k, 0.0, z, gap, m));
    const double lhs = std::pow(b_norm(z), beta) * std::exp(-0.5 * q);
    best = std::max(best, lhs / H_function(sigma, beta, y, gap, 1.0));
  }
  return best;
}

}  // namespace kinfp
