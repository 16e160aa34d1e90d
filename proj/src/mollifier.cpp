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

#include "kinfp/mollifier.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <stdexcept>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "kinfp/quadrature.hpp"
#include "kinfp/rng.hpp"
#include "kinfp/stats.hpp"

namespace kinfp {

namespace {

/// Calls f(point, weight) on the tensor Gauss-Legendre grid of the box [lo, hi] in R^{1+2d}.
template <class F>
void box_rule(const SpaceTimePoint& lo, const SpaceTimePoint& hi, std::size_t order, F&& f) {
  const std::size_t d = lo.dim();
  const std::size_t dims = 1 + 2 * d;
  const Rule& gl = gauss_legendre(order);
  std::vector<double> a(dims), b(dims);
  a[0] = lo.t;
  b[0] = hi.t;
  for (std::size_t i = 0; i < d; ++i) {
    a[1 + i] = lo.x[i];
    b[1 + i] = hi.x[i];
    a[1 + d + i] = lo.v[i];
    b[1 + d + i] = hi.v[i];
  }
  std::vector<std::size_t> idx(dims, 0);
  SpaceTimePoint p(d);
  for (;;) {
    double w = 1.0;
    auto coord = [&](std::size_t k) {
      const double half = 0.5 * (b[k] - a[k]);
      w *= half * gl.weights[idx[k]];
      return 0.5 * (a[k] + b[k]) + half * gl.nodes[idx[k]];
    };
    p.t = coord(0);
    for (std::size_t i = 0; i < d; ++i) p.x[i] = coord(1 + i);
    for (std::size_t i = 0; i < d; ++i) p.v[i] = coord(1 + d + i);
    f(p, w);
    std::size_t k = 0;
    while (k < dims && ++idx[k] == order) idx[k++] = 0;
    if (k == dims) return;
  }
}

/// Corners of Phi_eps applied to the profile box around c.
void scaled_support(const MollifierKernel& k, double eps, double widen, SpaceTimePoint& lo, SpaceTimePoint& hi) {
  const std::size_t d = k.dim();
  const double r = k.r0();
  lo = SpaceTimePoint(d);
  hi = SpaceTimePoint(d);
  lo.t = eps * eps * (1.5 - widen * r * r);
  hi.t = eps * eps * (1.5 + widen * r * r);
  for (std::size_t i = 0; i < d; ++i) {
    hi.x[i] = widen * eps * eps * eps * r * r * r;
    lo.x[i] = -hi.x[i];
    hi.v[i] = widen * eps * r;
    lo.v[i] = -hi.v[i];
  }
}

}  // namespace

MollifierKernel::MollifierKernel(std::size_t d, std::size_t order) : d_(d), r0_(1.0 / (1.0 + 2.0 * d)) {
  if (d == 0) throw DimensionError("MollifierKernel: d must be positive");
  const double m = 1.0 + 2.0 * static_cast<double>(d);
  auto radial = [m](double r) { return r >= 1.0 ? 0.0 : std::exp(-1.0 / (1.0 - r * r)) * std::pow(r, m - 1.0); };
  const double line = boost::math::quadrature::tanh_sinh<double>().integrate(radial, 0.0, 1.0);
  const double sphere = 2.0 * std::pow(std::numbers::pi, 0.5 * m) / std::tgamma(0.5 * m);
  const double jac = std::pow(r0_, 2.0 + 4.0 * static_cast<double>(d));
  norm_ = 1.0 / (jac * sphere * line);

  if (order == 0) order = d == 1 ? 10 : 6;
  SpaceTimePoint lo, hi;
  scaled_support(*this, 1.0, 1.0, lo, hi);
  double total = 0.0;
  box_rule(lo, hi, order, [&](const SpaceTimePoint& a, double w) {
    const double val = rho(a);
    if (val <= 0.0) return;
    nodes_.push_back(a);
    weights_.push_back(w * val);
    total += w * val;
  });
  // discrete normalisation keeps f_eps exact for constants
  for (double& w : weights_) w /= total;
}

SpaceTimePoint MollifierKernel::center(std::size_t d) {
  SpaceTimePoint c(d);
  c.t = 1.5;
  return c;
}

double MollifierKernel::rho(const SpaceTimePoint& a) const {
  const double r2 = r0_ * r0_, r3 = r2 * r0_;
  const double ut = (a.t - 1.5) / r2;
  double s = ut * ut;
  for (std::size_t i = 0; i < d_; ++i) {
    const double ux = a.x[i] / r3, uv = a.v[i] / r0_;
    s += ux * ux + uv * uv;
  }
  if (s >= 1.0) return 0.0;
  return norm_ * std::exp(-1.0 / (1.0 - s));
}

double MollifierKernel::rho_eps(double eps, const SpaceTimePoint& a) const {
  if (!(eps > 0.0)) throw std::invalid_argument("rho_eps: eps must be positive");
  return std::pow(eps, -(4.0 * static_cast<double>(d_) + 2.0)) * rho(dilate(1.0 / eps, a));
}

double integrate_rho_eps(const MollifierKernel& k, double eps, std::size_t points) {
  if (points < 3) throw std::invalid_argument("integrate_rho_eps: need at least 3 points per coordinate");
  const std::size_t d = k.dim();
  const std::size_t dims = 1 + 2 * d;
  const double r = k.r0();
  std::vector<double> scale(dims, eps * r);
  scale[0] = eps * eps * r * r;
  for (std::size_t i = 0; i < d; ++i) scale[1 + i] = eps * eps * eps * r * r * r;
  const SpaceTimePoint c = dilate(eps, MollifierKernel::center(d));

  // fixed double-exponential rule on (-1, 1): u = tanh(pi/2 sinh(s)), trapezoid in s on [-2, 2]
  std::vector<double> node(points), weight(points);
  const double step = 4.0 / static_cast<double>(points - 1);
  for (std::size_t i = 0; i < points; ++i) {
    const double s = -2.0 + step * static_cast<double>(i);
    const double arg = 0.5 * std::numbers::pi * std::sinh(s);
    node[i] = std::tanh(arg);
    const double ch = std::cosh(arg);
    weight[i] = step * 0.5 * std::numbers::pi * std::cosh(s) / (ch * ch);
  }
  SpaceTimePoint a(d);
  auto slot = [&](std::size_t j) -> double& { return j == 0 ? a.t : (j <= d ? a.x[j - 1] : a.v[j - 1 - d]); };
  // nested over the ellipsoid, one coordinate at a time, with exact limits
  std::function<double(std::size_t, double)> level = [&](std::size_t j, double room) -> double {
    if (j == dims) return k.rho_eps(eps, a);
    const double half = std::sqrt(std::max(room, 0.0));
    if (half == 0.0) return 0.0;
    const double centre = j == 0 ? c.t : 0.0;
    double s = 0.0;
    for (std::size_t i = 0; i < points; ++i) {
      const double u = half * node[i];
      slot(j) = centre + scale[j] * u;
      s += weight[i] * level(j + 1, room - u * u);
    }
    return scale[j] * half * s;
  };
  return level(0, 1.0);
}

SupportCheck support_check(const MollifierKernel& k, double eps, std::size_t samples, std::uint64_t seed) {
  SpaceTimePoint lo, hi;
  scaled_support(k, eps, 1.5, lo, hi);
  const std::size_t d = k.dim();
  const SpaceTimePoint c = MollifierKernel::center(d);
  SupportCheck r;
  r.samples = samples;
  Stream rng(seed, 0, 11);
  SpaceTimePoint a(d);
  for (std::size_t n = 0; n < samples; ++n) {
    a.t = lo.t + (hi.t - lo.t) * rng.uniform();
    for (std::size_t i = 0; i < d; ++i) a.x[i] = lo.x[i] + (hi.x[i] - lo.x[i]) * rng.uniform();
    for (std::size_t i = 0; i < d; ++i) a.v[i] = lo.v[i] + (hi.v[i] - lo.v[i]) * rng.uniform();
    const double val = k.rho_eps(eps, a);
    r.min_value = std::min(r.min_value, val);
    if (val > 0.0) {
      ++r.inside_support;
      if (!(quasi_distance(dilate(1.0 / eps, a), c) < 1.0)) ++r.outside_ball;
    }
  }
  return r;
}

double group_convolve(const MollifierKernel& k, double eps, const SpaceTimeField& f, const SpaceTimePoint& p) {
  if (!(p.t > 2.5 * eps * eps)) throw std::invalid_argument("group_convolve: needs t > (5/2) eps^2");
  const auto& nodes = k.nodes();
  const auto& w = k.weights();
  std::vector<double> terms(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) terms[i] = w[i] * f(compose(inverse(dilate(eps, nodes[i])), p));
  return pairwise_sum(terms);
}

double group_convolve_over_support(const MollifierKernel& k, double eps, const SpaceTimeField& f,
                                   const SpaceTimePoint& lo, const SpaceTimePoint& hi, std::size_t order,
                                   const SpaceTimePoint& p) {
  double s = 0.0;
  box_rule(lo, hi, order, [&](const SpaceTimePoint& b, double w) {
    const double fb = f(b);
    if (fb != 0.0) s += w * fb * k.rho_eps(eps, compose(p, inverse(b)));
  });
  return s;
}

CommutationReport commutation_check(const MollifierKernel& k, double eps, const SpaceTimeField& f,
                                    const SpaceTimeField& yf, const std::vector<SpaceTimePoint>& grid, double h) {
  CommutationReport r;
  const SpaceTimeField fe = [&](const SpaceTimePoint& q) { return group_convolve(k, eps, f, q); };
  for (const auto& p : grid) {
    if (!(p.t - 2.0 * h > 2.5 * eps * eps)) throw std::invalid_argument("commutation_check: grid touches t <= (5/2) eps^2");
    const double dh = lie_derivative_fd(fe, p, h);
    const double d2h = lie_derivative_fd(fe, p, 2.0 * h);
    const double target = group_convolve(k, eps, yf, p);
    const double res = std::abs(dh - target);
    const double budget = 2.0 * std::abs(dh - d2h) + 1e-12 * (1.0 + std::abs(fe(p))) / h;
    r.max_residual = std::max(r.max_residual, res);
    r.max_budget = std::max(r.max_budget, budget);
    if (res > budget) ++r.violations;
    ++r.points;
  }
  r.pass = r.violations == 0;
  return r;
}

DerivativeBoundReport derivative_bound_check(const MollifierKernel& k, const std::vector<double>& eps_list,
                                             const SpaceTimeField& f, const SpaceTimePoint& lo,
                                             const SpaceTimePoint& hi, double T, double factor) {
  const std::size_t d = k.dim();
  const double dd = static_cast<double>(d);
  constexpr std::size_t kOrder = 6;
  double l1 = 0.0;
  box_rule(lo, hi, 12, [&](const SpaceTimePoint& b, double w) { l1 += w * std::abs(f(b)); });

  SpaceTimePoint b0(d);
  b0.t = 0.5 * (lo.t + hi.t);
  for (std::size_t i = 0; i < d; ++i) {
    b0.x[i] = 0.5 * (lo.x[i] + hi.x[i]);
    b0.v[i] = 0.5 * (lo.v[i] + hi.v[i]);
  }
  // evaluation points at fixed relative positions inside each scaled support
  std::vector<SpaceTimePoint> rel;
  {
    SpaceTimePoint a, c;
    scaled_support(k, 1.0, 0.8, a, c);
    box_rule(a, c, 4, [&](const SpaceTimePoint& q, double) { rel.push_back(q); });
  }
  DerivativeBoundReport rep;
  std::vector<double> le, lt, lx, lv;
  for (double eps : eps_list) {
    DerivativeRow row;
    row.eps = eps;
    const SpaceTimeField fe = [&](const SpaceTimePoint& q) {
      return group_convolve_over_support(k, eps, f, lo, hi, kOrder, q);
    };
    for (const auto& q : rel) {
      const SpaceTimePoint p = compose(dilate(eps, q), b0);
      auto central = [&](auto&& bump, double h) {
        SpaceTimePoint up = p, dn = p;
        bump(up, h);
        bump(dn, -h);
        return std::abs(fe(up) - fe(dn)) / (2.0 * h);
      };
      row.max_dt = std::max(row.max_dt, central([](SpaceTimePoint& s, double h) { s.t += h; }, 1e-3 * eps * eps));
      for (std::size_t i = 0; i < d; ++i) {
        row.max_dx = std::max(row.max_dx, central([i](SpaceTimePoint& s, double h) { s.x[i] += h; }, 1e-3 * eps * eps * eps));
        row.max_dv = std::max(row.max_dv, central([i](SpaceTimePoint& s, double h) { s.v[i] += h; }, 1e-3 * eps));
      }
    }
    row.C_t = row.max_dt * std::pow(eps, 4.0 * dd + 4.0) / l1;
    row.C_x = row.max_dx * std::pow(eps, 4.0 * dd + 5.0) / l1;
    row.C_v = row.max_dv * std::pow(eps, 4.0 * dd + 3.0) / (T * l1);
    le.push_back(std::log(eps));
    lt.push_back(std::log(row.max_dt));
    lx.push_back(std::log(row.max_dx));
    lv.push_back(std::log(row.max_dv));
    rep.rows.push_back(row);
  }
  auto spread = [&](double DerivativeRow::*m) {
    double lo_c = INFINITY, hi_c = 0.0;
    for (const auto& r : rep.rows) {
      lo_c = std::min(lo_c, r.*m);
      hi_c = std::max(hi_c, r.*m);
    }
    return hi_c / lo_c;
  };
  rep.spread_t = spread(&DerivativeRow::C_t);
  rep.spread_x = spread(&DerivativeRow::C_x);
  rep.spread_v = spread(&DerivativeRow::C_v);
  if (le.size() >= 2) {
    rep.slope_t = least_squares(le, lt).slope;
    rep.slope_x = least_squares(le, lx).slope;
    rep.slope_v = least_squares(le, lv).slope;
  }
  rep.pass = rep.spread_t <= factor && rep.spread_x <= factor && rep.spread_v <= factor;
  return rep;
}

CaratheodoryReport caratheodory_limit_check(const MollifierKernel& k, const SpaceTimeField& f,
                                            const SpaceTimeField& G, const EmpiricalFlow& flow, std::size_t from,
                                            const std::vector<double>& eps_list, double n_se) {
  const auto& times = flow.times();
  if (from + 1 >= times.size()) throw std::invalid_argument("caratheodory_limit_check: need two times after `from`");
  const double eps_max = eps_list.empty() ? 0.0 : *std::max_element(eps_list.begin(), eps_list.end());
  if (!(times[from] > 2.5 * eps_max * eps_max))
    throw std::invalid_argument("caratheodory_limit_check: start time must exceed (5/2) eps^2");
  const std::size_t n = flow.size();
  auto path_integrals = [&](const SpaceTimeField& h) {
    std::vector<double> q(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      auto at = [&](std::size_t j) {
        const SpaceTimePoint p(times[j], flow.sample(j, i));
        return G(p) * h(p) * flow.weight(j, i) * static_cast<double>(n);
      };
      double prev = at(from), s = 0.0;
      for (std::size_t j = from + 1; j < times.size(); ++j) {
        const double cur = at(j);
        s += 0.5 * (times[j] - times[j - 1]) * (prev + cur);
        prev = cur;
      }
      q[i] = s;
    }
    return q;
  };
  CaratheodoryReport r;
  const std::vector<double> base = path_integrals(f);
  const MeanSE ref = mean_se(base);
  r.reference = ref.mean;
  r.reference_se = ref.se;
  for (double eps : eps_list) {
    const std::vector<double> q =
        path_integrals([&](const SpaceTimePoint& p) { return group_convolve(k, eps, f, p); });
    std::vector<double> diff(n);
    for (std::size_t i = 0; i < n; ++i) diff[i] = q[i] - base[i];
    const MeanSE m = mean_se(diff);
    r.rows.push_back({eps, std::abs(m.mean), m.se});
  }
  r.decreasing = true;
  for (std::size_t i = 1; i < r.rows.size(); ++i)
    if (r.rows[i].difference > r.rows[i - 1].difference + 0.5 * r.reference_se) r.decreasing = false;
  r.pass = r.decreasing && !r.rows.empty() && r.rows.back().difference <= n_se * r.reference_se;
  return r;
}

}  // namespace kinfp
