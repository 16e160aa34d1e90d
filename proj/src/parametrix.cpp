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

#include "kinfp/parametrix.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "kinfp/bridge.hpp"
#include "kinfp/quadrature.hpp"
#include "kinfp/rng.hpp"
#include "kinfp/stats.hpp"

namespace kinfp {

namespace {

constexpr int kMaxDepth = 24;

// Gauss-Legendre in theta with tau = a + (b - a) sin^2(theta); weights include the Jacobian over (b - a).
struct SinSquaredRule {
  std::vector<double> frac, weight;
};

SinSquaredRule sin_squared_rule(std::size_t n) {
  const Rule& r = gauss_legendre(n);
  SinSquaredRule out;
  for (std::size_t i = 0; i < n; ++i) {
    const double th = 0.25 * std::numbers::pi * (1.0 + r.nodes[i]);
    const double s = std::sin(th);
    out.frac.push_back(s * s);
    out.weight.push_back(r.weights[i] * 0.25 * std::numbers::pi * std::sin(2.0 * th));
  }
  return out;
}

// v-gradient of log P(a; w) for one coordinate pair, given the inverse covariance of the gap.
inline double grad_log_pair(const Block& inv, double gap, double ax, double av, double wx, double wv) {
  const double rx = wx - ax - gap * av, rv = wv - av;
  const double qx = inv.xx * rx + inv.xv * rv;
  const double qv = inv.xv * rx + inv.vv * rv;
  return gap * qx + qv;
}

void require_scalar(const PhasePoint& z, const char* what) {
  if (z.dim() != 1) throw DimensionError(std::string(what) + ": tensor quadrature is implemented for d = 1 only");
}

double field_scalar(const DriftField& f, double t, double x, double v) {
  double out = 0.0;
  f.eval_into(t, PhasePoint::scalar(x, v), &out);
  if (!std::isfinite(out)) throw NonFiniteDrift(f.name(), t, PhasePoint::scalar(x, v));
  return out;
}

// F(a) . grad_v log P(a; b) in any dimension
double ratio_factor(const DriftField& f, const KernelSpec& k, double ta, const PhasePoint& a, double tb,
                    const PhasePoint& b) {
  const Vec fa = f.eval(ta, a);
  const Vec g = grad_v_log_P(k, ta, a, tb, b);
  double r = 0.0;
  for (std::size_t i = 0; i < fa.size(); ++i) r += fa[i] * g[i];
  return r;
}

}  // namespace

void ParametrixConfig::validate(double beta) const {
  if (depth < 0 || depth > kMaxDepth) throw std::invalid_argument("parametrix: depth must lie in [0, 24]");
  if (!(sigma > 0.0)) throw std::invalid_argument("parametrix: sigma must be positive");
  if (!(delta > 0.0)) throw std::invalid_argument("parametrix: delta must be positive");
  if (time_order < 2 || space_order < 2) throw std::invalid_argument("parametrix: quadrature order < 2");
  if (!(horizon > 0.0)) throw std::invalid_argument("parametrix: horizon must be positive");
  BoundConstants b;
  b.beta = beta;
  b.eps = eps;
  b.eta = eta;
  const double S = summability_S(b);
  if (!(S < 1.0)) throw std::invalid_argument("parametrix: sum of eps_n is " + std::to_string(S) + " >= 1");
}

Parametrix::Parametrix(DriftField field, ParametrixConfig cfg)
    : field_(std::move(field)), cfg_(cfg), scale_(convention_scale(cfg.sigma, cfg.convention)) {
  cfg_.validate(field_.beta());
  if (cfg_.grad_const <= 0.0) cfg_.grad_const = fit_gradient_constant(kernel(), cfg_.delta, 0.01, cfg_.horizon);
}

BoundConstants Parametrix::bound_constants() const {
  BoundConstants b;
  b.d = field_.dim();
  b.sigma = cfg_.sigma;
  b.delta = cfg_.delta;
  b.beta = field_.beta();
  b.eps = cfg_.eps;
  b.eta = cfg_.eta;
  b.horizon = cfg_.horizon;
  b.c_beta = cfg_.c_beta;
  b.grad_const = cfg_.grad_const;
  b.drift_const = field_.is_zero() ? 0.0 : field_.growth_constant();
  b.convention = cfg_.convention;
  return b;
}

double Parametrix::phi1(double s, const PhasePoint& z, double t, const PhasePoint& y) const {
  if (!(t > s)) throw std::invalid_argument("phi1: requires s < t");
  if (field_.is_zero()) return 0.0;
  const Vec f = field_.eval(s, z);
  const Vec g = grad_v_P(kernel(), s, z, t, y);
  double out = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) out += f[i] * g[i];
  return out;
}

// out[k] = phi_{k+1}(a; t, y) / P(a; t, y) for k < kmax
void Parametrix::levels(double ta, double ax, double av, double t, double yx, double yv, int kmax, double* out) const {
  std::fill(out, out + kmax, 0.0);
  const double f = field_scalar(field_, ta, ax, av);
  if (f == 0.0) return;
  const double G = t - ta;
  const Block inv = covariance_block(scale_, G).inverse();
  out[0] = f * grad_log_pair(inv, G, ax, av, yx, yv);
  if (kmax == 1) return;

  static thread_local std::size_t cached_order = 0;
  static thread_local SinSquaredRule rule;
  if (cached_order != cfg_.time_order) {
    rule = sin_squared_rule(cfg_.time_order);
    cached_order = cfg_.time_order;
  }
  const SinSquaredRule& tr = rule;
  const Rule& gh = gauss_hermite_normal(cfg_.space_order);
  double sub[kMaxDepth];
  for (std::size_t i = 0; i < tr.frac.size(); ++i) {
    const double g1 = G * tr.frac[i], g2 = G - g1;
    const double tau = ta + g1;
    const BridgeGaps bg(scale_, g1, g2);
    double mx, mv;
    bg.mean(ax, av, yx, yv, mx, mv);
    for (std::size_t p = 0; p < gh.size(); ++p) {
      const double wx = mx + bg.chol.xx * gh.nodes[p];
      for (std::size_t q = 0; q < gh.size(); ++q) {
        const double wv = mv + bg.chol.xv * gh.nodes[p] + bg.chol.vv * gh.nodes[q];
        const double w = G * tr.weight[i] * gh.weights[p] * gh.weights[q];
        const double r = f * grad_log_pair(bg.inv1, g1, ax, av, wx, wv);
        levels(tau, wx, wv, t, yx, yv, kmax - 1, sub);
        for (int k = 0; k + 1 < kmax; ++k) out[k + 1] += w * r * sub[k];
      }
    }
  }
}

std::vector<double> Parametrix::phi_terms(double s, const PhasePoint& z, double t, const PhasePoint& y, int n) const {
  if (!(t > s)) throw std::invalid_argument("phi_terms: requires s < t");
  if (n < 1 || n > kMaxDepth) throw std::invalid_argument("phi_terms: n must lie in [1, 24]");
  require_scalar(z, "phi_terms");
  std::vector<double> out(n, 0.0);
  levels(s, z.x[0], z.v[0], t, y.x[0], y.v[0], n, out.data());
  const double P = eval_P(kernel(), s, z, t, y);
  for (double& o : out) o *= P;
  return out;
}

PValue Parametrix::eval_p(double s, const PhasePoint& z, double t, const PhasePoint& y) const {
  if (!(t > s)) throw std::invalid_argument("eval_p: requires s < t");
  require_scalar(z, "eval_p");
  const int N = cfg_.depth;
  const double P0 = eval_P(kernel(), s, z, t, y);
  std::vector<double> c(N, 0.0);
  if (N > 0 && !field_.is_zero()) {
    const SinSquaredRule tr = sin_squared_rule(cfg_.time_order);
    const Rule& gh = gauss_hermite_normal(cfg_.space_order);
    const double G = t - s;
    double lv[kMaxDepth];
    for (std::size_t i = 0; i < tr.frac.size(); ++i) {
      const double g1 = G * tr.frac[i];
      const BridgeGaps bg(scale_, g1, G - g1);
      double mx, mv;
      bg.mean(z.x[0], z.v[0], y.x[0], y.v[0], mx, mv);
      for (std::size_t p = 0; p < gh.size(); ++p) {
        const double wx = mx + bg.chol.xx * gh.nodes[p];
        for (std::size_t q = 0; q < gh.size(); ++q) {
          const double wv = mv + bg.chol.xv * gh.nodes[p] + bg.chol.vv * gh.nodes[q];
          const double w = G * tr.weight[i] * gh.weights[p] * gh.weights[q];
          levels(s + g1, wx, wv, t, y.x[0], y.v[0], N, lv);
          for (int k = 0; k < N; ++k) c[k] += w * lv[k];
        }
      }
    }
  }
  PValue out;
  out.partial.push_back(P0);
  double acc = 1.0;
  for (int k = 0; k < N; ++k) {
    acc += c[k];
    out.partial.push_back(P0 * acc);
  }
  out.value = out.partial.back();
  out.negative = out.value < 0.0;
  out.tail_bound = field_.is_zero() ? 0.0 : tail_bound(bound_constants(), N, s, z, t, y);
  out.tail_warning = !(out.tail_bound <= cfg_.tail_tolerance);
  return out;
}

MCValue Parametrix::mc_eval_p(double s, const PhasePoint& z, double t, const PhasePoint& y) const {
  if (!(t > s)) throw std::invalid_argument("mc_eval_p: requires s < t");
  const KernelSpec k = kernel();
  const double P0 = eval_P(k, s, z, t, y);
  const std::size_t d = z.dim();
  const double G = t - s;
  MCValue out;
  out.value = P0;
  for (int n = 1; n <= cfg_.depth; ++n) {
    std::vector<double> w(cfg_.mc_paths, 0.0);
    if (!field_.is_zero()) {
      const double log_norm = std::lgamma(1.0 + 0.5 * n) - n * std::lgamma(0.5);
      for (std::size_t path = 0; path < cfg_.mc_paths; ++path) {
        Stream rng(cfg_.seed, path, 1000 + n);
        std::vector<double> g(n + 1);
        g[0] = rng.gamma(1.0);
        double tot = g[0];
        for (int j = 1; j <= n; ++j) tot += (g[j] = rng.gamma(0.5));
        double log_pdf = log_norm;
        for (int j = 1; j <= n; ++j) log_pdf -= 0.5 * std::log(g[j] / tot);
        std::vector<double> tau(n + 2);
        tau[0] = s;
        for (int j = 1; j <= n; ++j) tau[j] = tau[j - 1] + G * g[j - 1] / tot;
        tau[n + 1] = t;
        std::vector<PhasePoint> pts(n + 2, PhasePoint(d));
        pts[0] = z;
        pts[n + 1] = y;
        for (int j = 1; j <= n; ++j) {
          const double g1 = tau[j] - tau[j - 1], g2 = t - tau[j];
          if (!(g1 > 0.0 && g2 > 0.0)) continue;
          const BridgeGaps bg(scale_, g1, g2);
          for (std::size_t i = 0; i < d; ++i) {
            double mx, mv;
            bg.mean(pts[j - 1].x[i], pts[j - 1].v[i], y.x[i], y.v[i], mx, mv);
            const double a = rng.normal(), b = rng.normal();
            pts[j].x[i] = mx + bg.chol.xx * a;
            pts[j].v[i] = mv + bg.chol.xv * a + bg.chol.vv * b;
          }
        }
        double prod = std::exp(n * std::log(G) - log_pdf);
        for (int j = 1; j <= n && prod != 0.0; ++j) {
          if (!(tau[j + 1] > tau[j])) {
            prod = 0.0;
            break;
          }
          prod *= ratio_factor(field_, k, tau[j], pts[j], tau[j + 1], pts[j + 1]);
        }
        w[path] = prod;
      }
    }
    const MeanSE m = mean_se(w);
    out.term_means.push_back(P0 * m.mean);
    out.term_se.push_back(P0 * m.se);
    out.value += P0 * m.mean;
  }
  double var = 0.0;
  for (double e : out.term_se) var += e * e;
  out.se = std::sqrt(var);
  out.unreliable = out.se > 0.5 * std::fabs(out.value);
  return out;
}

PValue Parametrix::p(double s, const PhasePoint& z, double t, const PhasePoint& y) const {
  if (cfg_.mode == EvalMode::Tensor) return eval_p(s, z, t, y);
  const MCValue m = mc_eval_p(s, z, t, y);
  PValue out;
  out.value = m.value;
  out.negative = m.value < 0.0;
  double acc = eval_P(kernel(), s, z, t, y);
  out.partial.push_back(acc);
  for (double c : m.term_means) out.partial.push_back(acc += c);
  return out;
}

std::vector<double> Parametrix::integrate_against(double s, const PhasePoint& z, double t,
                                                  const std::function<double(const PhasePoint&)>& psi,
                                                  std::size_t order, const std::optional<YBox>& box) const {
  require_scalar(z, "integrate_against");
  std::vector<double> acc(cfg_.depth + 1, 0.0);
  auto add = [&](const PhasePoint& y, double w) {
    const double f = psi(y);
    if (f == 0.0) return;
    const PValue v = eval_p(s, z, t, y);
    for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += w * f * v.partial[k];
  };
  if (box) {
    const Rule rx = gauss_legendre_on(order, box->x_lo, box->x_hi);
    const Rule rv = gauss_legendre_on(order, box->v_lo, box->v_hi);
    for (std::size_t i = 0; i < order; ++i)
      for (std::size_t j = 0; j < order; ++j)
        add(PhasePoint::scalar(rx.nodes[i], rv.nodes[j]), rx.weights[i] * rv.weights[j]);
    return acc;
  }
  // E over the driftless law: p = P0 (1 + sum c_k), so divide out the density at each node
  const Rule& gh = gauss_hermite_normal(order);
  const PhasePoint m = shift(t - s, z);
  const Block L = covariance_block(scale_, t - s).cholesky();
  for (std::size_t i = 0; i < order; ++i)
    for (std::size_t j = 0; j < order; ++j) {
      const PhasePoint y = PhasePoint::scalar(m.x[0] + L.xx * gh.nodes[i],
                                              m.v[0] + L.xv * gh.nodes[i] + L.vv * gh.nodes[j]);
      add(y, gh.weights[i] * gh.weights[j] / eval_P(kernel(), s, z, t, y));
    }
  return acc;
}

MCValue Parametrix::mc_integrate_against(double s, const PhasePoint& z, double t,
                                         const std::function<double(const PhasePoint&)>& psi, std::size_t paths) const {
  if (!(t > s)) throw std::invalid_argument("mc_integrate_against: requires s < t");
  const KernelSpec k = kernel();
  const std::size_t d = z.dim();
  const double G = t - s;
  MCValue out;
  auto forward = [&](Stream& rng, const PhasePoint& a, double gap) {
    const Block L = covariance_block(scale_, gap).cholesky();
    PhasePoint b(d);
    for (std::size_t i = 0; i < d; ++i) {
      const double u = rng.normal(), v = rng.normal();
      b.x[i] = a.x[i] + gap * a.v[i] + L.xx * u;
      b.v[i] = a.v[i] + L.xv * u + L.vv * v;
    }
    return b;
  };
  for (int n = 0; n <= cfg_.depth; ++n) {
    std::vector<double> w(paths, 0.0);
    if (n == 0 || !field_.is_zero()) {
      const double log_norm = std::lgamma(1.0 + 0.5 * n) - n * std::lgamma(0.5);
      for (std::size_t path = 0; path < paths; ++path) {
        Stream rng(cfg_.seed, path, 2000 + n);
        if (n == 0) {
          w[path] = psi(forward(rng, z, G));
          continue;
        }
        std::vector<double> g(n + 1);
        g[0] = rng.gamma(1.0);
        double tot = g[0];
        for (int j = 1; j <= n; ++j) tot += (g[j] = rng.gamma(0.5));
        double log_pdf = log_norm;
        for (int j = 1; j <= n; ++j) log_pdf -= 0.5 * std::log(g[j] / tot);
        std::vector<double> tau(n + 2);
        tau[0] = s;
        for (int j = 1; j <= n; ++j) tau[j] = tau[j - 1] + G * g[j - 1] / tot;
        tau[n + 1] = t;
        std::vector<PhasePoint> pts(n + 2);
        pts[0] = z;
        bool ok = true;
        for (int j = 1; j <= n + 1; ++j) {
          const double gap = tau[j] - tau[j - 1];
          if (!(gap > 0.0)) {
            ok = false;
            break;
          }
          pts[j] = forward(rng, pts[j - 1], gap);
        }
        if (!ok) continue;
        double prod = std::exp(n * std::log(G) - log_pdf);
        for (int j = 1; j <= n && prod != 0.0; ++j)
          prod *= ratio_factor(field_, k, tau[j], pts[j], tau[j + 1], pts[j + 1]);
        w[path] = prod == 0.0 ? 0.0 : prod * psi(pts[n + 1]);
      }
    }
    const MeanSE m = mean_se(w);
    out.term_means.push_back(m.mean);
    out.term_se.push_back(m.se);
    out.value += m.mean;
  }
  double var = 0.0;
  for (double e : out.term_se) var += e * e;
  out.se = std::sqrt(var);
  out.unreliable = out.se > 0.5 * std::fabs(out.value);
  return out;
}

double phi_next(const DriftField& field, const KernelSpec& k, const TargetKernel& phi_k, double s,
                const PhasePoint& z, double t, const PhasePoint& y, std::size_t time_order, std::size_t space_order) {
  if (!(t > s)) throw std::invalid_argument("phi_next: requires s < t");
  if (time_order < 2 || space_order < 2) throw std::invalid_argument("phi_next: quadrature order < 2");
  require_scalar(z, "phi_next");
  const double f = field_scalar(field, s, z.x[0], z.v[0]);
  if (f == 0.0) return 0.0;
  const double scale = convention_scale(k.lambda, k.convention);
  const SinSquaredRule tr = sin_squared_rule(time_order);
  const Rule& gh = gauss_hermite_normal(space_order);
  const double G = t - s;
  double acc = 0.0;
  for (std::size_t i = 0; i < tr.frac.size(); ++i) {
    const double g1 = G * tr.frac[i];
    const BridgeGaps bg(scale, g1, G - g1);
    double mx, mv;
    bg.mean(z.x[0], z.v[0], y.x[0], y.v[0], mx, mv);
    for (std::size_t p = 0; p < gh.size(); ++p) {
      const double wx = mx + bg.chol.xx * gh.nodes[p];
      for (std::size_t q = 0; q < gh.size(); ++q) {
        const double wv = mv + bg.chol.xv * gh.nodes[p] + bg.chol.vv * gh.nodes[q];
        const PhasePoint w = PhasePoint::scalar(wx, wv);
        const double pk = phi_k(s + g1, w);
        if (pk == 0.0) continue;
        const double r = f * grad_log_pair(bg.inv1, g1, z.x[0], z.v[0], wx, wv);
        acc += G * tr.weight[i] * gh.weights[p] * gh.weights[q] * r * pk / eval_P(k, s + g1, w, t, y);
      }
    }
  }
  return acc * eval_P(k, s, z, t, y);
}

SeriesDiagnostics series_convergence_report(const Parametrix& par, const std::vector<EvalPoint>& eval_set, int n_max,
                                            double compact_radius) {
  SeriesDiagnostics out;
  BoundConstants b = par.bound_constants();
  b.c_beta = std::max(b.c_beta, fit_c_beta(b.sigma, b.beta, b.convention, 10000, par.config().seed));
  out.c_beta = b.c_beta;
  out.grad_const = b.grad_const;
  out.S = summability_S(b);
  out.K = K_constant(b);
  out.J = J_function(b.horizon, (b.sigma + b.delta) / std::pow(epsilon_n(b, 1), 1.0 / static_cast<double>(b.d)),
                     b.beta, b.c_beta, b.d);
  out.summability = summability_report(b, compact_radius);
  out.empirical_sup.assign(n_max, 0.0);
  out.bound_sup.assign(n_max, 0.0);
  out.worst_ratio.assign(n_max, 0.0);
  for (const EvalPoint& e : eval_set) {
    const std::vector<double> phi = par.phi_terms(e.s, e.z, e.t, e.y, n_max);
    for (int n = 1; n <= n_max; ++n) {
      const double bound = induction_bound(b, n, e.s, e.z, e.t, e.y);
      const double a = std::fabs(phi[n - 1]);
      out.empirical_sup[n - 1] = std::max(out.empirical_sup[n - 1], a);
      out.bound_sup[n - 1] = std::max(out.bound_sup[n - 1], bound);
      const double r = a == 0.0 ? 0.0 : (bound > 0.0 ? a / bound : std::numeric_limits<double>::infinity());
      out.worst_ratio[n - 1] = std::max(out.worst_ratio[n - 1], r);
    }
  }
  if (!eval_set.empty()) {
    const EvalPoint& e = eval_set.front();
    out.tail_bound = tail_bound(b, par.config().depth, e.s, e.z, e.t, e.y);
  }
  out.below_bound = std::all_of(out.worst_ratio.begin(), out.worst_ratio.end(), [](double r) { return r <= 1.0; });
  // ratio test: sqrt(n) |phi_{n+1}| / |phi_n| should stay bounded
  double first = -1.0;
  out.ratio_consistent = true;
  for (int n = 1; n < n_max; ++n) {
    const double num = out.empirical_sup[n], den = out.empirical_sup[n - 1];
    const double r = den > 0.0 ? num / den : 0.0;
    out.term_ratio.push_back(r);
    const double scaled = r * std::sqrt(static_cast<double>(n));
    if (first < 0.0)
      first = scaled;
    else if (scaled > 1.5 * first + 1e-300)
      out.ratio_consistent = false;
  }
  return out;
}

SandwichResult gaussian_sandwich_check(const Parametrix& par, const std::vector<EvalPoint>& grid, double eps_up,
                                       const std::vector<double>& lambda_grid) {
  SandwichResult out;
  const Convention conv = par.config().convention;
  const KernelSpec upper{par.config().sigma + eps_up, conv};
  std::vector<double> lower(lambda_grid.size(), std::numeric_limits<double>::infinity());
  out.min_p = std::numeric_limits<double>::infinity();
  for (const EvalPoint& e : grid) {
    const double p = par.p(e.s, e.z, e.t, e.y).value;
    out.min_p = std::min(out.min_p, p);
    if (p < 0.0) out.negative_at.push_back(e);
    out.C_upper = std::max(out.C_upper, p / eval_P(upper, e.s, e.z, e.t, e.y));
    for (std::size_t i = 0; i < lambda_grid.size(); ++i)
      lower[i] = std::min(lower[i], p / eval_P({lambda_grid[i], conv}, e.s, e.z, e.t, e.y));
  }
  for (std::size_t i = 0; i < lambda_grid.size(); ++i) {
    if (lower[i] > out.c_lower) {
      out.c_lower = lower[i];
      out.lambda_lower = lambda_grid[i];
    }
  }
  out.pass = out.negative_at.empty() && std::isfinite(out.C_upper) && out.C_upper > 0.0 && out.c_lower > 0.0 &&
             std::isfinite(out.c_lower);
  return out;
}

std::vector<EvalPoint> whitened_grid(const KernelSpec& k, const PhasePoint& z, const std::vector<double>& times,
                                     const std::vector<double>& offsets) {
  require_scalar(z, "whitened_grid");
  std::vector<EvalPoint> out;
  for (double t : times) {
    const PhasePoint m = shift(t, z);
    const Block L = covariance_block(convention_scale(k.lambda, k.convention), t).cholesky();
    for (double a : offsets)
      for (double b : offsets)
        out.push_back({0.0, z, t, PhasePoint::scalar(m.x[0] + L.xx * a, m.v[0] + L.xv * a + L.vv * b)});
  }
  return out;
}

}  // namespace kinfp
