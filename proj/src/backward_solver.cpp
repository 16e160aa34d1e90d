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

#include "kinfp/backward_solver.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "kinfp/langevin_sim.hpp"
#include "kinfp/quadrature.hpp"
#include "kinfp/stats.hpp"

namespace kinfp {

namespace {

void add_jet(const Jet& j, double w, Expectation& e) {
  e.value += w * j.value;
  for (std::size_t i = 0; i < e.dx.size(); ++i) {
    e.dx[i] += w * j.dx[i];
    e.dv[i] += w * j.dv[i];
  }
}

/// Visits every node of the 2d-dimensional tensor product of a 1-D rule.
template <class F>
void tensor_nodes(std::size_t dims, std::size_t n, F&& f) {
  std::vector<std::size_t> idx(dims, 0);
  for (;;) {
    f(idx);
    std::size_t k = 0;
    while (k < dims && ++idx[k] == n) idx[k++] = 0;
    if (k == dims) return;
  }
}

void bump_expectation(const TestFunction::Term& term, const PhasePoint& mean, const Block& cov, std::size_t order,
                      Expectation& out) {
  const std::size_t d = mean.dim();
  const TestFunction single = TestFunction::bump(term.center, term.width, term.amplitude);
  if (!(cov.xx > 0.0)) {
    add_jet(single.jet(mean), 1.0, out);
    return;
  }
  const double sd = std::sqrt(std::max(cov.xx, cov.vv));
  if (sd < 0.5 * term.width) {
    // narrow law: Gauss-Hermite around the mean
    const Rule& gh = gauss_hermite_normal(order);
    const Block L = cov.cholesky();
    tensor_nodes(2 * d, order, [&](const std::vector<std::size_t>& idx) {
      PhasePoint y(d);
      double w = 1.0;
      for (std::size_t i = 0; i < d; ++i) {
        const double a = gh.nodes[idx[2 * i]], b = gh.nodes[idx[2 * i + 1]];
        w *= gh.weights[idx[2 * i]] * gh.weights[idx[2 * i + 1]];
        y.x[i] = mean.x[i] + L.xx * a;
        y.v[i] = mean.v[i] + L.xv * a + L.vv * b;
      }
      add_jet(single.jet(y), w, out);
    });
    return;
  }
  // wide law: Gauss-Legendre over the bump's support against the Gaussian density
  const Rule& gl = gauss_legendre(2 * order);
  const Block inv = cov.inverse();
  const double norm = 1.0 / (2.0 * std::numbers::pi * std::sqrt(cov.det()));
  const double R = term.width;
  tensor_nodes(2 * d, gl.size(), [&](const std::vector<std::size_t>& idx) {
    PhasePoint y(d);
    double w = 1.0;
    for (std::size_t i = 0; i < d; ++i) {
      y.x[i] = term.center.x[i] + R * gl.nodes[idx[2 * i]];
      y.v[i] = term.center.v[i] + R * gl.nodes[idx[2 * i + 1]];
      const double a = y.x[i] - mean.x[i], b = y.v[i] - mean.v[i];
      w *= R * R * gl.weights[idx[2 * i]] * gl.weights[idx[2 * i + 1]] * norm *
           std::exp(-0.5 * (inv.xx * a * a + 2.0 * inv.xv * a * b + inv.vv * b * b));
    }
    if (w != 0.0) add_jet(single.jet(y), w, out);
  });
}

void gaussian_term_expectation(const TestFunction::Term& t, const PhasePoint& mean, const Block& cov, Expectation& out) {
  const std::size_t d = mean.dim();
  const double w2 = t.width * t.width;
  const Block sum{cov.xx + w2, cov.xv, cov.vv + w2};
  const Block inv = sum.inverse();
  const double factor = w2 / std::sqrt(sum.det());
  double val = t.amplitude;
  Vec gx(d), gv(d);
  for (std::size_t i = 0; i < d; ++i) {
    const double a = mean.x[i] - t.center.x[i], b = mean.v[i] - t.center.v[i];
    val *= factor * std::exp(-0.5 * (inv.xx * a * a + 2.0 * inv.xv * a * b + inv.vv * b * b));
    gx[i] = -(inv.xx * a + inv.xv * b);
    gv[i] = -(inv.xv * a + inv.vv * b);
  }
  out.value += val;
  for (std::size_t i = 0; i < d; ++i) {
    out.dx[i] += val * gx[i];
    out.dv[i] += val * gv[i];
  }
}

/// Cubic Lagrange stencil on a uniform grid: first index and four weights.
std::size_t stencil(double q, double lo, double step, std::size_t n, double w[4]) {
  const double s = (q - lo) / step;
  auto i = static_cast<std::ptrdiff_t>(std::floor(s)) - 1;
  i = std::clamp<std::ptrdiff_t>(i, 0, static_cast<std::ptrdiff_t>(n) - 4);
  const double u = s - static_cast<double>(i);  // nodes at 0, 1, 2, 3
  w[0] = -(u - 1.0) * (u - 2.0) * (u - 3.0) / 6.0;
  w[1] = u * (u - 2.0) * (u - 3.0) / 2.0;
  w[2] = -u * (u - 1.0) * (u - 3.0) / 2.0;
  w[3] = u * (u - 1.0) * (u - 2.0) / 6.0;
  return static_cast<std::size_t>(i);
}

double field_scalar(const DriftField& f, double t, double x, double v) {
  double out = 0.0;
  f.eval_into(t, PhasePoint::scalar(x, v), &out);
  return out;
}

// Standard-normal rule in a coordinate where the integrand has a cube-root cusp at c (the x-part of
// ||z||_B vanishing): unit Gauss-Legendre panels on [-6, 6] with a break at c, and the two panels
// touching c mapped by xi = c +- s^3 so that |xi - c|^{1/3} becomes |s|. Gauss-Hermite when c is
// outside the panels.
Rule cusp_normal_rule(double c, std::size_t order) {
  constexpr double kCut = 6.0;
  if (!(std::fabs(c) < kCut)) return gauss_hermite_normal(order);
  const std::size_t k = std::max<std::size_t>(3, order / 2);
  const Rule& gl = gauss_legendre(k);
  std::vector<double> breaks{c};
  for (double b = -kCut; b <= kCut; b += 1.0)
    if (std::fabs(b - c) > 0.05) breaks.push_back(b);
  std::sort(breaks.begin(), breaks.end());
  const double inv_sqrt_2pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);
  Rule r;
  for (std::size_t p = 0; p + 1 < breaks.size(); ++p) {
    const double lo = breaks[p], hi = breaks[p + 1];
    const bool left_cusp = lo == c, right_cusp = hi == c;
    for (std::size_t i = 0; i < gl.size(); ++i) {
      double xi, w;
      if (left_cusp || right_cusp) {
        const double smax = std::cbrt(hi - lo);
        const double sv = 0.5 * smax * (gl.nodes[i] + 1.0);
        xi = left_cusp ? lo + sv * sv * sv : hi - sv * sv * sv;
        w = 0.5 * smax * gl.weights[i] * 3.0 * sv * sv;
      } else {
        xi = 0.5 * (lo + hi) + 0.5 * (hi - lo) * gl.nodes[i];
        w = 0.5 * (hi - lo) * gl.weights[i];
      }
      r.nodes.push_back(xi);
      r.weights.push_back(w * std::exp(-0.5 * xi * xi) * inv_sqrt_2pi);
    }
  }
  return r;
}

}  // namespace

void BackwardProblem::validate(double alpha) const {
  if (!(T > 0.0)) throw std::invalid_argument("BackwardProblem: T must be positive");
  if (!(gamma >= 0.0 && gamma < 1.0)) throw std::invalid_argument("BackwardProblem: gamma must lie in [0, 1)");
  if (!(beta_psi > 0.0 && beta_psi < alpha))
    throw std::invalid_argument("BackwardProblem: beta_psi must lie in (0, alpha) of the drift");
  if (!(beta_g >= 0.0 && beta_g <= 2.0 + beta_psi))
    throw std::invalid_argument("BackwardProblem: beta_g must lie in [0, 2 + beta_psi]");
  if (!g.empty() && !psi.empty() && g.dim() != psi.dim())
    throw DimensionError("BackwardProblem: g and psi dimensions differ");
}

std::size_t BackwardProblem::dim() const { return psi.empty() ? g.dim() : psi.dim(); }

double BackwardProblem::source(double t, const PhasePoint& z) const {
  if (psi.empty()) return 0.0;
  const double v = psi.value(z);
  return gamma == 0.0 ? v : v * std::pow(T - t, -gamma);
}

void BackwardConfig::validate() const {
  if (!(sigma > 0.0)) throw std::invalid_argument("BackwardConfig: sigma must be positive");
  if (depth < 0) throw std::invalid_argument("BackwardConfig: depth must be nonnegative");
  if (grid_t < 4 || grid_z < 4) throw std::invalid_argument("BackwardConfig: tables need at least 4 nodes per axis");
  if (!(box > 0.0)) throw std::invalid_argument("BackwardConfig: box must be positive");
  if (time_order < 2 || space_order < 2 || source_order < 2 || bump_order < 2)
    throw std::invalid_argument("BackwardConfig: quadrature orders must be at least 2");
}

Expectation test_function_expectation(const TestFunction& h, const PhasePoint& mean, const Block& cov,
                                      std::size_t bump_order) {
  const std::size_t d = mean.dim();
  Expectation e;
  e.dx.assign(d, 0.0);
  e.dv.assign(d, 0.0);
  for (const auto& term : h.terms()) {
    if (term.kind == TestFunction::Kind::Gaussian)
      gaussian_term_expectation(term, mean, cov, e);
    else
      bump_expectation(term, mean, cov, bump_order, e);
  }
  return e;
}

DriftlessValue driftless_solution(const BackwardProblem& pb, const KernelSpec& k, double t, const PhasePoint& z,
                                  std::size_t source_order, std::size_t bump_order) {
  const std::size_t d = z.dim();
  DriftlessValue out;
  out.grad_v.assign(d, 0.0);
  const double gap = pb.T - t;
  if (gap < 0.0) throw std::invalid_argument("driftless_solution: t beyond the horizon");
  const double scale = convention_scale(k.lambda, k.convention);
  auto accumulate = [&](const TestFunction& h, double h_gap, double w) {
    const Expectation e = test_function_expectation(h, shift(h_gap, z), covariance_block(scale, h_gap), bump_order);
    out.value += w * e.value;
    for (std::size_t i = 0; i < d; ++i) out.grad_v[i] += w * (h_gap * e.dx[i] + e.dv[i]);
  };
  if (!pb.g.empty()) accumulate(pb.g, gap, 1.0);
  if (!pb.psi.empty() && gap > 0.0) {
    // T - tau = gap s^{1/(1-gamma)} absorbs the (T - tau)^{-gamma} weight
    const double q = 1.0 / (1.0 - pb.gamma);
    const double fac = std::pow(gap, 1.0 - pb.gamma) * q;
    const Rule r = gauss_legendre_on(source_order, 0.0, 1.0);
    for (std::size_t i = 0; i < r.size(); ++i) {
      const double back = gap * std::pow(r.nodes[i], q);
      accumulate(pb.psi, gap - back, -fac * r.weights[i]);
    }
  }
  return out;
}

double BackwardSolver::Table::interp(double t, double x, double v) const {
  const double hz = 2.0 * box / static_cast<double>(nz - 1);
  if (x < -box || x > box || v < -box || v > box) return 0.0;
  const double ht = T / static_cast<double>(nt - 1);
  double wt[4], wx[4], wv[4];
  const std::size_t it = stencil(std::clamp(t, 0.0, T), 0.0, ht, nt, wt);
  const std::size_t ix = stencil(x, -box, hz, nz, wx);
  const std::size_t iv = stencil(v, -box, hz, nz, wv);
  double s = 0.0;
  for (int a = 0; a < 4; ++a) {
    double sx = 0.0;
    for (int b = 0; b < 4; ++b) {
      const double* row = &data[((it + a) * nz + ix + b) * nz + iv];
      sx += wx[b] * (wv[0] * row[0] + wv[1] * row[1] + wv[2] * row[2] + wv[3] * row[3]);
    }
    s += wt[a] * sx;
  }
  return s;
}

BackwardSolver::BackwardSolver(DriftField field, BackwardProblem problem, BackwardConfig cfg)
    : field_(std::move(field)), pb_(std::move(problem)), cfg_(cfg), scale_(convention_scale(cfg.sigma, cfg.convention)) {
  cfg_.validate();
  pb_.validate(field_.holder(cfg_.box + 1.0).alpha);
  if ((!pb_.g.empty() || !pb_.psi.empty()) && pb_.dim() != field_.dim())
    throw DimensionError("BackwardSolver: problem and field dimensions differ");
  if (field_.is_zero() || cfg_.depth == 0) return;
  if (field_.dim() != 1) throw DimensionError("BackwardSolver: drift tables are implemented for d = 1");

  const std::size_t nt = cfg_.grid_t, nz = cfg_.grid_z;
  Table base;
  base.nt = nt;
  base.nz = nz;
  base.T = pb_.T;
  base.box = cfg_.box;
  base.data.assign(nt * nz * nz, 0.0);
  auto node_t = [&](std::size_t i) { return pb_.T * static_cast<double>(i) / static_cast<double>(nt - 1); };
  auto node_z = [&](std::size_t j) { return -cfg_.box + 2.0 * cfg_.box * static_cast<double>(j) / static_cast<double>(nz - 1); };

  Table d0 = base;
  for (std::size_t i = 0; i < nt; ++i)
    for (std::size_t j = 0; j < nz; ++j)
      for (std::size_t l = 0; l < nz; ++l)
        d0.at(i, j, l) = driftless_solution(pb_, kernel(), node_t(i), PhasePoint::scalar(node_z(j), node_z(l)),
                                            cfg_.source_order, cfg_.bump_order)
                             .grad_v[0];
  auto step = [&](const Table& prev) {
    Table nxt = d0;
    for (std::size_t i = 0; i + 1 < nt; ++i)
      for (std::size_t j = 0; j < nz; ++j)
        for (std::size_t l = 0; l < nz; ++l) nxt.at(i, j, l) += correction(node_t(i), node_z(j), node_z(l), prev, true);
    return nxt;
  };
  grad_ = d0;
  for (int k = 1; k < cfg_.depth; ++k) grad_ = step(grad_);
  next_ = step(grad_);
}

double BackwardSolver::correction(double t, double x, double v, const Table& D, bool gradient) const {
  const double gap = pb_.T - t;
  if (!(gap > 0.0)) return 0.0;
  const Rule& gl = gauss_legendre(cfg_.time_order);
  const Rule& gh = gauss_hermite_normal(cfg_.space_order);
  double total = 0.0;
  for (std::size_t a = 0; a < gl.size(); ++a) {
    // tau - t = gap u^2 removes the (tau - t)^{-1/2} singularity of grad_v P
    const double u = 0.5 * (gl.nodes[a] + 1.0);
    const double h = gap * u * u;
    const double wt = 0.5 * gl.weights[a] * 2.0 * gap * u;
    const double tau = t + h;
    const Block L = covariance_block(scale_, h).cholesky();
    const double mx = x + h * v, mv = v;
    const Rule rx = cusp_normal_rule(-mx / L.xx, cfg_.space_order);
    double s = 0.0;
    for (std::size_t i = 0; i < rx.size(); ++i)
      for (std::size_t j = 0; j < gh.size(); ++j) {
        const double xi1 = rx.nodes[i], xi2 = gh.nodes[j];
        const double wx = mx + L.xx * xi1, wv = mv + L.xv * xi1 + L.vv * xi2;
        const double dval = D.interp(tau, wx, wv);
        if (dval == 0.0) continue;
        double term = rx.weights[i] * gh.weights[j] * field_scalar(field_, tau, wx, wv) * dval;
        if (gradient) term *= h * (xi1 / L.xx - L.xv * xi2 / (L.xx * L.vv)) + xi2 / L.vv;
        s += term;
      }
    total += wt * s;
  }
  return total;
}

double BackwardSolver::u(double t, const PhasePoint& z) const {
  if (t >= pb_.T) return pb_.g.empty() ? 0.0 : pb_.g.value(z);
  double val = driftless_solution(pb_, kernel(), t, z, cfg_.source_order, cfg_.bump_order).value;
  if (!grad_.data.empty()) val += correction(t, z.x[0], z.v[0], grad_, false);
  return val;
}

double BackwardSolver::u_table(double t, const PhasePoint& z) const {
  if (t >= pb_.T) return pb_.g.empty() ? 0.0 : pb_.g.value(z);
  if (z.dim() != 1) throw DimensionError("BackwardSolver::u_table: tables are implemented for d = 1");
  std::call_once(*u_once_, [this] {
    Table tab;
    tab.nt = cfg_.grid_t;
    tab.nz = cfg_.grid_z;
    tab.T = pb_.T;
    tab.box = cfg_.box;
    tab.data.assign(tab.nt * tab.nz * tab.nz, 0.0);
    for (std::size_t i = 0; i < tab.nt; ++i)
      for (std::size_t j = 0; j < tab.nz; ++j)
        for (std::size_t l = 0; l < tab.nz; ++l) {
          const double ti = pb_.T * static_cast<double>(i) / static_cast<double>(tab.nt - 1);
          const double x = -cfg_.box + 2.0 * cfg_.box * static_cast<double>(j) / static_cast<double>(tab.nz - 1);
          const double v = -cfg_.box + 2.0 * cfg_.box * static_cast<double>(l) / static_cast<double>(tab.nz - 1);
          tab.at(i, j, l) = u(ti, PhasePoint::scalar(x, v));
        }
    u_ = std::move(tab);
  });
  return u_.interp(t, z.x[0], z.v[0]);
}

double BackwardSolver::grad_v(double t, const PhasePoint& z) const {
  if (!next_.data.empty()) return next_.interp(t, z.x[0], z.v[0]);
  return driftless_solution(pb_, kernel(), t, z, cfg_.source_order, cfg_.bump_order).grad_v[0];
}

double solve_u_direct(const Parametrix& par, const BackwardProblem& pb, double t, const PhasePoint& z,
                      std::size_t time_order, std::size_t space_order) {
  const double gap = pb.T - t;
  if (!(gap > 0.0)) throw std::invalid_argument("solve_u_direct: requires t < T");
  double val = 0.0;
  if (!pb.g.empty())
    val += par.integrate_against(t, z, pb.T, [&](const PhasePoint& y) { return pb.g.value(y); }, space_order).back();
  if (!pb.psi.empty()) {
    const double q = 1.0 / (1.0 - pb.gamma);
    const double fac = std::pow(gap, 1.0 - pb.gamma) * q;
    const Rule r = gauss_legendre_on(time_order, 0.0, 1.0);
    for (std::size_t i = 0; i < r.size(); ++i) {
      const double tau = pb.T - gap * std::pow(r.nodes[i], q);
      const auto part = par.integrate_against(t, z, tau, [&](const PhasePoint& y) { return pb.psi.value(y); }, space_order);
      val -= fac * r.weights[i] * part.back();
    }
  }
  return val;
}

ResidualReport strong_lie_residual(const SpaceTimeField& u, const DriftField& field, double sigma,
                                   const SourceField& source, const std::vector<SpaceTimePoint>& grid, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("strong_lie_residual: step must be positive");
  ResidualReport r;
  for (const SpaceTimePoint& p : grid) {
    const std::size_t d = p.dim();
    const double u0 = u(p);
    double lap = 0.0;
    Vec dv(d, 0.0);
    for (std::size_t i = 0; i < d; ++i) {
      SpaceTimePoint up = p, dn = p;
      up.v[i] += h;
      dn.v[i] -= h;
      const double a = u(up), b = u(dn);
      dv[i] = (a - b) / (2.0 * h);
      lap += (a - 2.0 * u0 + b) / (h * h);
    }
    const Vec F = field.eval(p.t, p.phase());
    double res = sigma * lap + lie_derivative_fd(u, p, h);
    for (std::size_t i = 0; i < d; ++i) res += F[i] * dv[i];
    const double src = source(p);
    res -= src;
    if (!std::isfinite(res)) throw std::domain_error("strong_lie_residual: non-finite difference");
    r.max_raw = std::max(r.max_raw, std::abs(res));
    r.sup_source = std::max(r.sup_source, std::abs(src));
    ++r.points;
  }
  r.max_residual = r.max_raw / (r.sup_source + 1.0);
  return r;
}

std::vector<DualityPoint> duality_identity_check(const BackwardSolver& solver, const EmpiricalFlow& flow,
                                                 const std::vector<std::size_t>& time_indices, double n_se) {
  const BackwardProblem& pb = solver.problem();
  if (pb.gamma != 0.0) throw std::invalid_argument("duality_identity_check: needs gamma = 0");
  if (!flow.coupled()) throw std::invalid_argument("duality_identity_check: needs a path-coupled flow");
  if (flow.dim() != solver.field().dim()) throw DimensionError("duality_identity_check: flow/field mismatch");
  const auto& times = flow.times();
  const std::size_t last = times.size() - 1;
  if (std::abs(times[last] - pb.T) > 1e-9 * std::max(1.0, pb.T))
    throw std::invalid_argument("duality_identity_check: flow horizon differs from T");
  const bool tabulate = flow.dim() == 1;
  std::vector<DualityPoint> out;
  std::vector<double> per(flow.size());
  for (std::size_t ti : time_indices) {
    if (ti > last) throw std::out_of_range("duality_identity_check: time index");
    for (std::size_t i = 0; i < flow.size(); ++i) {
      const PhasePoint z = flow.sample(ti, i);
      double q = tabulate ? solver.u_table(times[ti], z) : solver.u(times[ti], z);
      if (!pb.g.empty()) q -= pb.g.value(flow.sample(last, i));
      if (!pb.psi.empty() && ti < last) {
        double prev = pb.psi.value(z);
        for (std::size_t j = ti + 1; j <= last; ++j) {
          const double cur = pb.psi.value(flow.sample(j, i));
          q += 0.5 * (times[j] - times[j - 1]) * (prev + cur);
          prev = cur;
        }
      }
      per[i] = q;
    }
    const MeanSE m = mean_se(per);
    DualityPoint p;
    p.t = times[ti];
    p.mean = m.mean;
    p.se = m.se;
    p.pass = std::abs(m.mean) <= n_se * m.se || (ti == last && m.mean == 0.0);
    out.push_back(p);
  }
  return out;
}

GradientBound gradient_bound_check(const BackwardSolver& solver, const std::vector<SpaceTimePoint>& grid) {
  GradientBound r;
  const TestFunction& psi = solver.problem().psi;
  r.c_beta_psi = psi.empty() ? 0.0 : c_beta_psi(psi, solver.problem().beta_psi);
  for (const auto& p : grid) {
    r.sup_u = std::max(r.sup_u, std::abs(solver.u(p.t, p.phase())));
    r.sup_grad_v = std::max(r.sup_grad_v, std::abs(solver.grad_v(p.t, p.phase())));
  }
  const double lhs = r.sup_u + r.sup_grad_v;
  r.C_u = lhs == 0.0 ? 0.0 : lhs / r.c_beta_psi;
  r.pass = std::isfinite(r.C_u);
  return r;
}

TerminalAttainment terminal_attainment(const BackwardSolver& solver, const std::vector<double>& gaps,
                                       const std::vector<PhasePoint>& compact) {
  TerminalAttainment r;
  const BackwardProblem& pb = solver.problem();
  std::vector<double> lx, ly;
  for (double gap : gaps) {
    double worst = 0.0;
    for (const auto& z : compact) {
      const double g = pb.g.empty() ? 0.0 : pb.g.value(z);
      worst = std::max(worst, std::abs(solver.u(pb.T - gap, z) - g));
    }
    r.gaps.push_back(gap);
    r.sup_error.push_back(worst);
    if (worst > 0.0 && gap > 0.0) {
      lx.push_back(std::log(gap));
      ly.push_back(std::log(worst));
    }
  }
  if (lx.size() >= 2) r.rate = least_squares(lx, ly).slope;
  return r;
}

double l1_ratio(const BackwardSolver& solver, double t, std::size_t order) {
  const TestFunction& psi = solver.problem().psi;
  if (psi.empty()) return 0.0;
  if (solver.field().dim() != 1) throw DimensionError("l1_ratio: implemented for d = 1");
  const double b = solver.config().box;
  const Rule r = gauss_legendre_on(order, -b, b);
  double s = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i)
    for (std::size_t j = 0; j < r.size(); ++j)
      s += r.weights[i] * r.weights[j] * std::abs(solver.u(t, PhasePoint::scalar(r.nodes[i], r.nodes[j])));
  return s / psi.l1_norm();
}

}  // namespace kinfp
