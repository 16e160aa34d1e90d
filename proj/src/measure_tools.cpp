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

#include "kinfp/measure_tools.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "kinfp/quadrature.hpp"
#include "kinfp/rng.hpp"
#include "kinfp/stats.hpp"

namespace kinfp {

namespace {

std::vector<double> project(const std::vector<PhasePoint>& pts, const std::vector<double>& dir) {
  std::vector<double> out(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const std::size_t d = pts[i].dim();
    double s = 0.0;
    for (std::size_t c = 0; c < d; ++c) s += dir[c] * pts[i].x[c] + dir[d + c] * pts[i].v[c];
    out[i] = s;
  }
  return out;
}

}  // namespace

std::string to_string(W1Method m) {
  switch (m) {
    case W1Method::Exact1D:
      return "exact-1D";
    case W1Method::Sliced:
      return "sliced";
    case W1Method::Coupling:
      return "coupling-upper-bound";
  }
  return "unknown";
}

double w1_1d(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("w1_1d: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  if (a.size() == b.size()) {
    std::vector<double> gap(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) gap[i] = std::abs(a[i] - b[i]);
    return pairwise_sum(gap) / static_cast<double>(a.size());
  }
  // sweep the merged breakpoints, integrating |F_a - F_b| between them
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double prev = std::min(a[0], b[0]);
  double total = 0.0;
  while (i < a.size() || j < b.size()) {
    const double next = (j == b.size() || (i < a.size() && a[i] <= b[j])) ? a[i] : b[j];
    total += std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb) * (next - prev);
    prev = next;
    while (i < a.size() && a[i] == next) ++i;
    while (j < b.size() && b[j] == next) ++j;
  }
  return total;
}

W1Estimate w1_sliced(const std::vector<PhasePoint>& a, const std::vector<PhasePoint>& b, std::size_t k,
                     std::uint64_t seed) {
  if (k == 0) throw std::invalid_argument("w1_sliced: need at least one direction");
  if (a.empty() || b.empty()) throw std::invalid_argument("w1_sliced: empty cloud");
  const std::size_t n = 2 * a[0].dim();
  std::vector<double> vals(k);
  for (std::size_t j = 0; j < k; ++j) {
    Stream rng(seed, j, 7);
    std::vector<double> dir(n);
    double norm = 0.0;
    for (double& c : dir) {
      c = rng.normal();
      norm += c * c;
    }
    norm = std::sqrt(norm);
    for (double& c : dir) c /= norm;
    vals[j] = w1_1d(project(a, dir), project(b, dir));
  }
  const MeanSE m = mean_se(vals);
  return {m.mean, W1Method::Sliced, k, k > 1 ? m.se : 0.0};
}

W1Estimate w1_coupling_bound(const std::vector<PhasePoint>& a, const std::vector<PhasePoint>& b) {
  if (a.size() != b.size() || a.empty()) throw std::invalid_argument("w1_coupling_bound: clouds must match in size");
  std::vector<double> dist(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) dist[i] = euclidean_norm(a[i] - b[i]);
  return {pairwise_sum(dist) / static_cast<double>(a.size()), W1Method::Coupling, 0, 0.0};
}

std::vector<PhasePoint> flow_cloud(const EmpiricalFlow& flow, std::size_t ti) {
  std::vector<PhasePoint> out;
  out.reserve(flow.size());
  for (std::size_t i = 0; i < flow.size(); ++i) out.push_back(flow.sample(ti, i));
  return out;
}

ContinuityModulus flow_continuity_modulus(const EmpiricalFlow& flow, std::size_t directions, std::uint64_t seed) {
  const auto& times = flow.times();
  if (times.size() < 2) throw std::invalid_argument("flow_continuity_modulus: need at least two times");
  ContinuityModulus r;
  std::vector<PhasePoint> prev = flow_cloud(flow, 0);
  for (std::size_t ti = 1; ti < times.size(); ++ti) {
    std::vector<PhasePoint> cur = flow_cloud(flow, ti);
    const double root = std::sqrt(std::abs(times[ti] - times[ti - 1]));
    r.sliced_ratio.push_back(w1_sliced(prev, cur, directions, seed).value / root);
    if (flow.coupled()) r.coupling_ratio.push_back(w1_coupling_bound(prev, cur).value / root);
    prev = std::move(cur);
  }
  r.max_sliced = *std::max_element(r.sliced_ratio.begin(), r.sliced_ratio.end());
  if (!r.coupling_ratio.empty()) r.max_coupling = *std::max_element(r.coupling_ratio.begin(), r.coupling_ratio.end());
  r.finite = std::isfinite(r.max_sliced) && std::isfinite(r.max_coupling);
  return r;
}

KernelIntegrator gaussian_integrator(const KernelSpec& k, std::size_t order) {
  return [k, order](double s, const PhasePoint& z, double t, const std::function<double(const PhasePoint&)>& g) {
    const std::size_t d = z.dim();
    if (d > 2) throw DimensionError("gaussian_integrator: d <= 2 only");
    const PhasePoint m = shift(t - s, z);
    const Block L = covariance_block(convention_scale(k.lambda, k.convention), t - s).cholesky();
    const Rule& gh = gauss_hermite_normal(order);
    const std::size_t n = gh.size();
    std::size_t total = 1;
    for (std::size_t i = 0; i < 2 * d; ++i) total *= n;
    double acc = 0.0;
    PhasePoint y(d);
    for (std::size_t flat = 0; flat < total; ++flat) {
      std::size_t rest = flat;
      double w = 1.0;
      for (std::size_t c = 0; c < d; ++c) {
        const std::size_t ia = rest % n;
        rest /= n;
        const std::size_t ib = rest % n;
        rest /= n;
        w *= gh.weights[ia] * gh.weights[ib];
        y.x[c] = m.x[c] + L.xx * gh.nodes[ia];
        y.v[c] = m.v[c] + L.xv * gh.nodes[ia] + L.vv * gh.nodes[ib];
      }
      acc += w * g(y);
    }
    return acc;
  };
}

KernelIntegrator parametrix_integrator(const Parametrix& par, std::size_t order) {
  return [&par, order](double s, const PhasePoint& z, double t, const std::function<double(const PhasePoint&)>& g) {
    return par.integrate_against(s, z, t, g, order).back();
  };
}

std::vector<NarrowDeltaReport> narrow_delta_check(
    const KernelIntegrator& p, const PhasePoint& y, double t,
    const std::vector<std::pair<std::string, std::function<double(const PhasePoint&)>>>& tests,
    const std::vector<double>& gaps, double tolerance) {
  std::vector<NarrowDeltaReport> out;
  for (const auto& [name, g] : tests) {
    NarrowDeltaReport r;
    r.name = name;
    const double target = g(y);
    for (double gap : gaps) {
      PhasePoint z = y;
      for (std::size_t c = 0; c < y.dim(); ++c) z.x[c] = y.x[c] - gap * y.v[c];
      r.gaps.push_back(gap);
      r.difference.push_back(std::abs(p(t - gap, z, t, g) - target));
    }
    r.decreasing = true;
    for (std::size_t i = 1; i < r.difference.size(); ++i)
      if (r.difference[i] > r.difference[i - 1] + 0.1 * tolerance) r.decreasing = false;
    r.pass = r.decreasing && !r.difference.empty() && r.difference.back() < tolerance;
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace kinfp
