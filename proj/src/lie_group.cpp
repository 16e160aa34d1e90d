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

#include "kinfp/lie_group.hpp"

#include <algorithm>
#include <cmath>

#include "kinfp/rng.hpp"

namespace kinfp {

namespace {

void require_same_dim(std::size_t a, std::size_t b, const char* what) {
  if (a != b) throw DimensionError(std::string(what) + ": dimension mismatch");
}

bool all_finite(const Vec& a) {
  return std::all_of(a.begin(), a.end(), [](double c) { return std::isfinite(c); });
}

}  // namespace

bool PhasePoint::finite() const { return all_finite(x) && all_finite(v); }

SpaceTimePoint::SpaceTimePoint(double t_, Vec x_, Vec v_) : t(t_), x(std::move(x_)), v(std::move(v_)) {
  if (x.size() != v.size()) throw DimensionError("SpaceTimePoint: x and v differ in length");
}

bool SpaceTimePoint::finite() const { return std::isfinite(t) && all_finite(x) && all_finite(v); }

PhasePoint operator-(const PhasePoint& a, const PhasePoint& b) {
  require_same_dim(a.dim(), b.dim(), "PhasePoint difference");
  PhasePoint r(a.dim());
  for (std::size_t i = 0; i < a.dim(); ++i) {
    r.x[i] = a.x[i] - b.x[i];
    r.v[i] = a.v[i] - b.v[i];
  }
  return r;
}

PhasePoint operator+(const PhasePoint& a, const PhasePoint& b) {
  require_same_dim(a.dim(), b.dim(), "PhasePoint sum");
  PhasePoint r(a.dim());
  for (std::size_t i = 0; i < a.dim(); ++i) {
    r.x[i] = a.x[i] + b.x[i];
    r.v[i] = a.v[i] + b.v[i];
  }
  return r;
}

SpaceTimePoint identity(std::size_t d) { return SpaceTimePoint(d); }

SpaceTimePoint compose(const SpaceTimePoint& a, const SpaceTimePoint& b) {
  require_same_dim(a.dim(), b.dim(), "compose");
  SpaceTimePoint r(a.dim());
  r.t = a.t + b.t;
  for (std::size_t i = 0; i < a.dim(); ++i) {
    r.x[i] = a.x[i] + b.x[i] + b.t * a.v[i];
    r.v[i] = a.v[i] + b.v[i];
  }
  return r;
}

SpaceTimePoint inverse(const SpaceTimePoint& a) {
  SpaceTimePoint r(a.dim());
  r.t = -a.t;
  for (std::size_t i = 0; i < a.dim(); ++i) {
    r.x[i] = -a.x[i] + a.t * a.v[i];
    r.v[i] = -a.v[i];
  }
  return r;
}

SpaceTimePoint dilate(double r, const SpaceTimePoint& a) {
  if (!(r > 0.0)) throw std::invalid_argument("dilate: r must be positive");
  SpaceTimePoint out(a.dim());
  out.t = r * r * a.t;
  for (std::size_t i = 0; i < a.dim(); ++i) {
    out.x[i] = r * r * r * a.x[i];
    out.v[i] = r * a.v[i];
  }
  return out;
}

PhasePoint shift(double tau, const PhasePoint& z) {
  PhasePoint r = z;
  for (std::size_t i = 0; i < z.dim(); ++i) r.x[i] += tau * z.v[i];
  return r;
}

double b_norm(const PhasePoint& z) {
  double s = 0.0;
  for (std::size_t i = 0; i < z.dim(); ++i) s += std::cbrt(std::fabs(z.x[i])) + std::fabs(z.v[i]);
  return s;
}

double homogeneous_norm(const SpaceTimePoint& a) {
  double s = std::sqrt(std::fabs(a.t));
  for (std::size_t i = 0; i < a.dim(); ++i) s += std::cbrt(std::fabs(a.x[i])) + std::fabs(a.v[i]);
  return s;
}

double euclidean_norm(const PhasePoint& z) {
  double s = 0.0;
  for (std::size_t i = 0; i < z.dim(); ++i) s += z.x[i] * z.x[i] + z.v[i] * z.v[i];
  return std::sqrt(s);
}

double quasi_distance(const SpaceTimePoint& a, const SpaceTimePoint& b) {
  require_same_dim(a.dim(), b.dim(), "quasi_distance");
  return homogeneous_norm(compose(inverse(b), a));
}

int homogeneous_dimension(std::size_t d) { return 2 + 4 * static_cast<int>(d); }

GroupConstants measure_group_constants(std::size_t d, std::size_t triples, std::uint64_t seed) {
  GroupConstants gc;
  gc.homogeneous_dimension = homogeneous_dimension(d);
  Stream rng(seed, 0, 0x6b);
  auto draw = [&] {
    SpaceTimePoint p(d);
    p.t = 2.0 * rng.normal();
    for (std::size_t i = 0; i < d; ++i) {
      p.x[i] = 2.0 * rng.normal();
      p.v[i] = 2.0 * rng.normal();
    }
    return p;
  };
  double k = 1.0;
  for (std::size_t n = 0; n < triples; ++n) {
    const SpaceTimePoint a = draw(), b = draw(), c = draw();
    const double ab = quasi_distance(a, b), bc = quasi_distance(b, c), ac = quasi_distance(a, c);
    if (ab + bc > 0.0) k = std::max(k, ac / (ab + bc));
    const double ba = quasi_distance(b, a);
    if (ba > 0.0) k = std::max(k, ab / ba);
  }
  gc.quasi_triangle_k = k;
  return gc;
}

double lie_derivative_fd(const SpaceTimeField& f, const SpaceTimePoint& p, double h) {
  if (h == 0.0) throw std::invalid_argument("lie_derivative_fd: zero step");
  SpaceTimePoint fwd = p, bwd = p;
  fwd.t += h;
  bwd.t -= h;
  for (std::size_t i = 0; i < p.dim(); ++i) {
    fwd.x[i] += h * p.v[i];
    bwd.x[i] -= h * p.v[i];
  }
  const double fp = f(fwd), fm = f(bwd);
  if (!std::isfinite(fp) || !std::isfinite(fm)) throw std::domain_error("lie_derivative_fd: non-finite field value");
  return (fp - fm) / (2.0 * h);
}

double holder_seminorm_estimate(const PhaseScalarField& f,
                                const std::vector<std::pair<PhasePoint, PhasePoint>>& pairs, double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("holder_seminorm_estimate: alpha outside (0,1]");
  if (pairs.empty()) throw std::invalid_argument("holder_seminorm_estimate: no sample pairs");
  double best = 0.0;
  for (const auto& [z1, z2] : pairs) {
    const double dist = b_norm(z2 - z1);
    if (dist == 0.0) throw std::invalid_argument("holder_seminorm_estimate: coincident pair");
    best = std::max(best, std::fabs(f(z2) - f(z1)) / std::pow(dist, alpha));
  }
  return best;
}

}  // namespace kinfp
