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

#include <cstddef>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include <boost/container/small_vector.hpp>

namespace kinfp {

/// Short coordinate vector; stays on the stack for d <= 4.
using Vec = boost::container::small_vector<double, 4>;

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Phase-space point z = (x, v) with x, v in R^d.
struct PhasePoint {
  Vec x;
  Vec v;

  PhasePoint() = default;
  explicit PhasePoint(std::size_t d) : x(d, 0.0), v(d, 0.0) {}
  PhasePoint(Vec x_, Vec v_) : x(std::move(x_)), v(std::move(v_)) {
    if (x.size() != v.size()) throw DimensionError("PhasePoint: x and v differ in length");
  }
  static PhasePoint scalar(double x, double v) { return PhasePoint(Vec{x}, Vec{v}); }

  std::size_t dim() const { return x.size(); }
  bool finite() const;
};

/// Point (t, x, v) of R^{1+2d}.
struct SpaceTimePoint {
  double t = 0.0;
  Vec x;
  Vec v;

  SpaceTimePoint() = default;
  explicit SpaceTimePoint(std::size_t d) : x(d, 0.0), v(d, 0.0) {}
  SpaceTimePoint(double t_, Vec x_, Vec v_);
  SpaceTimePoint(double t_, const PhasePoint& z) : SpaceTimePoint(t_, z.x, z.v) {}
  static SpaceTimePoint scalar(double t, double x, double v) { return SpaceTimePoint(t, Vec{x}, Vec{v}); }

  std::size_t dim() const { return x.size(); }
  PhasePoint phase() const { return PhasePoint(x, v); }
  bool finite() const;
};

struct GroupConstants {
  int homogeneous_dimension = 0;
  double quasi_triangle_k = 0.0;  // measured
};

SpaceTimePoint identity(std::size_t d);
SpaceTimePoint compose(const SpaceTimePoint& a, const SpaceTimePoint& b);
SpaceTimePoint inverse(const SpaceTimePoint& a);
SpaceTimePoint dilate(double r, const SpaceTimePoint& a);

/// e^{tau B} z = (x + tau v, v).
PhasePoint shift(double tau, const PhasePoint& z);

double homogeneous_norm(const SpaceTimePoint& a);
double b_norm(const PhasePoint& z);
double euclidean_norm(const PhasePoint& z);

/// d(a, b) = ||b^{-1} o a||_K.
double quasi_distance(const SpaceTimePoint& a, const SpaceTimePoint& b);

int homogeneous_dimension(std::size_t d);

/// Largest sampled ratio d(a,c) / (d(a,b) + d(b,c)) and its symmetric
/// counterpart d(a,b)/d(b,a) over random triples; a lower bound for k.
GroupConstants measure_group_constants(std::size_t d, std::size_t triples, std::uint64_t seed);

using SpaceTimeField = std::function<double(const SpaceTimePoint&)>;

/// Central difference of f along the transport curve s -> (s, x + (s-t) v, v).
double lie_derivative_fd(const SpaceTimeField& f, const SpaceTimePoint& p, double h);

using PhaseScalarField = std::function<double(const PhasePoint&)>;

/// max |f(z2) - f(z1)| / ||z2 - z1||_B^alpha over the given pairs.
double holder_seminorm_estimate(const PhaseScalarField& f,
                                const std::vector<std::pair<PhasePoint, PhasePoint>>& pairs,
                                double alpha);

PhasePoint operator-(const PhasePoint& a, const PhasePoint& b);
PhasePoint operator+(const PhasePoint& a, const PhasePoint& b);

}  // namespace kinfp
