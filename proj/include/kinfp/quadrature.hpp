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
#include <vector>

namespace kinfp {

struct Rule {
  std::vector<double> nodes;
  std::vector<double> weights;
  std::size_t size() const { return nodes.size(); }
};

/// Gauss-Legendre rule on [-1, 1].
const Rule& gauss_legendre(std::size_t n);

/// Gauss-Hermite rule in probabilists' form: sum w_i f(x_i) ~ E[f(N(0,1))].
const Rule& gauss_hermite_normal(std::size_t n);

/// Gauss-Legendre rule mapped to [a, b].
Rule gauss_legendre_on(std::size_t n, double a, double b);

}  // namespace kinfp
