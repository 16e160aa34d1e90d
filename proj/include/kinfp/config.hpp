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

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>

#include "kinfp/backward_solver.hpp"
#include "kinfp/drift_fields.hpp"
#include "kinfp/langevin_sim.hpp"
#include "kinfp/parametrix.hpp"

namespace kinfp {

/// Schema violation: unknown key, wrong type or out-of-range value.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parameters of every built-in field; `kind` picks the one used by single-field commands.
struct FieldSpec {
  std::string kind = "holder";  // zero | constant | oscillatory | holder
  double c = 0.5;               // holder amplitude
  double beta = 0.5;
  std::uint64_t direction_seed = 1;
  double amplitude = 1.0;  // oscillatory
  double constant = 0.5;   // constant field value

  DriftField build(const std::string& which) const;
  DriftField build() const { return build(kind); }
};

/// Sample sizes and steps of the acceptance suite.
struct VerifyScale {
  std::size_t group_cases = 10000;
  std::size_t arbitration_paths = 1000000;
  std::size_t duality_paths = 100000;
  double duality_dt = 0.0025;
  std::size_t ladder_paths = 10000;
  std::size_t commutation_points = 100;
  std::size_t caratheodory_paths = 2000;
};

struct ExperimentConfig {
  std::uint64_t seed = 1;
  Convention convention = Convention::Generator;
  int threads = 1;
  double sigma = 1.0;
  FieldSpec field;
  ParametrixConfig parametrix;
  SimConfig simulation;
  BackwardConfig backward;
  VerifyScale verify;
  std::map<std::string, double> tolerances;  // always holds every known name
  std::string out_dir = "kinfp_out";

  double tol(const std::string& name) const;
  /// Copies sigma, convention and seed into the module configs.
  void sync();
};

/// Tolerance names accepted under "tolerances" with their defaults.
const std::map<std::string, double>& default_tolerances();

ExperimentConfig default_config();
/// Parses the JSON schema documented in the README on top of the defaults; throws ConfigError.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

}  // namespace kinfp
