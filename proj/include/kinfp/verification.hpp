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

#include <string>
#include <vector>

#include "kinfp/config.hpp"
#include "kinfp/report.hpp"

namespace kinfp {

struct CriterionInfo {
  int id = 0;
  std::string key;
  std::string title;
  double runtime_limit = 0.0;  // seconds
};

/// Acceptance criteria 1..10 in order; criterion 11 (reproducibility) is a property of the whole suite.
const std::vector<CriterionInfo>& criteria();

/// Runs one criterion at the scale in cfg.verify. Deterministic in cfg.seed.
Section run_criterion(int id, const ExperimentConfig& cfg);

/// Commands: kernel, parametrix, backward, simulate, mollify, diagnose-series, verify-all.
const std::vector<std::string>& commands();
Report run_command(const std::string& command, const ExperimentConfig& cfg);

}  // namespace kinfp
