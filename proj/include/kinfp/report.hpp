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
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace kinfp {

inline constexpr const char* kReportSchema = "kinfp.report/1";

/// One emitted number with its tolerance and verdict.
struct Check {
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  std::string relation;  // "<=", ">=", "<", ">" or "flag"
  bool pass = false;
  std::string detail;
};

Check at_most(std::string name, double value, double tolerance, std::string detail = {});
Check at_least(std::string name, double value, double tolerance, std::string detail = {});
Check greater(std::string name, double value, double bound, std::string detail = {});
Check flag(std::string name, bool ok, std::string detail = {});

struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

struct Section {
  std::string id;
  std::string title;
  std::vector<Check> checks;
  std::vector<Table> tables;
  std::vector<std::pair<std::string, std::string>> notes;

  bool pass() const;
  void add(Check c) { checks.push_back(std::move(c)); }
  void note(std::string key, std::string value) { notes.emplace_back(std::move(key), std::move(value)); }
};

struct Report {
  std::string command;
  std::uint64_t seed = 0;
  std::string convention;
  std::vector<Section> sections;

  bool pass() const;
  std::vector<const Check*> failures() const;
  /// Pretty-printed JSON; key order and number formatting are fixed, so equal reports give equal bytes.
  std::string json() const;
};

/// Shortest round-trip decimal form; "nan", "inf", "-inf" for non-finite values.
std::string format_number(double x);

std::string table_csv(const Table& t);

/// Writes report.json and one `<section>_<table>.csv` per table into `dir` (created if missing).
void write_report(const Report& r, const std::filesystem::path& dir);

}  // namespace kinfp
