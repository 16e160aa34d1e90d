// kinfp: batch driver for the kinetic Fokker-Planck toolkit.
//
//   kinfp <command> [--config FILE] [--seed N] [--out DIR] [--threads N] [--convention paper|generator]
//
// Exit codes: 0 all checks pass, 1 a check failed (see report.json), 2 bad arguments or config.

#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <CLI11.hpp>

#include "kinfp/config.hpp"
#include "kinfp/verification.hpp"

namespace {

constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Kinetic Fokker-Planck fundamental solutions, Langevin simulation and cross-checks"};
  std::string command, config_path, out_dir, convention;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  app.add_option("command", command, "kernel | parametrix | backward | simulate | mollify | diagnose-series | verify-all")
      ->required()
      ->check(CLI::IsMember(kinfp::commands()));
  app.add_option("--config", config_path, "JSON configuration file")->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "master seed (overrides the config)");
  app.add_option("--out", out_dir, "output directory (overrides the config)");
  app.add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
  app.add_option("--convention", convention, "covariance convention")->check(CLI::IsMember({"paper", "generator"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  kinfp::ExperimentConfig cfg;
  try {
    cfg = config_path.empty() ? kinfp::default_config() : kinfp::load_config(config_path);
  } catch (const kinfp::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitUsage;
  }
  if (seed) cfg.seed = *seed;
  if (threads) cfg.threads = *threads;
  if (!out_dir.empty()) cfg.out_dir = out_dir;
  if (!convention.empty()) cfg.convention = kinfp::convention_from_string(convention);
  cfg.sync();
#ifdef _OPENMP
  omp_set_num_threads(cfg.threads);
#endif

  kinfp::Report report;
  try {
    report = kinfp::run_command(command, cfg);
    kinfp::write_report(report, cfg.out_dir);
  } catch (const std::exception& e) {
    std::cerr << command << ": " << e.what() << "\n";
    return kExitFail;
  }

  for (const auto& s : report.sections) {
    std::size_t ok = 0;
    for (const auto& c : s.checks) ok += c.pass ? 1 : 0;
    std::printf("%-4s %-18s %-28s %zu/%zu checks\n", s.pass() ? "PASS" : "FAIL", s.id.c_str(), s.title.c_str(), ok,
                s.checks.size());
  }
  for (const kinfp::Check* c : report.failures())
    std::fprintf(stderr, "failed: %s = %s (%s %s) %s\n", c->name.c_str(), kinfp::format_number(c->value).c_str(),
                 c->relation.c_str(), kinfp::format_number(c->tolerance).c_str(), c->detail.c_str());
  std::printf("report: %s/report.json\n", cfg.out_dir.c_str());
  return report.pass() ? 0 : kExitFail;
}
