// Acceptance run: one line per criterion, then a byte-for-byte rerun for reproducibility.
//
//   acceptance [out_dir]

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>

#include "kinfp/config.hpp"
#include "kinfp/verification.hpp"

namespace fs = std::filesystem;
using namespace kinfp;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Empty when both directories hold the same files with identical bytes.
std::string compare_dirs(const fs::path& a, const fs::path& b) {
  std::size_t files = 0;
  for (const auto& e : fs::directory_iterator(a)) {
    const fs::path other = b / e.path().filename();
    if (!fs::exists(other)) return "missing " + other.string();
    if (slurp(e.path()) != slurp(other)) return "differs: " + e.path().filename().string();
    ++files;
  }
  for (const auto& e : fs::directory_iterator(b))
    if (!fs::exists(a / e.path().filename())) return "extra " + e.path().string();
  if (files == 0) return "no files written";
  return {};
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path out = argc > 1 ? fs::path(argv[1]) : fs::path("acceptance_out");
  fs::remove_all(out);
  const ExperimentConfig cfg = default_config();

  Report first{"verify-all", cfg.seed, to_string(cfg.convention), {}};
  int failed = 0;
  for (const CriterionInfo& c : criteria()) {
    const auto t0 = std::chrono::steady_clock::now();
    Section s = run_criterion(c.id, cfg);
    const double secs = seconds_since(t0);
    const bool ok = s.pass() && secs < c.runtime_limit;
    failed += ok ? 0 : 1;
    std::printf("[%s] criterion %2d %-28s %8.1fs (limit %4.0fs)\n", ok ? "PASS" : "FAIL", c.id, c.title.c_str(), secs,
                c.runtime_limit);
    for (const Check& k : s.checks)
      if (!k.pass)
        std::printf("         %s = %s (%s %s) %s\n", k.name.c_str(), format_number(k.value).c_str(), k.relation.c_str(),
                    format_number(k.tolerance).c_str(), k.detail.c_str());
    first.sections.push_back(std::move(s));
    std::fflush(stdout);
  }
  write_report(first, out / "a");

  const auto t0 = std::chrono::steady_clock::now();
  write_report(run_command("verify-all", cfg), out / "b");
  const double secs = seconds_since(t0);
  const std::string diff = compare_dirs(out / "a", out / "b");
  const bool ok = diff.empty();
  failed += ok ? 0 : 1;
  std::printf("[%s] criterion 11 %-28s %8.1fs (rerun)%s%s\n", ok ? "PASS" : "FAIL", "Reproducible reports", secs,
              diff.empty() ? "" : " ", diff.c_str());

  std::printf("%d of 11 criteria failed\n", failed);
  return failed == 0 ? 0 : 1;
}
