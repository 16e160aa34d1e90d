#include "kinfp/report.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace kinfp {

namespace {

using ordered_json = nlohmann::ordered_json;

ordered_json number(double x) {
  if (std::isfinite(x)) return x;
  return format_number(x);
}

Check make(std::string name, double value, double tol, std::string rel, bool pass, std::string detail) {
  return Check{std::move(name), value, tol, std::move(rel), pass, std::move(detail)};
}

}  // namespace

Check at_most(std::string name, double value, double tolerance, std::string detail) {
  return make(std::move(name), value, tolerance, "<=", value <= tolerance, std::move(detail));
}

Check at_least(std::string name, double value, double tolerance, std::string detail) {
  return make(std::move(name), value, tolerance, ">=", value >= tolerance, std::move(detail));
}

Check greater(std::string name, double value, double bound, std::string detail) {
  return make(std::move(name), value, bound, ">", value > bound, std::move(detail));
}

Check flag(std::string name, bool ok, std::string detail) {
  return make(std::move(name), ok ? 1.0 : 0.0, 1.0, "flag", ok, std::move(detail));
}

bool Section::pass() const {
  for (const Check& c : checks)
    if (!c.pass) return false;
  return true;
}

bool Report::pass() const {
  for (const Section& s : sections)
    if (!s.pass()) return false;
  return true;
}

std::vector<const Check*> Report::failures() const {
  std::vector<const Check*> out;
  for (const Section& s : sections)
    for (const Check& c : s.checks)
      if (!c.pass) out.push_back(&c);
  return out;
}

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::string Report::json() const {
  ordered_json j;
  j["schema"] = kReportSchema;
  j["command"] = command;
  j["seed"] = seed;
  j["convention"] = convention;
  j["pass"] = pass();
  ordered_json failed = ordered_json::array();
  for (const Section& s : sections)
    for (const Check& c : s.checks)
      if (!c.pass) failed.push_back(s.id + "/" + c.name);
  j["failures"] = std::move(failed);
  ordered_json secs = ordered_json::array();
  for (const Section& s : sections) {
    ordered_json js;
    js["id"] = s.id;
    js["title"] = s.title;
    js["pass"] = s.pass();
    ordered_json checks = ordered_json::array();
    for (const Check& c : s.checks) {
      ordered_json jc;
      jc["name"] = c.name;
      jc["value"] = number(c.value);
      jc["tolerance"] = number(c.tolerance);
      jc["relation"] = c.relation;
      jc["pass"] = c.pass;
      if (!c.detail.empty()) jc["detail"] = c.detail;
      checks.push_back(std::move(jc));
    }
    js["checks"] = std::move(checks);
    ordered_json notes = ordered_json::object();
    for (const auto& [k, v] : s.notes) notes[k] = v;
    js["notes"] = std::move(notes);
    ordered_json tables = ordered_json::array();
    for (const Table& t : s.tables) tables.push_back(s.id + "_" + t.name + ".csv");
    js["tables"] = std::move(tables);
    secs.push_back(std::move(js));
  }
  j["sections"] = std::move(secs);
  return j.dump(2) + "\n";
}

std::string table_csv(const Table& t) {
  std::ostringstream os;
  for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i];
  os << "\n";
  for (const auto& row : t.rows) {
    if (row.size() != t.columns.size()) throw std::logic_error("table " + t.name + ": ragged row");
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << format_number(row[i]);
    os << "\n";
  }
  return os.str();
}

void write_report(const Report& r, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto put = [&](const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    out << text;
  };
  for (const Section& s : r.sections)
    for (const Table& t : s.tables) put(dir / (s.id + "_" + t.name + ".csv"), table_csv(t));
  put(dir / "report.json", r.json());
}

}  // namespace kinfp
