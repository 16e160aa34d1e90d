#include "test_main.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <limits>

#include <json.hpp>

#include "kinfp/report.hpp"

using namespace kinfp;

namespace {

Report sample(double value) {
  Section s;
  s.id = "s1";
  s.title = "Sample";
  s.add(at_most("small", value, 1e-3, "abs error"));
  s.add(flag("ok", true));
  s.note("n", "3");
  s.tables.push_back(Table{"grid", {"x", "y"}, {{0.1, 1.0 / 3.0}, {2.0, -0.0}}});
  return Report{"kernel", 7, "generator", {s}};
}

}  // namespace

TEST_CASE("check relations") {
  CHECK(at_most("a", 1.0, 1.0).pass);
  CHECK_FALSE(at_most("a", 1.5, 1.0).pass);
  CHECK(at_least("a", 2.0, 1.0).pass);
  CHECK_FALSE(greater("a", 1.0, 1.0).pass);
  CHECK_FALSE(at_most("a", std::nan(""), 1.0).pass);
  CHECK_FALSE(flag("f", false).pass);
}

TEST_CASE("numbers use the shortest round-trip form") {
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(1.0 / 3.0) == "0.3333333333333333");
  CHECK(format_number(1e-12) == "1e-12");
  CHECK(format_number(std::numeric_limits<double>::infinity()) == "inf");
  CHECK(format_number(std::nan("")) == "nan");
}

TEST_CASE("json lists failures and parses back") {
  const Report r = sample(0.5);
  CHECK_FALSE(r.pass());
  REQUIRE(r.failures().size() == 1);
  const auto j = nlohmann::json::parse(r.json());
  CHECK(j["schema"] == kReportSchema);
  CHECK(j["seed"] == 7);
  CHECK(j["pass"] == false);
  CHECK(j["failures"][0] == "s1/small");
  CHECK(j["sections"][0]["tables"][0] == "s1_grid.csv");
  CHECK(j["sections"][0]["notes"]["n"] == "3");
  CHECK(sample(1e-4).pass());
}

TEST_CASE("non-finite values survive as strings") {
  const auto j = nlohmann::json::parse(sample(std::numeric_limits<double>::infinity()).json());
  CHECK(j["sections"][0]["checks"][0]["value"] == "inf");
}

TEST_CASE("csv output and ragged rows") {
  Table t{"t", {"a", "b"}, {{1.0, 0.25}}};
  CHECK(table_csv(t) == "a,b\n1,0.25\n");
  t.rows.push_back({1.0});
  CHECK_THROWS(table_csv(t));
}

TEST_CASE("written reports are byte-stable") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "kinfp_test_report";
  fs::remove_all(dir);
  write_report(sample(0.5), dir / "a");
  write_report(sample(0.5), dir / "b");
  for (const char* f : {"report.json", "s1_grid.csv"}) {
    std::ifstream a(dir / "a" / f, std::ios::binary), b(dir / "b" / f, std::ios::binary);
    const std::string sa{std::istreambuf_iterator<char>(a), {}}, sb{std::istreambuf_iterator<char>(b), {}};
    CHECK(!sa.empty());
    CHECK(sa == sb);
  }
  fs::remove_all(dir);
}
