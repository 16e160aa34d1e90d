#include "test_main.hpp"

#include <fstream>
#include <sstream>

#include "kinfp/config.hpp"

using namespace kinfp;

TEST_CASE("empty object yields the defaults") {
  const ExperimentConfig a = parse_config("{}");
  const ExperimentConfig b = default_config();
  CHECK(a.seed == b.seed);
  CHECK(a.field.kind == "holder");
  CHECK(a.simulation.radii == b.simulation.radii);
  CHECK(a.tolerances == b.tolerances);
  CHECK(a.verify.duality_dt == b.verify.duality_dt);
}

TEST_CASE("shipped default config matches the built-in defaults") {
  std::ifstream in(KINFP_SOURCE_DIR "/configs/default.json");
  REQUIRE(in);
  std::ostringstream ss;
  ss << in.rdbuf();
  const ExperimentConfig a = parse_config(ss.str());
  const ExperimentConfig b = default_config();
  CHECK(a.seed == b.seed);
  CHECK(a.convention == b.convention);
  CHECK(a.parametrix.depth == b.parametrix.depth);
  CHECK(a.parametrix.time_order == b.parametrix.time_order);
  CHECK(a.parametrix.space_order == b.parametrix.space_order);
  CHECK(a.parametrix.delta == b.parametrix.delta);
  CHECK(a.backward.grid_z == b.backward.grid_z);
  CHECK(a.backward.space_order == b.backward.space_order);
  CHECK(a.simulation.paths == b.simulation.paths);
  CHECK(a.simulation.dt == b.simulation.dt);
  CHECK(a.verify.arbitration_paths == b.verify.arbitration_paths);
  CHECK(a.out_dir == b.out_dir);
}

TEST_CASE("overrides propagate to the module configs") {
  const ExperimentConfig c =
      parse_config(R"({"seed": 42, "sigma": 2.0, "convention": "paper", "simulation": {"paths": 7, "dt": 0.05}})");
  CHECK(c.seed == 42);
  CHECK(c.simulation.paths == 7);
  CHECK(c.simulation.dt == 0.05);
  CHECK(c.parametrix.sigma == 2.0);
  CHECK(c.backward.sigma == 2.0);
  CHECK(c.simulation.seed == 42);
  CHECK(c.parametrix.convention == Convention::Paper);
}

TEST_CASE("tolerances can be tightened by name") {
  const ExperimentConfig c = parse_config(R"({"tolerances": {"duality_se": 2.5}})");
  CHECK(c.tol("duality_se") == 2.5);
  CHECK(c.tol("group") == 1e-12);
}

TEST_CASE("malformed configs are rejected") {
  const char* bad[] = {
      "{",
      "[]",
      R"({"bogus": 1})",
      R"({"seed": -3})",
      R"({"seed": "one"})",
      R"({"convention": "physics"})",
      R"({"field": {"kind": "wild"}})",
      R"({"field": {"beta": 1.5}})",
      R"({"simulation": {"paths": 0}})",
      R"({"simulation": {"scheme": "milstein"}})",
      R"({"simulation": {"radii": "big"}})",
      R"({"parametrix": {"mode": "exact"}})",
      R"({"backward": {"grid_z": 1}})",
      R"({"verify": {"duality_dt": 0.003}})",
      R"({"tolerances": {"made_up": 1}})",
      R"({"tolerances": {"group": -1}})",
      R"({"output": {"path": "x"}})",
  };
  for (const char* text : bad) {
    CAPTURE(text);
    CHECK_THROWS_AS(parse_config(text), ConfigError);
  }
}

TEST_CASE("missing file is a config error") {
  CHECK_THROWS_AS(load_config("/nonexistent/kinfp.json"), ConfigError);
}

TEST_CASE("FieldSpec builds every kind") {
  FieldSpec f;
  for (const char* k : {"zero", "constant", "oscillatory", "holder"}) CHECK(f.build(k).dim() == 1);
  CHECK_THROWS_AS(f.build("other"), ConfigError);
}
