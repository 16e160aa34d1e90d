#include "kinfp/config.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>

#include <json.hpp>

namespace kinfp {

namespace {

using json = nlohmann::json;

// Typed access to one JSON object; every key must be consumed or listed.
class Reader {
 public:
  Reader(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) fail("expected an object");
  }

  void allow(std::initializer_list<const char*> keys) {
    std::set<std::string> ok(keys.begin(), keys.end());
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!ok.count(it.key())) fail("unknown key '" + it.key() + "'");
  }

  bool has(const char* key) const { return j_.contains(key); }
  const json& sub(const char* key) const { return j_.at(key); }

  void get(const char* key, double& out, double lo = -1e300, double hi = 1e300) const {
    if (!has(key)) return;
    const json& v = j_.at(key);
    if (!v.is_number()) fail(std::string(key) + ": expected a number");
    const double x = v.get<double>();
    if (!(x >= lo && x <= hi)) fail(std::string(key) + ": out of range");
    out = x;
  }

  template <class Int>
  void get_int(const char* key, Int& out, long long lo, long long hi) const {
    if (!has(key)) return;
    const json& v = j_.at(key);
    if (!v.is_number_integer()) fail(std::string(key) + ": expected an integer");
    const long long x = v.get<long long>();
    if (x < lo || x > hi) fail(std::string(key) + ": out of range");
    out = static_cast<Int>(x);
  }

  void get_seed(const char* key, std::uint64_t& out) const {
    if (!has(key)) return;
    const json& v = j_.at(key);
    if (!v.is_number_unsigned()) fail(std::string(key) + ": expected a non-negative integer");
    out = v.get<std::uint64_t>();
  }

  void get(const char* key, std::string& out) const {
    if (!has(key)) return;
    if (!j_.at(key).is_string()) fail(std::string(key) + ": expected a string");
    out = j_.at(key).get<std::string>();
  }

  [[noreturn]] void fail(const std::string& msg) const { throw ConfigError(where_ + ": " + msg); }

 private:
  const json& j_;
  std::string where_;
};

void read_field(const json& j, FieldSpec& f) {
  Reader r(j, "field");
  r.allow({"kind", "c", "beta", "direction_seed", "amplitude", "constant"});
  r.get("kind", f.kind);
  if (f.kind != "zero" && f.kind != "constant" && f.kind != "oscillatory" && f.kind != "holder")
    r.fail("kind must be zero, constant, oscillatory or holder");
  r.get("c", f.c, 0.0, 1e6);
  r.get("beta", f.beta, 1e-6, 1.0 - 1e-6);
  r.get_seed("direction_seed", f.direction_seed);
  r.get("amplitude", f.amplitude, 0.0, 1e6);
  r.get("constant", f.constant, -1e6, 1e6);
}

void read_parametrix(const json& j, ParametrixConfig& p) {
  Reader r(j, "parametrix");
  r.allow({"depth", "time_order", "space_order", "delta", "eps", "eta", "mode", "mc_paths", "tail_tolerance"});
  r.get_int("depth", p.depth, 0, 8);
  r.get_int("time_order", p.time_order, 2, 64);
  r.get_int("space_order", p.space_order, 2, 64);
  r.get("delta", p.delta, 1e-9, 1e3);
  r.get("eps", p.eps, 1e-9, 1.0);
  r.get("eta", p.eta, 0.0, 1e3);
  r.get_int("mc_paths", p.mc_paths, 1, 100000000);
  r.get("tail_tolerance", p.tail_tolerance, 0.0, 1e6);
  std::string mode = p.mode == EvalMode::Tensor ? "tensor" : "monte-carlo";
  r.get("mode", mode);
  if (mode == "tensor")
    p.mode = EvalMode::Tensor;
  else if (mode == "monte-carlo")
    p.mode = EvalMode::MonteCarlo;
  else
    r.fail("mode must be tensor or monte-carlo");
}

void read_simulation(const json& j, SimConfig& s) {
  Reader r(j, "simulation");
  r.allow({"paths", "dt", "T", "scheme", "store_every", "radii", "smoothness", "x0", "v0"});
  r.get_int("paths", s.paths, 1, 100000000);
  r.get("dt", s.dt, 1e-9, 1e3);
  r.get("T", s.T, 1e-9, 1e3);
  r.get_int("store_every", s.store_every, 1, 100000000);
  r.get("smoothness", s.smoothness, 1e-6, 1e6);
  double x0 = s.init.point.x[0], v0 = s.init.point.v[0];
  r.get("x0", x0);
  r.get("v0", v0);
  s.init = InitialLaw::at(PhasePoint::scalar(x0, v0));
  std::string scheme = s.scheme == Scheme::EulerMaruyama ? "euler" : "exact-transport";
  r.get("scheme", scheme);
  if (scheme == "euler")
    s.scheme = Scheme::EulerMaruyama;
  else if (scheme == "exact-transport")
    s.scheme = Scheme::ExactTransport;
  else
    r.fail("scheme must be euler or exact-transport");
  if (r.has("radii")) {
    const json& a = r.sub("radii");
    if (!a.is_array()) r.fail("radii: expected an array");
    s.radii.clear();
    for (const json& x : a) {
      if (!x.is_number()) r.fail("radii: expected numbers");
      s.radii.push_back(x.get<double>());
    }
  }
  try {
    s.validate();
  } catch (const std::invalid_argument& e) {
    r.fail(e.what());
  }
}

void read_backward(const json& j, BackwardConfig& b) {
  Reader r(j, "backward");
  r.allow({"depth", "grid_t", "grid_z", "box", "time_order", "space_order", "source_order", "bump_order"});
  r.get_int("depth", b.depth, 0, 16);
  r.get_int("grid_t", b.grid_t, 2, 1024);
  r.get_int("grid_z", b.grid_z, 2, 1024);
  r.get("box", b.box, 1e-3, 1e3);
  r.get_int("time_order", b.time_order, 2, 64);
  r.get_int("space_order", b.space_order, 2, 64);
  r.get_int("source_order", b.source_order, 2, 64);
  r.get_int("bump_order", b.bump_order, 2, 64);
  try {
    b.validate();
  } catch (const std::invalid_argument& e) {
    r.fail(e.what());
  }
}

void read_verify(const json& j, VerifyScale& v) {
  Reader r(j, "verify");
  r.allow({"group_cases", "arbitration_paths", "duality_paths", "duality_dt", "ladder_paths", "commutation_points",
           "caratheodory_paths"});
  r.get_int("group_cases", v.group_cases, 1, 100000000);
  r.get_int("arbitration_paths", v.arbitration_paths, 2, 100000000);
  r.get_int("duality_paths", v.duality_paths, 2, 100000000);
  r.get("duality_dt", v.duality_dt, 1e-6, 0.1);
  r.get_int("ladder_paths", v.ladder_paths, 1, 100000000);
  r.get_int("commutation_points", v.commutation_points, 1, 1000000);
  r.get_int("caratheodory_paths", v.caratheodory_paths, 2, 100000000);
  // the duality sweep stores every 0.01 time units
  const double stride = 0.01 / v.duality_dt;
  if (std::abs(stride - std::round(stride)) > 1e-9) r.fail("duality_dt must divide 0.01");
}

}  // namespace

DriftField FieldSpec::build(const std::string& which) const {
  if (which == "zero") return zero_field(1, beta);
  if (which == "constant") return constant_field(Vec{constant}, beta);
  if (which == "oscillatory") return oscillatory_field(1, amplitude, beta);
  if (which == "holder") return holder_field(1, c, beta, direction_seed);
  throw ConfigError("field: unknown kind '" + which + "'");
}

const std::map<std::string, double>& default_tolerances() {
  static const std::map<std::string, double> t = {
      {"group", 1e-12},
      {"kernel_mass", 1e-8},
      {"chapman_kolmogorov", 1e-12},
      {"pde_residual", 1e-4},
      {"dilation", 1e-10},
      {"arbitration_match_se", 4.0},
      {"arbitration_refute_se", 10.0},
      {"zero_collapse", 1e-12},
      {"constant_oracle", 1e-2},
      {"holder_mass", 1e-2},
      {"duality_se", 3.0},
      {"strong_residual", 1e-3},
      {"holder_residual", 5e-2},
      {"linearity", 1e-10},
      {"rho_mass", 1e-6},
      {"derivative_spread", 3.0},
      {"caratheodory_se", 3.0},
  };
  return t;
}

double ExperimentConfig::tol(const std::string& name) const {
  const auto it = tolerances.find(name);
  if (it == tolerances.end()) throw std::logic_error("unknown tolerance " + name);
  return it->second;
}

void ExperimentConfig::sync() {
  parametrix.sigma = sigma;
  parametrix.convention = convention;
  parametrix.seed = seed;
  simulation.sigma = sigma;
  simulation.seed = seed;
  backward.sigma = sigma;
  backward.convention = convention;
}

ExperimentConfig default_config() {
  ExperimentConfig c;
  c.simulation.store_every = 1;
  c.simulation.radii = {1.0, 2.0, 4.0, 8.0, 16.0, 32.0};
  c.tolerances = default_tolerances();
  c.sync();
  return c;
}

ExperimentConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed JSON: ") + e.what());
  }
  ExperimentConfig c = default_config();
  Reader r(j, "config");
  r.allow({"seed", "convention", "threads", "sigma", "field", "parametrix", "simulation", "backward", "verify",
           "tolerances", "output"});
  r.get_seed("seed", c.seed);
  r.get_int("threads", c.threads, 1, 1024);
  r.get("sigma", c.sigma, 1e-6, 1e6);
  if (r.has("convention")) {
    std::string s;
    r.get("convention", s);
    try {
      c.convention = convention_from_string(s);
    } catch (const std::invalid_argument&) {
      r.fail("convention must be paper or generator");
    }
  }
  if (r.has("field")) read_field(r.sub("field"), c.field);
  if (r.has("parametrix")) read_parametrix(r.sub("parametrix"), c.parametrix);
  if (r.has("simulation")) read_simulation(r.sub("simulation"), c.simulation);
  if (r.has("backward")) read_backward(r.sub("backward"), c.backward);
  if (r.has("verify")) read_verify(r.sub("verify"), c.verify);
  if (r.has("tolerances")) {
    const json& t = r.sub("tolerances");
    if (!t.is_object()) r.fail("tolerances: expected an object");
    for (auto it = t.begin(); it != t.end(); ++it) {
      if (!c.tolerances.count(it.key())) r.fail("tolerances: unknown name '" + it.key() + "'");
      if (!it.value().is_number() || it.value().get<double>() < 0.0) r.fail("tolerances: " + it.key());
      c.tolerances[it.key()] = it.value().get<double>();
    }
  }
  if (r.has("output")) {
    Reader o(r.sub("output"), "output");
    o.allow({"dir"});
    o.get("dir", c.out_dir);
  }
  c.sync();
  try {
    c.parametrix.validate(c.field.beta);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("parametrix: ") + e.what());
  }
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace kinfp
