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

#include "kinfp/langevin_sim.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

#include "kinfp/rng.hpp"

namespace kinfp {

namespace {

constexpr std::uint64_t kInitSalt = 1;

double norm2(const Vec& a) {
  double s = 0.0;
  for (double c : a) s += c * c;
  return std::sqrt(s);
}

PhasePoint initial_state(const InitialLaw& law, std::uint64_t seed, std::size_t path) {
  switch (law.kind) {
    case InitialLaw::Kind::Point:
      return law.point;
    case InitialLaw::Kind::Gaussian: {
      Stream rng(seed, path, kInitSalt);
      PhasePoint z = law.point;
      for (std::size_t i = 0; i < z.dim(); ++i) z.x[i] += law.sd_x * rng.normal();
      for (std::size_t i = 0; i < z.dim(); ++i) z.v[i] += law.sd_v * rng.normal();
      return z;
    }
    case InitialLaw::Kind::Samples:
      return law.samples[path % law.samples.size()];
  }
  return law.point;
}

struct RunResult {
  std::int64_t exit_step = kNoExit;
  bool failed = false;
  double sup_x = 0.0, sup_v = 0.0, sup_z = 0.0, sup_noise = 0.0;
};

/// Steps one path from time 0. `visit(k, z)` sees every state; with radius > 0 the run stops at the
/// first step whose state leaves the Euclidean ball.
template <class Visit>
RunResult run_path(const DriftField& f, const SimConfig& cfg, std::size_t path, double radius, Visit&& visit) {
  const std::size_t n = cfg.steps();
  PhasePoint z = initial_state(cfg.init, cfg.seed, path);
  const std::size_t d = z.dim();
  Stream rng(cfg.seed, path);
  const double dt = cfg.dt;
  const double sq = std::sqrt(2.0 * cfg.sigma);
  const double sdt = std::sqrt(dt);
  const double dt32 = dt * sdt;
  const double inv2r3 = 0.5 / std::sqrt(3.0);
  Vec a(d, 0.0), noise(d, 0.0);
  RunResult r;
  auto record = [&](std::size_t k) {
    const double nx = norm2(z.x), nv = norm2(z.v);
    r.sup_x = std::max(r.sup_x, nx);
    r.sup_v = std::max(r.sup_v, nv);
    const double nz = std::sqrt(nx * nx + nv * nv);
    r.sup_z = std::max(r.sup_z, nz);
    r.sup_noise = std::max(r.sup_noise, norm2(noise));
    visit(k, z);
    return radius > 0.0 && nz > radius;
  };
  if (record(0)) {
    r.exit_step = 0;
    return r;
  }
  for (std::size_t k = 0; k < n; ++k) {
    const double t = static_cast<double>(k) * dt;
    if (!r.failed) {
      f.eval_into(t, z, a.data());
      for (double c : a)
        if (!std::isfinite(c)) r.failed = true;
    }
    if (cfg.scheme == Scheme::EulerMaruyama) {
      for (std::size_t i = 0; i < d; ++i) {
        const double xi = rng.normal();
        noise[i] += sdt * xi;
        if (r.failed) continue;
        z.x[i] += z.v[i] * dt;
        z.v[i] += a[i] * dt + sq * sdt * xi;
      }
    } else {
      for (std::size_t i = 0; i < d; ++i) {
        const double x1 = rng.normal(), x2 = rng.normal();
        const double i1 = sdt * x1, i2 = dt32 * (0.5 * x1 + inv2r3 * x2);
        noise[i] += i1;
        if (r.failed) continue;
        z.x[i] += z.v[i] * dt + 0.5 * a[i] * dt * dt + sq * i2;
        z.v[i] += a[i] * dt + sq * i1;
      }
    }
    if (record(k + 1)) {
      r.exit_step = static_cast<std::int64_t>(k + 1);
      return r;
    }
  }
  return r;
}

PathEnsemble make_ensemble(const SimConfig& cfg, std::size_t d) {
  PathEnsemble e;
  e.d = d;
  e.paths = cfg.paths;
  e.dt = cfg.dt;
  e.steps = cfg.steps();
  e.store_every = cfg.store_every;
  e.scheme = cfg.scheme;
  e.radii = cfg.radii;
  const std::size_t nt = e.steps / e.store_every + 1;
  for (std::size_t i = 0; i < nt; ++i) e.times.push_back(static_cast<double>(i * e.store_every) * cfg.dt);
  e.data = std::make_shared<std::vector<double>>(nt * 2 * d * cfg.paths, 0.0);
  e.failed.assign(cfg.paths, 0);
  e.exit_steps.assign(cfg.paths, {});
  e.sup_x.assign(cfg.paths, 0.0);
  e.sup_v.assign(cfg.paths, 0.0);
  e.sup_z.assign(cfg.paths, 0.0);
  e.sup_noise.assign(cfg.paths, 0.0);
  return e;
}

template <class Ens>
auto storer(Ens& e, std::size_t path) {
  return [&e, path](std::size_t k, const PhasePoint& z) {
    if (k % e.store_every != 0) return;
    const std::size_t ti = k / e.store_every;
    double* base = e.data->data();
    for (std::size_t i = 0; i < e.d; ++i) {
      base[(ti * 2 * e.d + i) * e.paths + path] = z.x[i];
      base[(ti * 2 * e.d + e.d + i) * e.paths + path] = z.v[i];
    }
  };
}

void keep(PathEnsemble& e, std::size_t path, const RunResult& r) {
  e.failed[path] = r.failed ? 1 : 0;
  e.sup_x[path] = r.sup_x;
  e.sup_v[path] = r.sup_v;
  e.sup_z[path] = r.sup_z;
  e.sup_noise[path] = r.sup_noise;
}

/// max_k |B(t_k)| over the whole horizon, replaying the path's stream.
double noise_sup(const SimConfig& cfg, std::size_t path, std::size_t d) {
  Stream rng(cfg.seed, path);
  const double sdt = std::sqrt(cfg.dt);
  Vec b(d, 0.0);
  double best = 0.0;
  for (std::size_t k = 0; k < cfg.steps(); ++k) {
    for (std::size_t i = 0; i < d; ++i) {
      const double x1 = rng.normal();
      if (cfg.scheme == Scheme::ExactTransport) rng.normal();
      b[i] += sdt * x1;
    }
    best = std::max(best, norm2(b));
  }
  return best;
}

void write_u64(std::ostream& os, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 8);
}

void write_f64(std::ostream& os, double x) { write_u64(os, std::bit_cast<std::uint64_t>(x)); }

std::uint64_t read_u64(std::istream& is) {
  unsigned char b[8];
  if (!is.read(reinterpret_cast<char*>(b), 8)) throw std::runtime_error("read_paths_binary: truncated file");
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
  return v;
}

double read_f64(std::istream& is) { return std::bit_cast<double>(read_u64(is)); }

}  // namespace

std::size_t InitialLaw::dim() const { return kind == Kind::Samples && !samples.empty() ? samples[0].dim() : point.dim(); }

InitialLaw InitialLaw::at(const PhasePoint& z) {
  InitialLaw l;
  l.point = z;
  return l;
}

std::vector<PhasePoint> load_samples_csv(const std::string& path, std::size_t d) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open sample file " + path);
  std::vector<PhasePoint> out;
  std::string line;
  while (std::getline(in, line)) {
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ls(line);
    std::vector<double> vals;
    double x;
    while (ls >> x) vals.push_back(x);
    if (vals.empty()) continue;
    if (vals.size() != 2 * d) throw std::invalid_argument("sample file row has wrong length: " + line);
    PhasePoint z(d);
    for (std::size_t i = 0; i < d; ++i) {
      z.x[i] = vals[i];
      z.v[i] = vals[d + i];
    }
    out.push_back(z);
  }
  if (out.empty()) throw std::invalid_argument("sample file is empty: " + path);
  return out;
}

std::size_t SimConfig::steps() const { return static_cast<std::size_t>(std::llround(T / dt)); }

void SimConfig::validate() const {
  if (!(sigma > 0.0)) throw std::invalid_argument("SimConfig: sigma must be positive");
  if (!(T > 0.0)) throw std::invalid_argument("SimConfig: T must be positive");
  if (!(dt > 0.0)) throw std::invalid_argument("SimConfig: dt must be positive");
  const double ratio = T / dt;
  if (std::abs(ratio - std::round(ratio)) > 1e-9 * std::max(1.0, ratio))
    throw std::invalid_argument("SimConfig: T / dt must be an integer");
  if (paths == 0) throw std::invalid_argument("SimConfig: need at least one path");
  if (store_every == 0 || steps() % store_every != 0)
    throw std::invalid_argument("SimConfig: store_every must divide the step count");
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (!(radii[i] > 0.0)) throw std::invalid_argument("SimConfig: radii must be positive");
    if (i > 0 && !(radii[i] > radii[i - 1])) throw std::invalid_argument("SimConfig: radii must increase");
  }
  if (!(smoothness > 0.0)) throw std::invalid_argument("SimConfig: smoothness must be positive");
  if (init.kind == InitialLaw::Kind::Samples && init.samples.empty())
    throw std::invalid_argument("SimConfig: empty initial sample set");
}

PhasePoint PathEnsemble::state(std::size_t ti, std::size_t path) const {
  PhasePoint z(d);
  for (std::size_t i = 0; i < d; ++i) {
    z.x[i] = at(ti, i, path);
    z.v[i] = at(ti, d + i, path);
  }
  return z;
}

std::size_t PathEnsemble::failed_count() const {
  return static_cast<std::size_t>(std::count(failed.begin(), failed.end(), std::uint8_t{1}));
}

LadderExhausted::LadderExhausted(std::size_t p, double last_radius, double predicted)
    : std::runtime_error("cutoff ladder exhausted on path " + std::to_string(p) + " at radius " +
                         std::to_string(last_radius) + "; Groenwall-predicted radius " + std::to_string(predicted)),
      path(p),
      predicted_radius(predicted) {}

double gronwall_envelope(double c, std::size_t d, double sigma, double T, double z0, double max_noise) {
  const double dd = static_cast<double>(d);
  return (z0 + c * (2.0 + dd) * T + std::sqrt(2.0 * sigma) * max_noise) * std::exp((1.0 + c * std::sqrt(dd)) * T);
}

PathEnsemble euler_maruyama(const DriftField& field, const SimConfig& cfg) {
  cfg.validate();
  if (cfg.init.dim() != field.dim()) throw DimensionError("euler_maruyama: initial law and field dimensions differ");
  PathEnsemble e = make_ensemble(cfg, field.dim());
  e.radii.clear();
  const auto n = static_cast<std::int64_t>(cfg.paths);
#pragma omp parallel for schedule(static)
  for (std::int64_t p = 0; p < n; ++p) {
    const auto path = static_cast<std::size_t>(p);
    keep(e, path, run_path(field, cfg, path, 0.0, storer(e, path)));
  }
  return e;
}

PathEnsemble localized_solve(const DriftField& field, const SimConfig& cfg) {
  cfg.validate();
  if (cfg.radii.empty()) throw std::invalid_argument("localized_solve: empty cutoff ladder");
  if (cfg.init.dim() != field.dim()) throw DimensionError("localized_solve: initial law and field dimensions differ");
  PathEnsemble e = make_ensemble(cfg, field.dim());
  std::vector<DriftField> cut;
  for (double r : cfg.radii) cut.push_back(cutoff_drift(field, r, cfg.smoothness));
  const auto n = static_cast<std::int64_t>(cfg.paths);
  std::int64_t exhausted = n;
#pragma omp parallel for schedule(static)
  for (std::int64_t p = 0; p < n; ++p) {
    const auto path = static_cast<std::size_t>(p);
    for (std::size_t j = 0; j < cut.size(); ++j) {
      const RunResult r = run_path(cut[j], cfg, path, cfg.radii[j], storer(e, path));
      e.exit_steps[path].push_back(r.exit_step);
      keep(e, path, r);
      if (r.exit_step == kNoExit) break;
      if (j + 1 == cut.size()) {
#pragma omp critical
        exhausted = std::min(exhausted, p);
      }
    }
  }
  if (exhausted < n) {
    const auto path = static_cast<std::size_t>(exhausted);
    const PhasePoint z0 = initial_state(cfg.init, cfg.seed, path);
    const double pred = gronwall_envelope(field.growth_constant(), field.dim(), cfg.sigma, cfg.T,
                                          norm2(z0.x) + norm2(z0.v), noise_sup(cfg, path, field.dim()));
    throw LadderExhausted(path, cfg.radii.back(), pred);
  }
  return e;
}

FinePath single_path(const DriftField& field, const SimConfig& cfg, std::size_t path, double radius) {
  cfg.validate();
  FinePath out;
  const DriftField f = radius > 0.0 ? cutoff_drift(field, radius, cfg.smoothness) : field;
  const RunResult r = run_path(f, cfg, path, radius, [&](std::size_t, const PhasePoint& z) { out.states.push_back(z); });
  out.exit_step = r.exit_step;
  out.failed = r.failed;
  return out;
}

EmpiricalFlow::EmpiricalFlow(std::size_t d, std::vector<double> times, std::shared_ptr<const std::vector<double>> data,
                             std::size_t samples, std::vector<std::size_t> slots, bool coupled,
                             std::vector<std::vector<double>> weights)
    : d_(d),
      times_(std::move(times)),
      data_(std::move(data)),
      n_(samples),
      slots_(std::move(slots)),
      coupled_(coupled),
      weights_(std::move(weights)) {
  if (times_.size() != slots_.size()) throw std::invalid_argument("EmpiricalFlow: times and slots differ in length");
  if (n_ == 0) throw std::invalid_argument("EmpiricalFlow: no samples");
  if (!weights_.empty()) {
    if (weights_.size() != times_.size()) throw std::invalid_argument("EmpiricalFlow: one weight vector per time");
    for (const auto& w : weights_) {
      if (w.size() != n_) throw std::invalid_argument("EmpiricalFlow: weight vector length");
      for (double x : w)
        if (!(x >= 0.0)) throw std::invalid_argument("EmpiricalFlow: negative weight");
    }
  }
}

PhasePoint EmpiricalFlow::sample(std::size_t ti, std::size_t i) const {
  PhasePoint z(d_);
  for (std::size_t c = 0; c < d_; ++c) {
    z.x[c] = coord(ti, c, i);
    z.v[c] = coord(ti, d_ + c, i);
  }
  return z;
}

double EmpiricalFlow::mass(std::size_t ti) const {
  if (weights_.empty()) return 1.0;
  return pairwise_sum(weights_[ti]);
}

EmpiricalFlow empirical_flow(const PathEnsemble& ens, const std::vector<std::size_t>& subgrid) {
  std::vector<std::size_t> slots = subgrid;
  if (slots.empty())
    for (std::size_t i = 0; i < ens.times.size(); ++i) slots.push_back(i);
  std::vector<double> times;
  for (std::size_t s : slots) {
    if (s >= ens.times.size()) throw std::out_of_range("empirical_flow: time index outside the stored grid");
    times.push_back(ens.times[s]);
  }
  return EmpiricalFlow(ens.d, std::move(times), ens.data, ens.paths, std::move(slots), true);
}

EmpiricalFlow flow_from_samples(std::vector<double> times, const std::vector<std::vector<PhasePoint>>& clouds) {
  if (clouds.empty() || clouds.size() != times.size())
    throw std::invalid_argument("flow_from_samples: one cloud per time");
  const std::size_t n = clouds[0].size();
  const std::size_t d = n ? clouds[0][0].dim() : 0;
  auto data = std::make_shared<std::vector<double>>(clouds.size() * 2 * d * n);
  std::vector<std::size_t> slots;
  for (std::size_t ti = 0; ti < clouds.size(); ++ti) {
    if (clouds[ti].size() != n) throw std::invalid_argument("flow_from_samples: clouds differ in size");
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t c = 0; c < d; ++c) {
        (*data)[(ti * 2 * d + c) * n + i] = clouds[ti][i].x[c];
        (*data)[(ti * 2 * d + d + c) * n + i] = clouds[ti][i].v[c];
      }
    slots.push_back(ti);
  }
  return EmpiricalFlow(d, std::move(times), data, n, std::move(slots), false);
}

WeakResidual weak_solution_residual(const EmpiricalFlow& flow, const DriftField& field, double sigma,
                                    const TestFunction& psi, std::size_t ti, double bias_allowance, double n_se) {
  if (!flow.coupled()) throw std::invalid_argument("weak_solution_residual: needs a path-coupled flow");
  if (psi.empty()) throw std::invalid_argument("weak_solution_residual: test function has no derivatives");
  if (ti >= flow.times().size()) throw std::out_of_range("weak_solution_residual: time index");
  if (field.dim() != flow.dim()) throw DimensionError("weak_solution_residual: field and flow dimensions differ");
  const std::size_t d = flow.dim();
  const auto& times = flow.times();
  WeakResidual out;
  out.t = times[ti];
  if (ti == 0) {
    out.pass = true;
    return out;
  }
  std::vector<double> per(flow.size());
  Vec a(d, 0.0);
  for (std::size_t i = 0; i < flow.size(); ++i) {
    auto gen = [&](std::size_t j) {
      const PhasePoint z = flow.sample(j, i);
      const Jet jet = psi.jet(z);
      field.eval_into(times[j], z, a.data());
      double g = sigma * jet.lap_v;
      for (std::size_t c = 0; c < d; ++c) g += z.v[c] * jet.dx[c] + a[c] * jet.dv[c];
      return g;
    };
    double integral = 0.0;
    double prev = gen(0);
    for (std::size_t j = 1; j <= ti; ++j) {
      const double cur = gen(j);
      integral += 0.5 * (times[j] - times[j - 1]) * (prev + cur);
      prev = cur;
    }
    per[i] = psi.value(flow.sample(ti, i)) - psi.value(flow.sample(0, i)) - integral;
  }
  const MeanSE m = mean_se(per);
  out.residual = m.mean;
  out.se = m.se;
  out.budget = n_se * m.se + bias_allowance;
  out.pass = std::abs(m.mean) <= out.budget;
  return out;
}

MomentReport moment_bound_check(const PathEnsemble& ens, const DriftField& field, double sigma, double T) {
  MomentReport r;
  const std::size_t n = ens.paths;
  std::vector<double> ax(n), av(n);
  for (std::size_t p = 0; p < n; ++p) {
    const PhasePoint z = ens.state(0, p);
    ax[p] = norm2(z.x);
    av[p] = norm2(z.v);
  }
  r.m1_x0 = mean_se(ax).mean;
  r.m1_v0 = mean_se(av).mean;
  if (field.bounded()) {
    r.sup_norm_used = field.sup_norm();
    r.doob_applicable = true;
  } else if (!ens.radii.empty()) {
    r.sup_norm_used = cutoff_drift(field, ens.radii.back()).sup_norm();
    r.used_cutoff_sup = true;
    r.doob_applicable = true;
  }
  const MeanSE sv = mean_se(ens.sup_v), sx = mean_se(ens.sup_x), sz = mean_se(ens.sup_z);
  r.mean_sup_v = sv.mean;
  r.mean_sup_x = sx.mean;
  r.mean_sup_z = sz.mean;
  r.se_sup_v = sv.se;
  r.se_sup_x = sx.se;
  r.se_sup_z = sz.se;
  if (r.doob_applicable) {
    const double dd = static_cast<double>(ens.d);
    r.bound_v = r.m1_v0 + r.sup_norm_used * T + std::sqrt(8.0 * sigma * dd * T);
    r.bound_x = r.m1_x0 + T * r.bound_v;
    r.bound_z = r.bound_x + r.bound_v;
    r.doob_pass = r.mean_sup_v <= r.bound_v && r.mean_sup_x <= r.bound_x && r.mean_sup_z <= r.bound_z;
  }
  for (std::size_t p = 0; p < n; ++p) {
    const double env = gronwall_envelope(field.growth_constant(), ens.d, sigma, T, ax[p] + av[p], ens.sup_noise[p]);
    const double ratio = ens.sup_z[p] / env;
    r.worst_envelope_ratio = std::max(r.worst_envelope_ratio, ratio);
    if (ratio > 1.0) ++r.envelope_violations;
  }
  const bool envelope_ok = ens.scheme != Scheme::EulerMaruyama || r.envelope_violations == 0;
  r.pass = envelope_ok && (!r.doob_applicable || r.doob_pass);
  return r;
}

void write_paths_binary(const PathEnsemble& ens, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("write_paths_binary: cannot open " + path);
  os.write("KFPPATH1", 8);
  write_u64(os, ens.d);
  write_u64(os, ens.paths);
  write_u64(os, ens.times.size());
  for (double t : ens.times) write_f64(os, t);
  for (double x : *ens.data) write_f64(os, x);
  if (!os) throw std::runtime_error("write_paths_binary: write failed for " + path);
}

PathEnsemble read_paths_binary(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("read_paths_binary: cannot open " + path);
  char magic[8];
  if (!is.read(magic, 8) || std::memcmp(magic, "KFPPATH1", 8) != 0)
    throw std::runtime_error("read_paths_binary: bad magic in " + path);
  PathEnsemble e;
  e.d = read_u64(is);
  e.paths = read_u64(is);
  const std::uint64_t nt = read_u64(is);
  for (std::uint64_t i = 0; i < nt; ++i) e.times.push_back(read_f64(is));
  e.data = std::make_shared<std::vector<double>>(nt * 2 * e.d * e.paths);
  for (double& x : *e.data) x = read_f64(is);
  e.failed.assign(e.paths, 0);
  e.exit_steps.assign(e.paths, {});
  e.sup_x.assign(e.paths, 0.0);
  e.sup_v.assign(e.paths, 0.0);
  e.sup_z.assign(e.paths, 0.0);
  e.sup_noise.assign(e.paths, 0.0);
  if (nt > 1) {
    e.dt = e.times[1] - e.times[0];
    e.steps = nt - 1;
  }
  return e;
}

}  // namespace kinfp
