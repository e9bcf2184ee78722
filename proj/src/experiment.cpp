// Copyright 2026 The mbl-calib Authors
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

#include "mblcalib/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <thread>

#include "mblcalib/circuits.hpp"
#include "mblcalib/engine.hpp"
#include "mblcalib/errors.hpp"
#include "mblcalib/noise.hpp"
#include "mblcalib/observables.hpp"

namespace mblcalib {

using nlohmann::json;

namespace {

const std::set<std::string> kTopKeys = {
    "schema_version", "mode",      "preset",          "lattice",
    "model",          "r_values",  "ns_values",       "n_layers",
    "tau_us",         "horizon",   "seeds",           "n_traj",
    "bipartition",    "pairs_per_layer", "compensate_diagonal",
    "krylov_dim",     "step_tolerance",  "output_path"};
const std::set<std::string> kModelKeys = {
    "w_base_ghz", "h",       "anharmonicity", "local_dim", "alpha",
    "alpha_x",    "alpha_y", "phi",           "include_nnn"};

void check_keys(const json& obj, const std::set<std::string>& allowed,
                const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

// Later layers win; "model" merges per field, everything else replaces.
void overlay(json& base, const json& layer) {
  for (const auto& [key, value] : layer.items()) {
    if (key == "model" && value.is_object() && base.contains("model")) {
      for (const auto& [mk, mv] : value.items()) base["model"][mk] = mv;
    } else {
      base[key] = value;
    }
  }
}

template <class T>
T get(const json& obj, const char* key) {
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad or missing value for '") + key + "': " + e.what());
  }
}

json preset_lattice_chain(int sites) { return {{"kind", "chain"}, {"sites", sites}}; }
json preset_lattice_grid(int rows, int cols) {
  return {{"kind", "grid"}, {"rows", rows}, {"cols", cols}};
}

// Ratio r that puts the mean NN detuning at target_mhz for this lattice.
double ratio_for_detuning(ModelParams params, const LatticeSpec& spec,
                          double target_mhz) {
  params.r = params.h;  // W = 1
  return params.h * mean_adjacent_detuning(params, spec) / target_mhz;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.15g", v);
  return buf;
}

}  // namespace

// ---------------------------------------------------------------------------
// Config

LatticeSpec ExperimentConfig::lattice() const {
  try {
    return lattice_kind == LatticeKind::Chain ? LatticeSpec::chain(cols)
                                              : LatticeSpec::grid(rows, cols);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

void ExperimentConfig::validate() const {
  const LatticeSpec spec = lattice();
  if (r_values.empty()) throw ConfigError("r_values must be nonempty");
  for (double r : r_values) {
    if (!(r > 0.0) || !std::isfinite(r)) throw ConfigError("r values must be positive");
  }
  for (int ns : ns_values) {
    if (ns < 0 || ns > 2) throw ConfigError("ns values must be 0, 1 or 2");
  }
  if (ns_values.empty()) throw ConfigError("ns_values must be nonempty");
  if (horizon < 1) throw ConfigError("horizon must be >= 1");
  if (n_layers < 1) throw ConfigError("n_layers must be >= 1");
  if (!(tau_us >= 0.0) || !std::isfinite(tau_us)) throw ConfigError("tau_us must be >= 0");
  if (n_traj < 1) throw ConfigError("n_traj must be >= 1");
  if (krylov_dim < 2) throw ConfigError("krylov_dim must be >= 2");
  if (!(step_tolerance > 0.0)) throw ConfigError("step_tolerance must be positive");
  if (model.local_dim < 2) throw ConfigError("local_dim must be >= 2");
  if (!(model.h >= 0.0) || !std::isfinite(model.h)) throw ConfigError("h must be >= 0");
  if (output_path.empty()) throw ConfigError("output_path must be set");
  if (bipartition) {
    try {
      Bipartition(*bipartition, spec.n_sites());
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
  if (mode == ExperimentMode::Xeb) {
    if (seeds.empty()) throw ConfigError("xeb needs at least one seed");
    if (pairs_per_layer < 0 || pairs_per_layer > spec.max_nn_matching()) {
      throw ConfigError("pairs_per_layer exceeds the lattice's maximum matching");
    }
    const double bits = spec.n_sites() * std::log2(static_cast<double>(model.local_dim));
    if (bits > 24.0) throw ConfigError("xeb full space larger than 2^24 states");
  }
}

std::string mode_name(ExperimentMode mode) {
  switch (mode) {
    case ExperimentMode::Idle: return "idle";
    case ExperimentMode::Xeb: return "xeb";
    case ExperimentMode::Spectrum: return "spectrum";
  }
  return "idle";
}

ExperimentMode parse_mode(const std::string& name) {
  if (name == "idle") return ExperimentMode::Idle;
  if (name == "xeb") return ExperimentMode::Xeb;
  if (name == "spectrum") return ExperimentMode::Spectrum;
  throw ConfigError("unknown mode '" + name + "'");
}

double mean_adjacent_detuning(const ModelParams& params, const LatticeSpec& spec) {
  const SitePotential pot = potential_for(params, spec);
  const auto edges = spec.edges(EdgeKind::NN);
  double sum = 0.0;
  for (const Edge& e : edges) sum += std::abs(pot.values[e.i] - pot.values[e.j]);
  return sum / static_cast<double>(edges.size());
}

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names = {"paper-1d", "paper-2d",
                                                 "google-like", "ibm-like"};
  return names;
}

json load_preset(const std::string& name) {
  const json model_1d = {{"w_base_ghz", 4.889}, {"h", 5.0},
                         {"alpha", kGoldenAlpha}, {"phi", 0.0}};
  const json model_2d = {{"w_base_ghz", 4.889}, {"h", 5.0},
                         {"alpha_x", kGoldenAlpha}, {"alpha_y", kSilverAlpha7}};
  if (name == "paper-1d") {
    return {{"lattice", preset_lattice_chain(16)}, {"model", model_1d}};
  }
  if (name == "paper-2d") {
    return {{"lattice", preset_lattice_grid(4, 4)}, {"model", model_2d}};
  }
  if (name == "google-like") {
    ModelParams p;
    p.h = 5.0;
    const double r = ratio_for_detuning(p, LatticeSpec::grid(4, 4), 100.0);
    return {{"lattice", preset_lattice_grid(4, 4)}, {"model", model_2d},
            {"r_values", json::array({r})}};
  }
  if (name == "ibm-like") {
    ModelParams p;
    p.h = 5.0;
    const double r = ratio_for_detuning(p, LatticeSpec::chain(16), 500.0);
    return {{"lattice", preset_lattice_chain(16)}, {"model", model_1d},
            {"r_values", json::array({r})}};
  }
  throw ConfigError("unknown preset '" + name + "'");
}

json to_json(const ExperimentConfig& c) {
  json j;
  j["schema_version"] = kConfigSchemaVersion;
  j["mode"] = mode_name(c.mode);
  j["preset"] = c.preset ? json(*c.preset) : json(nullptr);
  j["lattice"] = c.lattice_kind == LatticeKind::Chain
                     ? preset_lattice_chain(c.cols)
                     : preset_lattice_grid(c.rows, c.cols);
  j["model"] = {{"w_base_ghz", c.model.w_base_ghz},
                {"h", c.model.h},
                {"anharmonicity", c.model.anharmonicity},
                {"local_dim", c.model.local_dim},
                {"alpha", c.model.alpha},
                {"alpha_x", c.model.alpha_x},
                {"alpha_y", c.model.alpha_y},
                {"phi", c.model.phi},
                {"include_nnn", c.include_nnn}};
  j["r_values"] = c.r_values;
  j["ns_values"] = c.ns_values;
  j["n_layers"] = c.n_layers;
  j["tau_us"] = c.tau_us;
  j["horizon"] = c.horizon;
  j["seeds"] = c.seeds;
  j["n_traj"] = c.n_traj;
  j["bipartition"] = c.bipartition ? json(*c.bipartition) : json(nullptr);
  j["pairs_per_layer"] = c.pairs_per_layer;
  j["compensate_diagonal"] = c.compensate_diagonal;
  j["krylov_dim"] = c.krylov_dim;
  j["step_tolerance"] = c.step_tolerance;
  j["output_path"] = c.output_path;
  return j;
}

ExperimentConfig parse_config(const json& doc,
                              const std::optional<std::string>& preset_override) {
  check_keys(doc, kTopKeys, "config");
  if (!doc.contains("schema_version")) throw ConfigError("missing schema_version");
  if (get<int>(doc, "schema_version") != kConfigSchemaVersion) {
    throw ConfigError("unsupported schema_version");
  }

  std::optional<std::string> preset = preset_override;
  if (!preset && doc.contains("preset") && !doc.at("preset").is_null()) {
    preset = get<std::string>(doc, "preset");
  }

  json merged = to_json(ExperimentConfig{});
  if (preset) overlay(merged, load_preset(*preset));
  overlay(merged, doc);
  merged["preset"] = preset ? json(*preset) : json(nullptr);

  ExperimentConfig c;
  c.preset = preset;
  c.mode = parse_mode(get<std::string>(merged, "mode"));

  const json& lat = merged.at("lattice");
  const auto kind = get<std::string>(lat, "kind");
  if (kind == "chain") {
    check_keys(lat, {"kind", "sites"}, "lattice");
    c.lattice_kind = LatticeKind::Chain;
    c.rows = 1;
    c.cols = get<int>(lat, "sites");
  } else if (kind == "grid") {
    check_keys(lat, {"kind", "rows", "cols"}, "lattice");
    c.lattice_kind = LatticeKind::Grid;
    c.rows = get<int>(lat, "rows");
    c.cols = get<int>(lat, "cols");
  } else {
    throw ConfigError("lattice kind must be 'chain' or 'grid'");
  }

  const json& m = merged.at("model");
  check_keys(m, kModelKeys, "model");
  c.model.w_base_ghz = get<double>(m, "w_base_ghz");
  c.model.h = get<double>(m, "h");
  c.model.anharmonicity = get<double>(m, "anharmonicity");
  c.model.local_dim = get<int>(m, "local_dim");
  c.model.alpha = get<double>(m, "alpha");
  c.model.alpha_x = get<double>(m, "alpha_x");
  c.model.alpha_y = get<double>(m, "alpha_y");
  c.model.phi = get<double>(m, "phi");
  c.include_nnn = get<bool>(m, "include_nnn");

  c.r_values = get<std::vector<double>>(merged, "r_values");
  c.ns_values = get<std::vector<int>>(merged, "ns_values");
  c.n_layers = get<int>(merged, "n_layers");
  c.tau_us = get<double>(merged, "tau_us");
  c.horizon = get<int>(merged, "horizon");
  c.seeds = get<std::vector<std::uint64_t>>(merged, "seeds");
  c.n_traj = get<int>(merged, "n_traj");
  if (!merged.at("bipartition").is_null()) {
    c.bipartition = get<std::vector<int>>(merged, "bipartition");
  }
  c.pairs_per_layer = get<int>(merged, "pairs_per_layer");
  c.compensate_diagonal = get<bool>(merged, "compensate_diagonal");
  c.krylov_dim = get<int>(merged, "krylov_dim");
  c.step_tolerance = get<double>(merged, "step_tolerance");
  c.output_path = get<std::string>(merged, "output_path");
  if (!c.r_values.empty()) c.model.r = c.r_values.front();
  c.validate();
  return c;
}

std::string config_hash(const ExperimentConfig& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : to_json(config).dump()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// ---------------------------------------------------------------------------
// Worker pool

void parallel_for(std::size_t n, int threads,
                  const std::function<void(std::size_t)>& fn) {
  const std::size_t workers =
      std::max<std::size_t>(1, std::min<std::size_t>(n, std::max(threads, 1)));
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

// ---------------------------------------------------------------------------
// Runners

namespace {

ModelParams params_at(const ExperimentConfig& c, double r) {
  ModelParams p = c.model;
  p.r = r;
  return p;
}

PropagatorConfig propagator_of(const ExperimentConfig& c) {
  PropagatorConfig cfg;
  cfg.krylov_dim = c.krylov_dim;
  cfg.step_tolerance = c.step_tolerance;
  return cfg;
}

EdgeSet edges_of(const ExperimentConfig& c) { return {true, c.include_nnn}; }

std::vector<ResultRow> flatten(std::vector<std::vector<ResultRow>>& parts) {
  std::vector<ResultRow> out;
  for (auto& p : parts) {
    for (auto& row : p) out.push_back(std::move(row));
  }
  return out;
}

}  // namespace

std::vector<ResultRow> run_idle(const ExperimentConfig& c, int threads) {
  c.validate();
  const LatticeSpec spec = c.lattice();
  const auto basis = FockBasis::enumerate(spec.n_sites(), c.model.local_dim,
                                          Sector::fixed(spec.n_sites() / 2));
  const Bipartition cut = c.bipartition ? Bipartition(*c.bipartition, spec.n_sites())
                                        : Bipartition::half_system(spec);
  const StateVector neel = neel_state(basis);
  const PropagatorConfig prop = propagator_of(c);

  std::vector<std::vector<ResultRow>> parts(c.r_values.size());
  parallel_for(c.r_values.size(), threads, [&](std::size_t idx) {
    const double r = c.r_values[idx];
    const ModelParams p = params_at(c, r);
    const SparseHamiltonian H =
        build_hamiltonian(p, spec, potential_for(p, spec), basis, edges_of(c));
    StateVector psi = neel;
    for (int k = 1; k <= c.horizon; ++k) {
      psi = evolve(H, psi, c.tau_us, prop);
      ResultRow row;
      row.experiment = "idle";
      row.r = r;
      row.step = k;
      row.time_us = k * c.tau_us;
      row.fidelity = fidelity(neel, psi);
      row.ipr = ipr(psi);
      row.renyi2 = renyi2(psi, cut);
      parts[idx].push_back(std::move(row));
    }
  });
  return flatten(parts);
}

std::vector<ResultRow> run_xeb(const ExperimentConfig& c, int threads) {
  c.validate();
  const LatticeSpec spec = c.lattice();
  const auto basis =
      FockBasis::enumerate(spec.n_sites(), c.model.local_dim, Sector::full());
  const StateVector neel = neel_state(basis);

  struct Point {
    double r;
    int ns;
    std::uint64_t seed;
  };
  std::vector<Point> points;
  for (double r : c.r_values) {
    for (int ns : c.ns_values) {
      for (std::uint64_t s : c.seeds) points.push_back({r, ns, s});
    }
  }

  std::vector<std::vector<ResultRow>> parts(points.size());
  parallel_for(points.size(), threads, [&](std::size_t idx) {
    const Point pt = points[idx];
    const ModelParams p = params_at(c, pt.r);
    const SparseHamiltonian H =
        build_hamiltonian(p, spec, potential_for(p, spec), basis, edges_of(c));
    const CircuitSpec circuit = sample_xeb_circuit(spec, c.n_layers, pt.seed,
                                                   c.pairs_per_layer, c.tau_us);
    CurveOptions opts;
    opts.trajectories.n_traj = c.n_traj;
    opts.trajectories.seed = pt.seed;
    opts.trajectories.propagator = propagator_of(c);
    const auto curve =
        xeb_fidelity_curve(circuit, neel, H, ExecutionMode::device_mode(c.compensate_diagonal),
                           noise_from_ns(pt.ns), opts);
    for (const auto& fp : curve) {
      ResultRow row;
      row.experiment = "xeb";
      row.r = pt.r;
      row.ns = pt.ns;
      row.seed = pt.seed;
      row.step = fp.depth;
      row.time_us = fp.depth * c.tau_us;
      row.fidelity = fp.mean;
      row.stderr_ = fp.stderr_;
      parts[idx].push_back(std::move(row));
    }
  });
  std::vector<ResultRow> rows = flatten(parts);

  // Seed-averaged summary per (r, ns, depth).
  for (double r : c.r_values) {
    for (int ns : c.ns_values) {
      for (int depth = 1; depth <= c.n_layers; ++depth) {
        std::vector<double> f;
        for (const auto& row : rows) {
          if (row.experiment == "xeb" && row.r == r && row.ns == ns &&
              row.step == depth) {
            f.push_back(*row.fidelity);
          }
        }
        const auto ms = mean_and_stderr(f);
        ResultRow row;
        row.experiment = "xeb-mean";
        row.r = r;
        row.ns = ns;
        row.step = depth;
        row.time_us = depth * c.tau_us;
        row.fidelity = ms.mean;
        row.stderr_ = ms.stderr_;
        rows.push_back(std::move(row));
      }
    }
  }
  return rows;
}

std::vector<ResultRow> run_spectrum(const ExperimentConfig& c, int threads) {
  c.validate();
  const LatticeSpec spec = c.lattice();
  const auto basis = FockBasis::enumerate(spec.n_sites(), c.model.local_dim,
                                          Sector::fixed(spec.n_sites() / 2));
  if (basis->dimension() > 20000) {
    throw NumericalError("spectrum sector dimension " +
                         std::to_string(basis->dimension()) +
                         " exceeds the diagonalization guard (20000)");
  }
  std::vector<std::vector<ResultRow>> parts(c.r_values.size());
  parallel_for(c.r_values.size(), threads, [&](std::size_t idx) {
    const double r = c.r_values[idx];
    const ModelParams p = params_at(c, r);
    const SparseHamiltonian H =
        build_hamiltonian(p, spec, potential_for(p, spec), basis, edges_of(c));
    ResultRow row;
    row.experiment = "spectrum";
    row.r = r;
    row.gap_ratio = gap_ratio(H).mean_gap_ratio;
    parts[idx].push_back(std::move(row));
  });
  return flatten(parts);
}

std::vector<ResultRow> run_experiment(const ExperimentConfig& c, int threads) {
  switch (c.mode) {
    case ExperimentMode::Idle: return run_idle(c, threads);
    case ExperimentMode::Xeb: return run_xeb(c, threads);
    case ExperimentMode::Spectrum: return run_spectrum(c, threads);
  }
  return {};
}

// ---------------------------------------------------------------------------
// Output

void write_csv(std::ostream& out, const std::vector<ResultRow>& rows,
               const ExperimentConfig& config) {
  out << "# mbl-calib results v1 experiment=" << mode_name(config.mode)
      << " config_hash=" << config_hash(config) << '\n';
  out << kCsvColumns << '\n';
  auto opt = [](const std::optional<double>& v) {
    if (!v) return std::string();
    if (!std::isfinite(*v)) throw NumericalError("non-finite value in results");
    return format_double(*v);
  };
  for (const auto& row : rows) {
    out << row.experiment << ',' << format_double(row.r) << ','
        << (row.ns ? std::to_string(*row.ns) : "") << ','
        << (row.seed ? std::to_string(*row.seed) : "") << ',' << row.step << ','
        << opt(row.time_us) << ',' << opt(row.fidelity) << ',' << opt(row.ipr)
        << ',' << opt(row.renyi2) << ',' << opt(row.gap_ratio) << ','
        << opt(row.stderr_) << '\n';
  }
}

json summarize(const std::vector<ResultRow>& rows, const ExperimentConfig& config) {
  json s;
  s["experiment"] = mode_name(config.mode);
  s["config_hash"] = config_hash(config);
  s["rows"] = rows.size();
  json points = json::array();
  for (double r : config.r_values) {
    json pt;
    pt["r"] = r;
    switch (config.mode) {
      case ExperimentMode::Idle: {
        double min_f = 1.0;
        const ResultRow* last = nullptr;
        for (const auto& row : rows) {
          if (row.r != r) continue;
          min_f = std::min(min_f, *row.fidelity);
          last = &row;
        }
        if (last) {
          pt["min_fidelity"] = min_f;
          pt["terminal_fidelity"] = *last->fidelity;
          pt["terminal_ipr"] = *last->ipr;
          pt["terminal_renyi2"] = *last->renyi2;
        }
        break;
      }
      case ExperimentMode::Xeb: {
        json by_ns;
        for (const auto& row : rows) {
          if (row.experiment == "xeb-mean" && row.r == r &&
              row.step == config.n_layers) {
            by_ns[std::to_string(*row.ns)] = {{"fidelity", *row.fidelity},
                                              {"stderr", *row.stderr_}};
          }
        }
        pt["final_depth"] = by_ns;
        break;
      }
      case ExperimentMode::Spectrum:
        for (const auto& row : rows) {
          if (row.r == r) pt["gap_ratio"] = *row.gap_ratio;
        }
        break;
    }
    points.push_back(pt);
  }
  s["points"] = points;
  return s;
}

void write_outputs(const std::vector<ResultRow>& rows,
                   const ExperimentConfig& config) {
  const std::filesystem::path csv_path(config.output_path);
  if (csv_path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(csv_path.parent_path(), ec);
  }
  {
    std::ofstream out(csv_path);
    if (!out) throw IoError("cannot open " + csv_path.string() + " for writing");
    write_csv(out, rows, config);
    if (!out) throw IoError("failed writing " + csv_path.string());
  }
  const std::string summary_path = config.output_path + ".summary.json";
  std::ofstream out(summary_path);
  if (!out) throw IoError("cannot open " + summary_path + " for writing");
  out << summarize(rows, config).dump(2) << '\n';
  if (!out) throw IoError("failed writing " + summary_path);
}

}  // namespace mblcalib
