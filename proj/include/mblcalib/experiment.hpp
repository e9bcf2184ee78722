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

#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mblcalib/lattice.hpp"
#include "mblcalib/model.hpp"

namespace mblcalib {

enum class ExperimentMode { Idle, Xeb, Spectrum };

inline constexpr int kConfigSchemaVersion = 1;
inline constexpr const char* kCsvColumns =
    "experiment,r,ns,seed,step,time_us,fidelity,ipr,renyi2,gap_ratio,stderr";

/// Everything one sweep needs. Times in microseconds, frequencies in MHz.
struct ExperimentConfig {
  ExperimentMode mode = ExperimentMode::Idle;
  std::optional<std::string> preset;

  LatticeKind lattice_kind = LatticeKind::Chain;
  int rows = 1;
  int cols = 16;

  ModelParams model;
  bool include_nnn = false;

  std::vector<double> r_values = {0.03, 0.05, 0.1, 0.3, 0.5, 1.0, 2.0};
  std::vector<int> ns_values = {0};
  int n_layers = 20;
  double tau_us = 0.05;
  int horizon = 50;
  std::vector<std::uint64_t> seeds = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  int n_traj = 200;
  std::optional<std::vector<int>> bipartition;
  int pairs_per_layer = 4;
  bool compensate_diagonal = true;
  int krylov_dim = 30;
  double step_tolerance = 1e-10;
  std::string output_path = "results.csv";

  LatticeSpec lattice() const;
  /// Throws ConfigError on any inconsistency.
  void validate() const;
};

std::string mode_name(ExperimentMode mode);
ExperimentMode parse_mode(const std::string& name);

/// Names accepted by load_preset.
const std::vector<std::string>& preset_names();
/// Configuration fragment for a named preset. Throws ConfigError for
/// unknown names.
nlohmann::json load_preset(const std::string& name);

/// Mean |W_i - W_j| over NN edges for the potential the config would
/// build at ratio r.
double mean_adjacent_detuning(const ModelParams& params, const LatticeSpec& spec);

/// Builds a config from a JSON document: defaults, then the preset named
/// by `preset_override` or the document's "preset" key, then the
/// document's own keys. Unknown keys and a missing or wrong
/// schema_version are errors.
ExperimentConfig parse_config(const nlohmann::json& doc,
                              const std::optional<std::string>& preset_override = {});
/// Canonical, fully expanded form (preset already applied).
nlohmann::json to_json(const ExperimentConfig& config);
/// FNV-1a 64 of the canonical JSON, as 16 hex digits.
std::string config_hash(const ExperimentConfig& config);

/// One CSV line. Absent optionals print as empty cells.
struct ResultRow {
  std::string experiment;
  double r = 0.0;
  std::optional<int> ns;
  std::optional<std::uint64_t> seed;
  int step = 0;
  std::optional<double> time_us;
  std::optional<double> fidelity;
  std::optional<double> ipr;
  std::optional<double> renyi2;
  std::optional<double> gap_ratio;
  std::optional<double> stderr_;
};

/// Runs each sweep point on a pool of `threads` workers. Rows come back in
/// parameter order regardless of completion order.
std::vector<ResultRow> run_idle(const ExperimentConfig& config, int threads = 1);
std::vector<ResultRow> run_xeb(const ExperimentConfig& config, int threads = 1);
std::vector<ResultRow> run_spectrum(const ExperimentConfig& config, int threads = 1);
std::vector<ResultRow> run_experiment(const ExperimentConfig& config, int threads = 1);

void write_csv(std::ostream& out, const std::vector<ResultRow>& rows,
               const ExperimentConfig& config);
nlohmann::json summarize(const std::vector<ResultRow>& rows,
                         const ExperimentConfig& config);
/// Writes the CSV to config.output_path and the summary next to it
/// (<output_path>.summary.json). Throws IoError.
void write_outputs(const std::vector<ResultRow>& rows,
                   const ExperimentConfig& config);

/// Runs fn(i) for i in [0, n) on `threads` workers. The first exception
/// by task index is rethrown after all workers finish.
void parallel_for(std::size_t n, int threads,
                  const std::function<void(std::size_t)>& fn);

}  // namespace mblcalib
