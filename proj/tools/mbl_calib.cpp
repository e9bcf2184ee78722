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

// mbl-calib: idle / xeb / spectrum sweeps over the quasiperiodic ratio r.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "mblcalib/errors.hpp"
#include "mblcalib/experiment.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitIo = 4;

int default_threads() {
  if (const char* env = std::getenv("MBL_CALIB_THREADS")) {
    try {
      const int n = std::stoi(env);
      if (n > 0) return n;
    } catch (const std::exception&) {
    }
    std::cerr << "ignoring invalid MBL_CALIB_THREADS='" << env << "'\n";
  }
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bose-Hubbard residual-coupling experiments for qubit lattices"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::string> preset;
  std::optional<std::string> out_path;
  int threads = 0;

  for (const char* name : {"idle", "xeb", "spectrum"}) {
    CLI::App* sub = app.add_subcommand(name, std::string("run the ") + name + " experiment");
    sub->add_option("--config", config_path, "JSON experiment config");
    sub->add_option("--preset", preset, "paper-1d | paper-2d | google-like | ibm-like");
    sub->add_option("--out", out_path, "CSV output path (overrides config)");
    sub->add_option("--threads", threads, "worker threads (env MBL_CALIB_THREADS)")
        ->check(CLI::PositiveNumber);
  }
  CLI11_PARSE(app, argc, argv);
  const std::string mode = app.get_subcommands().front()->get_name();

  try {
    nlohmann::json doc;
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw mblcalib::IoError("cannot read config " + config_path);
      try {
        doc = nlohmann::json::parse(in);
      } catch (const nlohmann::json::parse_error& e) {
        throw mblcalib::ConfigError(std::string("config is not valid JSON: ") + e.what());
      }
    } else if (preset) {
      doc = {{"schema_version", mblcalib::kConfigSchemaVersion}};
    } else {
      throw mblcalib::ConfigError("either --config or --preset is required");
    }
    doc["mode"] = mode;
    if (out_path) doc["output_path"] = *out_path;

    const auto config = mblcalib::parse_config(doc, preset);
    const int n_threads = threads > 0 ? threads : default_threads();
    const auto rows = mblcalib::run_experiment(config, n_threads);
    mblcalib::write_outputs(rows, config);
    std::cout << "wrote " << rows.size() << " rows to " << config.output_path << '\n';
    return 0;
  } catch (const mblcalib::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const mblcalib::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const mblcalib::IoError& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  }
}
