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
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mblcalib/engine.hpp"
#include "mblcalib/lattice.hpp"
#include "mblcalib/model.hpp"
#include "mblcalib/noise.hpp"

namespace mblcalib {

enum class GateTag { XHalf, YHalf, WHalf, Identity, ISwapLike };

struct GateKind {
  GateTag tag = GateTag::Identity;
  /// Swap angle and conditional phase; ISwapLike only.
  double theta = std::numbers::pi / 2;
  double phi = 0.0;

  static GateKind single(GateTag tag) { return {tag, 0.0, 0.0}; }
  static GateKind iswap_like(double theta = std::numbers::pi / 2,
                             double phi = 0.0) {
    return {GateTag::ISwapLike, theta, phi};
  }
  bool is_two_qubit() const { return tag == GateTag::ISwapLike; }

  friend bool operator==(const GateKind&, const GateKind&) = default;
};

struct Layer {
  std::vector<GateKind> single_gates;  // one per qubit
  std::vector<Edge> pairs;             // disjoint NN edges, sorted

  friend bool operator==(const Layer&, const Layer&) = default;
};

struct CircuitSpec {
  std::vector<Layer> layers;
  std::uint64_t seed = 0;
  double layer_duration_us = 0.05;
  GateKind two_qubit = GateKind::iswap_like();

  friend bool operator==(const CircuitSpec&, const CircuitSpec&) = default;
};

struct ExecutionMode {
  bool device = false;
  bool compensate_diagonal = true;

  static ExecutionMode ideal() { return {false, true}; }
  static ExecutionMode device_mode(bool compensate = true) {
    return {true, compensate};
  }
};

/// Random XEB circuit: every qubit draws uniformly from {X/2, Y/2, W/2, I}
/// each layer, and `pairs_per_layer` disjoint NN edges are chosen by
/// shuffled greedy selection, retried until the target size is reached.
/// Layer l uses RNG stream (seed, l).
CircuitSpec sample_xeb_circuit(const LatticeSpec& spec, int n_layers,
                               std::uint64_t seed, int pairs_per_layer = 4,
                               double layer_duration_us = 0.05);

/// 2x2 for single-qubit tags, 4x4 in the |00>,|01>,|10>,|11> order for
/// ISwapLike (first qubit is the lower site index).
Eigen::MatrixXcd gate_unitary(const GateKind& kind);

/// Applies a gate in place. Full-space bases only; for local_dim > 2 the
/// unitary acts on levels {0, 1} and leaves higher levels untouched.
void apply_gate_inplace(const FockBasis& basis, Eigen::VectorXcd& amps,
                        const GateKind& kind, std::span<const int> sites);
StateVector apply_gate(const StateVector& psi, const GateKind& kind,
                       std::span<const int> sites);
void apply_layer_inplace(const FockBasis& basis, Eigen::VectorXcd& amps,
                         const Layer& layer, const GateKind& two_qubit);

/// States after each layer, gates only.
std::vector<StateVector> run_ideal(const CircuitSpec& circuit,
                                   const StateVector& psi0);

/// States after each layer with the residual-coupling window of length
/// layer_duration after the gates. With compensation the window applies
/// exp(+i 2 pi D tau) exp(-i 2 pi H tau), D the diagonal of H.
std::vector<StateVector> run_device(const CircuitSpec& circuit,
                                    const StateVector& psi0,
                                    const SparseHamiltonian& H_res,
                                    ExecutionMode mode,
                                    const PropagatorConfig& cfg = {});

struct FidelityPoint {
  int depth = 0;
  double mean = 0.0;
  double stderr_ = 0.0;
};

struct CurveOptions {
  TrajectoryConfig trajectories;
  /// Reuse the common no-jump history of all trajectories. Exact: it
  /// replays the same arithmetic each trajectory would perform alone.
  bool share_no_jump_prefix = true;
};

/// Per-depth fidelity of the device run against the ideal run. With noise,
/// mean and standard error over trajectories (stream (seed, index)).
std::vector<FidelityPoint> xeb_fidelity_curve(
    const CircuitSpec& circuit, const StateVector& psi0,
    const SparseHamiltonian& H_res, ExecutionMode mode,
    const std::optional<NoiseParams>& noise, const CurveOptions& options = {});

/// Per-trajectory fidelity rows (trajectory x depth); the raw data behind
/// xeb_fidelity_curve.
std::vector<std::vector<double>> xeb_trajectory_fidelities(
    const CircuitSpec& circuit, const StateVector& psi0,
    const SparseHamiltonian& H_res, ExecutionMode mode,
    const NoiseParams& noise, const CurveOptions& options = {});

/// One line per layer: "S 0:X 1:W ...; T (i,j) (k,l)".
std::string serialize_layers(const CircuitSpec& circuit);
std::vector<Layer> parse_layers(const std::string& text);

}  // namespace mblcalib
