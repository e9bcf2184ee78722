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

#include "mblcalib/circuits.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "mblcalib/errors.hpp"
#include "mblcalib/observables.hpp"
#include "mblcalib/rng.hpp"

namespace mblcalib {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr GateTag kSingleGateSet[] = {GateTag::XHalf, GateTag::YHalf,
                                      GateTag::WHalf, GateTag::Identity};

char gate_letter(GateTag tag) {
  switch (tag) {
    case GateTag::XHalf: return 'X';
    case GateTag::YHalf: return 'Y';
    case GateTag::WHalf: return 'W';
    case GateTag::Identity: return 'I';
    case GateTag::ISwapLike: break;
  }
  throw std::invalid_argument("two-qubit gate has no single-gate letter");
}

GateTag gate_from_letter(char c) {
  switch (c) {
    case 'X': return GateTag::XHalf;
    case 'Y': return GateTag::YHalf;
    case 'W': return GateTag::WHalf;
    case 'I': return GateTag::Identity;
    default: throw std::invalid_argument(std::string("unknown gate letter ") + c);
  }
}

void require_full_space(const FockBasis& basis) {
  if (!basis.sector().is_full()) {
    throw std::invalid_argument("gates need the full Fock space, not a number sector");
  }
}

// exp(+i 2 pi D tau), D the diagonal of H.
Eigen::VectorXcd frame_phases(const SparseHamiltonian& H, double tau) {
  const Eigen::VectorXd d = H.diagonal();
  Eigen::VectorXcd out(d.size());
  for (Eigen::Index k = 0; k < d.size(); ++k) {
    out[k] = std::polar(1.0, kTwoPi * d[k] * tau);
  }
  return out;
}

}  // namespace

CircuitSpec sample_xeb_circuit(const LatticeSpec& spec, int n_layers,
                               std::uint64_t seed, int pairs_per_layer,
                               double layer_duration_us) {
  if (n_layers < 0) throw std::invalid_argument("n_layers must be >= 0");
  if (pairs_per_layer < 0 || pairs_per_layer > spec.max_nn_matching()) {
    throw std::invalid_argument("cannot place " + std::to_string(pairs_per_layer) +
                                " disjoint pairs; maximum matching is " +
                                std::to_string(spec.max_nn_matching()));
  }
  if (!(layer_duration_us >= 0.0)) {
    throw std::invalid_argument("layer duration must be >= 0");
  }
  const auto nn = spec.edges(EdgeKind::NN);
  const int n = spec.n_sites();

  CircuitSpec circuit;
  circuit.seed = seed;
  circuit.layer_duration_us = layer_duration_us;
  circuit.layers.reserve(n_layers);
  for (int l = 0; l < n_layers; ++l) {
    RngStream rng(seed, static_cast<std::uint64_t>(l));
    Layer layer;
    layer.single_gates.reserve(n);
    for (int q = 0; q < n; ++q) {
      layer.single_gates.push_back(GateKind::single(kSingleGateSet[rng.below(4)]));
    }
    for (int attempt = 0;; ++attempt) {
      if (attempt > 10000) throw std::runtime_error("pair sampling did not converge");
      auto pool = nn;
      for (std::size_t i = pool.size(); i > 1; --i) {
        std::swap(pool[i - 1], pool[rng.below(i)]);
      }
      std::vector<char> used(n, 0);
      layer.pairs.clear();
      for (const Edge& e : pool) {
        if (static_cast<int>(layer.pairs.size()) == pairs_per_layer) break;
        if (used[e.i] || used[e.j]) continue;
        used[e.i] = used[e.j] = 1;
        layer.pairs.push_back(e);
      }
      if (static_cast<int>(layer.pairs.size()) == pairs_per_layer) break;
    }
    std::sort(layer.pairs.begin(), layer.pairs.end(),
              [](const Edge& a, const Edge& b) {
                return std::pair(a.i, a.j) < std::pair(b.i, b.j);
              });
    circuit.layers.push_back(std::move(layer));
  }
  return circuit;
}

Eigen::MatrixXcd gate_unitary(const GateKind& kind) {
  const double s = 1.0 / std::sqrt(2.0);
  const cplx i(0.0, 1.0);
  Eigen::Matrix2cd id = Eigen::Matrix2cd::Identity();
  Eigen::Matrix2cd axis;
  switch (kind.tag) {
    case GateTag::Identity:
      return id;
    case GateTag::XHalf:
      axis << 0.0, 1.0, 1.0, 0.0;
      break;
    case GateTag::YHalf:
      axis << 0.0, -i, i, 0.0;
      break;
    case GateTag::WHalf:
      // (X + Y) / sqrt(2)
      axis << 0.0, s * (1.0 - i), s * (1.0 + i), 0.0;
      break;
    case GateTag::ISwapLike: {
      Eigen::Matrix4cd u = Eigen::Matrix4cd::Zero();
      u(0, 0) = 1.0;
      u(1, 1) = u(2, 2) = std::cos(kind.theta);
      u(1, 2) = u(2, 1) = -i * std::sin(kind.theta);
      u(3, 3) = std::polar(1.0, -kind.phi);
      return u;
    }
  }
  // exp(-i pi/4 n.sigma) = cos(pi/4) I - i sin(pi/4) n.sigma
  return Eigen::MatrixXcd(s * id - i * s * axis);
}

void apply_gate_inplace(const FockBasis& basis, Eigen::VectorXcd& amps,
                        const GateKind& kind, std::span<const int> sites) {
  require_full_space(basis);
  const int n = basis.n_sites();
  const std::size_t arity = kind.is_two_qubit() ? 2 : 1;
  if (sites.size() != arity) throw std::invalid_argument("wrong number of gate sites");
  for (int s : sites) {
    if (s < 0 || s >= n) throw std::out_of_range("gate site out of range");
  }
  if (kind.tag == GateTag::Identity) return;
  const Eigen::MatrixXcd u = gate_unitary(kind);
  const int d = basis.local_dim();
  const auto dim = static_cast<Eigen::Index>(basis.dimension());

  if (arity == 1) {
    const auto p = static_cast<Eigen::Index>(basis.place_value(sites[0]));
    const cplx u00 = u(0, 0), u01 = u(0, 1), u10 = u(1, 0), u11 = u(1, 1);
    for (Eigen::Index k = 0; k < dim; ++k) {
      if ((k / p) % d != 0) continue;
      const cplx a = amps[k];
      const cplx b = amps[k + p];
      amps[k] = u00 * a + u01 * b;
      amps[k + p] = u10 * a + u11 * b;
    }
    return;
  }

  if (sites[0] == sites[1]) throw std::invalid_argument("two-qubit gate on one site");
  const auto pi = static_cast<Eigen::Index>(basis.place_value(sites[0]));
  const auto pj = static_cast<Eigen::Index>(basis.place_value(sites[1]));
  Eigen::Vector4cd x;
  for (Eigen::Index k = 0; k < dim; ++k) {
    if ((k / pi) % d != 0 || (k / pj) % d != 0) continue;
    const Eigen::Index idx[4] = {k, k + pj, k + pi, k + pi + pj};
    for (int a = 0; a < 4; ++a) x[a] = amps[idx[a]];
    const Eigen::Vector4cd y = u * x;
    for (int a = 0; a < 4; ++a) amps[idx[a]] = y[a];
  }
}

StateVector apply_gate(const StateVector& psi, const GateKind& kind,
                       std::span<const int> sites) {
  StateVector out = psi;
  apply_gate_inplace(out.basis(), out.amplitudes(), kind, sites);
  return out;
}

void apply_layer_inplace(const FockBasis& basis, Eigen::VectorXcd& amps,
                         const Layer& layer, const GateKind& two_qubit) {
  if (static_cast<int>(layer.single_gates.size()) != basis.n_sites()) {
    throw std::invalid_argument("layer width does not match the register");
  }
  for (int q = 0; q < basis.n_sites(); ++q) {
    const int site[1] = {q};
    apply_gate_inplace(basis, amps, layer.single_gates[q], site);
  }
  for (const Edge& e : layer.pairs) {
    const int pair[2] = {e.i, e.j};
    apply_gate_inplace(basis, amps, two_qubit, pair);
  }
}

std::vector<StateVector> run_ideal(const CircuitSpec& circuit,
                                   const StateVector& psi0) {
  require_full_space(psi0.basis());
  std::vector<StateVector> out;
  out.reserve(circuit.layers.size());
  StateVector psi = psi0;
  for (const Layer& layer : circuit.layers) {
    apply_layer_inplace(psi.basis(), psi.amplitudes(), layer, circuit.two_qubit);
    out.push_back(psi);
  }
  return out;
}

std::vector<StateVector> run_device(const CircuitSpec& circuit,
                                    const StateVector& psi0,
                                    const SparseHamiltonian& H_res,
                                    ExecutionMode mode,
                                    const PropagatorConfig& cfg) {
  if (!mode.device) return run_ideal(circuit, psi0);
  require_full_space(H_res.basis());
  if (!(H_res.basis() == psi0.basis())) {
    throw std::invalid_argument("residual Hamiltonian and state bases differ");
  }
  const double tau = circuit.layer_duration_us;
  Eigen::VectorXcd phases;
  if (mode.compensate_diagonal) phases = frame_phases(H_res, tau);

  std::vector<StateVector> out;
  out.reserve(circuit.layers.size());
  StateVector psi = psi0;
  for (const Layer& layer : circuit.layers) {
    apply_layer_inplace(psi.basis(), psi.amplitudes(), layer, circuit.two_qubit);
    psi = evolve(H_res, psi, tau, cfg);
    if (mode.compensate_diagonal) psi.amplitudes().array() *= phases.array();
    out.push_back(psi);
  }
  return out;
}

std::vector<std::vector<double>> xeb_trajectory_fidelities(
    const CircuitSpec& circuit, const StateVector& psi0,
    const SparseHamiltonian& H_res, ExecutionMode mode,
    const NoiseParams& noise, const CurveOptions& options) {
  const TrajectoryConfig& cfg = options.trajectories;
  cfg.validate();
  require_full_space(psi0.basis());
  if (!(H_res.basis() == psi0.basis())) {
    throw std::invalid_argument("residual Hamiltonian and state bases differ");
  }
  const auto ideal = run_ideal(circuit, psi0);
  const NoiseModel model(noise, psi0.basis_ptr());
  const double tau = circuit.layer_duration_us;
  const std::size_t depth = circuit.layers.size();
  Eigen::VectorXcd phases;
  const bool compensate = mode.device && mode.compensate_diagonal;
  if (compensate) phases = frame_phases(H_res, tau);

  // Ideal gates still sit in a noisy idle window, with H = 0 there.
  const SparseHamiltonian idle_zero(
      psi0.basis_ptr(),
      std::vector<std::int64_t>(psi0.basis().dimension() + 1, 0), {}, {});

  // One layer on an existing trajectory: gates, noisy window, frame.
  auto run_layer = [&](Trajectory& traj, std::size_t l) {
    apply_layer_inplace(psi0.basis(), traj.raw(), circuit.layers[l],
                        circuit.two_qubit);
    traj.advance(mode.device ? H_res : idle_zero, tau, model, cfg);
    if (compensate) traj.raw().array() *= phases.array();
  };

  // Shared no-jump branch: threshold 0 never triggers a jump.
  std::vector<StateVector> branch_pre;
  std::vector<double> branch_norm2;
  std::vector<double> branch_fid;
  if (options.share_no_jump_prefix) {
    Trajectory branch(psi0, RngStream(0));
    branch.reset(psi0, 0.0, 0);
    for (std::size_t l = 0; l < depth; ++l) {
      // Gates are applied inside run_layer; keep the pre-gate state.
      branch_pre.push_back(branch.unnormalized());
      run_layer(branch, l);
      branch_norm2.push_back(branch.unnormalized().amplitudes().squaredNorm());
      branch_fid.push_back(fidelity(ideal[l], branch.normalized()));
    }
  }

  std::vector<std::vector<double>> rows(cfg.n_traj, std::vector<double>(depth));
  for (int j = 0; j < cfg.n_traj; ++j) {
    Trajectory traj(psi0, RngStream(cfg.seed, static_cast<std::uint64_t>(j)));
    std::size_t start = 0;
    if (options.share_no_jump_prefix) {
      const double u = traj.threshold();
      while (start < depth && branch_norm2[start] > u) {
        rows[j][start] = branch_fid[start];
        ++start;
      }
      if (start == depth) continue;
      traj.reset(branch_pre[start], u, 0);
    }
    for (std::size_t l = start; l < depth; ++l) {
      run_layer(traj, l);
      rows[j][l] = fidelity(ideal[l], traj.normalized());
    }
  }
  return rows;
}

std::vector<FidelityPoint> xeb_fidelity_curve(
    const CircuitSpec& circuit, const StateVector& psi0,
    const SparseHamiltonian& H_res, ExecutionMode mode,
    const std::optional<NoiseParams>& noise, const CurveOptions& options) {
  std::vector<FidelityPoint> curve;
  if (!noise) {
    const auto ideal = run_ideal(circuit, psi0);
    const auto dev = run_device(circuit, psi0, H_res, mode,
                                options.trajectories.propagator);
    for (std::size_t l = 0; l < ideal.size(); ++l) {
      curve.push_back({static_cast<int>(l + 1), fidelity(ideal[l], dev[l]), 0.0});
    }
    return curve;
  }
  const auto rows =
      xeb_trajectory_fidelities(circuit, psi0, H_res, mode, *noise, options);
  const std::size_t depth = circuit.layers.size();
  std::vector<double> column(rows.size());
  for (std::size_t l = 0; l < depth; ++l) {
    for (std::size_t j = 0; j < rows.size(); ++j) column[j] = rows[j][l];
    const auto ms = mean_and_stderr(column);
    curve.push_back({static_cast<int>(l + 1), ms.mean, ms.stderr_});
  }
  return curve;
}

std::string serialize_layers(const CircuitSpec& circuit) {
  std::ostringstream out;
  for (const Layer& layer : circuit.layers) {
    out << 'S';
    for (std::size_t q = 0; q < layer.single_gates.size(); ++q) {
      out << ' ' << q << ':' << gate_letter(layer.single_gates[q].tag);
    }
    out << "; T";
    for (const Edge& e : layer.pairs) out << " (" << e.i << ',' << e.j << ')';
    out << '\n';
  }
  return out.str();
}

std::vector<Layer> parse_layers(const std::string& text) {
  std::vector<Layer> layers;
  std::istringstream lines(text);
  std::string line;
  while (std::getline(lines, line)) {
    if (line.empty()) continue;
    const auto semi = line.find(';');
    if (line.rfind("S", 0) != 0 || semi == std::string::npos) {
      throw std::invalid_argument("malformed circuit line: " + line);
    }
    Layer layer;
    std::istringstream singles(line.substr(1, semi - 1));
    std::string tok;
    while (singles >> tok) {
      const auto colon = tok.find(':');
      if (colon == std::string::npos || colon + 2 != tok.size()) {
        throw std::invalid_argument("malformed gate token: " + tok);
      }
      const int q = std::stoi(tok.substr(0, colon));
      if (q != static_cast<int>(layer.single_gates.size())) {
        throw std::invalid_argument("gate tokens must list qubits in order");
      }
      layer.single_gates.push_back(GateKind::single(gate_from_letter(tok[colon + 1])));
    }
    std::istringstream pairs(line.substr(semi + 1));
    if (!(pairs >> tok) || tok != "T") {
      throw std::invalid_argument("missing two-qubit section: " + line);
    }
    while (pairs >> tok) {
      int i = 0, j = 0;
      char c1 = 0, c2 = 0, c3 = 0;
      std::istringstream p(tok);
      if (!(p >> c1 >> i >> c2 >> j >> c3) || c1 != '(' || c2 != ',' || c3 != ')') {
        throw std::invalid_argument("malformed pair token: " + tok);
      }
      layer.pairs.push_back({i, j, EdgeKind::NN});
    }
    layers.push_back(std::move(layer));
  }
  return layers;
}

}  // namespace mblcalib
