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

#include <cmath>
#include <random>
#include <set>
#include <stdexcept>

#include <gtest/gtest.h>

#include "mblcalib/observables.hpp"

namespace mblcalib {
namespace {

StateVector random_state(std::shared_ptr<const FockBasis> basis,
                         std::mt19937_64& gen) {
  std::normal_distribution<double> g;
  Eigen::VectorXcd v(static_cast<Eigen::Index>(basis->dimension()));
  for (auto& x : v) x = cplx(g(gen), g(gen));
  StateVector psi(std::move(basis), v);
  psi.normalize();
  return psi;
}

int bit(Eigen::Index k, int site, int n) { return int((k >> (n - 1 - site)) & 1); }

// Dense 2^n x 2^n operator for a gate acting on `sites`, built entry by
// entry from the small matrix (qubit site 0 is the most significant bit).
Eigen::MatrixXcd dense_gate(const Eigen::MatrixXcd& u, std::vector<int> sites, int n) {
  const Eigen::Index dim = Eigen::Index(1) << n;
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(dim, dim);
  for (Eigen::Index row = 0; row < dim; ++row) {
    for (Eigen::Index col = 0; col < dim; ++col) {
      bool rest_equal = true;
      for (int s = 0; s < n; ++s) {
        if (std::find(sites.begin(), sites.end(), s) == sites.end() &&
            bit(row, s, n) != bit(col, s, n)) {
          rest_equal = false;
        }
      }
      if (!rest_equal) continue;
      int r = 0, c = 0;
      for (int s : sites) {
        r = 2 * r + bit(row, s, n);
        c = 2 * c + bit(col, s, n);
      }
      out(row, col) = u(r, c);
    }
  }
  return out;
}

std::shared_ptr<const FockBasis> qubits(int n) {
  return FockBasis::enumerate(n, 2, Sector::full());
}

TEST(Sampling, StructureOfLayers) {
  const auto spec = LatticeSpec::chain(16);
  const auto c = sample_xeb_circuit(spec, 20, 7);
  ASSERT_EQ(c.layers.size(), 20u);
  const auto nn = spec.edges(EdgeKind::NN);
  std::set<GateTag> seen;
  for (const auto& layer : c.layers) {
    ASSERT_EQ(layer.single_gates.size(), 16u);
    ASSERT_EQ(layer.pairs.size(), 4u);
    std::set<int> used;
    for (const Edge& e : layer.pairs) {
      EXPECT_TRUE(std::find(nn.begin(), nn.end(), e) != nn.end());
      EXPECT_TRUE(used.insert(e.i).second);
      EXPECT_TRUE(used.insert(e.j).second);
    }
    for (const auto& g : layer.single_gates) {
      EXPECT_FALSE(g.is_two_qubit());
      seen.insert(g.tag);
    }
  }
  EXPECT_EQ(seen.size(), 4u);
  EXPECT_EQ(c.seed, 7u);
}

TEST(Sampling, DeterministicPerSeed) {
  const auto spec = LatticeSpec::grid(4, 4);
  EXPECT_EQ(sample_xeb_circuit(spec, 20, 3), sample_xeb_circuit(spec, 20, 3));
  EXPECT_FALSE(sample_xeb_circuit(spec, 20, 3) == sample_xeb_circuit(spec, 20, 4));
  // Prefixes agree: each layer draws from its own stream.
  const auto short_c = sample_xeb_circuit(spec, 5, 3);
  const auto long_c = sample_xeb_circuit(spec, 20, 3);
  for (int l = 0; l < 5; ++l) EXPECT_EQ(short_c.layers[l], long_c.layers[l]);
}

TEST(Sampling, RejectsImpossibleMatching) {
  EXPECT_THROW(sample_xeb_circuit(LatticeSpec::chain(3), 2, 0, 4), std::invalid_argument);
  EXPECT_NO_THROW(sample_xeb_circuit(LatticeSpec::chain(8), 2, 0, 4));
}

TEST(Gates, Unitaries) {
  EXPECT_TRUE(gate_unitary(GateKind::single(GateTag::Identity)).isIdentity());
  const Eigen::MatrixXcd x2 = gate_unitary(GateKind::single(GateTag::XHalf));
  Eigen::Matrix2cd pauli_x;
  pauli_x << 0, 1, 1, 0;
  // X/2 squared is -i X.
  EXPECT_LT((x2 * x2 - cplx(0, -1) * pauli_x).norm(), 1e-15);
  for (GateTag tag : {GateTag::XHalf, GateTag::YHalf, GateTag::WHalf}) {
    const Eigen::MatrixXcd u = gate_unitary(GateKind::single(tag));
    EXPECT_LT((u.adjoint() * u - Eigen::Matrix2cd::Identity()).norm(), 1e-15);
    const Eigen::MatrixXcd u4 = u * u * u * u;
    EXPECT_LT((u4 + Eigen::Matrix2cd::Identity()).norm(), 1e-14);
  }
  const Eigen::MatrixXcd sw = gate_unitary(GateKind::iswap_like());
  Eigen::Vector4cd ket10 = Eigen::Vector4cd::Zero();
  ket10[2] = 1.0;
  const Eigen::Vector4cd out = sw * ket10;
  EXPECT_LT(std::abs(out[1] - cplx(0, -1)), 1e-15);
  EXPECT_LT(std::abs(out[2]), 1e-15);
  EXPECT_LT((sw.adjoint() * sw - Eigen::Matrix4cd::Identity()).norm(), 1e-15);
}

TEST(Gates, WAxisIsDiagonalOfXandY) {
  // W/2 maps |0> onto the equator at azimuth pi/4 - pi/2 = -pi/4.
  const Eigen::MatrixXcd w = gate_unitary(GateKind::single(GateTag::WHalf));
  const cplx a = w(0, 0), b = w(1, 0);
  EXPECT_NEAR(std::norm(a), 0.5, 1e-15);
  EXPECT_NEAR(std::arg(b / a), -std::numbers::pi / 4, 1e-12);
}

TEST(Gates, ApplicationOnStates) {
  const auto b = qubits(3);
  std::mt19937_64 gen(2);
  const auto psi = random_state(b, gen);
  const int q1[1] = {1};
  EXPECT_TRUE(apply_gate(psi, GateKind::single(GateTag::Identity), q1).amplitudes() ==
              psi.amplitudes());
  const auto zero = StateVector::basis_state(b, 0);
  const int q0[1] = {0};
  const auto once = apply_gate(zero, GateKind::single(GateTag::XHalf), q0);
  const auto twice = apply_gate(once, GateKind::single(GateTag::XHalf), q0);
  EXPECT_NEAR(fidelity(twice, StateVector::basis_state(b, 0b100)), 1.0, 1e-14);

  const auto sector = FockBasis::enumerate(3, 2, Sector::fixed(1));
  EXPECT_THROW(apply_gate(StateVector::basis_state(sector, 0),
                          GateKind::single(GateTag::XHalf), q0),
               std::invalid_argument);
  const int bad[1] = {3};
  EXPECT_THROW(apply_gate(psi, GateKind::single(GateTag::XHalf), bad), std::out_of_range);
  const int same[2] = {1, 1};
  EXPECT_THROW(apply_gate(psi, GateKind::iswap_like(), same), std::invalid_argument);
}

TEST(Gates, MatchDenseEmbedding) {
  const int n = 6;
  const auto b = qubits(n);
  std::mt19937_64 gen(5);
  for (GateTag tag : {GateTag::XHalf, GateTag::YHalf, GateTag::WHalf}) {
    for (int s : {0, 3, 5}) {
      const auto psi = random_state(b, gen);
      const int site[1] = {s};
      const auto out = apply_gate(psi, GateKind::single(tag), site);
      const Eigen::VectorXcd ref =
          dense_gate(gate_unitary(GateKind::single(tag)), {s}, n) * psi.amplitudes();
      EXPECT_LT((out.amplitudes() - ref).norm(), 1e-12);
      EXPECT_NEAR(out.norm(), 1.0, 1e-12);
    }
  }
  const GateKind fsim = GateKind::iswap_like(0.7, 0.4);
  for (auto [i, j] : {std::pair(0, 1), std::pair(4, 2), std::pair(1, 5)}) {
    const auto psi = random_state(b, gen);
    const int pair[2] = {i, j};
    const auto out = apply_gate(psi, fsim, pair);
    const Eigen::VectorXcd ref = dense_gate(gate_unitary(fsim), {i, j}, n) * psi.amplitudes();
    EXPECT_LT((out.amplitudes() - ref).norm(), 1e-12);
    EXPECT_NEAR(out.norm(), 1.0, 1e-12);
  }
}

TEST(RunIdeal, IdentityCircuitAndSpread) {
  const auto b = qubits(4);
  CircuitSpec c;
  Layer idle;
  idle.single_gates.assign(4, GateKind::single(GateTag::Identity));
  c.layers.assign(3, idle);
  std::mt19937_64 gen(6);
  const auto psi = random_state(b, gen);
  for (const auto& s : run_ideal(c, psi)) EXPECT_TRUE(s.amplitudes() == psi.amplitudes());

  CircuitSpec spread;
  Layer xs;
  xs.single_gates.assign(4, GateKind::single(GateTag::XHalf));
  spread.layers.push_back(xs);
  const auto out = run_ideal(spread, StateVector::basis_state(b, 0));
  EXPECT_NEAR(ipr(out[0]), 1.0 / 16.0, 1e-14);
}

TEST(RunIdeal, MatchesDenseSimulator) {
  const int n = 4;
  const auto spec = LatticeSpec::chain(n);
  const auto c = sample_xeb_circuit(spec, 8, 13, 2);
  const auto b = qubits(n);
  std::mt19937_64 gen(8);
  const auto psi0 = random_state(b, gen);
  const auto states = run_ideal(c, psi0);
  Eigen::VectorXcd v = psi0.amplitudes();
  for (std::size_t l = 0; l < c.layers.size(); ++l) {
    for (int q = 0; q < n; ++q) {
      v = dense_gate(gate_unitary(c.layers[l].single_gates[q]), {q}, n) * v;
    }
    for (const Edge& e : c.layers[l].pairs) {
      v = dense_gate(gate_unitary(c.two_qubit), {e.i, e.j}, n) * v;
    }
    EXPECT_LT((states[l].amplitudes() - v).norm(), 1e-10) << "layer " << l;
  }
}

TEST(RunDevice, ZeroCouplingCoincidesWithIdeal) {
  ModelParams p;
  p.h = 0.0;
  p.r = 0.03;
  const auto spec = LatticeSpec::chain(8);
  const auto b = qubits(8);
  const auto H = build_hamiltonian(p, spec, potential_for(p, spec), b);
  const auto c = sample_xeb_circuit(spec, 20, 1);
  const auto psi0 = neel_state(b);
  const auto ideal = run_ideal(c, psi0);
  const auto dev = run_device(c, psi0, H, ExecutionMode::device_mode(true));
  for (std::size_t l = 0; l < ideal.size(); ++l) {
    EXPECT_LT((ideal[l].amplitudes() - dev[l].amplitudes()).norm(), 1e-8);
  }
  const auto curve = xeb_fidelity_curve(c, psi0, H, ExecutionMode::device_mode(true),
                                        std::nullopt);
  ASSERT_EQ(curve.size(), 20u);
  for (const auto& pt : curve) EXPECT_NEAR(pt.mean, 1.0, 1e-12);
}

// With every gate the identity and no frame correction, the device run is
// plain idle evolution. The corrected run matches it after one layer only:
// the frame phase does not commute with the hopping.
TEST(RunDevice, IdentityCircuitEqualsIdleEvolution) {
  ModelParams p;
  p.r = 0.3;
  const auto spec = LatticeSpec::chain(8);
  const auto b = qubits(8);
  const auto H = build_hamiltonian(p, spec, potential_for(p, spec), b);
  CircuitSpec c;
  Layer idle;
  idle.single_gates.assign(8, GateKind::single(GateTag::Identity));
  c.layers.assign(10, idle);
  const auto neel = neel_state(b);
  const auto raw = run_device(c, neel, H, ExecutionMode::device_mode(false));
  for (int k = 1; k <= 10; ++k) {
    const auto idle_state = evolve(H, neel, k * c.layer_duration_us);
    EXPECT_LT((raw[k - 1].amplitudes() - idle_state.amplitudes()).norm(), 1e-8);
  }
  const auto framed = run_device(c, neel, H, ExecutionMode::device_mode(true));
  EXPECT_NEAR(fidelity(neel, framed[0]),
              fidelity(neel, evolve(H, neel, c.layer_duration_us)), 1e-10);
}

TEST(RunDevice, UnitaryAndDeterministic) {
  ModelParams p;
  p.r = 0.5;
  const auto spec = LatticeSpec::grid(2, 3);
  const auto b = qubits(6);
  const auto H = build_hamiltonian(p, spec, potential_for(p, spec), b);
  const auto c = sample_xeb_circuit(spec, 12, 4, 3);
  const auto psi0 = neel_state(b);
  for (bool comp : {true, false}) {
    const auto a = run_device(c, psi0, H, ExecutionMode::device_mode(comp));
    const auto again = run_device(c, psi0, H, ExecutionMode::device_mode(comp));
    for (std::size_t l = 0; l < a.size(); ++l) {
      EXPECT_NEAR(a[l].norm(), 1.0, 1e-9);
      EXPECT_TRUE(a[l].amplitudes() == again[l].amplitudes());
    }
  }
  const auto ideal_mode = run_device(c, psi0, H, ExecutionMode::ideal());
  EXPECT_TRUE(ideal_mode.back().amplitudes() == run_ideal(c, psi0).back().amplitudes());
}

// Thermal-phase fidelity decays with depth once the first layers are past.
TEST(RunDevice, ThermalFidelityDecaysWithDepth) {
  ModelParams p;
  p.r = 2.0;
  const auto spec = LatticeSpec::chain(8);
  const auto b = qubits(8);
  const auto H = build_hamiltonian(p, spec, potential_for(p, spec), b);
  const auto psi0 = neel_state(b);
  std::vector<std::vector<double>> curves;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto c = sample_xeb_circuit(spec, 12, seed);
    std::vector<double> f;
    for (const auto& pt : xeb_fidelity_curve(c, psi0, H, ExecutionMode::device_mode(true),
                                             std::nullopt)) {
      f.push_back(pt.mean);
    }
    curves.push_back(f);
  }
  for (int depth = 3; depth + 1 < 12; ++depth) {
    std::vector<double> now, next;
    for (const auto& f : curves) {
      now.push_back(f[depth]);
      next.push_back(f[depth + 1]);
    }
    const auto a = mean_and_stderr(now);
    const auto b2 = mean_and_stderr(next);
    EXPECT_LE(b2.mean, a.mean + 2.0 * std::hypot(a.stderr_, b2.stderr_)) << depth;
  }
}

TEST(Serialization, RoundTripAndFormat) {
  const auto c = sample_xeb_circuit(LatticeSpec::chain(6), 3, 9, 2);
  const std::string text = serialize_layers(c);
  EXPECT_EQ(parse_layers(text), c.layers);
  EXPECT_EQ(text.substr(0, 2), "S ");
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 3);

  const auto layers = parse_layers("S 0:X 1:W 2:I 3:Y; T (0,1) (2,3)\n");
  ASSERT_EQ(layers.size(), 1u);
  EXPECT_EQ(layers[0].single_gates[1].tag, GateTag::WHalf);
  EXPECT_EQ(layers[0].pairs[1].i, 2);
  EXPECT_THROW(parse_layers("S 0:Q; T\n"), std::invalid_argument);
  EXPECT_THROW(parse_layers("S 1:X; T\n"), std::invalid_argument);
  EXPECT_THROW(parse_layers("S 0:X\n"), std::invalid_argument);
  EXPECT_THROW(parse_layers("S 0:X; T (0-1)\n"), std::invalid_argument);
}

}  // namespace
}  // namespace mblcalib
