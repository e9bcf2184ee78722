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

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "mblcalib/engine.hpp"
#include "mblcalib/model.hpp"
#include "mblcalib/observables.hpp"
#include "mblcalib/rng.hpp"

namespace mblcalib {

/// Coherence times in microseconds. Infinite values switch a channel off.
class NoiseParams {
 public:
  /// Rejects t2 > 2 t1 and non-positive times.
  static NoiseParams make(double t1_us, double t2_us);

  double t1() const { return t1_; }
  double t2() const { return t2_; }
  /// Relaxation rate 1/T1 in 1/us.
  double gamma1() const { return 1.0 / t1_; }
  /// Pure dephasing rate 1/T2 - 1/(2 T1).
  double gamma_phi() const;

 private:
  NoiseParams(double t1, double t2) : t1_(t1), t2_(t2) {}
  double t1_;
  double t2_;
};

/// Table of noise strengths: 0 is noiseless, 1 and 2 are fixed (T1, T2).
std::optional<NoiseParams> noise_from_ns(int ns);

enum class JumpKind { Relaxation, Dephasing };

/// L = sqrt(rate) a_site (relaxation) or sqrt(rate) Z_site (dephasing),
/// with Z = 1 - 2 min(n, 1) acting on the lowest two levels.
struct JumpOperator {
  JumpKind kind;
  int site;
  double rate;

  /// out = L in. Full-space bases only.
  void apply(const FockBasis& basis, const Eigen::VectorXcd& in,
             Eigen::VectorXcd& out) const;
  /// <v| L^+ L |v> for an unnormalized v.
  double weight(const FockBasis& basis, const Eigen::VectorXcd& v) const;
  Eigen::MatrixXcd dense(const FockBasis& basis) const;
};

/// Relaxation sqrt(1/T1) a_j and dephasing sqrt(gamma_phi/2) Z_j per site;
/// channels with zero rate are omitted.
std::vector<JumpOperator> jump_operators(const NoiseParams& params,
                                         const FockBasis& basis);

struct TrajectoryConfig {
  int n_traj = 200;
  std::uint64_t seed = 0;
  /// Norm-crossing search step for the Arnoldi route; 0 means t/50.
  double jump_substep = 0.0;
  /// Force the Arnoldi route even when the decay operator commutes with H.
  bool force_arnoldi = false;
  PropagatorConfig propagator;

  void validate() const;
};

/// Jump operators plus the no-jump decay Gamma = (1/2) sum_k L_k^+ L_k,
/// stored as its diagonal (every channel here has a diagonal L^+ L).
class NoiseModel {
 public:
  NoiseModel(const NoiseParams& params, std::shared_ptr<const FockBasis> basis);

  const std::vector<JumpOperator>& operators() const { return ops_; }
  const Eigen::VectorXd& decay() const { return decay_; }
  const FockBasis& basis() const { return *basis_; }
  /// Whether Gamma commutes with H, in which case the no-jump propagator
  /// factorizes into exp(-i 2 pi H t) exp(-Gamma t).
  bool decay_commutes_with(const SparseHamiltonian& H) const;

 private:
  std::shared_ptr<const FockBasis> basis_;
  std::vector<JumpOperator> ops_;
  Eigen::VectorXd decay_;
};

/// One Monte Carlo wavefunction trajectory. The stored vector is left
/// unnormalized between jumps; a jump fires when its squared norm falls to
/// the current uniform threshold.
class Trajectory {
 public:
  Trajectory(StateVector psi0, RngStream rng);

  /// Evolve for t_us under H with the model's jumps.
  void advance(const SparseHamiltonian& H, double t_us, const NoiseModel& noise,
               const TrajectoryConfig& cfg);

  /// Raw vector, for applying unitaries between windows.
  Eigen::VectorXcd& raw() { return psi_.amplitudes(); }
  const StateVector& unnormalized() const { return psi_; }
  StateVector normalized() const;
  int jumps() const { return jumps_; }
  double threshold() const { return threshold_; }
  RngStream& rng() { return rng_; }

  /// Installs an explicit state/threshold pair (used to resume a trajectory
  /// from a shared no-jump branch).
  void reset(StateVector psi, double threshold, int jumps);

 private:
  void jump(const NoiseModel& noise);

  StateVector psi_;
  RngStream rng_;
  double threshold_;
  int jumps_ = 0;
};

/// Time within [0, t_max] at which sum_k p_k exp(-2 g_k s) first reaches
/// `target`, or nullopt if it stays above. p and g are elementwise.
std::optional<double> damped_norm_crossing(const Eigen::VectorXd& populations,
                                           const Eigen::VectorXd& decay,
                                           double target, double t_max);

/// One trajectory from psi0 over t_us, returned normalized. Without noise
/// (no operators) it reduces to engine evolve.
StateVector evolve_trajectory(const SparseHamiltonian& H,
                              const StateVector& psi0, double t_us,
                              const NoiseParams& params, RngStream& rng,
                              const TrajectoryConfig& cfg = {});

/// Mean and standard error of |<ref|psi_k>|^2 over trajectories.
MeanStderr average_fidelity(std::span<const StateVector> trajectories,
                            const StateVector& ref);

}  // namespace mblcalib
