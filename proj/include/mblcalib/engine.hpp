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

#include <Eigen/Dense>

#include "mblcalib/model.hpp"
#include "mblcalib/state.hpp"

namespace mblcalib {

/// Krylov propagator settings. Time in microseconds, H in MHz.
struct PropagatorConfig {
  int krylov_dim = 30;
  /// Global error budget for one call; each substep may spend a share
  /// proportional to its length.
  double step_tolerance = 1e-10;
  int max_substeps = 4096;

  void validate() const;
};

struct PropagatorStats {
  int substeps = 0;
  long matvecs = 0;
};

Eigen::VectorXcd apply_h(const SparseHamiltonian& H, const StateVector& psi);

/// exp(-i 2 pi H t) psi0 by Lanczos with full reorthogonalization and
/// adaptive substeps. The result is renormalized when its norm drifted by
/// less than 1e-8; larger drift raises NumericalError.
StateVector evolve(const SparseHamiltonian& H, const StateVector& psi0,
                   double t_us, const PropagatorConfig& cfg = {},
                   PropagatorStats* stats = nullptr);

/// Same propagation on a raw (possibly unnormalized) vector, no norm check.
Eigen::VectorXcd propagate(const SparseHamiltonian& H, const Eigen::VectorXcd& v,
                           double t_us, const PropagatorConfig& cfg = {},
                           PropagatorStats* stats = nullptr);

/// exp(-i 2 pi H t - Gamma t) v for a diagonal decay operator Gamma (1/us),
/// i.e. the non-Hermitian H_eff = H - i Gamma / (2 pi). Arnoldi recurrence.
Eigen::VectorXcd propagate_damped(const SparseHamiltonian& H,
                                  const Eigen::VectorXd& decay,
                                  const Eigen::VectorXcd& v, double t_us,
                                  const PropagatorConfig& cfg = {},
                                  PropagatorStats* stats = nullptr);

/// Reference propagation by full eigendecomposition. Dimension <= 4096.
StateVector evolve_dense_oracle(const SparseHamiltonian& H,
                                const StateVector& psi0, double t_us);

/// Reference for propagate_damped via a dense matrix exponential.
Eigen::VectorXcd propagate_damped_dense_oracle(const SparseHamiltonian& H,
                                               const Eigen::VectorXd& decay,
                                               const Eigen::VectorXcd& v,
                                               double t_us);

}  // namespace mblcalib
