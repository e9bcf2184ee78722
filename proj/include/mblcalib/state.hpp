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

#include <complex>
#include <memory>

#include <Eigen/Dense>

namespace mblcalib {

class FockBasis;

using cplx = std::complex<double>;

/// Complex amplitudes over a Fock basis. The basis is shared and immutable,
/// so copies of a state are cheap to tie back to the space they live in.
class StateVector {
 public:
  StateVector() = default;
  StateVector(std::shared_ptr<const FockBasis> basis, Eigen::VectorXcd amps);

  /// Zero vector over a basis.
  static StateVector zeros(std::shared_ptr<const FockBasis> basis);
  /// Unit vector on basis index k.
  static StateVector basis_state(std::shared_ptr<const FockBasis> basis,
                                 Eigen::Index k);

  const FockBasis& basis() const { return *basis_; }
  const std::shared_ptr<const FockBasis>& basis_ptr() const { return basis_; }
  Eigen::Index dimension() const { return amps_.size(); }

  const Eigen::VectorXcd& amplitudes() const { return amps_; }
  Eigen::VectorXcd& amplitudes() { return amps_; }
  cplx operator[](Eigen::Index k) const { return amps_[k]; }

  double norm() const { return amps_.norm(); }
  void normalize();

  /// True when both states refer to the same (structurally equal) basis.
  bool same_space(const StateVector& other) const;

 private:
  std::shared_ptr<const FockBasis> basis_;
  Eigen::VectorXcd amps_;
};

}  // namespace mblcalib
