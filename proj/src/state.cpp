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

#include "mblcalib/state.hpp"

#include <stdexcept>

#include "mblcalib/model.hpp"

namespace mblcalib {

StateVector::StateVector(std::shared_ptr<const FockBasis> basis,
                         Eigen::VectorXcd amps)
    : basis_(std::move(basis)), amps_(std::move(amps)) {
  if (!basis_) throw std::invalid_argument("state needs a basis");
  if (static_cast<std::size_t>(amps_.size()) != basis_->dimension()) {
    throw std::invalid_argument("amplitude count does not match basis");
  }
}

StateVector StateVector::zeros(std::shared_ptr<const FockBasis> basis) {
  const auto dim = static_cast<Eigen::Index>(basis->dimension());
  return StateVector(std::move(basis), Eigen::VectorXcd::Zero(dim));
}

StateVector StateVector::basis_state(std::shared_ptr<const FockBasis> basis,
                                     Eigen::Index k) {
  auto s = zeros(std::move(basis));
  if (k < 0 || k >= s.dimension()) {
    throw std::out_of_range("basis index out of range");
  }
  s.amps_[k] = 1.0;
  return s;
}

void StateVector::normalize() {
  const double n = amps_.norm();
  if (!(n > 0.0)) throw std::domain_error("cannot normalize a zero state");
  amps_ /= n;
}

bool StateVector::same_space(const StateVector& other) const {
  return basis_ && other.basis_ &&
         (basis_ == other.basis_ || *basis_ == *other.basis_);
}

}  // namespace mblcalib
