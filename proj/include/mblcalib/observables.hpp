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

#include <span>
#include <vector>

#include "mblcalib/lattice.hpp"
#include "mblcalib/model.hpp"
#include "mblcalib/state.hpp"

namespace mblcalib {

/// Subsystem A of a pure-state bipartition.
class Bipartition {
 public:
  /// Throws unless `sites` is a nonempty proper subset of 0..n_sites-1.
  Bipartition(std::vector<int> sites, int n_sites);

  /// Contiguous first half for chains, left half of the columns for grids.
  static Bipartition half_system(const LatticeSpec& spec);

  const std::vector<int>& sites() const { return sites_; }
  int n_sites() const { return n_sites_; }
  std::vector<int> complement() const;

 private:
  std::vector<int> sites_;
  int n_sites_;
};

struct SpectralStats {
  double mean_gap_ratio = 0.0;
  int level_count = 0;
  /// Ratios that involved a zero gap and were counted as 0.
  int degenerate_count = 0;
};

/// |<a|b>|^2.
double fidelity(const StateVector& a, const StateVector& b);

/// sum_n |c_n|^4 in the Fock basis.
double ipr(const StateVector& psi);

/// Second Renyi entropy -log2 Tr rho_A^2 in bits. Number-sector states are
/// mapped into the product space by their occupation strings; the reduced
/// matrix is formed on the smaller side of the cut only.
double renyi2(const StateVector& psi, const Bipartition& part);

/// Mean adjacent-gap ratio over the middle half of a spectrum. Dense
/// diagonalization; dimension <= 20000.
SpectralStats gap_ratio(const SparseHamiltonian& H);

/// Gap-ratio statistic for a list of levels (sorted internally).
SpectralStats gap_ratio_from_levels(std::vector<double> levels);

/// Mean and standard error of the mean, with pairwise summation so the
/// result does not depend on accumulation order beyond rounding.
struct MeanStderr {
  double mean = 0.0;
  double stderr_ = 0.0;
};
MeanStderr mean_and_stderr(std::span<const double> samples);

}  // namespace mblcalib
