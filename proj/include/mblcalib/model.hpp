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

#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "mblcalib/lattice.hpp"
#include "mblcalib/state.hpp"

namespace mblcalib {

inline const double kGoldenAlpha = (std::sqrt(5.0) - 1.0) / 2.0;
inline const double kSilverAlpha7 = (std::sqrt(7.0) - 1.0) / 2.0;

/// Bose-Hubbard parameters. Frequencies in MHz unless noted.
struct ModelParams {
  double w_base_ghz = 4.889;
  double h = 5.0;
  double r = 0.03;
  double anharmonicity = -200.0;
  int local_dim = 2;
  double alpha = kGoldenAlpha;
  double alpha_x = kGoldenAlpha;
  double alpha_y = kSilverAlpha7;
  double phi = 0.0;

  /// Quasiperiodic amplitude W = h / r.
  double W() const { return h / r; }
  void validate() const;
};

struct SitePotential {
  std::vector<double> values;
};

/// W cos(2 pi alpha i + phi), i = 0..n_sites-1.
SitePotential quasiperiodic_potential_1d(double W, double alpha, double phi,
                                         int n_sites);
/// W (cos(2 pi alpha_x x_i) + cos(2 pi alpha_y y_i)) with (x_i, y_i) the
/// row/column of site i. Grids only.
SitePotential quasiperiodic_potential_2d(double W, double alpha_x,
                                         double alpha_y,
                                         const LatticeSpec& spec);
/// Picks the 1D or 2D form from the lattice kind.
SitePotential potential_for(const ModelParams& params, const LatticeSpec& spec);

class Sector {
 public:
  static Sector fixed(int n_excitations) { return Sector(n_excitations); }
  static Sector full() { return Sector(-1); }

  bool is_full() const { return n_ < 0; }
  int n_excitations() const { return n_; }

  friend bool operator==(const Sector&, const Sector&) = default;

 private:
  explicit Sector(int n) : n_(n) {}
  int n_;
};

/// Occupation-number basis over n_sites bosonic modes truncated at
/// local_dim levels. States are ordered lexicographically by occupation
/// string with site 0 most significant, so in the full space the basis
/// index is the base-local_dim number spelled by the string.
class FockBasis {
 public:
  static std::shared_ptr<const FockBasis> enumerate(int n_sites, int local_dim,
                                                    Sector sector);

  int n_sites() const { return n_sites_; }
  int local_dim() const { return local_dim_; }
  Sector sector() const { return sector_; }
  std::size_t dimension() const { return dimension_; }

  /// Packed base-local_dim code of basis state k.
  std::uint64_t code(std::size_t k) const {
    return sector_.is_full() ? k : codes_[k];
  }
  /// Weight of site s in the packed code (local_dim^(n_sites-1-s)).
  std::uint64_t place_value(int s) const { return place_[s]; }
  int occupation(std::size_t k, int site) const {
    return static_cast<int>((code(k) / place_[site]) % local_dim_);
  }

  std::vector<int> unrank(std::size_t k) const;
  void unrank_into(std::size_t k, std::span<int> occ) const;
  /// Index of an occupation string, or nullopt when it lies outside the
  /// basis (wrong total number, or a digit >= local_dim).
  std::optional<std::size_t> rank(std::span<const int> occ) const;
  std::optional<std::size_t> rank_code(std::uint64_t code) const;

  bool operator==(const FockBasis& other) const {
    return n_sites_ == other.n_sites_ && local_dim_ == other.local_dim_ &&
           sector_ == other.sector_;
  }

 private:
  FockBasis(int n_sites, int local_dim, Sector sector);

  int n_sites_;
  int local_dim_;
  Sector sector_;
  std::size_t dimension_ = 0;
  std::vector<std::uint64_t> place_;
  std::vector<std::uint64_t> codes_;  // sorted; empty for the full space
};

/// Real symmetric operator in compressed sparse row form over a Fock basis.
/// Entries are ordinary frequencies in MHz; propagators apply the 2 pi.
class SparseHamiltonian {
 public:
  SparseHamiltonian(std::shared_ptr<const FockBasis> basis,
                    std::vector<std::int64_t> row_offsets,
                    std::vector<std::int32_t> columns,
                    std::vector<double> values);

  const FockBasis& basis() const { return *basis_; }
  const std::shared_ptr<const FockBasis>& basis_ptr() const { return basis_; }
  Eigen::Index dimension() const {
    return static_cast<Eigen::Index>(row_offsets_.size()) - 1;
  }
  std::size_t nonzeros() const { return values_.size(); }

  std::span<const std::int64_t> row_offsets() const { return row_offsets_; }
  std::span<const std::int32_t> columns() const { return columns_; }
  std::span<const double> values() const { return values_; }

  /// out = H in. Rows are independent, so the result is bit-reproducible.
  void apply(const Eigen::VectorXcd& in, Eigen::VectorXcd& out) const;
  /// Raw form: in and out must each hold dimension() entries and not alias.
  void apply(const cplx* in, cplx* out) const;

  Eigen::VectorXd diagonal() const;
  bool has_offdiagonal() const;
  /// Largest |H_ij - H_ji| over stored entries.
  double hermiticity_defect() const;
  /// Dense copy; intended for small validation problems.
  Eigen::MatrixXd to_dense() const;

  /// "row col value" per nonzero, 0-indexed, preceded by a size line.
  void write_triplets(std::ostream& out) const;

 private:
  std::shared_ptr<const FockBasis> basis_;
  std::vector<std::int64_t> row_offsets_;
  std::vector<std::int32_t> columns_;
  std::vector<double> values_;
};

/// Rotating-frame Bose-Hubbard Hamiltonian over the given basis:
///   sum_i W_i n_i + sum_i (V/2) n_i (n_i - 1) + h sum_<jk> (a_j^+ a_k + h.c.)
/// with the hopping sum over the selected edge families.
SparseHamiltonian build_hamiltonian(const ModelParams& params,
                                    const LatticeSpec& spec,
                                    const SitePotential& pot,
                                    std::shared_ptr<const FockBasis> basis,
                                    EdgeSet edges = {});

/// Product state with site i occupied iff i is odd (|0101...>).
StateVector neel_state(std::shared_ptr<const FockBasis> basis);

/// Total excitation number of every basis state.
Eigen::VectorXd number_diagonal(const FockBasis& basis);

}  // namespace mblcalib
