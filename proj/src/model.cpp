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

#include "mblcalib/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <string>

namespace mblcalib {

void ModelParams::validate() const {
  if (!(r > 0.0) || !std::isfinite(r)) {
    throw std::invalid_argument("ratio r must be positive");
  }
  if (!std::isfinite(h) || h < 0.0) {
    throw std::invalid_argument("coupling h must be finite and >= 0");
  }
  if (local_dim < 2) throw std::invalid_argument("local_dim must be >= 2");
}

SitePotential quasiperiodic_potential_1d(double W, double alpha, double phi,
                                         int n_sites) {
  if (n_sites < 1) throw std::invalid_argument("n_sites must be >= 1");
  SitePotential pot;
  pot.values.resize(n_sites);
  for (int i = 0; i < n_sites; ++i) {
    pot.values[i] = W * std::cos(2.0 * std::numbers::pi * alpha * i + phi);
  }
  return pot;
}

SitePotential quasiperiodic_potential_2d(double W, double alpha_x,
                                         double alpha_y,
                                         const LatticeSpec& spec) {
  if (spec.kind() != LatticeKind::Grid) {
    throw std::invalid_argument("2D potential requires a grid lattice");
  }
  SitePotential pot;
  pot.values.resize(spec.n_sites());
  for (int i = 0; i < spec.n_sites(); ++i) {
    const auto [x, y] = spec.site_coords(i);
    pot.values[i] = W * (std::cos(2.0 * std::numbers::pi * alpha_x * x) +
                         std::cos(2.0 * std::numbers::pi * alpha_y * y));
  }
  return pot;
}

SitePotential potential_for(const ModelParams& params,
                            const LatticeSpec& spec) {
  if (spec.kind() == LatticeKind::Chain) {
    return quasiperiodic_potential_1d(params.W(), params.alpha, params.phi,
                                      spec.n_sites());
  }
  return quasiperiodic_potential_2d(params.W(), params.alpha_x, params.alpha_y,
                                    spec);
}

// ---------------------------------------------------------------------------
// FockBasis

FockBasis::FockBasis(int n_sites, int local_dim, Sector sector)
    : n_sites_(n_sites), local_dim_(local_dim), sector_(sector) {}

std::shared_ptr<const FockBasis> FockBasis::enumerate(int n_sites,
                                                      int local_dim,
                                                      Sector sector) {
  if (n_sites < 1) throw std::invalid_argument("n_sites must be >= 1");
  if (local_dim < 2) throw std::invalid_argument("local_dim must be >= 2");
  if (!sector.is_full() &&
      (sector.n_excitations() < 0 ||
       sector.n_excitations() > n_sites * (local_dim - 1))) {
    throw std::invalid_argument("excitation number " +
                                std::to_string(sector.n_excitations()) +
                                " outside [0, n_sites*(local_dim-1)]");
  }
  const double bits = n_sites * std::log2(static_cast<double>(local_dim));
  if (bits > 62.0) throw std::invalid_argument("Fock space too large to index");

  std::shared_ptr<FockBasis> basis(new FockBasis(n_sites, local_dim, sector));
  basis->place_.assign(n_sites, 1);
  for (int s = n_sites - 2; s >= 0; --s) {
    basis->place_[s] = basis->place_[s + 1] * local_dim;
  }
  const std::uint64_t full_dim = basis->place_[0] * local_dim;

  if (sector.is_full()) {
    basis->dimension_ = full_dim;
    return basis;
  }

  // Depth-first over sites, digits ascending: emits codes in lexicographic
  // order directly.
  const int target = sector.n_excitations();
  const int max_per_site = local_dim - 1;
  auto& codes = basis->codes_;
  auto recurse = [&](auto&& self, int site, int remaining,
                     std::uint64_t code) -> void {
    if (site == n_sites) {
      if (remaining == 0) codes.push_back(code);
      return;
    }
    const int sites_left = n_sites - site - 1;
    for (int v = 0; v <= std::min(max_per_site, remaining); ++v) {
      if (remaining - v > sites_left * max_per_site) continue;
      self(self, site + 1, remaining - v, code + v * basis->place_[site]);
    }
  };
  recurse(recurse, 0, target, 0);
  basis->dimension_ = codes.size();
  return basis;
}

std::vector<int> FockBasis::unrank(std::size_t k) const {
  std::vector<int> occ(n_sites_);
  unrank_into(k, occ);
  return occ;
}

void FockBasis::unrank_into(std::size_t k, std::span<int> occ) const {
  if (k >= dimension_) throw std::out_of_range("basis index out of range");
  std::uint64_t c = code(k);
  for (int s = n_sites_ - 1; s >= 0; --s) {
    occ[s] = static_cast<int>(c % local_dim_);
    c /= local_dim_;
  }
}

std::optional<std::size_t> FockBasis::rank_code(std::uint64_t c) const {
  if (sector_.is_full()) {
    if (c >= dimension_) return std::nullopt;
    return static_cast<std::size_t>(c);
  }
  const auto it = std::lower_bound(codes_.begin(), codes_.end(), c);
  if (it == codes_.end() || *it != c) return std::nullopt;
  return static_cast<std::size_t>(it - codes_.begin());
}

std::optional<std::size_t> FockBasis::rank(std::span<const int> occ) const {
  if (static_cast<int>(occ.size()) != n_sites_) return std::nullopt;
  std::uint64_t c = 0;
  for (int s = 0; s < n_sites_; ++s) {
    if (occ[s] < 0 || occ[s] >= local_dim_) return std::nullopt;
    c = c * local_dim_ + occ[s];
  }
  return rank_code(c);
}

Eigen::VectorXd number_diagonal(const FockBasis& basis) {
  Eigen::VectorXd n(static_cast<Eigen::Index>(basis.dimension()));
  std::vector<int> occ(basis.n_sites());
  for (std::size_t k = 0; k < basis.dimension(); ++k) {
    basis.unrank_into(k, occ);
    int total = 0;
    for (int v : occ) total += v;
    n[static_cast<Eigen::Index>(k)] = total;
  }
  return n;
}

// ---------------------------------------------------------------------------
// SparseHamiltonian

SparseHamiltonian::SparseHamiltonian(std::shared_ptr<const FockBasis> basis,
                                     std::vector<std::int64_t> row_offsets,
                                     std::vector<std::int32_t> columns,
                                     std::vector<double> values)
    : basis_(std::move(basis)),
      row_offsets_(std::move(row_offsets)),
      columns_(std::move(columns)),
      values_(std::move(values)) {
  if (!basis_ || row_offsets_.size() != basis_->dimension() + 1 ||
      columns_.size() != values_.size() ||
      static_cast<std::size_t>(row_offsets_.back()) != values_.size()) {
    throw std::invalid_argument("inconsistent CSR arrays");
  }
}

void SparseHamiltonian::apply(const Eigen::VectorXcd& in,
                              Eigen::VectorXcd& out) const {
  if (in.size() != dimension()) {
    throw std::invalid_argument("matvec size mismatch");
  }
  out.resize(dimension());
  apply(in.data(), out.data());
}

void SparseHamiltonian::apply(const cplx* x, cplx* y) const {
  const Eigen::Index n = dimension();
  const std::int64_t* rp = row_offsets_.data();
  const std::int32_t* ci = columns_.data();
  const double* v = values_.data();
  for (Eigen::Index row = 0; row < n; ++row) {
    double re = 0.0;
    double im = 0.0;
    for (std::int64_t p = rp[row]; p < rp[row + 1]; ++p) {
      const cplx xv = x[ci[p]];
      re += v[p] * xv.real();
      im += v[p] * xv.imag();
    }
    y[row] = cplx(re, im);
  }
}

Eigen::VectorXd SparseHamiltonian::diagonal() const {
  Eigen::VectorXd d = Eigen::VectorXd::Zero(dimension());
  for (Eigen::Index row = 0; row < dimension(); ++row) {
    for (auto p = row_offsets_[row]; p < row_offsets_[row + 1]; ++p) {
      if (columns_[p] == row) d[row] += values_[p];
    }
  }
  return d;
}

bool SparseHamiltonian::has_offdiagonal() const {
  for (Eigen::Index row = 0; row < dimension(); ++row) {
    for (auto p = row_offsets_[row]; p < row_offsets_[row + 1]; ++p) {
      if (columns_[p] != row && values_[p] != 0.0) return true;
    }
  }
  return false;
}

double SparseHamiltonian::hermiticity_defect() const {
  auto lookup = [&](Eigen::Index row, std::int32_t col) {
    const auto* first = columns_.data() + row_offsets_[row];
    const auto* last = columns_.data() + row_offsets_[row + 1];
    const auto* it = std::lower_bound(first, last, col);
    return (it != last && *it == col) ? values_[it - columns_.data()] : 0.0;
  };
  double worst = 0.0;
  for (Eigen::Index row = 0; row < dimension(); ++row) {
    for (auto p = row_offsets_[row]; p < row_offsets_[row + 1]; ++p) {
      worst = std::max(worst,
                       std::abs(values_[p] - lookup(columns_[p], row)));
    }
  }
  return worst;
}

Eigen::MatrixXd SparseHamiltonian::to_dense() const {
  if (dimension() > 20000) {
    throw std::length_error("refusing to densify a matrix above 20000 rows");
  }
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(dimension(), dimension());
  for (Eigen::Index row = 0; row < dimension(); ++row) {
    for (auto p = row_offsets_[row]; p < row_offsets_[row + 1]; ++p) {
      m(row, columns_[p]) += values_[p];
    }
  }
  return m;
}

void SparseHamiltonian::write_triplets(std::ostream& out) const {
  const auto prec = out.precision(17);
  out << dimension() << ' ' << dimension() << ' ' << nonzeros() << '\n';
  for (Eigen::Index row = 0; row < dimension(); ++row) {
    for (auto p = row_offsets_[row]; p < row_offsets_[row + 1]; ++p) {
      out << row << ' ' << columns_[p] << ' ' << values_[p] << '\n';
    }
  }
  out.precision(prec);
}

SparseHamiltonian build_hamiltonian(const ModelParams& params,
                                    const LatticeSpec& spec,
                                    const SitePotential& pot,
                                    std::shared_ptr<const FockBasis> basis,
                                    EdgeSet edge_set) {
  params.validate();
  if (!basis) throw std::invalid_argument("null basis");
  const int n = spec.n_sites();
  if (static_cast<int>(pot.values.size()) != n) {
    throw std::invalid_argument("potential length does not match lattice");
  }
  if (basis->n_sites() != n || basis->local_dim() != params.local_dim) {
    throw std::invalid_argument("basis does not match lattice/local_dim");
  }
  if (basis->dimension() >
      static_cast<std::size_t>(std::numeric_limits<std::int32_t>::max())) {
    throw std::length_error("basis too large for 32-bit column indices");
  }

  const auto edges = spec.edges(edge_set);
  const int d = basis->local_dim();
  const double half_v = 0.5 * params.anharmonicity;
  const std::size_t dim = basis->dimension();

  std::vector<std::int64_t> offsets;
  std::vector<std::int32_t> cols;
  std::vector<double> vals;
  offsets.reserve(dim + 1);
  cols.reserve(dim * (1 + edges.size() / 2));
  vals.reserve(cols.capacity());
  offsets.push_back(0);

  std::vector<int> occ(n);
  std::vector<std::pair<std::int32_t, double>> row;
  for (std::size_t k = 0; k < dim; ++k) {
    basis->unrank_into(k, occ);
    const std::uint64_t code = basis->code(k);
    row.clear();

    double diag = 0.0;
    for (int s = 0; s < n; ++s) {
      diag += pot.values[s] * occ[s] + half_v * occ[s] * (occ[s] - 1);
    }
    row.emplace_back(static_cast<std::int32_t>(k), diag);

    if (params.h != 0.0) {
      for (const Edge& e : edges) {
        // Both hopping directions along the edge: one boson src -> dst.
        for (const auto& [src, dst] : {std::pair(e.i, e.j), std::pair(e.j, e.i)}) {
          if (occ[src] == 0 || occ[dst] + 1 >= d) continue;
          const std::uint64_t target =
              code - basis->place_value(src) + basis->place_value(dst);
          const auto col = basis->rank_code(target);
          if (!col) continue;
          const double amp =
              params.h * std::sqrt(static_cast<double>(occ[src]) * (occ[dst] + 1));
          row.emplace_back(static_cast<std::int32_t>(*col), amp);
        }
      }
    }

    std::sort(row.begin(), row.end());
    for (std::size_t p = 0; p < row.size(); ++p) {
      if (!cols.empty() && static_cast<std::int64_t>(cols.size()) > offsets.back() &&
          cols.back() == row[p].first) {
        vals.back() += row[p].second;
      } else {
        cols.push_back(row[p].first);
        vals.push_back(row[p].second);
      }
    }
    offsets.push_back(static_cast<std::int64_t>(cols.size()));
  }
  return SparseHamiltonian(std::move(basis), std::move(offsets),
                           std::move(cols), std::move(vals));
}

StateVector neel_state(std::shared_ptr<const FockBasis> basis) {
  std::vector<int> occ(basis->n_sites());
  for (int s = 0; s < basis->n_sites(); ++s) occ[s] = s % 2;
  const auto k = basis->rank(occ);
  if (!k) {
    throw std::invalid_argument(
        "alternating occupation string is not in this basis sector");
  }
  return StateVector::basis_state(std::move(basis),
                                  static_cast<Eigen::Index>(*k));
}

}  // namespace mblcalib
