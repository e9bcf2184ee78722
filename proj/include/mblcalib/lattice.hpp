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

#include <cstddef>
#include <utility>
#include <vector>

namespace mblcalib {

enum class LatticeKind { Chain, Grid };
enum class EdgeKind { NN, NNN };

struct Edge {
  int i = 0;
  int j = 0;
  EdgeKind kind = EdgeKind::NN;

  friend bool operator==(const Edge&, const Edge&) = default;
};

/// Which residual-coupling edge families enter a Hamiltonian.
struct EdgeSet {
  bool nn = true;
  bool nnn = false;
};

/// Qubit connectivity: an open chain or an open rectangular grid.
/// Sites are numbered 0..n_sites-1 in row-major order; a chain is a single row.
class LatticeSpec {
 public:
  static LatticeSpec chain(int n_sites);
  static LatticeSpec grid(int rows, int cols);

  LatticeKind kind() const { return kind_; }
  int rows() const { return rows_; }
  int cols() const { return cols_; }
  int n_sites() const { return rows_ * cols_; }

  /// Edges of one family, sorted by (i, j) with i < j.
  /// Chain NNN edges join sites two apart; grid NNN edges are the diagonals.
  std::vector<Edge> edges(EdgeKind kind) const;
  std::vector<Edge> edges(EdgeSet set) const;

  /// (row, column) of a site.
  std::pair<int, int> site_coords(int site) const;
  int site_index(int row, int col) const { return row * cols_ + col; }

  /// Size of a maximum matching over NN edges.
  int max_nn_matching() const { return n_sites() / 2; }

  friend bool operator==(const LatticeSpec&, const LatticeSpec&) = default;

 private:
  LatticeSpec(LatticeKind kind, int rows, int cols)
      : kind_(kind), rows_(rows), cols_(cols) {}

  LatticeKind kind_;
  int rows_;
  int cols_;
};

}  // namespace mblcalib
