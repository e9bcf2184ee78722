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

#include "mblcalib/lattice.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace mblcalib {

LatticeSpec LatticeSpec::chain(int n_sites) {
  if (n_sites < 2) {
    throw std::invalid_argument("chain needs at least 2 sites, got " +
                                std::to_string(n_sites));
  }
  return LatticeSpec(LatticeKind::Chain, 1, n_sites);
}

LatticeSpec LatticeSpec::grid(int rows, int cols) {
  if (rows < 2 || cols < 2) {
    throw std::invalid_argument("grid dimensions must both be >= 2");
  }
  return LatticeSpec(LatticeKind::Grid, rows, cols);
}

std::vector<Edge> LatticeSpec::edges(EdgeKind kind) const {
  std::vector<Edge> out;
  auto add = [&](int a, int b) {
    out.push_back({std::min(a, b), std::max(a, b), kind});
  };
  for (int r = 0; r < rows_; ++r) {
    for (int c = 0; c < cols_; ++c) {
      const int s = site_index(r, c);
      if (kind == EdgeKind::NN) {
        if (c + 1 < cols_) add(s, site_index(r, c + 1));
        if (r + 1 < rows_) add(s, site_index(r + 1, c));
      } else if (kind_ == LatticeKind::Chain) {
        if (c + 2 < cols_) add(s, site_index(r, c + 2));
      } else if (r + 1 < rows_) {
        if (c + 1 < cols_) add(s, site_index(r + 1, c + 1));
        if (c >= 1) add(s, site_index(r + 1, c - 1));
      }
    }
  }
  std::sort(out.begin(), out.end(), [](const Edge& a, const Edge& b) {
    return std::pair(a.i, a.j) < std::pair(b.i, b.j);
  });
  return out;
}

std::vector<Edge> LatticeSpec::edges(EdgeSet set) const {
  std::vector<Edge> out;
  if (set.nn) out = edges(EdgeKind::NN);
  if (set.nnn) {
    auto extra = edges(EdgeKind::NNN);
    out.insert(out.end(), extra.begin(), extra.end());
  }
  return out;
}

std::pair<int, int> LatticeSpec::site_coords(int site) const {
  if (site < 0 || site >= n_sites()) {
    throw std::out_of_range("site index " + std::to_string(site) +
                            " out of range");
  }
  return {site / cols_, site % cols_};
}

}  // namespace mblcalib
