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

#include <set>
#include <stdexcept>

#include <gtest/gtest.h>

namespace mblcalib {
namespace {

std::vector<std::pair<int, int>> pairs_of(const std::vector<Edge>& edges) {
  std::vector<std::pair<int, int>> out;
  for (const Edge& e : edges) out.emplace_back(e.i, e.j);
  return out;
}

TEST(Lattice, ChainEdgeCounts) {
  EXPECT_EQ(LatticeSpec::chain(16).edges(EdgeKind::NN).size(), 15u);
  EXPECT_EQ(LatticeSpec::chain(2).edges(EdgeKind::NN).size(), 1u);
  EXPECT_EQ(LatticeSpec::chain(16).n_sites(), 16);
  EXPECT_THROW(LatticeSpec::chain(1), std::invalid_argument);
}

TEST(Lattice, GridEdgeCounts) {
  const auto g = LatticeSpec::grid(4, 4);
  EXPECT_EQ(g.n_sites(), 16);
  EXPECT_EQ(g.edges(EdgeKind::NN).size(), 24u);
  EXPECT_EQ(g.edges(EdgeKind::NNN).size(), 18u);
  EXPECT_EQ(LatticeSpec::grid(2, 2).edges(EdgeKind::NN).size(), 4u);
  EXPECT_THROW(LatticeSpec::grid(1, 4), std::invalid_argument);
}

TEST(Lattice, ExplicitEdgeLists) {
  using P = std::vector<std::pair<int, int>>;
  const auto c4 = LatticeSpec::chain(4);
  EXPECT_EQ(pairs_of(c4.edges(EdgeKind::NN)), (P{{0, 1}, {1, 2}, {2, 3}}));
  EXPECT_EQ(pairs_of(c4.edges(EdgeKind::NNN)), (P{{0, 2}, {1, 3}}));
  EXPECT_EQ(pairs_of(LatticeSpec::grid(2, 2).edges(EdgeKind::NNN)),
            (P{{0, 3}, {1, 2}}));
  const auto both = c4.edges(EdgeSet{true, true});
  EXPECT_EQ(both.size(), 5u);
  EXPECT_EQ(both.back().kind, EdgeKind::NNN);
}

TEST(Lattice, Coordinates) {
  const auto g = LatticeSpec::grid(4, 4);
  EXPECT_EQ(g.site_coords(0), std::make_pair(0, 0));
  EXPECT_EQ(g.site_coords(5), std::make_pair(1, 1));
  EXPECT_EQ(LatticeSpec::chain(16).site_coords(7), std::make_pair(0, 7));
  EXPECT_THROW(g.site_coords(16), std::out_of_range);
  for (int s = 0; s < g.n_sites(); ++s) {
    const auto [r, c] = g.site_coords(s);
    EXPECT_EQ(g.site_index(r, c), s);
  }
}

// Every edge is unique, ordered, and joins sites at the expected distance.
TEST(Lattice, EdgeGeometry) {
  for (const auto& spec : {LatticeSpec::chain(9), LatticeSpec::grid(3, 5)}) {
    for (EdgeKind kind : {EdgeKind::NN, EdgeKind::NNN}) {
      std::set<std::pair<int, int>> seen;
      for (const Edge& e : spec.edges(kind)) {
        EXPECT_LT(e.i, e.j);
        EXPECT_TRUE(seen.insert({e.i, e.j}).second);
        const auto [ri, ci] = spec.site_coords(e.i);
        const auto [rj, cj] = spec.site_coords(e.j);
        const int dr = std::abs(ri - rj), dc = std::abs(ci - cj);
        if (kind == EdgeKind::NN) {
          EXPECT_EQ(dr + dc, 1);
        } else if (spec.kind() == LatticeKind::Chain) {
          EXPECT_EQ(dc, 2);
        } else {
          EXPECT_EQ(dr, 1);
          EXPECT_EQ(dc, 1);
        }
      }
    }
  }
}

TEST(Lattice, MaxMatching) {
  EXPECT_EQ(LatticeSpec::chain(3).max_nn_matching(), 1);
  EXPECT_EQ(LatticeSpec::chain(16).max_nn_matching(), 8);
  EXPECT_EQ(LatticeSpec::grid(4, 4).max_nn_matching(), 8);
}

}  // namespace
}  // namespace mblcalib
