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

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include <gtest/gtest.h>

namespace mblcalib {
namespace {

// Independent reference: H assembled from Kronecker products of local
// boson operators, site 0 being the leftmost (most significant) factor.
Eigen::MatrixXd kron(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  Eigen::MatrixXd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

Eigen::MatrixXd embed(const Eigen::MatrixXd& local, int site, int n, int d) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Identity(1, 1);
  for (int s = 0; s < n; ++s) {
    out = kron(out, s == site ? local : Eigen::MatrixXd::Identity(d, d));
  }
  return out;
}

Eigen::MatrixXd kron_hamiltonian(const ModelParams& p, const LatticeSpec& spec,
                                 const std::vector<double>& pot, EdgeSet set) {
  const int n = spec.n_sites();
  const int d = p.local_dim;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(d, d);
  for (int k = 1; k < d; ++k) a(k - 1, k) = std::sqrt(double(k));
  const Eigen::MatrixXd num = a.transpose() * a;
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(d, d);
  Eigen::Index dim = 1;
  for (int s = 0; s < n; ++s) dim *= d;
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(dim, dim);
  for (int s = 0; s < n; ++s) {
    const Eigen::MatrixXd ns = embed(num, s, n, d);
    H += pot[s] * ns + 0.5 * p.anharmonicity * ns * (ns - embed(id, s, n, d));
  }
  for (const Edge& e : spec.edges(set)) {
    const Eigen::MatrixXd hop =
        embed(a.transpose(), e.i, n, d) * embed(a, e.j, n, d);
    H += p.h * (hop + hop.transpose());
  }
  return H;
}

std::vector<Eigen::Index> sector_indices(int n, int d, int N) {
  std::vector<Eigen::Index> idx;
  Eigen::Index dim = 1;
  for (int s = 0; s < n; ++s) dim *= d;
  for (Eigen::Index k = 0; k < dim; ++k) {
    int total = 0;
    for (Eigen::Index c = k; c > 0; c /= d) total += int(c % d);
    if (total == N) idx.push_back(k);
  }
  return idx;
}

TEST(Potential, OneDimensionalValues) {
  const double W = 166.67;
  const auto pot = quasiperiodic_potential_1d(W, kGoldenAlpha, 0.0, 16);
  EXPECT_NEAR(pot.values[0], 166.67, 1e-12);
  const double expected = W * std::cos(2.0 * std::numbers::pi * 0.6180339887498949);
  EXPECT_NEAR(pot.values[1], expected, 1e-9);
  EXPECT_NEAR(pot.values[1], -122.92, 0.05);
  const auto shifted =
      quasiperiodic_potential_1d(3.0, kGoldenAlpha, std::numbers::pi / 2, 4);
  EXPECT_NEAR(shifted.values[0], 0.0, 1e-12);
}

TEST(Potential, TwoDimensionalValues) {
  const auto g = LatticeSpec::grid(4, 4);
  const auto pot = quasiperiodic_potential_2d(10.0, kGoldenAlpha, kSilverAlpha7, g);
  EXPECT_NEAR(pot.values[0], 20.0, 1e-12);
  const double expected = 10.0 * (std::cos(2.0 * std::numbers::pi * 0.6180339887498949) +
                                  std::cos(2.0 * std::numbers::pi * 0.8228756555322952));
  EXPECT_NEAR(pot.values[g.site_index(1, 1)], expected, 1e-9);
  // Hand arithmetic gives 10 (-0.7374 + 0.4413), about -2.96.
  EXPECT_NEAR(pot.values[g.site_index(1, 1)], -2.96, 0.01);
  EXPECT_THROW(quasiperiodic_potential_2d(1.0, 0.1, 0.2, LatticeSpec::chain(4)),
               std::invalid_argument);
}

TEST(Potential, AmplitudeIsHOverR) {
  ModelParams p;
  p.h = 5.0;
  p.r = 0.03;
  EXPECT_NEAR(p.W(), 166.6666666666, 1e-6);
  const auto pot = potential_for(p, LatticeSpec::chain(3));
  EXPECT_NEAR(pot.values[0], p.W(), 1e-12);
  p.r = 0.0;
  EXPECT_THROW(p.validate(), std::invalid_argument);
}

TEST(FockBasis, Dimensions) {
  EXPECT_EQ(FockBasis::enumerate(16, 2, Sector::fixed(8))->dimension(), 12870u);
  EXPECT_EQ(FockBasis::enumerate(16, 2, Sector::full())->dimension(), 65536u);
  EXPECT_EQ(FockBasis::enumerate(4, 3, Sector::fixed(2))->dimension(),
            sector_indices(4, 3, 2).size());
  EXPECT_EQ(FockBasis::enumerate(4, 3, Sector::fixed(2))->dimension(), 10u);
  EXPECT_THROW(FockBasis::enumerate(4, 2, Sector::fixed(5)), std::invalid_argument);
  EXPECT_THROW(FockBasis::enumerate(4, 1, Sector::full()), std::invalid_argument);
}

TEST(FockBasis, LexicographicOrderAndRanking) {
  for (int d : {2, 3}) {
    const auto b = FockBasis::enumerate(5, d, Sector::fixed(3));
    const auto ref = sector_indices(5, d, 3);
    ASSERT_EQ(b->dimension(), ref.size());
    for (std::size_t k = 0; k < b->dimension(); ++k) {
      EXPECT_EQ(b->code(k), static_cast<std::uint64_t>(ref[k]));
      const auto occ = b->unrank(k);
      EXPECT_EQ(b->rank(occ), k);
      EXPECT_EQ(b->rank_code(b->code(k)), k);
    }
  }
  const auto b = FockBasis::enumerate(4, 2, Sector::fixed(2));
  EXPECT_EQ(b->unrank(0), (std::vector<int>{0, 0, 1, 1}));
  const std::vector<int> three = {1, 1, 1, 0};
  EXPECT_FALSE(b->rank(three).has_value());
  const std::vector<int> bad_digit = {2, 0, 0, 0};
  EXPECT_FALSE(b->rank(bad_digit).has_value());
  EXPECT_THROW(b->unrank(6), std::out_of_range);
}

TEST(Hamiltonian, TwoSiteBlock) {
  ModelParams p;
  p.h = 5.0;
  const auto spec = LatticeSpec::chain(2);
  const auto basis = FockBasis::enumerate(2, 2, Sector::fixed(1));
  const SitePotential pot{{1.5, -2.0}};
  const Eigen::MatrixXd H = build_hamiltonian(p, spec, pot, basis).to_dense();
  // Basis order: |01>, |10>.
  Eigen::Matrix2d expected;
  expected << -2.0, 5.0, 5.0, 1.5;
  EXPECT_LT((H - expected).norm(), 1e-14);

  const SitePotential flat{{0.0, 0.0}};
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
      build_hamiltonian(p, spec, flat, basis).to_dense());
  EXPECT_NEAR(es.eigenvalues()[0], -5.0, 1e-12);
  EXPECT_NEAR(es.eigenvalues()[1], 5.0, 1e-12);
}

struct OracleCase {
  LatticeSpec spec;
  int d;
  bool nnn;
};

TEST(Hamiltonian, MatchesKroneckerOracle) {
  const OracleCase cases[] = {{LatticeSpec::chain(5), 2, false},
                              {LatticeSpec::chain(6), 2, true},
                              {LatticeSpec::grid(2, 3), 2, true},
                              {LatticeSpec::chain(4), 3, false},
                              {LatticeSpec::grid(2, 2), 3, true}};
  for (const auto& c : cases) {
    ModelParams p;
    p.h = 4.2;
    p.r = 0.37;
    p.local_dim = c.d;
    p.phi = 0.3;
    const int n = c.spec.n_sites();
    const auto pot = potential_for(p, c.spec);
    const EdgeSet set{true, c.nnn};
    const Eigen::MatrixXd ref = kron_hamiltonian(p, c.spec, pot.values, set);

    const auto full = FockBasis::enumerate(n, c.d, Sector::full());
    const Eigen::MatrixXd Hfull =
        build_hamiltonian(p, c.spec, pot, full, set).to_dense();
    EXPECT_LT((Hfull - ref).cwiseAbs().maxCoeff(), 1e-12);

    // Every number sector equals the matching block of the full space.
    for (int N = 0; N <= n * (c.d - 1); ++N) {
      const auto idx = sector_indices(n, c.d, N);
      const auto basis = FockBasis::enumerate(n, c.d, Sector::fixed(N));
      const Eigen::MatrixXd Hs =
          build_hamiltonian(p, c.spec, pot, basis, set).to_dense();
      ASSERT_EQ(Hs.rows(), static_cast<Eigen::Index>(idx.size()));
      for (std::size_t i = 0; i < idx.size(); ++i) {
        for (std::size_t j = 0; j < idx.size(); ++j) {
          ASSERT_NEAR(Hs(i, j), ref(idx[i], idx[j]), 1e-12) << "N=" << N;
        }
      }
    }
  }
}

TEST(Hamiltonian, PaperScaleStructure) {
  ModelParams p;
  p.r = 0.03;
  const auto spec = LatticeSpec::chain(16);
  const auto basis = FockBasis::enumerate(16, 2, Sector::fixed(8));
  const auto H = build_hamiltonian(p, spec, potential_for(p, spec), basis);
  EXPECT_EQ(H.dimension(), 12870);
  EXPECT_EQ(H.hermiticity_defect(), 0.0);
  const auto offs = H.row_offsets();
  for (Eigen::Index r = 0; r < H.dimension(); ++r) {
    EXPECT_LE(offs[r + 1] - offs[r], 1 + 15);
  }
  EXPECT_TRUE(H.has_offdiagonal());
}

TEST(Hamiltonian, ZeroCouplingIsDiagonal) {
  ModelParams p;
  p.h = 0.0;
  p.r = 1.0;
  const auto spec = LatticeSpec::chain(4);
  const auto H = build_hamiltonian(p, spec, SitePotential{{1, 2, 3, 4}},
                                   FockBasis::enumerate(4, 2, Sector::full()));
  EXPECT_FALSE(H.has_offdiagonal());
  EXPECT_EQ(H.diagonal()[0b0101], 2.0 + 4.0);
}

TEST(Hamiltonian, RejectsMismatchedInputs) {
  ModelParams p;
  const auto spec = LatticeSpec::chain(4);
  const auto b4 = FockBasis::enumerate(4, 2, Sector::fixed(2));
  EXPECT_THROW(build_hamiltonian(p, spec, SitePotential{{1, 2, 3}}, b4),
               std::invalid_argument);
  const auto b5 = FockBasis::enumerate(5, 2, Sector::fixed(2));
  EXPECT_THROW(build_hamiltonian(p, spec, potential_for(p, spec), b5),
               std::invalid_argument);
  const auto b3 = FockBasis::enumerate(4, 3, Sector::fixed(2));
  EXPECT_THROW(build_hamiltonian(p, spec, potential_for(p, spec), b3),
               std::invalid_argument);
}

TEST(Hamiltonian, TripletExport) {
  ModelParams p;
  p.h = 5.0;
  const auto spec = LatticeSpec::chain(2);
  const auto H = build_hamiltonian(p, spec, SitePotential{{0.5, 0.25}},
                                   FockBasis::enumerate(2, 2, Sector::fixed(1)));
  std::ostringstream out;
  H.write_triplets(out);
  EXPECT_EQ(out.str(), "2 2 4\n0 0 0.25\n0 1 5\n1 0 5\n1 1 0.5\n");
}

TEST(NeelState, Placement) {
  const auto b16 = FockBasis::enumerate(16, 2, Sector::fixed(8));
  const auto neel = neel_state(b16);
  const std::vector<int> pattern = {0, 1, 0, 1, 0, 1, 0, 1, 0, 1, 0, 1, 0, 1, 0, 1};
  const auto k = b16->rank(pattern);
  ASSERT_TRUE(k.has_value());
  EXPECT_EQ(neel[static_cast<Eigen::Index>(*k)], cplx(1.0, 0.0));
  EXPECT_DOUBLE_EQ(neel.norm(), 1.0);

  const auto b4 = FockBasis::enumerate(4, 2, Sector::fixed(2));
  EXPECT_EQ(b4->code(*b4->rank(std::vector<int>{0, 1, 0, 1})), 0b0101u);
  EXPECT_EQ(neel_state(b4)[*b4->rank(std::vector<int>{0, 1, 0, 1})], cplx(1.0));

  EXPECT_THROW(neel_state(FockBasis::enumerate(16, 2, Sector::fixed(7))),
               std::invalid_argument);
  const auto full = FockBasis::enumerate(4, 2, Sector::full());
  EXPECT_EQ(neel_state(full)[0b0101], cplx(1.0));
}

TEST(NumberDiagonal, CountsExcitations) {
  const auto b = FockBasis::enumerate(3, 3, Sector::full());
  const Eigen::VectorXd n = number_diagonal(*b);
  EXPECT_EQ(n[0], 0.0);
  EXPECT_EQ(n[26], 6.0);
  EXPECT_EQ(n[9 + 3 + 1], 3.0);
}

}  // namespace
}  // namespace mblcalib
