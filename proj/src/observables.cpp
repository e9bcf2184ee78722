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

#include "mblcalib/observables.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "mblcalib/errors.hpp"

namespace mblcalib {

Bipartition::Bipartition(std::vector<int> sites, int n_sites)
    : sites_(std::move(sites)), n_sites_(n_sites) {
  std::sort(sites_.begin(), sites_.end());
  if (sites_.empty() || static_cast<int>(sites_.size()) >= n_sites) {
    throw std::invalid_argument("bipartition must be a nonempty proper subset");
  }
  if (std::adjacent_find(sites_.begin(), sites_.end()) != sites_.end()) {
    throw std::invalid_argument("bipartition has repeated sites");
  }
  if (sites_.front() < 0 || sites_.back() >= n_sites) {
    throw std::invalid_argument("bipartition site out of range");
  }
}

Bipartition Bipartition::half_system(const LatticeSpec& spec) {
  std::vector<int> a;
  if (spec.kind() == LatticeKind::Chain) {
    for (int s = 0; s < spec.n_sites() / 2; ++s) a.push_back(s);
  } else {
    for (int r = 0; r < spec.rows(); ++r) {
      for (int c = 0; c < spec.cols() / 2; ++c) a.push_back(spec.site_index(r, c));
    }
  }
  return Bipartition(std::move(a), spec.n_sites());
}

std::vector<int> Bipartition::complement() const {
  std::vector<int> out;
  for (int s = 0; s < n_sites_; ++s) {
    if (!std::binary_search(sites_.begin(), sites_.end(), s)) out.push_back(s);
  }
  return out;
}

double fidelity(const StateVector& a, const StateVector& b) {
  if (!a.same_space(b)) throw std::invalid_argument("fidelity: basis mismatch");
  return std::norm(a.amplitudes().dot(b.amplitudes()));
}

double ipr(const StateVector& psi) {
  double sum = 0.0;
  for (const cplx& c : psi.amplitudes()) {
    const double p = std::norm(c);
    sum += p * p;
  }
  return sum;
}

double renyi2(const StateVector& psi, const Bipartition& part) {
  const FockBasis& basis = psi.basis();
  if (part.n_sites() != basis.n_sites()) {
    throw std::invalid_argument("bipartition does not match the state");
  }
  std::vector<int> keep = part.sites();
  std::vector<int> other = part.complement();
  if (keep.size() > other.size()) std::swap(keep, other);

  const int d = basis.local_dim();
  Eigen::Index dim_keep = 1;
  for (std::size_t i = 0; i < keep.size(); ++i) dim_keep *= d;
  if (dim_keep > 8192) {
    throw NumericalError("reduced density matrix too large");
  }

  // Group amplitudes by their environment configuration; each group adds
  // an outer product to rho.
  struct Entry {
    std::uint64_t env;
    Eigen::Index sys;
    cplx amp;
  };
  std::vector<Entry> entries;
  entries.reserve(static_cast<std::size_t>(psi.dimension()));
  std::vector<int> occ(basis.n_sites());
  for (std::size_t k = 0; k < basis.dimension(); ++k) {
    const cplx amp = psi[static_cast<Eigen::Index>(k)];
    if (amp == cplx(0.0, 0.0)) continue;
    basis.unrank_into(k, occ);
    Eigen::Index sys = 0;
    for (int s : keep) sys = sys * d + occ[s];
    std::uint64_t env = 0;
    for (int s : other) env = env * d + occ[s];
    entries.push_back({env, sys, amp});
  }
  std::sort(entries.begin(), entries.end(), [](const Entry& x, const Entry& y) {
    return x.env != y.env ? x.env < y.env : x.sys < y.sys;
  });

  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(dim_keep, dim_keep);
  for (std::size_t lo = 0; lo < entries.size();) {
    std::size_t hi = lo;
    while (hi < entries.size() && entries[hi].env == entries[lo].env) ++hi;
    for (std::size_t p = lo; p < hi; ++p) {
      for (std::size_t q = lo; q < hi; ++q) {
        rho(entries[p].sys, entries[q].sys) +=
            entries[p].amp * std::conj(entries[q].amp);
      }
    }
    lo = hi;
  }
  const double purity = rho.cwiseAbs2().sum();
  return std::max(0.0, -std::log2(purity));
}

SpectralStats gap_ratio_from_levels(std::vector<double> levels) {
  std::sort(levels.begin(), levels.end());
  const std::size_t n = levels.size();
  const std::size_t lo = n / 4;
  const std::size_t hi = n - n / 4;
  if (hi < lo + 3) throw std::invalid_argument("too few levels for gap ratios");

  const double span = std::max(std::abs(levels.back() - levels.front()), 1e-300);
  std::vector<double> ratios;
  int degenerate = 0;
  for (std::size_t i = lo; i + 2 < hi; ++i) {
    const double g1 = levels[i + 1] - levels[i];
    const double g2 = levels[i + 2] - levels[i + 1];
    const double big = std::max(g1, g2);
    if (std::min(g1, g2) <= 1e-12 * span) {
      ++degenerate;
      ratios.push_back(0.0);
    } else {
      ratios.push_back(std::min(g1, g2) / big);
    }
  }
  SpectralStats stats;
  stats.mean_gap_ratio = mean_and_stderr(ratios).mean;
  stats.level_count = static_cast<int>(hi - lo);
  stats.degenerate_count = degenerate;
  return stats;
}

SpectralStats gap_ratio(const SparseHamiltonian& H) {
  if (H.dimension() > 20000) {
    throw NumericalError("gap ratio limited to dimension 20000");
  }
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
      H.to_dense(), Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) {
    throw NumericalError("eigenvalue solver failed");
  }
  const auto& ev = es.eigenvalues();
  return gap_ratio_from_levels(std::vector<double>(ev.data(), ev.data() + ev.size()));
}

namespace {
double pairwise_sum(std::span<const double> x) {
  if (x.size() <= 8) return std::accumulate(x.begin(), x.end(), 0.0);
  const std::size_t half = x.size() / 2;
  return pairwise_sum(x.first(half)) + pairwise_sum(x.subspan(half));
}
}  // namespace

MeanStderr mean_and_stderr(std::span<const double> samples) {
  if (samples.empty()) throw std::invalid_argument("no samples");
  const double n = static_cast<double>(samples.size());
  MeanStderr out;
  out.mean = pairwise_sum(samples) / n;
  if (samples.size() > 1) {
    std::vector<double> sq(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
      sq[i] = (samples[i] - out.mean) * (samples[i] - out.mean);
    }
    out.stderr_ = std::sqrt(pairwise_sum(sq) / (n - 1.0) / n);
  }
  return out;
}

}  // namespace mblcalib
