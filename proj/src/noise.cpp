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

#include "mblcalib/noise.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "mblcalib/errors.hpp"

namespace mblcalib {

NoiseParams NoiseParams::make(double t1_us, double t2_us) {
  if (!(t1_us > 0.0) || !(t2_us > 0.0)) {
    throw std::invalid_argument("coherence times must be positive");
  }
  if (t2_us > 2.0 * t1_us) {
    throw std::invalid_argument("unphysical noise: T2 > 2 T1");
  }
  return NoiseParams(t1_us, t2_us);
}

double NoiseParams::gamma_phi() const {
  return std::max(0.0, 1.0 / t2_ - 1.0 / (2.0 * t1_));
}

std::optional<NoiseParams> noise_from_ns(int ns) {
  switch (ns) {
    case 0:
      return std::nullopt;
    case 1:
      return NoiseParams::make(50.0, 69.0);
    case 2:
      return NoiseParams::make(25.0, 34.5);
    default:
      throw std::invalid_argument("unsupported noise strength ns=" +
                                  std::to_string(ns));
  }
}

// ---------------------------------------------------------------------------
// Jump operators

namespace {
void require_full_space(const FockBasis& basis) {
  if (!basis.sector().is_full()) {
    throw std::invalid_argument(
        "jump operators need the full Fock space (they change excitation number)");
  }
}
}  // namespace

void JumpOperator::apply(const FockBasis& basis, const Eigen::VectorXcd& in,
                         Eigen::VectorXcd& out) const {
  require_full_space(basis);
  const auto dim = static_cast<Eigen::Index>(basis.dimension());
  out = Eigen::VectorXcd::Zero(dim);
  const auto place = static_cast<Eigen::Index>(basis.place_value(site));
  const int d = basis.local_dim();
  const double amp = std::sqrt(rate);
  for (Eigen::Index k = 0; k < dim; ++k) {
    const int n = static_cast<int>((k / place) % d);
    if (kind == JumpKind::Relaxation) {
      if (n > 0) out[k - place] += amp * std::sqrt(static_cast<double>(n)) * in[k];
    } else {
      out[k] = (n == 0 ? amp : -amp) * in[k];
    }
  }
}

double JumpOperator::weight(const FockBasis& basis,
                            const Eigen::VectorXcd& v) const {
  require_full_space(basis);
  if (kind == JumpKind::Dephasing) return rate * v.squaredNorm();
  const auto place = static_cast<Eigen::Index>(basis.place_value(site));
  const int d = basis.local_dim();
  double sum = 0.0;
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    const int n = static_cast<int>((k / place) % d);
    sum += n * std::norm(v[k]);
  }
  return rate * sum;
}

Eigen::MatrixXcd JumpOperator::dense(const FockBasis& basis) const {
  const auto dim = static_cast<Eigen::Index>(basis.dimension());
  Eigen::MatrixXcd m(dim, dim);
  Eigen::VectorXcd e = Eigen::VectorXcd::Zero(dim);
  Eigen::VectorXcd col;
  for (Eigen::Index k = 0; k < dim; ++k) {
    e.setZero();
    e[k] = 1.0;
    apply(basis, e, col);
    m.col(k) = col;
  }
  return m;
}

std::vector<JumpOperator> jump_operators(const NoiseParams& params,
                                         const FockBasis& basis) {
  require_full_space(basis);
  std::vector<JumpOperator> ops;
  const double g1 = params.gamma1();
  const double gphi = params.gamma_phi();
  for (int s = 0; s < basis.n_sites(); ++s) {
    if (g1 > 0.0) ops.push_back({JumpKind::Relaxation, s, g1});
  }
  for (int s = 0; s < basis.n_sites(); ++s) {
    if (gphi > 0.0) ops.push_back({JumpKind::Dephasing, s, 0.5 * gphi});
  }
  return ops;
}

void TrajectoryConfig::validate() const {
  if (n_traj < 1) throw std::invalid_argument("n_traj must be >= 1");
  if (jump_substep < 0.0) throw std::invalid_argument("jump_substep must be >= 0");
  propagator.validate();
}

// ---------------------------------------------------------------------------
// NoiseModel

NoiseModel::NoiseModel(const NoiseParams& params,
                       std::shared_ptr<const FockBasis> basis)
    : basis_(std::move(basis)), ops_(jump_operators(params, *basis_)) {
  const auto dim = static_cast<Eigen::Index>(basis_->dimension());
  decay_ = Eigen::VectorXd::Zero(dim);
  const int d = basis_->local_dim();
  for (const auto& op : ops_) {
    if (op.kind == JumpKind::Dephasing) {
      decay_.array() += 0.5 * op.rate;
      continue;
    }
    const auto place = static_cast<Eigen::Index>(basis_->place_value(op.site));
    for (Eigen::Index k = 0; k < dim; ++k) {
      decay_[k] += 0.5 * op.rate * static_cast<double>((k / place) % d);
    }
  }
}

bool NoiseModel::decay_commutes_with(const SparseHamiltonian& H) const {
  if (!(H.basis() == *basis_)) {
    throw std::invalid_argument("noise model and Hamiltonian bases differ");
  }
  const double tol = 1e-12 * std::max(1.0, decay_.cwiseAbs().maxCoeff());
  const auto rows = H.row_offsets();
  const auto cols = H.columns();
  const auto vals = H.values();
  for (Eigen::Index r = 0; r < H.dimension(); ++r) {
    for (auto p = rows[r]; p < rows[r + 1]; ++p) {
      if (vals[p] != 0.0 && std::abs(decay_[r] - decay_[cols[p]]) > tol) {
        return false;
      }
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// Trajectory

std::optional<double> damped_norm_crossing(const Eigen::VectorXd& populations,
                                           const Eigen::VectorXd& decay,
                                           double target, double t_max) {
  // Collapse to one population per distinct rate; usually only a handful.
  std::vector<std::pair<double, double>> groups;
  for (Eigen::Index k = 0; k < populations.size(); ++k) {
    if (populations[k] != 0.0) groups.emplace_back(decay[k], populations[k]);
  }
  std::sort(groups.begin(), groups.end());
  std::vector<std::pair<double, double>> merged;
  for (const auto& [g, p] : groups) {
    if (!merged.empty() && merged.back().first == g) {
      merged.back().second += p;
    } else {
      merged.emplace_back(g, p);
    }
  }
  auto norm2 = [&](double s) {
    double f = 0.0;
    for (const auto& [g, p] : merged) f += p * std::exp(-2.0 * g * s);
    return f;
  };
  if (norm2(0.0) <= target) return 0.0;
  if (norm2(t_max) > target) return std::nullopt;
  double lo = 0.0;
  double hi = t_max;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * t_max; ++it) {
    const double mid = 0.5 * (lo + hi);
    (norm2(mid) > target ? lo : hi) = mid;
  }
  return hi;
}

Trajectory::Trajectory(StateVector psi0, RngStream rng)
    : psi_(std::move(psi0)), rng_(rng), threshold_(rng_.uniform_open_closed()) {}

void Trajectory::reset(StateVector psi, double threshold, int jumps) {
  psi_ = std::move(psi);
  threshold_ = threshold;
  jumps_ = jumps;
}

StateVector Trajectory::normalized() const {
  StateVector out = psi_;
  out.normalize();
  return out;
}

void Trajectory::jump(const NoiseModel& noise) {
  const auto& ops = noise.operators();
  const Eigen::VectorXcd& v = psi_.amplitudes();
  std::vector<double> weights(ops.size());
  double total = 0.0;
  for (std::size_t i = 0; i < ops.size(); ++i) {
    weights[i] = ops[i].weight(noise.basis(), v);
    total += weights[i];
  }
  if (!(total > 0.0)) throw NumericalError("jump requested with zero jump weight");
  const double pick = rng_.uniform() * total;
  std::size_t chosen = ops.size() - 1;
  double acc = 0.0;
  for (std::size_t i = 0; i < ops.size(); ++i) {
    acc += weights[i];
    if (pick < acc) {
      chosen = i;
      break;
    }
  }
  Eigen::VectorXcd out;
  ops[chosen].apply(noise.basis(), v, out);
  const double n = out.norm();
  if (!(n > 0.0)) throw NumericalError("jump annihilated the state");
  psi_.amplitudes() = out / n;
  threshold_ = rng_.uniform_open_closed();
  ++jumps_;
}

void Trajectory::advance(const SparseHamiltonian& H, double t_us,
                         const NoiseModel& noise, const TrajectoryConfig& cfg) {
  if (!(H.basis() == psi_.basis()) || !(noise.basis() == psi_.basis())) {
    throw std::invalid_argument("trajectory, Hamiltonian and noise bases differ");
  }
  if (t_us < 0.0) throw std::invalid_argument("negative evolution time");
  Eigen::VectorXcd& v = psi_.amplitudes();
  if (noise.operators().empty()) {
    v = propagate(H, v, t_us, cfg.propagator);
    return;
  }
  const Eigen::VectorXd& decay = noise.decay();
  const bool factorized = !cfg.force_arnoldi && noise.decay_commutes_with(H);
  double remaining = t_us;
  while (remaining > 0.0) {
    if (factorized) {
      const auto crossing = damped_norm_crossing(v.cwiseAbs2(), decay,
                                                 threshold_, remaining);
      const double s = crossing.value_or(remaining);
      v = propagate(H, v, s, cfg.propagator);
      v.array() *= (-s * decay.array()).exp().cast<cplx>();
      if (!crossing) break;
      remaining -= s;
      jump(noise);
      continue;
    }

    const double step = std::min(
        remaining, cfg.jump_substep > 0.0 ? cfg.jump_substep : t_us / 50.0);
    Eigen::VectorXcd w = propagate_damped(H, decay, v, step, cfg.propagator);
    if (w.squaredNorm() > threshold_) {
      v = std::move(w);
      remaining = (step == remaining) ? 0.0 : remaining - step;
      continue;
    }
    // Crossing inside this substep: bisect to step/100.
    double lo = 0.0;
    double hi = step;
    while (hi - lo > step / 100.0) {
      const double mid = 0.5 * (lo + hi);
      const double n2 =
          propagate_damped(H, decay, v, mid, cfg.propagator).squaredNorm();
      (n2 > threshold_ ? lo : hi) = mid;
    }
    v = propagate_damped(H, decay, v, hi, cfg.propagator);
    remaining = (hi == remaining) ? 0.0 : remaining - hi;
    jump(noise);
  }
}

StateVector evolve_trajectory(const SparseHamiltonian& H,
                              const StateVector& psi0, double t_us,
                              const NoiseParams& params, RngStream& rng,
                              const TrajectoryConfig& cfg) {
  cfg.validate();
  const NoiseModel noise(params, psi0.basis_ptr());
  Trajectory traj(psi0, rng);
  traj.advance(H, t_us, noise, cfg);
  rng = traj.rng();
  return traj.normalized();
}

MeanStderr average_fidelity(std::span<const StateVector> trajectories,
                            const StateVector& ref) {
  if (trajectories.empty()) throw std::invalid_argument("no trajectories");
  std::vector<double> f;
  f.reserve(trajectories.size());
  for (const auto& psi : trajectories) f.push_back(fidelity(ref, psi));
  return mean_and_stderr(f);
}

}  // namespace mblcalib
