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

#include "mblcalib/engine.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include <unsupported/Eigen/MatrixFunctions>

#include "mblcalib/errors.hpp"

namespace mblcalib {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// The trailing Krylov coefficient never drops below the rounding level of the
// small eigensolve, so anything there counts as converged.
double above_rounding(double c) {
  return c <= 1e3 * std::numeric_limits<double>::epsilon() ? 0.0 : c;
}

// Picks the longest substep dt <= remaining whose error estimate fits its
// share of the budget. `estimate(dt)` must be cheap (small-matrix work only).
template <class Estimate>
double choose_substep(double remaining, double total, double tol,
                      Estimate&& estimate) {
  auto ok = [&](double dt) { return estimate(dt) <= tol * dt / total; };
  if (ok(remaining)) return remaining;
  double hi = remaining;
  double lo = 0.5 * remaining;
  int halvings = 0;
  while (!ok(lo)) {
    hi = lo;
    lo *= 0.5;
    if (++halvings > 80) {
      throw NumericalError("Krylov step size underflow");
    }
  }
  for (int it = 0; it < 24; ++it) {
    const double mid = 0.5 * (lo + hi);
    (ok(mid) ? lo : hi) = mid;
  }
  return lo;
}

Eigen::VectorXcd diagonal_phase(const Eigen::VectorXd& diag,
                                const Eigen::VectorXcd& v, double t) {
  Eigen::VectorXcd out(v.size());
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    out[k] = std::polar(1.0, -kTwoPi * diag[k] * t) * v[k];
  }
  return out;
}

}  // namespace

void PropagatorConfig::validate() const {
  if (krylov_dim < 2) throw std::invalid_argument("krylov_dim must be >= 2");
  if (!(step_tolerance > 0.0)) {
    throw std::invalid_argument("step_tolerance must be positive");
  }
  if (max_substeps < 1) throw std::invalid_argument("max_substeps must be >= 1");
}

Eigen::VectorXcd apply_h(const SparseHamiltonian& H, const StateVector& psi) {
  if (!(H.basis() == psi.basis())) {
    throw std::invalid_argument("Hamiltonian and state live in different bases");
  }
  Eigen::VectorXcd out;
  H.apply(psi.amplitudes(), out);
  return out;
}

Eigen::VectorXcd propagate(const SparseHamiltonian& H, const Eigen::VectorXcd& v,
                           double t_us, const PropagatorConfig& cfg,
                           PropagatorStats* stats) {
  cfg.validate();
  if (t_us < 0.0 || !std::isfinite(t_us)) {
    throw std::invalid_argument("evolution time must be finite and >= 0");
  }
  const Eigen::Index n = H.dimension();
  if (v.size() != n) throw std::invalid_argument("vector size mismatch");
  if (t_us == 0.0) return v;
  if (!H.has_offdiagonal()) return diagonal_phase(H.diagonal(), v, t_us);

  const int m = static_cast<int>(std::min<Eigen::Index>(cfg.krylov_dim, n));
  Eigen::MatrixXcd basis(n, m + 1);
  Eigen::VectorXcd w = v;
  std::vector<double> alpha(m), beta(m);
  double done = 0.0;
  int substeps = 0;

  while (done < t_us) {
    if (++substeps > cfg.max_substeps) {
      throw NumericalError("Lanczos propagation exceeded " +
                           std::to_string(cfg.max_substeps) + " substeps");
    }
    const double beta0 = w.norm();
    if (beta0 == 0.0) break;
    basis.col(0) = w / beta0;

    int k = m;
    double beta_next = 0.0;
    for (int j = 0; j < m; ++j) {
      auto next = basis.col(j + 1);
      H.apply(basis.col(j).data(), next.data());
      if (stats) ++stats->matvecs;
      alpha[j] = basis.col(j).dot(next).real();
      // Three-term recurrence, then one classical Gram-Schmidt sweep
      // against the whole basis to keep it orthogonal.
      next -= alpha[j] * basis.col(j);
      if (j > 0) next -= beta[j - 1] * basis.col(j - 1);
      const Eigen::VectorXcd c = basis.leftCols(j + 1).adjoint() * next;
      next.noalias() -= basis.leftCols(j + 1) * c;
      const double b = next.norm();
      const double scale = std::abs(alpha[j]) + (j > 0 ? beta[j - 1] : 0.0);
      if (b <= 1e-13 * std::max(scale, 1.0)) {
        k = j + 1;
        beta_next = 0.0;
        break;
      }
      beta[j] = b;
      beta_next = b;
      next /= b;
    }

    Eigen::MatrixXd tri = Eigen::MatrixXd::Zero(k, k);
    for (int j = 0; j < k; ++j) {
      tri(j, j) = alpha[j];
      if (j + 1 < k) tri(j, j + 1) = tri(j + 1, j) = beta[j];
    }
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(tri);
    const Eigen::VectorXd& lambda = es.eigenvalues();
    const Eigen::MatrixXd& q = es.eigenvectors();
    const Eigen::VectorXd q0 = q.row(0).transpose();

    auto coefficients = [&](double dt) {
      Eigen::VectorXcd z(k);
      for (int i = 0; i < k; ++i) {
        z[i] = std::polar(q0[i], -kTwoPi * lambda[i] * dt);
      }
      return Eigen::VectorXcd(q.cast<cplx>() * z);
    };

    const double remaining = t_us - done;
    double dt = remaining;
    if (beta_next > 0.0) {
      dt = choose_substep(remaining, t_us, cfg.step_tolerance, [&](double s) {
        return beta0 * beta_next * above_rounding(std::abs(coefficients(s)[k - 1]));
      });
    }
    w = beta0 * (basis.leftCols(k) * coefficients(dt));
    done = (dt == remaining) ? t_us : done + dt;
  }
  if (stats) stats->substeps += substeps;
  return w;
}

StateVector evolve(const SparseHamiltonian& H, const StateVector& psi0,
                   double t_us, const PropagatorConfig& cfg,
                   PropagatorStats* stats) {
  if (!(H.basis() == psi0.basis())) {
    throw std::invalid_argument("Hamiltonian and state live in different bases");
  }
  if (t_us == 0.0) return psi0;
  Eigen::VectorXcd out = propagate(H, psi0.amplitudes(), t_us, cfg, stats);
  const double drift = std::abs(out.norm() - psi0.norm());
  if (drift >= 1e-8) {
    throw NumericalError("norm drifted by " + std::to_string(drift) +
                         " during evolution");
  }
  StateVector result(psi0.basis_ptr(), std::move(out));
  if (std::abs(psi0.norm() - 1.0) < 1e-8) result.normalize();
  return result;
}

Eigen::VectorXcd propagate_damped(const SparseHamiltonian& H,
                                  const Eigen::VectorXd& decay,
                                  const Eigen::VectorXcd& v, double t_us,
                                  const PropagatorConfig& cfg,
                                  PropagatorStats* stats) {
  cfg.validate();
  if (t_us < 0.0 || !std::isfinite(t_us)) {
    throw std::invalid_argument("evolution time must be finite and >= 0");
  }
  const Eigen::Index n = H.dimension();
  if (v.size() != n || decay.size() != n) {
    throw std::invalid_argument("vector size mismatch");
  }
  if (t_us == 0.0) return v;

  // Work with A = -i 2 pi H_eff = -i 2 pi H - Gamma, so exp(t A) v is wanted.
  const int m = static_cast<int>(std::min<Eigen::Index>(cfg.krylov_dim, n));
  Eigen::MatrixXcd basis(n, m + 1);
  Eigen::VectorXcd w = v;
  double done = 0.0;
  int substeps = 0;

  while (done < t_us) {
    if (++substeps > cfg.max_substeps) {
      throw NumericalError("Arnoldi propagation exceeded " +
                           std::to_string(cfg.max_substeps) + " substeps");
    }
    const double beta0 = w.norm();
    if (beta0 == 0.0) break;
    basis.col(0) = w / beta0;

    Eigen::MatrixXcd hess = Eigen::MatrixXcd::Zero(m + 1, m);
    int k = m;
    double h_next = 0.0;
    for (int j = 0; j < m; ++j) {
      auto next = basis.col(j + 1);
      H.apply(basis.col(j).data(), next.data());
      if (stats) ++stats->matvecs;
      next = cplx(0.0, -kTwoPi) * next -
             decay.cwiseProduct(basis.col(j)).cast<cplx>();
      for (int pass = 0; pass < 2; ++pass) {
        const Eigen::VectorXcd c = basis.leftCols(j + 1).adjoint() * next;
        hess.col(j).head(j + 1) += c;
        next.noalias() -= basis.leftCols(j + 1) * c;
      }
      const double b = next.norm();
      if (b <= 1e-13 * std::max(hess.col(j).head(j + 1).norm(), 1.0)) {
        k = j + 1;
        h_next = 0.0;
        break;
      }
      hess(j + 1, j) = b;
      h_next = b;
      next /= b;
    }

    const Eigen::MatrixXcd small = hess.topLeftCorner(k, k);
    auto coefficients = [&](double dt) {
      const Eigen::MatrixXcd e = (small * dt).exp();
      return Eigen::VectorXcd(e.col(0));
    };

    const double remaining = t_us - done;
    double dt = remaining;
    if (h_next > 0.0) {
      dt = choose_substep(remaining, t_us, cfg.step_tolerance, [&](double s) {
        return beta0 * h_next * above_rounding(std::abs(coefficients(s)[k - 1]));
      });
    }
    w = beta0 * (basis.leftCols(k) * coefficients(dt));
    done = (dt == remaining) ? t_us : done + dt;
  }
  if (stats) stats->substeps += substeps;
  return w;
}

StateVector evolve_dense_oracle(const SparseHamiltonian& H,
                                const StateVector& psi0, double t_us) {
  if (H.dimension() > 4096) {
    throw NumericalError("dense oracle limited to dimension 4096");
  }
  if (!(H.basis() == psi0.basis())) {
    throw std::invalid_argument("Hamiltonian and state live in different bases");
  }
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H.to_dense());
  const Eigen::MatrixXcd q = es.eigenvectors().cast<cplx>();
  Eigen::VectorXcd c = q.adjoint() * psi0.amplitudes();
  for (Eigen::Index i = 0; i < c.size(); ++i) {
    c[i] *= std::polar(1.0, -kTwoPi * es.eigenvalues()[i] * t_us);
  }
  return StateVector(psi0.basis_ptr(), q * c);
}

Eigen::VectorXcd propagate_damped_dense_oracle(const SparseHamiltonian& H,
                                               const Eigen::VectorXd& decay,
                                               const Eigen::VectorXcd& v,
                                               double t_us) {
  if (H.dimension() > 1024) {
    throw NumericalError("damped dense oracle limited to dimension 1024");
  }
  Eigen::MatrixXcd a = cplx(0.0, -kTwoPi * t_us) * H.to_dense().cast<cplx>();
  a.diagonal() -= (t_us * decay).cast<cplx>();
  return a.exp() * v;
}

}  // namespace mblcalib
