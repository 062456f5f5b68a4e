// Copyright 2026 The qdsim Authors
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

#include "qdsim/liouville.hpp"

#include <cmath>
#include <string>

#include <unsupported/Eigen/KroneckerProduct>

namespace qdsim {
namespace {

void require_square(const CMatrix& m, const char* what) {
  require(m.rows() == m.cols(), ErrorKind::kDimension,
          std::string(what) + " must be square, got " + std::to_string(m.rows()) + "x" +
              std::to_string(m.cols()));
}

void require_dims(std::span<const Operator> ops, Eigen::Index dim) {
  for (const Operator& op : ops) {
    require(op.rows() == dim && op.cols() == dim, ErrorKind::kDimension,
            "jump operator dimension does not match the Hamiltonian");
  }
}

/// Evaluates the Lindblad right-hand side with the dissipator's
/// L_k^dagger L_k products precomputed.
class LindbladRhs {
 public:
  explicit LindbladRhs(std::span<const Operator> jumps) : jumps_(jumps) {
    decay_.reserve(jumps.size());
    for (const Operator& l : jumps) decay_.push_back(l.adjoint() * l);
  }

  CMatrix operator()(const Operator& h, const CMatrix& rho) const {
    const Complex minus_i(0.0, -1.0);
    CMatrix out = minus_i * (h * rho - rho * h);
    for (std::size_t k = 0; k < jumps_.size(); ++k) {
      const Operator& l = jumps_[k];
      out.noalias() += l * rho * l.adjoint();
      out.noalias() -= 0.5 * (decay_[k] * rho + rho * decay_[k]);
    }
    return out;
  }

 private:
  std::span<const Operator> jumps_;
  std::vector<CMatrix> decay_;
};

}  // namespace

CVector vectorize(const CMatrix& rho) {
  require_square(rho, "density matrix");
  return rho.reshaped();
}

CMatrix unvectorize(const CVector& v) {
  const auto n = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(v.size()))));
  require(n * n == v.size(), ErrorKind::kDimension,
          "vector length " + std::to_string(v.size()) + " is not a perfect square");
  return v.reshaped(n, n);
}

DensityDiagnostics density_diagnostics(const CMatrix& rho) {
  require_square(rho, "density matrix");
  DensityDiagnostics d;
  d.trace_error = std::abs(rho.trace() - Complex(1.0, 0.0));
  d.hermiticity_error = max_abs(rho - rho.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(hermitize(rho), Eigen::EigenvaluesOnly);
  d.min_eigenvalue = eig.eigenvalues().minCoeff();
  return d;
}

bool is_density_matrix(const CMatrix& rho, const DensityTolerance& tol) {
  const DensityDiagnostics d = density_diagnostics(rho);
  return d.trace_error <= tol.trace && d.hermiticity_error <= tol.hermiticity &&
         d.min_eigenvalue >= tol.min_eigenvalue;
}

void check_density_matrix(const CMatrix& rho, const DensityTolerance& tol) {
  const DensityDiagnostics d = density_diagnostics(rho);
  require(d.trace_error <= tol.trace, ErrorKind::kNumerical,
          "trace deviates from 1 by " + std::to_string(d.trace_error));
  require(d.hermiticity_error <= tol.hermiticity, ErrorKind::kNumerical,
          "density matrix is not Hermitian (error " + std::to_string(d.hermiticity_error) + ")");
  require(d.min_eigenvalue >= tol.min_eigenvalue, ErrorKind::kNumerical,
          "density matrix has eigenvalue " + std::to_string(d.min_eigenvalue));
}

CMatrix hermitize(const CMatrix& rho) { return 0.5 * (rho + rho.adjoint()); }

CMatrix random_density_matrix(Eigen::Index dim, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  CMatrix x(dim, dim);
  for (Eigen::Index j = 0; j < dim; ++j) {
    for (Eigen::Index i = 0; i < dim; ++i) x(i, j) = Complex(normal(rng), normal(rng));
  }
  CMatrix rho = x * x.adjoint();
  rho /= rho.trace().real();
  return hermitize(rho);
}

CVector random_pure_state(Eigen::Index dim, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  CVector psi(dim);
  for (Eigen::Index i = 0; i < dim; ++i) psi(i) = Complex(normal(rng), normal(rng));
  return psi / psi.norm();
}

JumpOperatorSet make_jump_operators(std::optional<double> t1, std::optional<double> t2,
                                    const Operator& lowering) {
  require_square(lowering, "lowering operator");
  JumpOperatorSet jumps;
  if (t1) {
    require(std::isfinite(*t1) && *t1 > 0.0, ErrorKind::kInvalidArgument, "T1 must be positive");
    jumps.push_back(lowering / std::sqrt(*t1));
  }
  if (t2) {
    require(std::isfinite(*t2) && *t2 > 0.0, ErrorKind::kInvalidArgument, "T2 must be positive");
    jumps.push_back((lowering.adjoint() * lowering) / std::sqrt(*t2));
  }
  return jumps;
}

CMatrix lindblad_rhs(const CMatrix& rho, const Operator& h, std::span<const Operator> jumps) {
  require_square(h, "Hamiltonian");
  require(rho.rows() == h.rows() && rho.cols() == h.cols(), ErrorKind::kDimension,
          "density matrix and Hamiltonian dimensions differ");
  require_dims(jumps, h.rows());
  return LindbladRhs(jumps)(h, rho);
}

Superoperator liouvillian_block(const Operator& h_ket, const Operator& h_bra,
                                std::span<const Operator> jumps_ket,
                                std::span<const Operator> jumps_bra) {
  require_square(h_ket, "Hamiltonian");
  require_square(h_bra, "Hamiltonian");
  require(jumps_ket.size() == jumps_bra.size(), ErrorKind::kDimension,
          "ket and bra jump sets differ in length");
  require_dims(jumps_ket, h_ket.rows());
  require_dims(jumps_bra, h_bra.rows());
  const Eigen::Index a = h_ket.rows();
  const Eigen::Index b = h_bra.rows();
  const CMatrix id_a = CMatrix::Identity(a, a);
  const CMatrix id_b = CMatrix::Identity(b, b);
  const Complex minus_i(0.0, -1.0);

  Superoperator l = minus_i * (Eigen::kroneckerProduct(id_b, h_ket).eval() -
                               Eigen::kroneckerProduct(h_bra.transpose(), id_a).eval());
  for (std::size_t k = 0; k < jumps_ket.size(); ++k) {
    const Operator& lk_ket = jumps_ket[k];
    const Operator& lk_bra = jumps_bra[k];
    const CMatrix decay_ket = lk_ket.adjoint() * lk_ket;
    const CMatrix decay_bra = lk_bra.adjoint() * lk_bra;
    l += Eigen::kroneckerProduct(lk_bra.conjugate(), lk_ket).eval();
    l -= 0.5 * Eigen::kroneckerProduct(id_b, decay_ket).eval();
    l -= 0.5 * Eigen::kroneckerProduct(decay_bra.transpose(), id_a).eval();
  }
  return l;
}

Superoperator build_liouvillian(const Operator& h, std::span<const Operator> jumps) {
  return liouvillian_block(h, h, jumps, jumps);
}

CMatrix reference_evolve(const CMatrix& rho0, const Controls& controls, const SliceGrid& grid,
                         const DotSystem& system, std::span<const Operator> jumps,
                         int steps_per_slice) {
  require(steps_per_slice >= 1, ErrorKind::kInvalidArgument, "steps_per_slice must be >= 1");
  require(controls.n_bonds() == system.n_bonds(), ErrorKind::kInvalidArgument,
          "controls and dot system disagree on the number of bonds");
  controls.check_grid(grid);
  require(rho0.rows() == system.dim() && rho0.cols() == system.dim(), ErrorKind::kDimension,
          "initial state dimension does not match the dot system");
  require_dims(jumps, system.dim());

  const LindbladRhs rhs(jumps);
  const double h = grid.slice_width() / steps_per_slice;
  CMatrix rho = rho0;
  for (int m = 0; m < grid.n_slices(); ++m) {
    const double t_start = grid.boundary(m);
    const auto hamiltonian_at = [&](double t) { return system.hamiltonian(controls.sample(grid, m, t)); };
    const bool constant = controls.is_piecewise();
    const Operator h_slice = constant ? hamiltonian_at(t_start) : Operator();
    for (int s = 0; s < steps_per_slice; ++s) {
      const double t = t_start + s * h;
      const Operator h0 = constant ? h_slice : hamiltonian_at(t);
      const Operator hmid = constant ? h_slice : hamiltonian_at(t + 0.5 * h);
      const Operator h1 = constant ? h_slice : hamiltonian_at(t + h);
      const CMatrix k1 = rhs(h0, rho);
      const CMatrix k2 = rhs(hmid, rho + (0.5 * h) * k1);
      const CMatrix k3 = rhs(hmid, rho + (0.5 * h) * k2);
      const CMatrix k4 = rhs(h1, rho + h * k3);
      rho += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
  }
  return rho;
}

CMatrix reference_evolve(const CMatrix& rho0, const PulseSchedule& schedule,
                         const DotSystem& system, std::span<const Operator> jumps,
                         int steps_per_slice) {
  return reference_evolve(rho0, Controls(schedule), schedule.grid(), system, jumps,
                          steps_per_slice);
}

}  // namespace qdsim
