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

#pragma once

#include <optional>
#include <random>
#include <span>
#include <vector>

#include "qdsim/common.hpp"
#include "qdsim/controls.hpp"
#include "qdsim/hilbert.hpp"

namespace qdsim {

/// Column stacking: vec(rho)[i + D*j] = rho(i, j). This is the convention
/// under which vec(A X B) = (B^T kron A) vec(X).
CVector vectorize(const CMatrix& rho);
CMatrix unvectorize(const CVector& v);

struct DensityDiagnostics {
  double trace_error = 0.0;        // |tr(rho) - 1|
  double hermiticity_error = 0.0;  // max |rho - rho^dagger|
  double min_eigenvalue = 0.0;     // of (rho + rho^dagger)/2
};

struct DensityTolerance {
  double trace = 1e-10;
  double hermiticity = 1e-10;
  double min_eigenvalue = -1e-8;
};

DensityDiagnostics density_diagnostics(const CMatrix& rho);
bool is_density_matrix(const CMatrix& rho, const DensityTolerance& tol = {});
/// Throws kNumerical naming the violated invariant.
void check_density_matrix(const CMatrix& rho, const DensityTolerance& tol = {});

/// (rho + rho^dagger)/2.
CMatrix hermitize(const CMatrix& rho);

/// Ginibre-distributed full-rank state X X^dagger / tr(X X^dagger).
CMatrix random_density_matrix(Eigen::Index dim, std::mt19937_64& rng);
CVector random_pure_state(Eigen::Index dim, std::mt19937_64& rng);

using JumpOperatorSet = std::vector<Operator>;

/// {a / sqrt(T1)} and {a^dagger a / sqrt(T2)}, each only when its time is
/// given. Times must be positive.
JumpOperatorSet make_jump_operators(std::optional<double> t1, std::optional<double> t2,
                                    const Operator& lowering);

/// -i[H, rho] + sum_k (L_k rho L_k^dagger - 1/2 {L_k^dagger L_k, rho}).
CMatrix lindblad_rhs(const CMatrix& rho, const Operator& h, std::span<const Operator> jumps);

/// -i(I kron H - H^T kron I)
///   + sum_k [L_k^* kron L_k - 1/2 I kron L_k^dagger L_k - 1/2 (L_k^dagger L_k)^T kron I]
Superoperator build_liouvillian(const Operator& h, std::span<const Operator> jumps);

/// Liouvillian restricted to operators |i><j| with i in a ket subspace and j
/// in a bra subspace, given H and L_k already restricted to each subspace
/// (valid when all operators are block diagonal on those subspaces). With
/// both subspaces equal to the full space this is build_liouvillian().
Superoperator liouvillian_block(const Operator& h_ket, const Operator& h_bra,
                                std::span<const Operator> jumps_ket,
                                std::span<const Operator> jumps_bra);

/// Serial fixed-step RK4 integration of the Lindblad equation over `grid`,
/// `steps_per_slice` steps per slice, Hamiltonian rebuilt from `controls`.
/// Piecewise controls are held constant across each slice. No
/// renormalisation is applied.
CMatrix reference_evolve(const CMatrix& rho0, const Controls& controls, const SliceGrid& grid,
                         const DotSystem& system, std::span<const Operator> jumps,
                         int steps_per_slice);

/// Same, on the schedule's own grid.
CMatrix reference_evolve(const CMatrix& rho0, const PulseSchedule& schedule,
                         const DotSystem& system, std::span<const Operator> jumps,
                         int steps_per_slice);

}  // namespace qdsim
