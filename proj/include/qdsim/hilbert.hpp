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

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "qdsim/common.hpp"

namespace qdsim {

/// Per-dot occupation. The enumerator value is the base-4 digit of the dot
/// in the basis index: bit 0 flags a spin-up electron, bit 1 a spin-down one.
enum class DotOccupation : std::uint8_t { kEmpty = 0, kUp = 1, kDown = 2, kUpDown = 3 };

enum class Spin : std::uint8_t { kUp = 0, kDown = 1 };

struct DotBasisState {
  std::vector<DotOccupation> occupations;

  /// Base-4 index, dot 0 most significant.
  std::size_t index() const;
  /// Ket label such as "|↑,↑↓,0⟩".
  std::string ket() const;

  friend bool operator==(const DotBasisState&, const DotBasisState&) = default;
};

/// 4^n_dots, or a kCapacity error when the chain is empty or the dimension
/// would overflow std::size_t.
std::size_t hilbert_dimension(int n_dots);

/// All 4^N basis states in index order.
std::vector<DotBasisState> enumerate_basis(int n_dots);

/// Inverse of DotBasisState::index().
DotBasisState basis_state(std::size_t index, int n_dots);

/// Fermionic c^dagger_{dot,spin} on the full chain. Modes are ordered
/// dot-major with spin up before spin down; the Jordan-Wigner string counts
/// occupied modes that precede the target mode.
Operator creation_operator(int dot, Spin spin, int n_dots);
Operator annihilation_operator(int dot, Spin spin, int n_dots);

/// n_i = sum_sigma c^dagger_{i sigma} c_{i sigma}.
Operator number_operator(int dot, int n_dots);

/// sum_sigma (c^dagger_{i sigma} c_{i+1 sigma} + h.c.) for bond i = (i, i+1).
Operator hopping_operator(int bond, int n_dots);

struct HubbardParams {
  double u_onsite = 0.0;
  std::vector<double> chem_potential;
  double u_neighbor = 0.0;
  int n_dots = 1;

  /// Throws kInvalidArgument on n_dots < 1, a chem_potential length other
  /// than n_dots, or non-finite energies.
  void validate() const;
};

/// Hubbard Hamiltonian of a linear chain with nearest-neighbour hoppings
/// t_{i,i+1} = hoppings[i]:
///   sum_i [U/2 n_i(n_i - 1) + V_i n_i] + sum_i U_C n_i n_{i+1}
///   + sum_i sum_sigma t_{i,i+1}(c^dagger_{i sigma} c_{i+1 sigma} + h.c.)
Operator build_hubbard(const HubbardParams& params, std::span<const double> hoppings);

/// Pre-built operators for one chain. H(t) = static_hamiltonian() +
/// sum_k t_k hopping(k). Immutable once constructed.
class DotSystem {
 public:
  explicit DotSystem(HubbardParams params);

  const HubbardParams& params() const { return params_; }
  int n_dots() const { return params_.n_dots; }
  int n_bonds() const { return params_.n_dots - 1; }
  Eigen::Index dim() const { return static_hamiltonian_.rows(); }

  const Operator& static_hamiltonian() const { return static_hamiltonian_; }
  const Operator& hopping(int bond) const { return hoppings_.at(static_cast<std::size_t>(bond)); }
  const std::vector<Operator>& hoppings() const { return hoppings_; }

  Operator hamiltonian(std::span<const double> hoppings) const;

 private:
  HubbardParams params_;
  Operator static_hamiltonian_;
  std::vector<Operator> hoppings_;
};

enum class EncodingVariant {
  /// |1> = (2|↑↑↑> - |↑↑↓> - |↓↑↑>)/sqrt(6), exactly as commonly printed.
  kAsPrinted,
  /// |1> = (2|↑↓↑> - |↑↑↓> - |↓↑↑>)/sqrt(6), the usual exchange-only state.
  kStandardDfs,
};

EncodingVariant parse_encoding_variant(const std::string& name);
std::string to_string(EncodingVariant variant);

/// Two orthonormal Hilbert-space vectors spanning a qubit subspace, plus the
/// D^2 x 2 projection whose columns are vec(|phi_k><phi_k|). `projection` is
/// empty until projection_matrix() fills it.
struct LogicalEncoding {
  CVector phi0;
  CVector phi1;
  CMatrix projection;
};

/// Exchange-only logical qubit on three dots:
///   phi0 = (|↑↑↓> - |↓↑↑>)/sqrt(2), phi1 per `variant`.
/// Only vectors are filled. Throws kInvalidArgument unless n_dots == 3.
LogicalEncoding logical_basis_vectors(int n_dots, EncodingVariant variant);

/// Reference two-level pair for chains where no logical encoding exists:
/// N = 1 uses (|↑>, |↓>), N = 2 uses (|↑,↓>, |↓,↑>); N = 3 defers to
/// logical_basis_vectors. Vectors only.
LogicalEncoding reference_pair(int n_dots, EncodingVariant variant = EncodingVariant::kAsPrinted);

/// D^2 x 2 matrix [vec(|phi0><phi0|), vec(|phi1><phi1|)] (column stacking).
CMatrix projection_matrix(const LogicalEncoding& encoding);

/// D^2 x 4 matrix with columns vec(|phi_i><phi_j|) ordered (0,0), (1,0),
/// (0,1), (1,1), the column-stacked order of a logical 2x2 matrix. Carries
/// the coherences that projection_matrix() discards.
CMatrix extended_projection_matrix(const LogicalEncoding& encoding);

/// Fills `projection` in place and returns the encoding.
LogicalEncoding with_projection(LogicalEncoding encoding);

/// Logical lowering operator a = |phi0><phi1|.
Operator logical_lowering(const LogicalEncoding& encoding);

}  // namespace qdsim
