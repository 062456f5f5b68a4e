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
#include <span>
#include <string>
#include <vector>

#include "qdsim/blocks.hpp"
#include "qdsim/common.hpp"
#include "qdsim/controls.hpp"
#include "qdsim/hilbert.hpp"
#include "qdsim/liouville.hpp"
#include "qdsim/parallel.hpp"

namespace qdsim {

/// How slice exponentials are evaluated.
enum class ExpansionStrategy {
  /// One dense D^2 x D^2 exponential per slice.
  kDense,
  /// Exponentiate each (ket sector, bra sector) block separately. Exact
  /// whenever the Hamiltonian terms and jump operators share a block
  /// structure, which find_sectors() guarantees by construction.
  kSectors,
};

ExpansionStrategy parse_expansion_strategy(const std::string& name);
std::string to_string(ExpansionStrategy strategy);

struct PropagatorOptions {
  int workers = 1;
  /// Slice count M. Defaults to the schedule's slices for piecewise controls;
  /// required for smooth envelopes.
  std::optional<int> n_slices;
  Quadrature quadrature = Quadrature::kMidpoint;
  ExpansionStrategy strategy = ExpansionStrategy::kSectors;
};

struct TimingBreakdown {
  double expansion_seconds = 0.0;
  double reduction_seconds = 0.0;
  double total_seconds() const { return expansion_seconds + reduction_seconds; }
};

struct SuperPropagator {
  Superoperator entries;
  SliceGrid grid;
  TimingBreakdown timing;
};

/// Integral of L(t) over slice `slice` as a dense superoperator:
/// L(c_n) dt for piecewise controls, quadrature rule otherwise. L is affine
/// in the hoppings so either rule reduces to L at the averaged hoppings.
Superoperator average_liouvillian(int slice, const Controls& controls, const SliceGrid& grid,
                                  const DotSystem& system, std::span<const Operator> jumps,
                                  Quadrature rule = Quadrature::kMidpoint);

/// Liouvillian of a dot system split on a LiouvilleLayout, stored as
/// L(t) = L_static + sum_k t_k L_k per block.
class LiouvillianModel {
 public:
  LiouvillianModel(const DotSystem& system, JumpOperatorSet jumps, ExpansionStrategy strategy);

  const LayoutPtr& layout() const { return layout_; }
  int n_bonds() const { return static_cast<int>(hopping_blocks_.size()); }
  const JumpOperatorSet& jumps() const { return jumps_; }

  /// dt * L(hoppings), block by block.
  std::vector<CMatrix> generator(std::span<const double> hoppings, double dt) const;
  CMatrix generator_block(std::span<const double> hoppings, double dt, std::size_t block) const;
  /// dt * dL/dt_bond for block b.
  CMatrix direction(int bond, std::size_t block, double dt) const;

 private:
  LayoutPtr layout_;
  JumpOperatorSet jumps_;
  std::vector<CMatrix> static_blocks_;
  std::vector<std::vector<CMatrix>> hopping_blocks_;  // [bond][block]
};

/// exp(G) block by block.
BlockSuperoperator exponentiate(const LayoutPtr& layout, const std::vector<CMatrix>& generator);

/// Per-slice propagators U_{t_{n+1}, t_n} in time order, computed as a
/// parallel map over `workers`.
std::vector<BlockSuperoperator> slice_propagators(const LiouvillianModel& model,
                                                  const Controls& controls, const SliceGrid& grid,
                                                  Quadrature rule, int workers);

/// Ordered product chunks[M-1] * ... * chunks[0] (later slices on the
/// left), evaluated as a balanced pairwise tree whose shape depends only on
/// the number of chunks: each level multiplies neighbours (2i+1, 2i) and
/// carries an odd tail upward. Products within a level run on `workers`.
template <typename T, typename Multiply>
T tree_reduce(std::vector<T> chunks, int workers, Multiply multiply) {
  require(!chunks.empty(), ErrorKind::kInvalidArgument, "tree reduction of an empty sequence");
  while (chunks.size() > 1) {
    const std::size_t pairs = chunks.size() / 2;
    std::vector<T> next(pairs + chunks.size() % 2);
    parallel_for(pairs, workers, [&](std::size_t i) {
      next[i] = multiply(chunks[2 * i + 1], chunks[2 * i]);
    });
    if (chunks.size() % 2 == 1) next.back() = std::move(chunks.back());
    chunks = std::move(next);
  }
  return std::move(chunks.front());
}

/// Dense tree reduction; all chunks D^2 x D^2 of one size.
Superoperator tree_reduce(std::span<const Superoperator> chunks, int workers = 1);

/// Slices, exponentiates and reduces. Output is bit-identical for every
/// worker count.
SuperPropagator build_superpropagator(const Controls& controls, const DotSystem& system,
                                      std::span<const Operator> jumps,
                                      const PropagatorOptions& options = {});

/// unvectorize(U vec(rho0)), Hermitized.
CMatrix apply_propagator(const Superoperator& u, const CMatrix& rho0);
CMatrix apply_propagator(const SuperPropagator& u, const CMatrix& rho0);

/// Hermitian PSD square root; negative eigenvalues clipped to zero.
CMatrix psd_sqrt(const CMatrix& a);

/// (tr sqrt(sqrt(rho) sigma sqrt(rho)))^2, clamped to [0, 1].
double uhlmann_fidelity(const CMatrix& rho, const CMatrix& sigma);

/// Bytes of working memory build_superpropagator needs for M slices, used
/// by the benchmark's memory guard.
double estimate_working_set_bytes(const DotSystem& system, std::span<const Operator> jumps,
                                  int n_slices, ExpansionStrategy strategy);

}  // namespace qdsim
