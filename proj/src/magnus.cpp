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

#include "qdsim/magnus.hpp"

#include <algorithm>
#include <limits>
#include <chrono>
#include <cmath>

#include "qdsim/expm.hpp"

namespace qdsim {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

HilbertSectors sectors_for(const DotSystem& system, std::span<const Operator> jumps,
                           ExpansionStrategy strategy) {
  if (strategy == ExpansionStrategy::kDense) return trivial_sectors(system.dim());
  std::vector<Operator> ops;
  ops.push_back(system.static_hamiltonian());
  for (const Operator& h : system.hoppings()) ops.push_back(h);
  for (const Operator& l : jumps) ops.push_back(l);
  return find_sectors(ops, system.dim());
}

std::vector<Operator> restrict_all(const LiouvilleLayout& layout, std::span<const Operator> ops,
                                   int sector) {
  std::vector<Operator> out;
  out.reserve(ops.size());
  for (const Operator& op : ops) out.push_back(layout.restrict(op, sector));
  return out;
}

SliceGrid resolve_grid(const Controls& controls, const PropagatorOptions& options) {
  if (options.n_slices) return SliceGrid(controls.total_duration(), *options.n_slices);
  require(controls.is_piecewise(), ErrorKind::kInvalidArgument,
          "smooth control envelopes need an explicit slice count");
  return controls.schedule().grid();
}

}  // namespace

ExpansionStrategy parse_expansion_strategy(const std::string& name) {
  if (name == "dense") return ExpansionStrategy::kDense;
  if (name == "sectors") return ExpansionStrategy::kSectors;
  fail(ErrorKind::kConfig, "unknown propagator strategy '" + name + "' (expected dense or sectors)");
}

std::string to_string(ExpansionStrategy strategy) {
  return strategy == ExpansionStrategy::kDense ? "dense" : "sectors";
}

Superoperator average_liouvillian(int slice, const Controls& controls, const SliceGrid& grid,
                                  const DotSystem& system, std::span<const Operator> jumps,
                                  Quadrature rule) {
  require(slice >= 0 && slice < grid.n_slices(), ErrorKind::kInvalidArgument,
          "slice index " + std::to_string(slice) + " out of range");
  controls.check_grid(grid);
  const std::vector<double> hoppings = controls.slice_average(grid, slice, rule);
  return build_liouvillian(system.hamiltonian(hoppings), jumps) * grid.slice_width();
}

LiouvillianModel::LiouvillianModel(const DotSystem& system, JumpOperatorSet jumps,
                                   ExpansionStrategy strategy)
    : jumps_(std::move(jumps)) {
  for (const Operator& l : jumps_) {
    require(l.rows() == system.dim() && l.cols() == system.dim(), ErrorKind::kDimension,
            "jump operator dimension does not match the dot system");
  }
  layout_ = std::make_shared<const LiouvilleLayout>(sectors_for(system, jumps_, strategy));
  const LiouvilleLayout& layout = *layout_;
  const auto n_sectors = static_cast<int>(layout.sectors().members.size());

  std::vector<Operator> h0(static_cast<std::size_t>(n_sectors));
  std::vector<std::vector<Operator>> hk(static_cast<std::size_t>(system.n_bonds()));
  std::vector<std::vector<Operator>> lk(static_cast<std::size_t>(n_sectors));
  for (int s = 0; s < n_sectors; ++s) {
    h0[static_cast<std::size_t>(s)] = layout.restrict(system.static_hamiltonian(), s);
    lk[static_cast<std::size_t>(s)] = restrict_all(layout, jumps_, s);
    for (int k = 0; k < system.n_bonds(); ++k) {
      hk[static_cast<std::size_t>(k)].push_back(layout.restrict(system.hopping(k), s));
    }
  }

  hopping_blocks_.resize(static_cast<std::size_t>(system.n_bonds()));
  for (const auto& blk : layout.blocks()) {
    const auto a = static_cast<std::size_t>(blk.ket_sector);
    const auto b = static_cast<std::size_t>(blk.bra_sector);
    static_blocks_.push_back(liouvillian_block(h0[a], h0[b], lk[a], lk[b]));
    for (int k = 0; k < system.n_bonds(); ++k) {
      const auto& h = hk[static_cast<std::size_t>(k)];
      hopping_blocks_[static_cast<std::size_t>(k)].push_back(liouvillian_block(h[a], h[b], {}, {}));
    }
  }
}

std::vector<CMatrix> LiouvillianModel::generator(std::span<const double> hoppings,
                                                 double dt) const {
  std::vector<CMatrix> out(layout_->n_blocks());
  for (std::size_t b = 0; b < out.size(); ++b) out[b] = generator_block(hoppings, dt, b);
  return out;
}

CMatrix LiouvillianModel::generator_block(std::span<const double> hoppings, double dt,
                                          std::size_t block) const {
  require(hoppings.size() == hopping_blocks_.size(), ErrorKind::kInvalidArgument,
          "hopping count does not match the model");
  CMatrix g = static_blocks_.at(block);
  for (std::size_t k = 0; k < hoppings.size(); ++k) {
    if (hoppings[k] != 0.0) g += hoppings[k] * hopping_blocks_[k][block];
  }
  g *= dt;
  return g;
}

CMatrix LiouvillianModel::direction(int bond, std::size_t block, double dt) const {
  return dt * hopping_blocks_.at(static_cast<std::size_t>(bond)).at(block);
}

BlockSuperoperator exponentiate(const LayoutPtr& layout, const std::vector<CMatrix>& generator) {
  std::vector<CMatrix> blocks;
  blocks.reserve(generator.size());
  for (const CMatrix& g : generator) blocks.push_back(matrix_exponential(g));
  return BlockSuperoperator(layout, std::move(blocks));
}

std::vector<BlockSuperoperator> slice_propagators(const LiouvillianModel& model,
                                                  const Controls& controls, const SliceGrid& grid,
                                                  Quadrature rule, int workers) {
  require(controls.n_bonds() == model.n_bonds(), ErrorKind::kInvalidArgument,
          "controls and Liouvillian model disagree on the number of bonds");
  controls.check_grid(grid);
  const auto m = static_cast<std::size_t>(grid.n_slices());
  std::vector<std::optional<BlockSuperoperator>> slots(m);
  parallel_for(m, workers, [&](std::size_t n) {
    const std::vector<double> hoppings = controls.slice_average(grid, static_cast<int>(n), rule);
    slots[n].emplace(exponentiate(model.layout(), model.generator(hoppings, grid.slice_width())));
  });
  std::vector<BlockSuperoperator> out;
  out.reserve(m);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

Superoperator tree_reduce(std::span<const Superoperator> chunks, int workers) {
  require(!chunks.empty(), ErrorKind::kInvalidArgument, "tree reduction of an empty sequence");
  const Eigen::Index n = chunks.front().rows();
  for (const Superoperator& c : chunks) {
    require(c.rows() == n && c.cols() == n, ErrorKind::kDimension,
            "tree reduction operands must be square and of equal size");
  }
  std::vector<Superoperator> owned(chunks.begin(), chunks.end());
  return tree_reduce(std::move(owned), workers, [](const Superoperator& later, const Superoperator& earlier) {
    Superoperator out;
    out.noalias() = later * earlier;
    return out;
  });
}

SuperPropagator build_superpropagator(const Controls& controls, const DotSystem& system,
                                      std::span<const Operator> jumps,
                                      const PropagatorOptions& options) {
  require(options.workers >= 1, ErrorKind::kInvalidArgument, "workers must be >= 1");
  require(controls.n_bonds() == system.n_bonds(), ErrorKind::kInvalidArgument,
          "controls have " + std::to_string(controls.n_bonds()) + " bonds, the chain has " +
              std::to_string(system.n_bonds()));
  const SliceGrid grid = resolve_grid(controls, options);
  controls.check_grid(grid);

  TimingBreakdown timing;
  const auto expansion_start = Clock::now();
  const LiouvillianModel model(system, JumpOperatorSet(jumps.begin(), jumps.end()), options.strategy);
  std::vector<BlockSuperoperator> slices =
      slice_propagators(model, controls, grid, options.quadrature, options.workers);
  timing.expansion_seconds = seconds_since(expansion_start);

  const auto reduction_start = Clock::now();
  // BlockSuperoperator has no default state; wrap for the level vectors.
  std::vector<std::optional<BlockSuperoperator>> chunks(slices.size());
  for (std::size_t i = 0; i < slices.size(); ++i) chunks[i].emplace(std::move(slices[i]));
  const auto product = tree_reduce(
      std::move(chunks), options.workers,
      [](const std::optional<BlockSuperoperator>& later,
         const std::optional<BlockSuperoperator>& earlier) {
        return std::optional<BlockSuperoperator>(*later * *earlier);
      });
  Superoperator dense = product->to_dense();
  timing.reduction_seconds = seconds_since(reduction_start);

  return SuperPropagator{std::move(dense), grid, timing};
}

CMatrix apply_propagator(const Superoperator& u, const CMatrix& rho0) {
  require(rho0.rows() == rho0.cols() && u.rows() == u.cols() &&
              u.cols() == rho0.rows() * rho0.cols(),
          ErrorKind::kDimension, "propagator and density matrix dimensions differ");
  return hermitize(unvectorize(u * vectorize(rho0)));
}

CMatrix apply_propagator(const SuperPropagator& u, const CMatrix& rho0) {
  return apply_propagator(u.entries, rho0);
}

namespace {

// Eigenvalues of a PSD matrix below the round-off floor are zero, not
// tiny positives whose square roots would swamp the result.
RVector clipped_spectrum(const RVector& eigenvalues) {
  const double floor = static_cast<double>(eigenvalues.size()) *
                       std::numeric_limits<double>::epsilon() *
                       std::max(1.0, eigenvalues.cwiseAbs().maxCoeff());
  return eigenvalues.unaryExpr([floor](double x) { return x <= floor ? 0.0 : x; });
}

}  // namespace

CMatrix psd_sqrt(const CMatrix& a) {
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(hermitize(a));
  const RVector roots = clipped_spectrum(eig.eigenvalues()).cwiseSqrt();
  return eig.eigenvectors() * roots.cast<Complex>().asDiagonal() * eig.eigenvectors().adjoint();
}

double uhlmann_fidelity(const CMatrix& rho, const CMatrix& sigma) {
  require(rho.rows() == rho.cols() && sigma.rows() == sigma.cols() && rho.rows() == sigma.rows(),
          ErrorKind::kDimension, "fidelity operands must be square and of equal size");
  constexpr double kHermitianTol = 1e-8;
  require(max_abs(rho - rho.adjoint()) <= kHermitianTol &&
              max_abs(sigma - sigma.adjoint()) <= kHermitianTol,
          ErrorKind::kInvalidArgument, "fidelity operands must be Hermitian");
  const CMatrix root = psd_sqrt(rho);
  const CMatrix inner = hermitize(root * hermitize(sigma) * root);
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(inner, Eigen::EigenvaluesOnly);
  const double trace = clipped_spectrum(eig.eigenvalues()).cwiseSqrt().sum();
  return std::clamp(trace * trace, 0.0, 1.0);
}

double estimate_working_set_bytes(const DotSystem& system, std::span<const Operator> jumps,
                                  int n_slices, ExpansionStrategy strategy) {
  constexpr double kComplexBytes = 16.0;
  const auto d2 = static_cast<double>(system.dim()) * static_cast<double>(system.dim());
  const double dense = d2 * d2 * kComplexBytes;
  // Slices plus the exponential's scratch matrices (about six of them).
  const double live = static_cast<double>(n_slices) + 6.0;
  if (strategy == ExpansionStrategy::kDense) return live * dense + dense;
  const LiouvilleLayout layout(sectors_for(system, jumps, strategy));
  double blocks = 0.0;
  for (std::size_t b = 0; b < layout.n_blocks(); ++b) {
    const auto n = static_cast<double>(layout.block_size(b));
    blocks += n * n * kComplexBytes;
  }
  return live * blocks + dense;
}

}  // namespace qdsim
