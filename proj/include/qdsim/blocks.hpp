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

#include <memory>
#include <span>
#include <vector>

#include "qdsim/common.hpp"

namespace qdsim {

/// Partition of the Hilbert basis into subspaces that every operator of a
/// model maps into themselves.
struct HilbertSectors {
  Eigen::Index dim = 0;
  /// Ascending basis indices per sector; sectors ordered by first member.
  std::vector<std::vector<Eigen::Index>> members;
};

/// Finest partition compatible with the nonzero pattern of every operator
/// (connected components of the graph i ~ j whenever some op(i, j) != 0).
HilbertSectors find_sectors(std::span<const Operator> ops, Eigen::Index dim);

/// Single sector holding the whole space.
HilbertSectors trivial_sectors(Eigen::Index dim);

/// Liouville space split by (ket sector, bra sector). Block (a, b) spans the
/// operators |i><j| with i in sector a, j in sector b; its local index is
/// i_local + |a| * j_local, so a trivial partition reproduces the dense
/// column-stacked layout exactly.
class LiouvilleLayout {
 public:
  struct Block {
    int ket_sector;
    int bra_sector;
    std::vector<Eigen::Index> indices;  // positions in the dense D^2 vector
  };

  explicit LiouvilleLayout(HilbertSectors sectors);

  const HilbertSectors& sectors() const { return sectors_; }
  Eigen::Index hilbert_dim() const { return sectors_.dim; }
  Eigen::Index liouville_dim() const { return sectors_.dim * sectors_.dim; }
  std::size_t n_blocks() const { return blocks_.size(); }
  const Block& block(std::size_t b) const { return blocks_[b]; }
  const std::vector<Block>& blocks() const { return blocks_; }
  Eigen::Index block_size(std::size_t b) const {
    return static_cast<Eigen::Index>(blocks_[b].indices.size());
  }

  /// Restriction op(ket sector rows, ket sector cols) of a sector-diagonal operator.
  Operator restrict(const Operator& op, int sector) const;

 private:
  HilbertSectors sectors_;
  std::vector<Block> blocks_;
};

using LayoutPtr = std::shared_ptr<const LiouvilleLayout>;

/// Superoperator that is block diagonal on a LiouvilleLayout.
class BlockSuperoperator {
 public:
  BlockSuperoperator(LayoutPtr layout, std::vector<CMatrix> blocks);

  static BlockSuperoperator identity(LayoutPtr layout);

  const LiouvilleLayout& layout() const { return *layout_; }
  const LayoutPtr& layout_ptr() const { return layout_; }
  const std::vector<CMatrix>& blocks() const { return blocks_; }
  const CMatrix& block(std::size_t b) const { return blocks_[b]; }

  /// this * rhs; both on the same layout.
  BlockSuperoperator operator*(const BlockSuperoperator& rhs) const;

  Superoperator to_dense() const;
  /// this * x for a D^2 x k matrix x.
  CMatrix apply(const CMatrix& x) const;
  /// x * this for a k x D^2 matrix x.
  CMatrix apply_left(const CMatrix& x) const;

 private:
  LayoutPtr layout_;
  std::vector<CMatrix> blocks_;
};

/// Rows of `x` at a block's dense indices.
CMatrix gather_rows(const CMatrix& x, const std::vector<Eigen::Index>& indices);
CMatrix gather_cols(const CMatrix& x, const std::vector<Eigen::Index>& indices);

}  // namespace qdsim
