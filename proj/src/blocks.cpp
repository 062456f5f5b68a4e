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

#include "qdsim/blocks.hpp"

#include <algorithm>
#include <numeric>
#include <string>

namespace qdsim {
namespace {

class DisjointSets {
 public:
  explicit DisjointSets(Eigen::Index n) : parent_(static_cast<std::size_t>(n)) {
    std::iota(parent_.begin(), parent_.end(), Eigen::Index{0});
  }

  Eigen::Index find(Eigen::Index x) {
    while (parent_[static_cast<std::size_t>(x)] != x) {
      auto& p = parent_[static_cast<std::size_t>(x)];
      p = parent_[static_cast<std::size_t>(p)];
      x = p;
    }
    return x;
  }

  void unite(Eigen::Index a, Eigen::Index b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (b < a) std::swap(a, b);
    parent_[static_cast<std::size_t>(b)] = a;
  }

 private:
  std::vector<Eigen::Index> parent_;
};

}  // namespace

HilbertSectors find_sectors(std::span<const Operator> ops, Eigen::Index dim) {
  DisjointSets sets(dim);
  for (const Operator& op : ops) {
    require(op.rows() == dim && op.cols() == dim, ErrorKind::kDimension,
            "operator dimension does not match the sector search");
    for (Eigen::Index j = 0; j < dim; ++j) {
      for (Eigen::Index i = 0; i < dim; ++i) {
        if (op(i, j) != Complex(0.0, 0.0)) sets.unite(i, j);
      }
    }
  }
  HilbertSectors out;
  out.dim = dim;
  std::vector<int> sector_of_root(static_cast<std::size_t>(dim), -1);
  for (Eigen::Index i = 0; i < dim; ++i) {
    const Eigen::Index root = sets.find(i);
    int& sector = sector_of_root[static_cast<std::size_t>(root)];
    if (sector < 0) {
      sector = static_cast<int>(out.members.size());
      out.members.emplace_back();
    }
    out.members[static_cast<std::size_t>(sector)].push_back(i);
  }
  return out;
}

HilbertSectors trivial_sectors(Eigen::Index dim) {
  HilbertSectors out;
  out.dim = dim;
  out.members.emplace_back(static_cast<std::size_t>(dim));
  std::iota(out.members[0].begin(), out.members[0].end(), Eigen::Index{0});
  return out;
}

LiouvilleLayout::LiouvilleLayout(HilbertSectors sectors) : sectors_(std::move(sectors)) {
  const Eigen::Index d = sectors_.dim;
  const int n = static_cast<int>(sectors_.members.size());
  for (int bra = 0; bra < n; ++bra) {
    for (int ket = 0; ket < n; ++ket) {
      Block blk{ket, bra, {}};
      const auto& kets = sectors_.members[static_cast<std::size_t>(ket)];
      const auto& bras = sectors_.members[static_cast<std::size_t>(bra)];
      blk.indices.reserve(kets.size() * bras.size());
      for (Eigen::Index j : bras) {
        for (Eigen::Index i : kets) blk.indices.push_back(i + d * j);
      }
      blocks_.push_back(std::move(blk));
    }
  }
}

Operator LiouvilleLayout::restrict(const Operator& op, int sector) const {
  const auto& idx = sectors_.members.at(static_cast<std::size_t>(sector));
  return op(idx, idx);
}

BlockSuperoperator::BlockSuperoperator(LayoutPtr layout, std::vector<CMatrix> blocks)
    : layout_(std::move(layout)), blocks_(std::move(blocks)) {
  require(layout_ != nullptr, ErrorKind::kInvalidArgument, "null Liouville layout");
  require(blocks_.size() == layout_->n_blocks(), ErrorKind::kDimension,
          "block count does not match the Liouville layout");
  for (std::size_t b = 0; b < blocks_.size(); ++b) {
    const Eigen::Index n = layout_->block_size(b);
    require(blocks_[b].rows() == n && blocks_[b].cols() == n, ErrorKind::kDimension,
            "block " + std::to_string(b) + " has the wrong shape");
  }
}

BlockSuperoperator BlockSuperoperator::identity(LayoutPtr layout) {
  std::vector<CMatrix> blocks;
  for (std::size_t b = 0; b < layout->n_blocks(); ++b) {
    const Eigen::Index n = layout->block_size(b);
    blocks.push_back(CMatrix::Identity(n, n));
  }
  return BlockSuperoperator(std::move(layout), std::move(blocks));
}

BlockSuperoperator BlockSuperoperator::operator*(const BlockSuperoperator& rhs) const {
  require(layout_ == rhs.layout_, ErrorKind::kDimension,
          "multiplying superoperators on different layouts");
  std::vector<CMatrix> out(blocks_.size());
  for (std::size_t b = 0; b < blocks_.size(); ++b) out[b].noalias() = blocks_[b] * rhs.blocks_[b];
  return BlockSuperoperator(layout_, std::move(out));
}

Superoperator BlockSuperoperator::to_dense() const {
  const Eigen::Index n = layout_->liouville_dim();
  if (blocks_.size() == 1) return blocks_[0];  // trivial layout is already dense order
  Superoperator dense = Superoperator::Zero(n, n);
  for (std::size_t b = 0; b < blocks_.size(); ++b) {
    const auto& idx = layout_->block(b).indices;
    dense(idx, idx) = blocks_[b];
  }
  return dense;
}

CMatrix gather_rows(const CMatrix& x, const std::vector<Eigen::Index>& indices) {
  return x(indices, Eigen::all);
}

CMatrix gather_cols(const CMatrix& x, const std::vector<Eigen::Index>& indices) {
  return x(Eigen::all, indices);
}

CMatrix BlockSuperoperator::apply(const CMatrix& x) const {
  require(x.rows() == layout_->liouville_dim(), ErrorKind::kDimension,
          "operand rows do not match the Liouville dimension");
  CMatrix out = CMatrix::Zero(x.rows(), x.cols());
  for (std::size_t b = 0; b < blocks_.size(); ++b) {
    const auto& idx = layout_->block(b).indices;
    out(idx, Eigen::all) = blocks_[b] * gather_rows(x, idx);
  }
  return out;
}

CMatrix BlockSuperoperator::apply_left(const CMatrix& x) const {
  require(x.cols() == layout_->liouville_dim(), ErrorKind::kDimension,
          "operand columns do not match the Liouville dimension");
  CMatrix out = CMatrix::Zero(x.rows(), x.cols());
  for (std::size_t b = 0; b < blocks_.size(); ++b) {
    const auto& idx = layout_->block(b).indices;
    out(Eigen::all, idx) = gather_cols(x, idx) * blocks_[b];
  }
  return out;
}

}  // namespace qdsim
