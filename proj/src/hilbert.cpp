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

#include "qdsim/hilbert.hpp"

#include <bit>
#include <cmath>
#include <limits>

namespace qdsim {
namespace {

constexpr int kMaxDots = (std::numeric_limits<std::size_t>::digits / 2) - 1;

int digit_shift(int dot, int n_dots) { return 2 * (n_dots - 1 - dot); }

void require_dot(int dot, int n_dots) {
  require(dot >= 0 && dot < n_dots, ErrorKind::kInvalidArgument,
          "dot index " + std::to_string(dot) + " out of range for " + std::to_string(n_dots) +
              " dots");
}

CVector ket(Eigen::Index dim, std::initializer_list<std::pair<std::size_t, double>> entries) {
  CVector v = CVector::Zero(dim);
  for (const auto& [index, amplitude] : entries) v(static_cast<Eigen::Index>(index)) = amplitude;
  return v;
}

}  // namespace

std::size_t DotBasisState::index() const {
  std::size_t value = 0;
  for (DotOccupation occ : occupations) value = value * 4 + static_cast<std::size_t>(occ);
  return value;
}

std::string DotBasisState::ket() const {
  std::string out = "|";
  for (std::size_t i = 0; i < occupations.size(); ++i) {
    if (i > 0) out += ",";
    switch (occupations[i]) {
      case DotOccupation::kEmpty: out += "0"; break;
      case DotOccupation::kUp: out += "↑"; break;
      case DotOccupation::kDown: out += "↓"; break;
      case DotOccupation::kUpDown: out += "↑↓"; break;
    }
  }
  return out + "⟩";
}

std::size_t hilbert_dimension(int n_dots) {
  require(n_dots >= 1, ErrorKind::kCapacity, "a chain needs at least one dot");
  require(n_dots <= kMaxDots, ErrorKind::kCapacity,
          "4^" + std::to_string(n_dots) + " basis states overflow the index type");
  return std::size_t{1} << (2 * n_dots);
}

DotBasisState basis_state(std::size_t index, int n_dots) {
  const std::size_t dim = hilbert_dimension(n_dots);
  require(index < dim, ErrorKind::kInvalidArgument, "basis index out of range");
  DotBasisState state;
  state.occupations.resize(static_cast<std::size_t>(n_dots));
  for (int dot = 0; dot < n_dots; ++dot) {
    state.occupations[static_cast<std::size_t>(dot)] =
        static_cast<DotOccupation>((index >> digit_shift(dot, n_dots)) & 3U);
  }
  return state;
}

std::vector<DotBasisState> enumerate_basis(int n_dots) {
  const std::size_t dim = hilbert_dimension(n_dots);
  std::vector<DotBasisState> states;
  states.reserve(dim);
  for (std::size_t i = 0; i < dim; ++i) states.push_back(basis_state(i, n_dots));
  return states;
}

Operator creation_operator(int dot, Spin spin, int n_dots) {
  const std::size_t dim = hilbert_dimension(n_dots);
  require_dot(dot, n_dots);
  const int shift = digit_shift(dot, n_dots);
  const std::size_t mode_bit = std::size_t{1} << (shift + static_cast<int>(spin));
  Operator op = Operator::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  for (std::size_t s = 0; s < dim; ++s) {
    if ((s & mode_bit) != 0) continue;
    // Modes preceding (dot, spin): every mode of earlier dots, plus the
    // spin-up mode of this dot when creating spin down. Earlier dots sit in
    // the more significant digits.
    int preceding = std::popcount(s >> (shift + 2));
    if (spin == Spin::kDown) preceding += static_cast<int>((s >> shift) & 1U);
    const double sign = (preceding % 2 == 0) ? 1.0 : -1.0;
    op(static_cast<Eigen::Index>(s | mode_bit), static_cast<Eigen::Index>(s)) = sign;
  }
  return op;
}

Operator annihilation_operator(int dot, Spin spin, int n_dots) {
  return creation_operator(dot, spin, n_dots).adjoint();
}

Operator number_operator(int dot, int n_dots) {
  const std::size_t dim = hilbert_dimension(n_dots);
  require_dot(dot, n_dots);
  const int shift = digit_shift(dot, n_dots);
  RVector diag(static_cast<Eigen::Index>(dim));
  for (std::size_t s = 0; s < dim; ++s) {
    diag(static_cast<Eigen::Index>(s)) = std::popcount((s >> shift) & 3U);
  }
  return diag.cast<Complex>().asDiagonal();
}

Operator hopping_operator(int bond, int n_dots) {
  require(bond >= 0 && bond + 1 < n_dots, ErrorKind::kInvalidArgument,
          "bond " + std::to_string(bond) + " out of range for " + std::to_string(n_dots) + " dots");
  Operator op = Operator::Zero(static_cast<Eigen::Index>(hilbert_dimension(n_dots)),
                               static_cast<Eigen::Index>(hilbert_dimension(n_dots)));
  for (Spin spin : {Spin::kUp, Spin::kDown}) {
    const Operator forward =
        creation_operator(bond, spin, n_dots) * annihilation_operator(bond + 1, spin, n_dots);
    op += forward + forward.adjoint();
  }
  return op;
}

void HubbardParams::validate() const {
  require(n_dots >= 1, ErrorKind::kInvalidArgument, "n_dots must be at least 1");
  require(chem_potential.size() == static_cast<std::size_t>(n_dots), ErrorKind::kInvalidArgument,
          "chem_potential needs one entry per dot (" + std::to_string(n_dots) + "), got " +
              std::to_string(chem_potential.size()));
  require(std::isfinite(u_onsite) && std::isfinite(u_neighbor), ErrorKind::kInvalidArgument,
          "Hubbard energies must be finite");
  for (double v : chem_potential) {
    require(std::isfinite(v), ErrorKind::kInvalidArgument, "chemical potentials must be finite");
  }
}

Operator build_hubbard(const HubbardParams& params, std::span<const double> hoppings) {
  params.validate();
  const int n = params.n_dots;
  require(hoppings.size() == static_cast<std::size_t>(n - 1), ErrorKind::kInvalidArgument,
          "expected " + std::to_string(n - 1) + " hopping amplitudes, got " +
              std::to_string(hoppings.size()));
  const auto dim = static_cast<Eigen::Index>(hilbert_dimension(n));
  const Operator identity = Operator::Identity(dim, dim);

  std::vector<Operator> numbers;
  numbers.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) numbers.push_back(number_operator(i, n));

  Operator h = Operator::Zero(dim, dim);
  for (int i = 0; i < n; ++i) {
    const Operator& ni = numbers[static_cast<std::size_t>(i)];
    h += (params.u_onsite / 2.0) * (ni * (ni - identity));
    h += params.chem_potential[static_cast<std::size_t>(i)] * ni;
  }
  for (int i = 0; i + 1 < n; ++i) {
    h += params.u_neighbor * (numbers[static_cast<std::size_t>(i)] *
                              numbers[static_cast<std::size_t>(i + 1)]);
    const double t = hoppings[static_cast<std::size_t>(i)];
    require(std::isfinite(t), ErrorKind::kInvalidArgument, "hopping amplitudes must be finite");
    if (t != 0.0) h += t * hopping_operator(i, n);
  }
  return h;
}

DotSystem::DotSystem(HubbardParams params) : params_(std::move(params)) {
  params_.validate();
  const std::vector<double> zeros(static_cast<std::size_t>(params_.n_dots - 1), 0.0);
  static_hamiltonian_ = build_hubbard(params_, zeros);
  for (int bond = 0; bond < n_bonds(); ++bond) {
    hoppings_.push_back(hopping_operator(bond, params_.n_dots));
  }
}

Operator DotSystem::hamiltonian(std::span<const double> hoppings) const {
  require(hoppings.size() == static_cast<std::size_t>(n_bonds()), ErrorKind::kInvalidArgument,
          "expected " + std::to_string(n_bonds()) + " hopping amplitudes, got " +
              std::to_string(hoppings.size()));
  Operator h = static_hamiltonian_;
  for (std::size_t k = 0; k < hoppings.size(); ++k) {
    if (hoppings[k] != 0.0) h += hoppings[k] * hoppings_[k];
  }
  return h;
}

EncodingVariant parse_encoding_variant(const std::string& name) {
  if (name == "as-printed") return EncodingVariant::kAsPrinted;
  if (name == "standard-dfs") return EncodingVariant::kStandardDfs;
  fail(ErrorKind::kConfig, "unknown encoding '" + name + "' (expected as-printed or standard-dfs)");
}

std::string to_string(EncodingVariant variant) {
  return variant == EncodingVariant::kAsPrinted ? "as-printed" : "standard-dfs";
}

LogicalEncoding logical_basis_vectors(int n_dots, EncodingVariant variant) {
  require(n_dots == 3, ErrorKind::kInvalidArgument,
          "the exchange-only logical encoding needs exactly 3 dots, got " + std::to_string(n_dots));
  using O = DotOccupation;
  const auto idx = [](O a, O b, O c) { return DotBasisState{{a, b, c}}.index(); };
  const std::size_t uud = idx(O::kUp, O::kUp, O::kDown);
  const std::size_t duu = idx(O::kDown, O::kUp, O::kUp);
  const std::size_t third = variant == EncodingVariant::kAsPrinted ? idx(O::kUp, O::kUp, O::kUp)
                                                                   : idx(O::kUp, O::kDown, O::kUp);
  const double r2 = 1.0 / std::sqrt(2.0);
  const double r6 = 1.0 / std::sqrt(6.0);
  LogicalEncoding enc;
  enc.phi0 = ket(64, {{uud, r2}, {duu, -r2}});
  enc.phi1 = ket(64, {{third, 2.0 * r6}, {uud, -r6}, {duu, -r6}});
  return enc;
}

LogicalEncoding reference_pair(int n_dots, EncodingVariant variant) {
  using O = DotOccupation;
  const auto dim = static_cast<Eigen::Index>(hilbert_dimension(n_dots));
  LogicalEncoding enc;
  switch (n_dots) {
    case 1:
      enc.phi0 = ket(dim, {{DotBasisState{{O::kUp}}.index(), 1.0}});
      enc.phi1 = ket(dim, {{DotBasisState{{O::kDown}}.index(), 1.0}});
      return enc;
    case 2:
      enc.phi0 = ket(dim, {{DotBasisState{{O::kUp, O::kDown}}.index(), 1.0}});
      enc.phi1 = ket(dim, {{DotBasisState{{O::kDown, O::kUp}}.index(), 1.0}});
      return enc;
    case 3:
      return logical_basis_vectors(3, variant);
    default:
      fail(ErrorKind::kInvalidArgument,
           "no reference qubit pair defined for " + std::to_string(n_dots) + " dots");
  }
}

CMatrix projection_matrix(const LogicalEncoding& encoding) {
  require(encoding.phi0.size() == encoding.phi1.size() && encoding.phi0.size() > 0,
          ErrorKind::kDimension, "encoding vectors must be nonempty and of equal length");
  const Eigen::Index dim = encoding.phi0.size();
  CMatrix p(dim * dim, 2);
  const CMatrix rho0 = encoding.phi0 * encoding.phi0.adjoint();
  const CMatrix rho1 = encoding.phi1 * encoding.phi1.adjoint();
  p.col(0) = rho0.reshaped();
  p.col(1) = rho1.reshaped();
  return p;
}

CMatrix extended_projection_matrix(const LogicalEncoding& encoding) {
  require(encoding.phi0.size() == encoding.phi1.size() && encoding.phi0.size() > 0,
          ErrorKind::kDimension, "encoding vectors must be nonempty and of equal length");
  const Eigen::Index dim = encoding.phi0.size();
  const CVector* phis[2] = {&encoding.phi0, &encoding.phi1};
  CMatrix p(dim * dim, 4);
  for (int j = 0; j < 2; ++j) {
    for (int i = 0; i < 2; ++i) {
      const CMatrix outer = (*phis[i]) * phis[j]->adjoint();
      p.col(i + 2 * j) = outer.reshaped();
    }
  }
  return p;
}

LogicalEncoding with_projection(LogicalEncoding encoding) {
  encoding.projection = projection_matrix(encoding);
  return encoding;
}

Operator logical_lowering(const LogicalEncoding& encoding) {
  return encoding.phi0 * encoding.phi1.adjoint();
}

}  // namespace qdsim
