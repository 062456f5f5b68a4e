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

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "qdsim/hilbert.hpp"
#include "test_support.hpp"

namespace qdsim {
namespace {

using O = DotOccupation;

TEST(Basis, SingleDotOrdering) {
  const auto basis = enumerate_basis(1);
  ASSERT_EQ(basis.size(), 4u);
  EXPECT_EQ(basis[0].occupations, std::vector<O>{O::kEmpty});
  EXPECT_EQ(basis[1].occupations, std::vector<O>{O::kUp});
  EXPECT_EQ(basis[2].occupations, std::vector<O>{O::kDown});
  EXPECT_EQ(basis[3].occupations, std::vector<O>{O::kUpDown});
}

TEST(Basis, ThreeDotsHave64States) {
  const auto basis = enumerate_basis(3);
  ASSERT_EQ(basis.size(), 64u);
  for (std::size_t i = 0; i < basis.size(); ++i) {
    EXPECT_EQ(basis[i].index(), i);
    EXPECT_EQ(basis_state(i, 3), basis[i]);
  }
}

TEST(Basis, KetIndices) {
  EXPECT_EQ((DotBasisState{{O::kUp, O::kUp, O::kDown}}.index()), 22u);
  EXPECT_EQ((DotBasisState{{O::kDown, O::kUp, O::kUp}}.index()), 37u);
  EXPECT_EQ((DotBasisState{{O::kUp, O::kUp, O::kUp}}.index()), 21u);
}

TEST(Basis, RejectsBadSizes) {
  EXPECT_THROW(hilbert_dimension(0), Error);
  EXPECT_THROW(hilbert_dimension(40), Error);
  try {
    hilbert_dimension(0);
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kCapacity);
  }
}

TEST(Fermions, CreationOnVacuumAndExclusion) {
  const Operator up = creation_operator(0, Spin::kUp, 1);
  CVector empty = CVector::Zero(4);
  empty(0) = 1.0;
  const CVector out = up * empty;
  EXPECT_NEAR(std::abs(out(1) - Complex(1.0)), 0.0, 1e-15);
  EXPECT_NEAR(out.norm(), 1.0, 1e-15);
  CVector one_up = CVector::Zero(4);
  one_up(1) = 1.0;
  EXPECT_EQ((up * one_up).norm(), 0.0);
  EXPECT_EQ(max_abs(annihilation_operator(0, Spin::kUp, 1) - up.adjoint()), 0.0);
}

TEST(Fermions, OutOfRangeDot) {
  EXPECT_THROW(creation_operator(2, Spin::kUp, 2), Error);
  EXPECT_THROW(number_operator(-1, 2), Error);
}

void check_anticommutators(int n) {
  const auto dim = static_cast<Eigen::Index>(hilbert_dimension(n));
  const CMatrix id = CMatrix::Identity(dim, dim);
  for (int i = 0; i < n; ++i) {
    for (Spin si : {Spin::kUp, Spin::kDown}) {
      const Operator ci = annihilation_operator(i, si, n);
      for (int j = 0; j < n; ++j) {
        for (Spin sj : {Spin::kUp, Spin::kDown}) {
          const Operator cj = annihilation_operator(j, sj, n);
          const Operator cjd = creation_operator(j, sj, n);
          const double delta = (i == j && si == sj) ? 1.0 : 0.0;
          EXPECT_LE(max_abs(ci * cjd + cjd * ci - delta * id), 1e-12);
          EXPECT_LE(max_abs(ci * cj + cj * ci), 1e-12);
        }
      }
    }
  }
}

TEST(Fermions, AnticommutationOneAndTwoDots) {
  check_anticommutators(1);
  check_anticommutators(2);
}

TEST(Fermions, AnticommutationThreeDots) { check_anticommutators(3); }

TEST(Number, SingleDotDiagonal) {
  const Operator n = number_operator(0, 1);
  EXPECT_TRUE(n.isApprox(RVector((RVector(4) << 0, 1, 1, 2).finished()).cast<Complex>().asDiagonal().toDenseMatrix()));
  const Operator via_modes = creation_operator(0, Spin::kUp, 1) * annihilation_operator(0, Spin::kUp, 1) +
                             creation_operator(0, Spin::kDown, 1) * annihilation_operator(0, Spin::kDown, 1);
  EXPECT_LE(max_abs(n - via_modes), 1e-15);
}

TEST(Hubbard, SingleDotEnergies) {
  HubbardParams p{4.0, {0.5}, 0.0, 1};
  const Operator h = build_hubbard(p, {});
  const RVector expected = (RVector(4) << 0.0, 0.5, 0.5, 5.0).finished();
  EXPECT_LE(max_abs(h - CMatrix(expected.cast<Complex>().asDiagonal())), 1e-14);
}

TEST(Hubbard, WrongHoppingLength) {
  HubbardParams p{1.0, {0.0, 0.0}, 0.0, 2};
  const std::vector<double> two{1.0, 2.0};
  EXPECT_THROW(build_hubbard(p, two), Error);
  HubbardParams bad{1.0, {0.0}, 0.0, 2};
  EXPECT_THROW(bad.validate(), Error);
}

TEST(Hubbard, SingleParticleHoppingElement) {
  const double tau = 0.37;
  HubbardParams p{0.0, {0.0, 0.0}, 0.0, 2};
  const std::vector<double> t{tau};
  const Operator h = build_hubbard(p, t);
  const auto a = DotBasisState{{O::kUp, O::kEmpty}}.index();
  const auto b = DotBasisState{{O::kEmpty, O::kUp}}.index();
  EXPECT_NEAR(std::abs(h(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b))), tau, 1e-15);
  EXPECT_NEAR(h(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)).imag(), 0.0, 1e-15);
}

HubbardParams random_params(int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  HubbardParams p{u(rng), {}, u(rng), n};
  for (int i = 0; i < n; ++i) p.chem_potential.push_back(u(rng));
  return p;
}

void check_hermitian_and_conserving(int n, int draws) {
  std::mt19937_64 rng(17 + static_cast<unsigned>(n));
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  const auto dim = static_cast<Eigen::Index>(hilbert_dimension(n));
  CMatrix total = CMatrix::Zero(dim, dim);
  for (int i = 0; i < n; ++i) total += number_operator(i, n);
  for (int d = 0; d < draws; ++d) {
    const HubbardParams p = random_params(n, rng);
    std::vector<double> t;
    for (int k = 0; k < n - 1; ++k) t.push_back(u(rng));
    const Operator h = build_hubbard(p, t);
    EXPECT_LE(max_abs(h - h.adjoint()), 1e-12);
    EXPECT_LE(max_abs(h * total - total * h), 1e-10);
  }
}

TEST(Hubbard, HermitianAndNumberConserving) {
  check_hermitian_and_conserving(1, 20);
  check_hermitian_and_conserving(2, 50);
  check_hermitian_and_conserving(3, 5);
}

TEST(Hubbard, DotSystemMatchesDirectBuild) {
  std::mt19937_64 rng(5);
  const HubbardParams p = random_params(3, rng);
  const DotSystem sys(p);
  const std::vector<double> t{0.3, -0.8};
  EXPECT_LE(max_abs(sys.hamiltonian(t) - build_hubbard(p, t)), 1e-13);
}

TEST(Encoding, AsPrintedEntries) {
  const LogicalEncoding e = logical_basis_vectors(3, EncodingVariant::kAsPrinted);
  const double r2 = 1.0 / std::sqrt(2.0), r6 = 1.0 / std::sqrt(6.0);
  EXPECT_NEAR(e.phi0(22).real(), r2, 1e-15);
  EXPECT_NEAR(e.phi0(37).real(), -r2, 1e-15);
  EXPECT_NEAR(e.phi0.norm(), 1.0, 1e-12);
  EXPECT_NEAR(e.phi1(21).real(), 2.0 * r6, 1e-15);
  EXPECT_NEAR(e.phi1(22).real(), -r6, 1e-15);
  EXPECT_NEAR(e.phi1(37).real(), -r6, 1e-15);
  EXPECT_EQ((e.phi1.array().abs() > 0.0).count(), 3);
}

TEST(Encoding, OrthonormalBothVariants) {
  for (auto v : {EncodingVariant::kAsPrinted, EncodingVariant::kStandardDfs}) {
    const LogicalEncoding e = logical_basis_vectors(3, v);
    EXPECT_NEAR(e.phi0.norm(), 1.0, 1e-12);
    EXPECT_NEAR(e.phi1.norm(), 1.0, 1e-12);
    EXPECT_LE(std::abs(e.phi0.dot(e.phi1)), 1e-12);
  }
  const LogicalEncoding dfs = logical_basis_vectors(3, EncodingVariant::kStandardDfs);
  EXPECT_NEAR(dfs.phi1(25).real(), 2.0 / std::sqrt(6.0), 1e-15);
  EXPECT_EQ(dfs.phi1(21), Complex(0.0));
}

TEST(Encoding, RequiresThreeDots) {
  EXPECT_THROW(logical_basis_vectors(2, EncodingVariant::kAsPrinted), Error);
  EXPECT_EQ(parse_encoding_variant("standard-dfs"), EncodingVariant::kStandardDfs);
  EXPECT_EQ(to_string(EncodingVariant::kAsPrinted), "as-printed");
  EXPECT_THROW(parse_encoding_variant("dfs"), Error);
}

TEST(Projection, ShapeOrthonormalityAndEntry) {
  const LogicalEncoding e = logical_basis_vectors(3, EncodingVariant::kAsPrinted);
  const CMatrix p = projection_matrix(e);
  ASSERT_EQ(p.rows(), 4096);
  ASSERT_EQ(p.cols(), 2);
  EXPECT_LE(max_abs(p.adjoint() * p - CMatrix::Identity(2, 2)), 1e-12);
  EXPECT_NEAR(p(22 + 64 * 22, 0).real(), 0.5, 1e-15);
  const CMatrix x = extended_projection_matrix(e);
  EXPECT_LE(max_abs(x.adjoint() * x - CMatrix::Identity(4, 4)), 1e-12);
  EXPECT_LE(max_abs(x.col(0) - p.col(0)), 0.0);
  EXPECT_LE(max_abs(x.col(3) - p.col(1)), 0.0);
}

TEST(Projection, ReferencePairsForShortChains) {
  const LogicalEncoding two = reference_pair(2);
  EXPECT_EQ(two.phi0(6), Complex(1.0));
  EXPECT_EQ(two.phi1(9), Complex(1.0));
  const Operator a = logical_lowering(two);
  EXPECT_LE(max_abs(a * two.phi1 - two.phi0), 0.0);
  EXPECT_EQ((a * two.phi0).norm(), 0.0);
}

}  // namespace
}  // namespace qdsim
