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

#include "qdsim/expm.hpp"

#include <array>
#include <cmath>
#include <span>
#include <string>

namespace qdsim {
namespace {

// Pade coefficients b_0..b_m and the ||A||_1 bounds below which each degree
// meets unit-roundoff backward error (Higham 2005).
constexpr std::array<double, 4> kPade3 = {120.0, 60.0, 12.0, 1.0};
constexpr std::array<double, 6> kPade5 = {30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0};
constexpr std::array<double, 8> kPade7 = {17297280.0, 8648640.0, 1995840.0, 277200.0,
                                          25200.0,    1512.0,    56.0,      1.0};
constexpr std::array<double, 10> kPade9 = {17643225600.0, 8821612800.0, 2075673600.0,
                                           302702400.0,   30270240.0,   2162160.0,
                                           110880.0,      3960.0,       90.0,
                                           1.0};
constexpr std::array<double, 14> kPade13 = {
    64764752532480000.0, 32382376266240000.0, 7771770303897600.0, 1187353796428800.0,
    129060195264000.0,   10559470521600.0,    670442572800.0,     33522128640.0,
    1323241920.0,        40840800.0,          960960.0,           16380.0,
    182.0,               1.0};

constexpr double kTheta3 = 1.495585217958292e-2;
constexpr double kTheta5 = 2.539398330063230e-1;
constexpr double kTheta7 = 9.504178996162932e-1;
constexpr double kTheta9 = 2.097847961257068e0;
constexpr double kTheta13 = 5.371920351148152e0;

CMatrix solve_pade(const CMatrix& u, const CMatrix& v) {
  return (v - u).partialPivLu().solve(v + u);
}

// Degrees 3..9: U = A sum_odd b_k A^(k-1), V = sum_even b_k A^k.
CMatrix pade_low(const CMatrix& a, std::span<const double> b) {
  const Eigen::Index n = a.rows();
  const CMatrix id = CMatrix::Identity(n, n);
  const CMatrix a2 = a * a;
  CMatrix power = id;  // A^(2j)
  CMatrix odd = b[1] * id;
  CMatrix even = b[0] * id;
  for (std::size_t k = 2; k < b.size(); k += 2) {
    power = power * a2;
    even += b[k] * power;
    odd += b[k + 1] * power;
  }
  return solve_pade(a * odd, even);
}

CMatrix pade13(const CMatrix& a) {
  const auto& b = kPade13;
  const Eigen::Index n = a.rows();
  const CMatrix id = CMatrix::Identity(n, n);
  const CMatrix a2 = a * a;
  const CMatrix a4 = a2 * a2;
  const CMatrix a6 = a4 * a2;
  const CMatrix u_inner = b[13] * a6 + b[11] * a4 + b[9] * a2;
  const CMatrix u = a * (a6 * u_inner + b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * id);
  const CMatrix v_inner = b[12] * a6 + b[10] * a4 + b[8] * a2;
  const CMatrix v = a6 * v_inner + b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * id;
  return solve_pade(u, v);
}

}  // namespace

double one_norm(const CMatrix& a) {
  return a.size() == 0 ? 0.0 : a.cwiseAbs().colwise().sum().maxCoeff();
}

CMatrix matrix_exponential(const CMatrix& a, ExpmStats* stats) {
  require(a.rows() == a.cols(), ErrorKind::kDimension,
          "matrix exponential needs a square matrix, got " + std::to_string(a.rows()) + "x" +
              std::to_string(a.cols()));
  require(a.allFinite(), ErrorKind::kNumerical, "matrix exponential of a non-finite matrix");
  ExpmStats local;
  ExpmStats& st = stats != nullptr ? *stats : local;
  st = {};
  const double norm = one_norm(a);
  if (norm <= kTheta3) {
    st.pade_degree = 3;
    return pade_low(a, kPade3);
  }
  if (norm <= kTheta5) {
    st.pade_degree = 5;
    return pade_low(a, kPade5);
  }
  if (norm <= kTheta7) {
    st.pade_degree = 7;
    return pade_low(a, kPade7);
  }
  if (norm <= kTheta9) {
    st.pade_degree = 9;
    return pade_low(a, kPade9);
  }
  st.pade_degree = 13;
  const int s = std::max(0, static_cast<int>(std::ceil(std::log2(norm / kTheta13))));
  st.squarings = s;
  CMatrix r = pade13(a / std::ldexp(1.0, s));
  for (int i = 0; i < s; ++i) r = r * r;
  require(r.allFinite(), ErrorKind::kNumerical, "matrix exponential overflowed");
  return r;
}

ExpmWithDerivative matrix_exponential_frechet(const CMatrix& a, const CMatrix& e) {
  require(a.rows() == a.cols() && e.rows() == a.rows() && e.cols() == a.cols(),
          ErrorKind::kDimension, "Frechet derivative needs square matrices of equal size");
  const Eigen::Index n = a.rows();
  CMatrix block = CMatrix::Zero(2 * n, 2 * n);
  block.topLeftCorner(n, n) = a;
  block.topRightCorner(n, n) = e;
  block.bottomRightCorner(n, n) = a;
  const CMatrix full = matrix_exponential(block);
  return {full.topLeftCorner(n, n), full.topRightCorner(n, n)};
}

}  // namespace qdsim
