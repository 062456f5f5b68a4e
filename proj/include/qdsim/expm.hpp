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

#include "qdsim/common.hpp"

namespace qdsim {

struct ExpmStats {
  int pade_degree = 0;
  int squarings = 0;
};

/// exp(A) by scaling and squaring with a diagonal Pade approximant
/// (degrees 3, 5, 7, 9, 13 chosen from ||A||_1). Throws kNumerical on
/// non-finite input.
CMatrix matrix_exponential(const CMatrix& a, ExpmStats* stats = nullptr);

/// exp(A) and its Frechet derivative L(A, E) = d/dh exp(A + hE) at h = 0,
/// read off the exponential of the block triangular [[A, E], [0, A]].
struct ExpmWithDerivative {
  CMatrix exp;
  CMatrix derivative;
};
ExpmWithDerivative matrix_exponential_frechet(const CMatrix& a, const CMatrix& e);

/// max column sum.
double one_norm(const CMatrix& a);

}  // namespace qdsim
