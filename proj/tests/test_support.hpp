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

// Shared fixtures for the unit and acceptance tests.
#pragma once

#include <random>
#include <vector>

#include "qdsim/common.hpp"
#include "qdsim/controls.hpp"
#include "qdsim/hilbert.hpp"

namespace qdsim::testing {

inline CMatrix random_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  CMatrix m(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c) {
    for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = Complex(g(rng), g(rng));
  }
  return m;
}

inline CMatrix random_hermitian(Eigen::Index dim, std::mt19937_64& rng) {
  const CMatrix a = random_matrix(dim, dim, rng);
  return 0.5 * (a + a.adjoint());
}

/// Energies drawn uniformly from [-scale, scale].
inline HubbardParams random_hubbard(int n_dots, std::mt19937_64& rng, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  HubbardParams p;
  p.n_dots = n_dots;
  p.u_onsite = 2.0 * scale + u(rng);
  p.u_neighbor = 0.5 * (u(rng) + scale);
  for (int i = 0; i < n_dots; ++i) p.chem_potential.push_back(u(rng));
  return p;
}

inline PulseSchedule random_schedule(int n_slices, int n_bonds, double duration,
                                     std::mt19937_64& rng, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  RMatrix c(n_slices, n_bonds);
  for (int m = 0; m < n_slices; ++m) {
    for (int k = 0; k < n_bonds; ++k) c(m, k) = u(rng);
  }
  return PulseSchedule(c, duration);
}

}  // namespace qdsim::testing
