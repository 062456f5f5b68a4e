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

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "qdsim/common.hpp"

namespace qdsim {

/// Uniform partition 0 = t_0 < t_1 < ... < t_M = T.
class SliceGrid {
 public:
  SliceGrid(double total_duration, int n_slices);

  double total_duration() const { return total_duration_; }
  int n_slices() const { return n_slices_; }
  double slice_width() const { return total_duration_ / n_slices_; }
  /// t_n = n T / M; boundary(M) is exactly T.
  double boundary(int n) const;

 private:
  double total_duration_;
  int n_slices_;
};

/// Piecewise-constant hopping amplitudes: row m holds t_{k,k+1} for slice m.
/// Zero columns is allowed (single-dot chains have no controls).
class PulseSchedule {
 public:
  PulseSchedule(RMatrix coefficients, double total_duration);

  static PulseSchedule zeros(int n_slices, int n_bonds, double total_duration);

  const RMatrix& coefficients() const { return coefficients_; }
  double total_duration() const { return total_duration_; }
  int n_slices() const { return static_cast<int>(coefficients_.rows()); }
  int n_bonds() const { return static_cast<int>(coefficients_.cols()); }
  SliceGrid grid() const { return SliceGrid(total_duration_, n_slices()); }

  std::vector<double> row(int slice) const;

 private:
  RMatrix coefficients_;
  double total_duration_;
};

/// Rule for averaging a smooth envelope over one slice.
enum class Quadrature {
  kMidpoint,      // c(t_n + dt/2) dt
  kLeftEndpoint,  // c(t_n) dt (Riemann sum)
};

/// Hopping amplitudes as a function of time: envelope(t, bond).
using Envelope = std::function<double(double t, int bond)>;

/// Either a piecewise-constant schedule or a smooth envelope over [0, T].
class Controls {
 public:
  /*implicit*/ Controls(PulseSchedule schedule);  // NOLINT
  static Controls smooth(double total_duration, int n_bonds, Envelope envelope);

  double total_duration() const;
  int n_bonds() const;
  bool is_piecewise() const { return schedule_.has_value(); }
  const PulseSchedule& schedule() const;

  /// Hoppings at time t inside slice `slice` of `grid`. Piecewise schedules
  /// ignore t and hold the row constant across the slice (the grid may
  /// refine the schedule by an integer factor).
  std::vector<double> sample(const SliceGrid& grid, int slice, double t) const;

  /// (1/dt) * integral of the hoppings over slice `slice`: exact for
  /// piecewise schedules, `rule` for smooth envelopes.
  std::vector<double> slice_average(const SliceGrid& grid, int slice, Quadrature rule) const;

  /// Throws unless `grid` spans the control duration and, for piecewise
  /// schedules, refines the schedule's slices by an integer factor.
  void check_grid(const SliceGrid& grid) const;

 private:
  Controls() = default;

  std::optional<PulseSchedule> schedule_;
  double duration_ = 0.0;
  int n_bonds_ = 0;
  Envelope envelope_;
};

}  // namespace qdsim
