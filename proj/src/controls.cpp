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

#include "qdsim/controls.hpp"

#include <cmath>
#include <string>

namespace qdsim {

SliceGrid::SliceGrid(double total_duration, int n_slices)
    : total_duration_(total_duration), n_slices_(n_slices) {
  require(n_slices >= 1, ErrorKind::kInvalidArgument, "a slice grid needs at least one slice");
  require(std::isfinite(total_duration) && total_duration > 0.0, ErrorKind::kInvalidArgument,
          "total duration must be finite and positive");
}

double SliceGrid::boundary(int n) const {
  require(n >= 0 && n <= n_slices_, ErrorKind::kInvalidArgument, "slice boundary out of range");
  if (n == n_slices_) return total_duration_;
  return static_cast<double>(n) * total_duration_ / static_cast<double>(n_slices_);
}

PulseSchedule::PulseSchedule(RMatrix coefficients, double total_duration)
    : coefficients_(std::move(coefficients)), total_duration_(total_duration) {
  require(coefficients_.rows() >= 1, ErrorKind::kInvalidArgument,
          "a pulse schedule needs at least one slice");
  require(std::isfinite(total_duration_) && total_duration_ > 0.0, ErrorKind::kInvalidArgument,
          "pulse duration must be finite and positive");
  require(coefficients_.size() == 0 || coefficients_.allFinite(), ErrorKind::kInvalidArgument,
          "pulse coefficients must be finite");
}

PulseSchedule PulseSchedule::zeros(int n_slices, int n_bonds, double total_duration) {
  require(n_slices >= 1 && n_bonds >= 0, ErrorKind::kInvalidArgument, "bad schedule shape");
  return PulseSchedule(RMatrix::Zero(n_slices, n_bonds), total_duration);
}

std::vector<double> PulseSchedule::row(int slice) const {
  require(slice >= 0 && slice < n_slices(), ErrorKind::kInvalidArgument,
          "slice index out of range");
  std::vector<double> out(static_cast<std::size_t>(n_bonds()));
  for (int k = 0; k < n_bonds(); ++k) out[static_cast<std::size_t>(k)] = coefficients_(slice, k);
  return out;
}

Controls::Controls(PulseSchedule schedule)
    : schedule_(std::move(schedule)),
      duration_(schedule_->total_duration()),
      n_bonds_(schedule_->n_bonds()) {}

Controls Controls::smooth(double total_duration, int n_bonds, Envelope envelope) {
  require(std::isfinite(total_duration) && total_duration > 0.0, ErrorKind::kInvalidArgument,
          "control duration must be finite and positive");
  require(n_bonds >= 0, ErrorKind::kInvalidArgument, "negative bond count");
  require(static_cast<bool>(envelope), ErrorKind::kInvalidArgument, "empty control envelope");
  Controls c;
  c.duration_ = total_duration;
  c.n_bonds_ = n_bonds;
  c.envelope_ = std::move(envelope);
  return c;
}

double Controls::total_duration() const { return duration_; }
int Controls::n_bonds() const { return n_bonds_; }

const PulseSchedule& Controls::schedule() const {
  require(schedule_.has_value(), ErrorKind::kInvalidArgument, "controls are not piecewise");
  return *schedule_;
}

void Controls::check_grid(const SliceGrid& grid) const {
  require(std::abs(grid.total_duration() - duration_) <= 1e-12 * duration_,
          ErrorKind::kInvalidArgument, "slice grid duration does not match the controls");
  if (schedule_) {
    require(grid.n_slices() % schedule_->n_slices() == 0, ErrorKind::kInvalidArgument,
            "slice grid (" + std::to_string(grid.n_slices()) +
                " slices) must refine the pulse schedule (" +
                std::to_string(schedule_->n_slices()) + " slices)");
  }
}

std::vector<double> Controls::sample(const SliceGrid& grid, int slice, double t) const {
  require(slice >= 0 && slice < grid.n_slices(), ErrorKind::kInvalidArgument,
          "slice index out of range");
  if (schedule_) {
    const int refine = grid.n_slices() / schedule_->n_slices();
    return schedule_->row(slice / refine);
  }
  std::vector<double> out(static_cast<std::size_t>(n_bonds_));
  for (int k = 0; k < n_bonds_; ++k) out[static_cast<std::size_t>(k)] = envelope_(t, k);
  return out;
}

std::vector<double> Controls::slice_average(const SliceGrid& grid, int slice,
                                            Quadrature rule) const {
  const double t0 = grid.boundary(slice);
  const double t = rule == Quadrature::kMidpoint ? t0 + 0.5 * grid.slice_width() : t0;
  return sample(grid, slice, t);
}

}  // namespace qdsim
