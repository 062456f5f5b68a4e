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

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "qdsim/common.hpp"

namespace qdsim {

/// Heat map of normalised waveform amplitudes: one row per applied voltage,
/// one column per sample time.
struct CharacterizationGrid {
  std::vector<double> voltages;
  std::vector<double> times;
  RMatrix amplitudes;  // voltages.size() x times.size()

  /// Throws kInvalidArgument on any violated invariant.
  void validate() const;
};

/// Reads "time,<t_0>,<t_1>,..." followed by "<voltage>,<amp_0>,..." rows.
/// Throws ParseError naming the line, or kIo when the file cannot be read.
CharacterizationGrid load_grid(const std::filesystem::path& path);
CharacterizationGrid parse_grid(std::istream& in);
void write_grid(std::ostream& out, const CharacterizationGrid& grid);

/// y(t) = A exp(-t / tau) cos(omega t + phi) + c
struct DampedSinusoidFit {
  double amplitude = 0.0;
  double decay_time = 0.0;
  double angular_frequency = 0.0;
  double phase = 0.0;
  double offset = 0.0;
  double residual_rms = 0.0;
  int iterations = 0;
  bool converged = false;

  double evaluate(double t) const;
};

struct FitOptions {
  int max_iterations = 200;
  double relative_tolerance = 1e-9;
};

/// Coarse scan over omega (with a handful of trial decay rates), then damped
/// Gauss-Newton on all five parameters. Throws kDegenerateSignal for too few
/// samples or when no oscillation beats a non-oscillating fit.
DampedSinusoidFit fit_damped_sinusoid(std::span<const double> times,
                                      std::span<const double> values, const FitOptions& options = {});

/// y(t) = A exp(-t / tau) + c, i.e. omega fixed at zero.
DampedSinusoidFit fit_exponential_decay(std::span<const double> times,
                                        std::span<const double> values,
                                        const FitOptions& options = {});

struct DecayReport {
  double voltage_used = 0.0;
  std::size_t row = 0;
  double t2 = 0.0;
  DampedSinusoidFit fit;
};

/// Row nearest `voltage` (ties go to the lower voltage), fitted with a
/// damped sinusoid; T2 is the envelope decay time.
DecayReport extract_decay_times(const CharacterizationGrid& grid, double voltage,
                                const FitOptions& options = {});

struct RelaxationReport {
  double t1 = 0.0;
  DampedSinusoidFit fit;
};

/// T1 from a separate non-oscillating relaxation trace.
RelaxationReport extract_relaxation_time(std::span<const double> times,
                                         std::span<const double> values,
                                         const FitOptions& options = {});

}  // namespace qdsim
