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

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qdsim/common.hpp"
#include "qdsim/controls.hpp"
#include "qdsim/hilbert.hpp"
#include "qdsim/liouville.hpp"
#include "qdsim/magnus.hpp"

namespace qdsim {

/// "X", "Z", "H" or "I".
CMatrix named_gate(const std::string& name);
bool is_unitary(const CMatrix& g, double tol = 1e-10);

/// Pi = P^dagger U P.
CMatrix project_propagator(const Superoperator& u, const CMatrix& projection);

/// ||Pi - G||_F^2 / (number of entries), the norm taken as trace(A^dagger A).
double projection_loss(const CMatrix& pi, const CMatrix& target);

enum class ProjectionMode {
  /// Two columns vec(|phi_k><phi_k|); Pi is the 2x2 population-transfer matrix.
  kPaper,
  /// Four columns vec(|phi_i><phi_j|); gates compare as conj(G) kron G.
  kExtended,
};

ProjectionMode parse_projection_mode(const std::string& name);

/// What the optimiser aims at.
struct CalibrationTarget {
  enum class Kind { kGate, kProjection };
  Kind kind = Kind::kGate;
  /// 2x2 unitary for kGate; the projected target Pi* for kProjection.
  CMatrix matrix;
};

/// Everything a loss evaluation needs. `target` is already expressed in the
/// projected space (2x2 by default, 4x4 in extended mode).
struct CalibrationProblem {
  DotSystem system;
  JumpOperatorSet jumps;
  CMatrix projection;
  CMatrix target;
  int n_slices = 1;
  double duration = 1.0;
  ExpansionStrategy strategy = ExpansionStrategy::kSectors;
  int workers = 1;
  /// Multiplies the loss (and therefore the gradient).
  double loss_weight = 1.0;
};

/// Validates the combination and assembles the projection. Logical-gate
/// targets need the 3-dot encoding; 2-dot chains take an explicit Pi* over
/// the reference pair (|↑,↓>, |↓,↑>). Throws kConfig otherwise.
CalibrationProblem make_calibration_problem(DotSystem system, JumpOperatorSet jumps,
                                            EncodingVariant encoding,
                                            const CalibrationTarget& target, ProjectionMode mode,
                                            int n_slices, double duration);

/// Loss and gradient of one calibration problem. Slice propagators are
/// recomputed per call; the gradient stores O(M) of them and differentiates
/// each slice exponential exactly through its Frechet derivative.
class CalibrationObjective {
 public:
  explicit CalibrationObjective(CalibrationProblem problem);

  struct Evaluation {
    double loss = 0.0;
    CMatrix projection;  // Pi
    RMatrix gradient;    // empty unless requested
  };

  const CalibrationProblem& problem() const { return problem_; }
  int n_slices() const { return problem_.n_slices; }
  int n_bonds() const { return problem_.system.n_bonds(); }

  Evaluation evaluate(const RMatrix& coefficients, bool with_gradient) const;
  double loss(const RMatrix& coefficients) const { return evaluate(coefficients, false).loss; }

 private:
  PulseSchedule schedule(const RMatrix& coefficients) const;

  CalibrationProblem problem_;
  LiouvillianModel model_;
};

/// d loss / d c_{m,k}.
RMatrix gradient(const PulseSchedule& schedule, const CalibrationObjective& objective);

struct AdamHyperparams {
  double lr = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  RMatrix first_moment;
  RMatrix second_moment;
  int step_count = 0;
  AdamHyperparams hyper;

  static AdamState fresh(Eigen::Index rows, Eigen::Index cols, AdamHyperparams hyper = {});
};

struct AdamUpdate {
  RMatrix params;
  AdamState state;
};

/// One bias-corrected Adam step.
AdamUpdate adam_step(const AdamState& state, const RMatrix& grad, const RMatrix& params);

struct StoppingRule {
  int max_iters = 1000;
  double loss_tol = 1e-6;
  double plateau_tol = 1e-10;
  int plateau_window = 50;
};

struct OptimizerConfig {
  AdamHyperparams adam;
  StoppingRule stopping;
  double init_scale = 1.0;  // initial coefficients ~ U[-init_scale, init_scale]
  std::uint64_t seed = 0;
  std::optional<RMatrix> initial;  // overrides the random draw
};

struct CalibrationResult {
  PulseSchedule schedule;      // best seen
  std::vector<double> loss_history;
  CMatrix final_projection;    // Pi at the best schedule
  double best_loss = 0.0;
  int iterations = 0;          // Adam updates applied
  bool converged = false;      // loss fell below loss_tol
  std::string stop_reason;     // "loss_tol", "plateau" or "max_iters"
};

RMatrix initial_coefficients(int n_slices, int n_bonds, double scale, std::uint64_t seed);

CalibrationResult optimize(const CalibrationObjective& objective, const OptimizerConfig& config);

/// slice_index,t_start,t_end,c_0,...,c_{N-2}
void write_pulse_table(std::ostream& out, const PulseSchedule& schedule);
/// iteration,loss
void write_loss_history(std::ostream& out, std::span<const double> history);

}  // namespace qdsim
