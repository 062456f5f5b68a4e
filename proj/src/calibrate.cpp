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

#include "qdsim/calibrate.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <random>

#include <unsupported/Eigen/KroneckerProduct>

#include "qdsim/expm.hpp"

namespace qdsim {
namespace {

using BlockList = std::vector<CMatrix>;

BlockList multiply_blocks(const BlockList& later, const BlockList& earlier) {
  BlockList out(later.size());
  for (std::size_t b = 0; b < later.size(); ++b) out[b].noalias() = later[b] * earlier[b];
  return out;
}

}  // namespace

CMatrix named_gate(const std::string& name) {
  CMatrix g(2, 2);
  if (name == "X") {
    g << 0.0, 1.0, 1.0, 0.0;
  } else if (name == "Z") {
    g << 1.0, 0.0, 0.0, -1.0;
  } else if (name == "H") {
    const double r = 1.0 / std::sqrt(2.0);
    g << r, r, r, -r;
  } else if (name == "I") {
    g = CMatrix::Identity(2, 2);
  } else {
    fail(ErrorKind::kConfig, "unknown gate '" + name + "' (expected X, Z, H or I)");
  }
  return g;
}

bool is_unitary(const CMatrix& g, double tol) {
  return g.rows() == g.cols() &&
         max_abs(g.adjoint() * g - CMatrix::Identity(g.rows(), g.cols())) <= tol;
}

CMatrix project_propagator(const Superoperator& u, const CMatrix& projection) {
  require(u.rows() == u.cols() && projection.rows() == u.rows(), ErrorKind::kDimension,
          "projection rows must match the propagator dimension");
  return projection.adjoint() * u * projection;
}

double projection_loss(const CMatrix& pi, const CMatrix& target) {
  require(pi.rows() == target.rows() && pi.cols() == target.cols(), ErrorKind::kDimension,
          "projected propagator and target shapes differ");
  const CMatrix diff = pi - target;
  return (diff.adjoint() * diff).trace().real() / static_cast<double>(diff.size());
}

ProjectionMode parse_projection_mode(const std::string& name) {
  if (name == "paper") return ProjectionMode::kPaper;
  if (name == "extended") return ProjectionMode::kExtended;
  fail(ErrorKind::kConfig, "unknown projection_mode '" + name + "' (expected paper or extended)");
}

CalibrationProblem make_calibration_problem(DotSystem system, JumpOperatorSet jumps,
                                            EncodingVariant encoding,
                                            const CalibrationTarget& target, ProjectionMode mode,
                                            int n_slices, double duration) {
  const int n = system.n_dots();
  require(n >= 2, ErrorKind::kConfig, "calibration needs at least two dots (one hopping control)");
  require(n <= 3, ErrorKind::kConfig, "calibration supports chains of two or three dots");
  require(n_slices >= 1, ErrorKind::kConfig, "controls.n_slices must be >= 1");
  require(std::isfinite(duration) && duration > 0.0, ErrorKind::kConfig,
          "controls.duration must be positive");
  for (const Operator& l : jumps) {
    require(l.rows() == system.dim() && l.cols() == system.dim(), ErrorKind::kConfig,
            "jump operator dimension does not match the dot system");
  }

  const LogicalEncoding pair = reference_pair(n, encoding);
  const Eigen::Index k = mode == ProjectionMode::kPaper ? 2 : 4;
  CMatrix projected_target;
  if (target.kind == CalibrationTarget::Kind::kGate) {
    require(n == 3, ErrorKind::kConfig,
            "logical-gate targets need the 3-dot exchange-only encoding, but n_dots = " +
                std::to_string(n) +
                "; for a 2-dot chain give an explicit projected target (target.projection) "
                "to run the self-consistency mode");
    require(target.matrix.rows() == 2 && target.matrix.cols() == 2 && is_unitary(target.matrix),
            ErrorKind::kConfig, "target gate must be a 2x2 unitary");
    projected_target = mode == ProjectionMode::kPaper
                           ? target.matrix
                           : CMatrix(Eigen::kroneckerProduct(target.matrix.conjugate(), target.matrix));
  } else {
    require(target.matrix.rows() == k && target.matrix.cols() == k, ErrorKind::kConfig,
            "projected target must be " + std::to_string(k) + "x" + std::to_string(k) +
                " in this projection mode");
    require(target.matrix.allFinite(), ErrorKind::kConfig, "projected target must be finite");
    projected_target = target.matrix;
  }

  CalibrationProblem p{std::move(system), std::move(jumps), {}, std::move(projected_target)};
  p.projection = mode == ProjectionMode::kPaper ? projection_matrix(pair)
                                                : extended_projection_matrix(pair);
  p.n_slices = n_slices;
  p.duration = duration;
  return p;
}

CalibrationObjective::CalibrationObjective(CalibrationProblem problem)
    : problem_(std::move(problem)), model_(problem_.system, problem_.jumps, problem_.strategy) {
  require(problem_.projection.rows() == model_.layout()->liouville_dim(), ErrorKind::kDimension,
          "projection rows do not match the Liouville dimension");
  require(problem_.target.rows() == problem_.projection.cols() &&
              problem_.target.cols() == problem_.projection.cols(),
          ErrorKind::kDimension, "target shape does not match the projection");
  require(problem_.workers >= 1, ErrorKind::kInvalidArgument, "workers must be >= 1");
}

PulseSchedule CalibrationObjective::schedule(const RMatrix& coefficients) const {
  require(coefficients.rows() == problem_.n_slices && coefficients.cols() == n_bonds(),
          ErrorKind::kDimension,
          "coefficient matrix must be " + std::to_string(problem_.n_slices) + "x" +
              std::to_string(n_bonds()));
  return PulseSchedule(coefficients, problem_.duration);
}

CalibrationObjective::Evaluation CalibrationObjective::evaluate(const RMatrix& coefficients,
                                                                bool with_gradient) const {
  const PulseSchedule sched = schedule(coefficients);
  const SliceGrid grid = sched.grid();
  const double dt = grid.slice_width();
  const LiouvilleLayout& layout = *model_.layout();
  const auto m_count = static_cast<std::size_t>(problem_.n_slices);

  // U is block diagonal, so Pi only sees blocks where P has support.
  std::vector<std::size_t> active;
  std::vector<CMatrix> p_blocks;
  for (std::size_t b = 0; b < layout.n_blocks(); ++b) {
    CMatrix pb = gather_rows(problem_.projection, layout.block(b).indices);
    if (max_abs(pb) > 0.0) {
      active.push_back(b);
      p_blocks.push_back(std::move(pb));
    }
  }
  const std::size_t n_active = active.size();

  std::vector<BlockList> generators(m_count, BlockList(n_active));
  std::vector<BlockList> slices(m_count, BlockList(n_active));
  parallel_for(m_count, problem_.workers, [&](std::size_t m) {
    const std::vector<double> row = sched.row(static_cast<int>(m));
    for (std::size_t a = 0; a < n_active; ++a) {
      generators[m][a] = model_.generator_block(row, dt, active[a]);
      slices[m][a] = matrix_exponential(generators[m][a]);
    }
  });

  const BlockList product = tree_reduce(slices, problem_.workers, multiply_blocks);
  const Eigen::Index k = problem_.projection.cols();
  CMatrix pi = CMatrix::Zero(k, k);
  for (std::size_t a = 0; a < n_active; ++a) pi += p_blocks[a].adjoint() * product[a] * p_blocks[a];

  Evaluation out;
  out.loss = problem_.loss_weight * projection_loss(pi, problem_.target);
  require(std::isfinite(out.loss), ErrorKind::kNumerical, "loss is not finite");
  out.projection = pi;
  if (!with_gradient) return out;

  // Forward sweep R_m = U_{m-1} ... U_0 P and backward sweep
  // Lambda_m = P^dagger U_{M-1} ... U_{m+1}, per active block.
  std::vector<BlockList> right(m_count, BlockList(n_active));
  std::vector<BlockList> left(m_count, BlockList(n_active));
  for (std::size_t a = 0; a < n_active; ++a) {
    right[0][a] = p_blocks[a];
    for (std::size_t m = 1; m < m_count; ++m) right[m][a] = slices[m - 1][a] * right[m - 1][a];
    left[m_count - 1][a] = p_blocks[a].adjoint();
    for (std::size_t m = m_count - 1; m > 0; --m) left[m - 1][a] = left[m][a] * slices[m][a];
  }

  // d loss = Re sum_ij conj(Pi - G)_ij dPi_ij * 2 w / n.
  const CMatrix weight = (problem_.target - pi).conjugate() *
                         (-2.0 * problem_.loss_weight / static_cast<double>(pi.size()));
  out.gradient = RMatrix::Zero(problem_.n_slices, n_bonds());
  parallel_for(m_count, problem_.workers, [&](std::size_t m) {
    for (int bond = 0; bond < n_bonds(); ++bond) {
      CMatrix d_pi = CMatrix::Zero(k, k);
      for (std::size_t a = 0; a < n_active; ++a) {
        const CMatrix direction = model_.direction(bond, active[a], dt);
        const CMatrix frechet = matrix_exponential_frechet(generators[m][a], direction).derivative;
        d_pi += left[m][a] * frechet * right[m][a];
      }
      out.gradient(static_cast<Eigen::Index>(m), bond) = weight.cwiseProduct(d_pi).sum().real();
    }
  });
  return out;
}

RMatrix gradient(const PulseSchedule& schedule, const CalibrationObjective& objective) {
  require(std::abs(schedule.total_duration() - objective.problem().duration) <=
              1e-12 * objective.problem().duration,
          ErrorKind::kInvalidArgument, "schedule duration differs from the calibration problem");
  return objective.evaluate(schedule.coefficients(), true).gradient;
}

AdamState AdamState::fresh(Eigen::Index rows, Eigen::Index cols, AdamHyperparams hyper) {
  return AdamState{RMatrix::Zero(rows, cols), RMatrix::Zero(rows, cols), 0, hyper};
}

AdamUpdate adam_step(const AdamState& state, const RMatrix& grad, const RMatrix& params) {
  require(grad.rows() == params.rows() && grad.cols() == params.cols() &&
              state.first_moment.rows() == params.rows() &&
              state.first_moment.cols() == params.cols(),
          ErrorKind::kDimension, "Adam operands have mismatched shapes");
  const AdamHyperparams& hp = state.hyper;
  AdamUpdate out{params, state};
  AdamState& s = out.state;
  s.step_count += 1;
  s.first_moment = hp.beta1 * state.first_moment + (1.0 - hp.beta1) * grad;
  s.second_moment = hp.beta2 * state.second_moment + (1.0 - hp.beta2) * grad.cwiseAbs2();
  const double c1 = 1.0 - std::pow(hp.beta1, s.step_count);
  const double c2 = 1.0 - std::pow(hp.beta2, s.step_count);
  const RMatrix m_hat = s.first_moment / c1;
  const RMatrix v_hat = s.second_moment / c2;
  out.params = params.array() - hp.lr * m_hat.array() / (v_hat.array().sqrt() + hp.eps);
  return out;
}

RMatrix initial_coefficients(int n_slices, int n_bonds, double scale, std::uint64_t seed) {
  require(n_slices >= 1 && n_bonds >= 0, ErrorKind::kInvalidArgument, "bad coefficient shape");
  require(std::isfinite(scale) && scale >= 0.0, ErrorKind::kInvalidArgument,
          "init_scale must be finite and nonnegative");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(-scale, scale);
  RMatrix c(n_slices, n_bonds);
  for (int m = 0; m < n_slices; ++m) {
    for (int k = 0; k < n_bonds; ++k) c(m, k) = scale == 0.0 ? 0.0 : uniform(rng);
  }
  return c;
}

CalibrationResult optimize(const CalibrationObjective& objective, const OptimizerConfig& config) {
  const StoppingRule& stop = config.stopping;
  require(stop.max_iters >= 0 && stop.plateau_window >= 1, ErrorKind::kConfig,
          "max_iters must be >= 0 and plateau_window >= 1");
  RMatrix params = config.initial ? *config.initial
                                  : initial_coefficients(objective.n_slices(), objective.n_bonds(),
                                                         config.init_scale, config.seed);
  require(params.rows() == objective.n_slices() && params.cols() == objective.n_bonds(),
          ErrorKind::kConfig, "initial coefficients have the wrong shape");

  AdamState state = AdamState::fresh(params.rows(), params.cols(), config.adam);
  CalibrationResult result{PulseSchedule(params, objective.problem().duration), {}, {},
                           std::numeric_limits<double>::infinity(), 0, false, {}};
  int flat_steps = 0;
  for (int iter = 0;; ++iter) {
    const bool may_step = iter < stop.max_iters;
    const auto eval = objective.evaluate(params, may_step);
    result.loss_history.push_back(eval.loss);
    if (eval.loss < result.best_loss) {
      result.best_loss = eval.loss;
      result.schedule = PulseSchedule(params, objective.problem().duration);
      result.final_projection = eval.projection;
    }
    if (eval.loss < stop.loss_tol) {
      result.converged = true;
      result.stop_reason = "loss_tol";
      break;
    }
    if (iter > 0) {
      const double delta = std::abs(eval.loss - result.loss_history[result.loss_history.size() - 2]);
      flat_steps = delta < stop.plateau_tol ? flat_steps + 1 : 0;
      if (flat_steps >= stop.plateau_window) {
        result.stop_reason = "plateau";
        break;
      }
    }
    if (!may_step) {
      result.stop_reason = "max_iters";
      break;
    }
    AdamUpdate update = adam_step(state, eval.gradient, params);
    params = std::move(update.params);
    state = std::move(update.state);
    result.iterations = iter + 1;
  }
  return result;
}

void write_pulse_table(std::ostream& out, const PulseSchedule& schedule) {
  const SliceGrid grid = schedule.grid();
  out << "slice_index,t_start,t_end";
  for (int k = 0; k < schedule.n_bonds(); ++k) out << ",c_" << k;
  out << '\n' << std::setprecision(17);
  for (int m = 0; m < schedule.n_slices(); ++m) {
    out << m << ',' << grid.boundary(m) << ',' << grid.boundary(m + 1);
    for (int k = 0; k < schedule.n_bonds(); ++k) out << ',' << schedule.coefficients()(m, k);
    out << '\n';
  }
}

void write_loss_history(std::ostream& out, std::span<const double> history) {
  out << "iteration,loss\n" << std::setprecision(17);
  for (std::size_t i = 0; i < history.size(); ++i) out << i << ',' << history[i] << '\n';
}

}  // namespace qdsim
