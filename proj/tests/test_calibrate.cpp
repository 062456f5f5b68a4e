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
#include <sstream>

#include <unsupported/Eigen/KroneckerProduct>

#include "qdsim/calibrate.hpp"
#include "qdsim/liouville.hpp"
#include "test_support.hpp"

namespace qdsim {
namespace {

using testing::random_hubbard;

// Central-difference oracle over every coefficient.
RMatrix finite_difference_gradient(const CalibrationObjective& objective, const RMatrix& c,
                                   double h = 1e-5) {
  RMatrix g(c.rows(), c.cols());
  for (Eigen::Index i = 0; i < c.rows(); ++i) {
    for (Eigen::Index k = 0; k < c.cols(); ++k) {
      RMatrix plus = c, minus = c;
      plus(i, k) += h;
      minus(i, k) -= h;
      g(i, k) = (objective.loss(plus) - objective.loss(minus)) / (2.0 * h);
    }
  }
  return g;
}

CalibrationProblem two_dot_problem(std::mt19937_64& rng, bool open, int m = 8, double duration = 2.0) {
  DotSystem sys(random_hubbard(2, rng));
  JumpOperatorSet jumps;
  if (open) jumps = make_jump_operators(5.0, 3.0, logical_lowering(reference_pair(2)));
  std::uniform_real_distribution<double> u(0.0, 1.0);
  CMatrix target(2, 2);
  target << u(rng), u(rng), u(rng), u(rng);
  return make_calibration_problem(std::move(sys), std::move(jumps), EncodingVariant::kAsPrinted,
                                  {CalibrationTarget::Kind::kProjection, target},
                                  ProjectionMode::kPaper, m, duration);
}

TEST(NamedGates, Standard) {
  for (const char* name : {"X", "Z", "H", "I"}) EXPECT_TRUE(is_unitary(named_gate(name)));
  EXPECT_EQ(named_gate("X")(0, 1), Complex(1.0));
  EXPECT_EQ(named_gate("Z")(1, 1), Complex(-1.0));
  EXPECT_THROW(named_gate("Y2"), Error);
  EXPECT_FALSE(is_unitary(CMatrix::Ones(2, 2)));
}

TEST(Projection, IdentityPropagator) {
  const CMatrix p = projection_matrix(reference_pair(2));
  EXPECT_LE(max_abs(project_propagator(Superoperator::Identity(256, 256), p) - CMatrix::Identity(2, 2)),
            1e-12);
  EXPECT_THROW(project_propagator(Superoperator::Identity(16, 16), p), Error);
}

TEST(Projection, LogicalSwap) {
  const LogicalEncoding e = reference_pair(2);
  const CMatrix p0 = e.phi0 * e.phi0.adjoint(), p1 = e.phi1 * e.phi1.adjoint();
  const CMatrix x = e.phi0 * e.phi1.adjoint() + e.phi1 * e.phi0.adjoint() +
                    (CMatrix::Identity(16, 16) - p0 - p1);
  const Superoperator u = Eigen::kroneckerProduct(x.conjugate(), x);
  const CMatrix pi = project_propagator(u, projection_matrix(e));
  EXPECT_LE(max_abs(pi - named_gate("X")), 1e-10);
}

TEST(Projection, PopulationTransferIsRealUnitInterval) {
  std::mt19937_64 rng(1);
  for (int k = 0; k < 5; ++k) {
    const DotSystem sys(random_hubbard(2, rng));
    const auto jumps = make_jump_operators(2.0, 1.0, logical_lowering(reference_pair(2)));
    const auto u = build_superpropagator(testing::random_schedule(8, 1, 3.0, rng), sys, jumps);
    const CMatrix pi = project_propagator(u.entries, projection_matrix(reference_pair(2)));
    for (Eigen::Index i = 0; i < 4; ++i) {
      EXPECT_LE(std::abs(pi(i).imag()), 1e-9);
      EXPECT_GE(pi(i).real(), -1e-9);
      EXPECT_LE(pi(i).real(), 1.0 + 1e-9);
    }
  }
}

TEST(Loss, Values) {
  EXPECT_EQ(projection_loss(named_gate("H"), named_gate("H")), 0.0);
  EXPECT_NEAR(projection_loss(CMatrix::Identity(2, 2), named_gate("X")), 1.0, 1e-15);
  std::mt19937_64 rng(2);
  const CMatrix a = testing::random_matrix(2, 2, rng), g = testing::random_matrix(2, 2, rng);
  const CMatrix swap = named_gate("X");
  EXPECT_NEAR(projection_loss(swap * a * swap, swap * g * swap), projection_loss(a, g), 1e-14);
  EXPECT_GT(projection_loss(a, g), 0.0);
}

TEST(Problem, GateTargetNeedsThreeDots) {
  std::mt19937_64 rng(3);
  try {
    make_calibration_problem(DotSystem(random_hubbard(2, rng)), {}, EncodingVariant::kAsPrinted,
                             {CalibrationTarget::Kind::kGate, named_gate("X")},
                             ProjectionMode::kPaper, 4, 1.0);
    FAIL() << "expected a configuration error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kConfig);
    EXPECT_NE(std::string(e.what()).find("target.projection"), std::string::npos);
  }
}

TEST(Problem, ExtendedModeTargetsSuperoperator) {
  std::mt19937_64 rng(4);
  const auto p = make_calibration_problem(DotSystem(random_hubbard(3, rng)), {},
                                          EncodingVariant::kStandardDfs,
                                          {CalibrationTarget::Kind::kGate, named_gate("Z")},
                                          ProjectionMode::kExtended, 2, 1.0);
  EXPECT_EQ(p.projection.cols(), 4);
  ASSERT_EQ(p.target.rows(), 4);
  const CMatrix z = named_gate("Z");
  EXPECT_LE(max_abs(p.target - CMatrix(Eigen::kroneckerProduct(z.conjugate(), z))), 0.0);
}

TEST(Gradient, MatchesFiniteDifferences) {
  std::mt19937_64 rng(5);
  for (int instance = 0; instance < 6; ++instance) {
    const CalibrationObjective objective(two_dot_problem(rng, instance % 2 == 0));
    const RMatrix c = testing::random_schedule(8, 1, 2.0, rng).coefficients();
    const RMatrix g = objective.evaluate(c, true).gradient;
    const RMatrix fd = finite_difference_gradient(objective, c);
    for (Eigen::Index i = 0; i < g.size(); ++i) {
      const double err = std::abs(g(i) - fd(i));
      EXPECT_TRUE(err <= 1e-4 * std::abs(fd(i)) || err <= 1e-8)
          << "entry " << i << ": " << g(i) << " vs " << fd(i);
    }
  }
}

TEST(Gradient, ThreeDotsMatchFiniteDifferences) {
  std::mt19937_64 rng(6);
  const auto problem = make_calibration_problem(
      DotSystem(random_hubbard(3, rng)),
      make_jump_operators(5.0, 4.0, logical_lowering(reference_pair(3))),
      EncodingVariant::kAsPrinted, {CalibrationTarget::Kind::kGate, named_gate("X")},
      ProjectionMode::kExtended, 2, 1.0);
  const CalibrationObjective objective(problem);
  const RMatrix c = testing::random_schedule(2, 2, 1.0, rng).coefficients();
  const RMatrix g = objective.evaluate(c, true).gradient;
  const RMatrix fd = finite_difference_gradient(objective, c);
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    EXPECT_TRUE(std::abs(g(i) - fd(i)) <= 1e-4 * std::abs(fd(i)) || std::abs(g(i) - fd(i)) <= 1e-8);
  }
}

TEST(Gradient, VanishesForZeroDuration) {
  std::mt19937_64 rng(7);
  const CalibrationObjective objective(two_dot_problem(rng, true, 8, 1e-12));
  const RMatrix c = testing::random_schedule(8, 1, 1e-12, rng).coefficients();
  EXPECT_LE(objective.evaluate(c, true).gradient.cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Gradient, ScalesWithLossWeight) {
  std::mt19937_64 rng(8);
  CalibrationProblem problem = two_dot_problem(rng, true);
  const RMatrix c = testing::random_schedule(8, 1, 2.0, rng).coefficients();
  const RMatrix g1 = CalibrationObjective(problem).evaluate(c, true).gradient;
  problem.loss_weight = 2.0;
  const RMatrix g2 = CalibrationObjective(problem).evaluate(c, true).gradient;
  EXPECT_EQ(g2, 2.0 * g1);
  const PulseSchedule s(c, 2.0);
  EXPECT_EQ(gradient(s, CalibrationObjective(problem)), g2);
}

TEST(Adam, ZeroGradientKeepsParams) {
  const RMatrix p = RMatrix::Random(3, 2);
  const auto up = adam_step(AdamState::fresh(3, 2), RMatrix::Zero(3, 2), p);
  EXPECT_EQ(up.params, p);
  EXPECT_EQ(up.state.step_count, 1);
}

TEST(Adam, FirstStepMagnitude) {
  const RMatrix p = RMatrix::Constant(1, 1, 0.5);
  const auto up = adam_step(AdamState::fresh(1, 1), RMatrix::Constant(1, 1, 2.0), p);
  EXPECT_NEAR(up.params(0, 0) - 0.5, -0.01 * (2.0 / (2.0 + 1e-8)), 1e-15);
}

TEST(Adam, MovesAgainstGradient) {
  std::mt19937_64 rng(9);
  const RMatrix g = testing::random_schedule(6, 2, 1.0, rng).coefficients();
  const RMatrix p = RMatrix::Zero(6, 2);
  const RMatrix moved = adam_step(AdamState::fresh(6, 2), g, p).params - p;
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    if (g(i) != 0.0) EXPECT_LT(moved(i) * g(i), 0.0);
  }
}

TEST(Adam, MatchesHandRolledRecurrence) {
  AdamHyperparams h;
  AdamState s = AdamState::fresh(1, 1, h);
  RMatrix p = RMatrix::Constant(1, 1, 1.0);
  double m = 0, v = 0, theta = 1.0;
  for (int t = 1; t <= 5; ++t) {
    const double g = std::sin(t) + 0.3;
    auto up = adam_step(s, RMatrix::Constant(1, 1, g), p);
    m = h.beta1 * m + (1 - h.beta1) * g;
    v = h.beta2 * v + (1 - h.beta2) * g * g;
    theta -= h.lr * (m / (1 - std::pow(h.beta1, t))) / (std::sqrt(v / (1 - std::pow(h.beta2, t))) + h.eps);
    p = up.params;
    s = up.state;
    EXPECT_NEAR(p(0, 0), theta, 1e-15);
    EXPECT_GE(s.second_moment(0, 0), 0.0);
  }
}

CalibrationProblem zero_pulse_problem() {
  const DotSystem sys(HubbardParams{3.0, {0.1, -0.2}, 0.4, 2});
  const auto u = build_superpropagator(PulseSchedule::zeros(8, 1, 1.0), sys, {});
  const CMatrix target = project_propagator(u.entries, projection_matrix(reference_pair(2)));
  return make_calibration_problem(sys, {}, EncodingVariant::kAsPrinted,
                                  {CalibrationTarget::Kind::kProjection, target},
                                  ProjectionMode::kPaper, 8, 1.0);
}

TEST(Optimize, AlreadyOptimalExitsImmediately) {
  const CalibrationObjective objective(zero_pulse_problem());
  OptimizerConfig cfg;
  cfg.initial = RMatrix::Zero(8, 1);
  const CalibrationResult r = optimize(objective, cfg);
  EXPECT_LE(r.best_loss, 1e-10);
  EXPECT_EQ(r.iterations, 0);
  EXPECT_EQ(r.loss_history.size(), 1u);
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(r.stop_reason, "loss_tol");
}

TEST(Optimize, ZeroIterationsEchoesInitialSchedule) {
  std::mt19937_64 rng(10);
  const CalibrationObjective objective(two_dot_problem(rng, false));
  OptimizerConfig cfg;
  cfg.stopping.max_iters = 0;
  cfg.seed = 3;
  const CalibrationResult r = optimize(objective, cfg);
  EXPECT_EQ(r.loss_history.size(), 1u);
  EXPECT_EQ(r.schedule.coefficients(), initial_coefficients(8, 1, 1.0, 3));
  EXPECT_EQ(r.stop_reason, "max_iters");
}

TEST(Optimize, ReproducibleAndBestSoFarMonotone) {
  std::mt19937_64 rng(11);
  const CalibrationObjective objective(two_dot_problem(rng, true));
  OptimizerConfig cfg;
  cfg.stopping.max_iters = 25;
  cfg.seed = 42;
  const CalibrationResult a = optimize(objective, cfg);
  const CalibrationResult b = optimize(objective, cfg);
  EXPECT_EQ(a.loss_history, b.loss_history);
  EXPECT_EQ(a.iterations, 25);
  double best = a.loss_history.front();
  for (double l : a.loss_history) {
    EXPECT_GE(l, 0.0);
    best = std::min(best, l);
  }
  EXPECT_EQ(best, a.best_loss);
  EXPECT_LE(a.best_loss, a.loss_history.front());
}

TEST(Optimize, PlateauStops) {
  std::mt19937_64 rng(12);
  const CalibrationObjective objective(two_dot_problem(rng, false));
  OptimizerConfig cfg;
  cfg.adam.lr = 1e-300;  // updates below the loss resolution
  cfg.stopping.plateau_tol = 1e-12;
  cfg.stopping.plateau_window = 3;
  cfg.stopping.loss_tol = 0.0;
  const CalibrationResult r = optimize(objective, cfg);
  EXPECT_EQ(r.stop_reason, "plateau");
  EXPECT_EQ(r.loss_history.size(), 4u);
}

TEST(Output, PulseTableAndHistoryFormat) {
  RMatrix c(2, 2);
  c << 0.5, -1.0, 0.25, 2.0;
  std::ostringstream table;
  write_pulse_table(table, PulseSchedule(c, 3.0));
  EXPECT_EQ(table.str(), "slice_index,t_start,t_end,c_0,c_1\n0,0,1.5,0.5,-1\n1,1.5,3,0.25,2\n");
  std::ostringstream history;
  const std::vector<double> losses{0.5, 0.125};
  write_loss_history(history, losses);
  EXPECT_EQ(history.str(), "iteration,loss\n0,0.5\n1,0.125\n");
}

}  // namespace
}  // namespace qdsim
