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
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "qdsim/calibrate.hpp"
#include "qdsim/common.hpp"
#include "qdsim/hilbert.hpp"
#include "qdsim/magnus.hpp"

namespace qdsim {

/// Run configuration read from a single JSON document. Every field is
/// type- and range-checked while parsing; validate() adds the checks that
/// depend on which command is about to run.
struct RunConfig {
  struct Hubbard {
    double u_onsite = 0.0;
    /// One entry broadcasts to every dot; otherwise one entry per dot.
    std::vector<double> chem_potential{0.0};
    double u_neighbor = 0.0;
  };
  struct ControlSection {
    int n_slices = 16;
    double duration = 1.0;
    std::optional<RMatrix> coefficients;  // n_slices x (n_dots - 1)
    double init_scale = 1.0;
  };
  struct Decoherence {
    std::optional<double> t1;
    std::optional<double> t2;
  };
  struct Target {
    enum class Kind { kNone, kGate, kProjection };
    Kind kind = Kind::kNone;
    std::string gate_name;  // empty for an explicit matrix
    CMatrix matrix;
  };
  struct Optimizer {
    AdamHyperparams adam;
    StoppingRule stopping;
    ProjectionMode projection_mode = ProjectionMode::kPaper;
  };
  struct Propagator {
    ExpansionStrategy strategy = ExpansionStrategy::kSectors;
    bool dump_matrix = false;
  };
  struct Evolve {
    std::optional<std::filesystem::path> initial_state;
    std::optional<std::filesystem::path> propagator;  // prebuilt dump; rebuilt when absent
  };
  struct Fit {
    std::optional<std::filesystem::path> grid;
    std::optional<double> voltage;
    std::optional<std::filesystem::path> relaxation_trace;  // time,value CSV for T1
  };
  struct Bench {
    std::vector<int> dots{1, 2};
    std::vector<int> slices{16};
    std::vector<int> workers{1};
    double memory_budget_bytes = 8e9;
    int oracle_steps_per_slice = 200;
  };

  int n_dots = 2;
  Hubbard hubbard;
  ControlSection controls;
  Decoherence decoherence;
  EncodingVariant encoding = EncodingVariant::kAsPrinted;
  Target target;
  Optimizer optimizer;
  Propagator propagator;
  Evolve evolve;
  Fit fit;
  Bench bench;
  int workers = 1;
  std::uint64_t seed = 0;
  std::filesystem::path output = "qdsim-out";
};

enum class Command { kPropagate, kEvolve, kOptimize, kFit, kBench };

Command parse_command(const std::string& name);
std::string to_string(Command command);

/// Parses JSON text. Relative paths resolve against `base_dir`. Errors carry
/// ErrorKind::kConfig and name the offending field.
RunConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = {});
RunConfig load_config(const std::filesystem::path& path);

/// Command-specific completeness checks (required sections, shapes).
void validate(const RunConfig& config, Command command);

/// Hubbard parameters for `n_dots` dots under the broadcast rule.
HubbardParams hubbard_params(const RunConfig& config, int n_dots);
/// Jump operators from the decoherence section, lowering within the
/// reference qubit pair of an `n_dots` chain.
JumpOperatorSet jump_operators(const RunConfig& config, int n_dots);
/// The configured schedule, or a seeded uniform draw when none is given.
PulseSchedule control_schedule(const RunConfig& config, int n_dots, int n_slices);

}  // namespace qdsim
