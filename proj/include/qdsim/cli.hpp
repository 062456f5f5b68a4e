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
#include <iosfwd>
#include <string>
#include <vector>

#include "qdsim/common.hpp"
#include "qdsim/config.hpp"

namespace qdsim {

// Binary superoperator dump: "QSOP", uint32 version (1), uint64 D^2, then
// D^2 * D^2 row-major (re, im) float64 pairs, all little-endian.
void write_superoperator(std::ostream& out, const Superoperator& u);
Superoperator read_superoperator(std::istream& in);
/// FNV-1a over the dump payload; equal hashes for bit-identical matrices.
std::uint64_t superoperator_hash(const Superoperator& u);

// Density matrices as `row,col,re,im` CSV; omitted entries are zero.
void write_state(std::ostream& out, const CMatrix& rho);
CMatrix read_state(std::istream& in, Eigen::Index dim);

/// Two-column `time,value` CSV.
void read_trace(std::istream& in, std::vector<double>& times, std::vector<double>& values);

struct BenchRecord {
  int n_dots = 0;
  int n_slices = 0;
  int workers = 0;
  std::string method;  // "magnus" or "serial-ode"
  double expansion_seconds = 0.0;
  double reduction_seconds = 0.0;
  double total_seconds = 0.0;
  double fidelity_vs_oracle = 0.0;
  std::string status = "ok";  // or "skipped: ..."
  std::uint64_t propagator_hash = 0;
};
void write_bench_report(std::ostream& out, const std::vector<BenchRecord>& records);

/// Process exit status for an error kind: 2 configuration, 3 numerical,
/// 4 input/output. Usage errors (1) are reported by the argument parser.
int exit_status(ErrorKind kind);

// Each command validates the whole configuration and loads every input
// before it creates the output directory. Progress lines go to `log`.
void cmd_propagate(const RunConfig& config, std::ostream& log);
void cmd_evolve(const RunConfig& config, std::ostream& log);
void cmd_optimize(const RunConfig& config, std::ostream& log);
void cmd_fit(const RunConfig& config, std::ostream& log);
std::vector<BenchRecord> cmd_bench(const RunConfig& config, std::ostream& log);

void run_command(Command command, const RunConfig& config, std::ostream& log);

}  // namespace qdsim
