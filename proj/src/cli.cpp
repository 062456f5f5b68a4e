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

#include "qdsim/cli.hpp"

#include <bit>
#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>

#include "json.hpp"
#include "qdsim/calibrate.hpp"
#include "qdsim/characterize.hpp"
#include "qdsim/liouville.hpp"
#include "qdsim/magnus.hpp"

namespace qdsim {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr char kMagic[4] = {'Q', 'S', 'O', 'P'};
constexpr std::uint32_t kDumpVersion = 1;
constexpr double kCptpTolerance = 1e-9;
constexpr double kPositivityTolerance = -1e-8;
constexpr int kCptpProbeStates = 3;

template <typename T>
void put_le(std::ostream& out, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T get_le(std::istream& in) {
  unsigned char bytes[sizeof(T)];
  in.read(reinterpret_cast<char*>(bytes), sizeof(T));
  require(in.gcount() == static_cast<std::streamsize>(sizeof(T)), ErrorKind::kParse,
          "superoperator dump is truncated");
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    cells.push_back(b == std::string::npos ? std::string() : cell.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double to_double(const std::string& cell, std::size_t line) {
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(cell, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != cell.size() || !std::isfinite(value)) {
    throw ParseError(line, "expected a finite number, got '" + cell + "'");
  }
  return value;
}

bool blank(const std::string& line) {
  return line.find_first_not_of(" \t\r") == std::string::npos;
}

void prepare_output(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  require(!ec && fs::is_directory(dir), ErrorKind::kIo,
          "cannot create output directory '" + dir.string() + "': " + ec.message());
}

std::ofstream open_output(const fs::path& path, std::ios::openmode mode = std::ios::out) {
  std::ofstream out(path, mode);
  require(out.good(), ErrorKind::kIo, "cannot write '" + path.string() + "'");
  return out;
}

std::ifstream open_input(const fs::path& path, std::ios::openmode mode = std::ios::in) {
  require(fs::exists(path), ErrorKind::kIo, "input file '" + path.string() + "' does not exist");
  std::ifstream in(path, mode);
  require(in.good(), ErrorKind::kIo, "cannot open '" + path.string() + "'");
  return in;
}

void write_json(const fs::path& path, const json& j) {
  auto out = open_output(path);
  out << std::setw(2) << j << '\n';
  require(out.good(), ErrorKind::kIo, "failed writing '" + path.string() + "'");
}

json to_json(const CMatrix& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back({m(r, c).real(), m(r, c).imag()});
    rows.push_back(std::move(row));
  }
  return rows;
}

json to_json(const DensityDiagnostics& d) {
  return {{"trace_error", d.trace_error},
          {"hermiticity_error", d.hermiticity_error},
          {"min_eigenvalue", d.min_eigenvalue}};
}

json to_json(const DampedSinusoidFit& f) {
  return {{"amplitude", f.amplitude},         {"decay_time", f.decay_time},
          {"angular_frequency", f.angular_frequency}, {"phase", f.phase},
          {"offset", f.offset},               {"residual_rms", f.residual_rms},
          {"iterations", f.iterations},       {"converged", f.converged}};
}

json to_json(const TimingBreakdown& t) {
  return {{"expansion_seconds", t.expansion_seconds},
          {"reduction_seconds", t.reduction_seconds},
          {"total_seconds", t.total_seconds()}};
}

struct CptpReport {
  double trace_preservation_error = 0.0;  // max |vec(I)^T U - vec(I)^T|
  DensityDiagnostics worst;               // over seeded probe states
  bool passed = false;
};

CptpReport check_cptp(const Superoperator& u, Eigen::Index dim, std::uint64_t seed) {
  CptpReport report;
  for (Eigen::Index col = 0; col < u.cols(); ++col) {
    Complex sum = 0.0;
    for (Eigen::Index i = 0; i < dim; ++i) sum += u(i + dim * i, col);
    const double expected = (col % (dim + 1) == 0) ? 1.0 : 0.0;
    report.trace_preservation_error =
        std::max(report.trace_preservation_error, std::abs(sum - expected));
  }
  std::mt19937_64 rng(seed);
  report.worst.min_eigenvalue = std::numeric_limits<double>::infinity();
  for (int k = 0; k < kCptpProbeStates; ++k) {
    const CMatrix rho = random_density_matrix(dim, rng);
    const DensityDiagnostics d = density_diagnostics(unvectorize(u * vectorize(rho)));
    report.worst.trace_error = std::max(report.worst.trace_error, d.trace_error);
    report.worst.hermiticity_error = std::max(report.worst.hermiticity_error, d.hermiticity_error);
    report.worst.min_eigenvalue = std::min(report.worst.min_eigenvalue, d.min_eigenvalue);
  }
  report.passed = report.trace_preservation_error <= kCptpTolerance &&
                  report.worst.trace_error <= kCptpTolerance &&
                  report.worst.hermiticity_error <= kCptpTolerance &&
                  report.worst.min_eigenvalue >= kPositivityTolerance;
  return report;
}

std::string hex(std::uint64_t h) {
  std::ostringstream s;
  s << std::hex << std::setw(16) << std::setfill('0') << h;
  return s.str();
}

PropagatorOptions options_from(const RunConfig& c) {
  PropagatorOptions o;
  o.workers = c.workers;
  o.strategy = c.propagator.strategy;
  return o;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

void write_superoperator(std::ostream& out, const Superoperator& u) {
  require(u.rows() == u.cols(), ErrorKind::kDimension, "superoperator must be square");
  out.write(kMagic, 4);
  put_le<std::uint32_t>(out, kDumpVersion);
  put_le<std::uint64_t>(out, static_cast<std::uint64_t>(u.rows()));
  for (Eigen::Index r = 0; r < u.rows(); ++r) {
    for (Eigen::Index c = 0; c < u.cols(); ++c) {
      put_le<double>(out, u(r, c).real());
      put_le<double>(out, u(r, c).imag());
    }
  }
}

Superoperator read_superoperator(std::istream& in) {
  char magic[4] = {};
  in.read(magic, 4);
  require(in.gcount() == 4 && std::memcmp(magic, kMagic, 4) == 0, ErrorKind::kParse,
          "not a superoperator dump (bad magic)");
  const auto version = get_le<std::uint32_t>(in);
  require(version == kDumpVersion, ErrorKind::kParse,
          "unsupported superoperator dump version " + std::to_string(version));
  const auto n = get_le<std::uint64_t>(in);
  require(n >= 1 && n <= (1u << 16), ErrorKind::kParse, "implausible dump dimension");
  Superoperator u(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (Eigen::Index r = 0; r < u.rows(); ++r) {
    for (Eigen::Index c = 0; c < u.cols(); ++c) {
      const double re = get_le<double>(in);
      const double im = get_le<double>(in);
      u(r, c) = {re, im};
    }
  }
  return u;
}

std::uint64_t superoperator_hash(const Superoperator& u) {
  std::ostringstream bytes;
  write_superoperator(bytes, u);
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : bytes.str()) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  return h;
}

void write_state(std::ostream& out, const CMatrix& rho) {
  out << std::setprecision(17) << "row,col,re,im\n";
  for (Eigen::Index r = 0; r < rho.rows(); ++r) {
    for (Eigen::Index c = 0; c < rho.cols(); ++c) {
      out << r << ',' << c << ',' << rho(r, c).real() << ',' << rho(r, c).imag() << '\n';
    }
  }
}

CMatrix read_state(std::istream& in, Eigen::Index dim) {
  CMatrix rho = CMatrix::Zero(dim, dim);
  std::string line;
  std::size_t line_no = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    const auto cells = split(line);
    if (!header) {
      if (cells != std::vector<std::string>{"row", "col", "re", "im"}) {
        throw ParseError(line_no, "expected header 'row,col,re,im'");
      }
      header = true;
      continue;
    }
    if (cells.size() != 4) throw ParseError(line_no, "expected 4 cells");
    const double r = to_double(cells[0], line_no);
    const double c = to_double(cells[1], line_no);
    if (r != std::floor(r) || c != std::floor(c) || r < 0 || c < 0 || r >= static_cast<double>(dim) ||
        c >= static_cast<double>(dim)) {
      throw ParseError(line_no, "index outside a " + std::to_string(dim) + "x" +
                                    std::to_string(dim) + " state");
    }
    rho(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
        Complex(to_double(cells[2], line_no), to_double(cells[3], line_no));
  }
  if (!header) throw ParseError(line_no, "missing 'row,col,re,im' header");
  return rho;
}

void read_trace(std::istream& in, std::vector<double>& times, std::vector<double>& values) {
  times.clear();
  values.clear();
  std::string line;
  std::size_t line_no = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    const auto cells = split(line);
    if (!header) {
      if (cells.size() != 2 || cells[0] != "time") {
        throw ParseError(line_no, "expected header 'time,<value column>'");
      }
      header = true;
      continue;
    }
    if (cells.size() != 2) throw ParseError(line_no, "expected 2 cells");
    const double t = to_double(cells[0], line_no);
    if (!times.empty() && t <= times.back()) {
      throw ParseError(line_no, "times must be strictly ascending");
    }
    times.push_back(t);
    values.push_back(to_double(cells[1], line_no));
  }
  if (!header) throw ParseError(line_no, "missing 'time,...' header");
}

void write_bench_report(std::ostream& out, const std::vector<BenchRecord>& records) {
  out << "n_dots,n_slices,workers,method,expansion_seconds,reduction_seconds,total_seconds,"
         "fidelity_vs_oracle,status,propagator_hash\n";
  out << std::setprecision(9);
  for (const BenchRecord& r : records) {
    out << r.n_dots << ',' << r.n_slices << ',' << r.workers << ',' << r.method << ','
        << r.expansion_seconds << ',' << r.reduction_seconds << ',' << r.total_seconds << ','
        << std::setprecision(17) << r.fidelity_vs_oracle << std::setprecision(9) << ','
        << r.status << ',' << (r.propagator_hash ? hex(r.propagator_hash) : std::string()) << '\n';
  }
}

int exit_status(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kConfig:
    case ErrorKind::kInvalidArgument:
    case ErrorKind::kCapacity:
    case ErrorKind::kDimension:
      return 2;
    case ErrorKind::kNumerical:
    case ErrorKind::kDegenerateSignal:
      return 3;
    case ErrorKind::kParse:
    case ErrorKind::kIo:
      return 4;
  }
  return 3;
}

void cmd_propagate(const RunConfig& c, std::ostream& log) {
  validate(c, Command::kPropagate);
  const DotSystem system(hubbard_params(c, c.n_dots));
  const JumpOperatorSet jumps = jump_operators(c, c.n_dots);
  const PulseSchedule schedule = control_schedule(c, c.n_dots, c.controls.n_slices);
  const Eigen::Index dim = system.dim();

  log << "propagate: N=" << c.n_dots << " D^2=" << dim * dim << " M=" << schedule.n_slices()
      << " strategy=" << to_string(c.propagator.strategy) << " workers=" << c.workers << '\n';
  const SuperPropagator sp = build_superpropagator(schedule, system, jumps, options_from(c));
  const Superoperator& u = sp.entries;

  const double identity_distance = max_abs(u - Superoperator::Identity(u.rows(), u.cols()));
  const CptpReport cptp = check_cptp(u, dim, c.seed);
  json summary = {{"n_dots", c.n_dots},
                  {"hilbert_dim", dim},
                  {"liouville_dim", dim * dim},
                  {"n_slices", schedule.n_slices()},
                  {"duration", schedule.total_duration()},
                  {"workers", c.workers},
                  {"strategy", to_string(c.propagator.strategy)},
                  {"timing", to_json(sp.timing)},
                  {"identity_distance", identity_distance},
                  {"cptp",
                   {{"passed", cptp.passed},
                    {"trace_preservation_error", cptp.trace_preservation_error},
                    {"probe_states", kCptpProbeStates},
                    {"worst", to_json(cptp.worst)}}},
                  {"propagator_hash", hex(superoperator_hash(u))}};
  if (schedule.coefficients().size() == 0 || schedule.coefficients().isZero(0.0)) {
    // Without controls the map must equal the exact static evolution.
    const SuperPropagator reference =
        build_superpropagator(PulseSchedule::zeros(1, system.n_bonds(), schedule.total_duration()),
                              system, jumps, options_from(c));
    summary["free_evolution_distance"] = max_abs(u - reference.entries);
  }
  require(cptp.passed, ErrorKind::kNumerical,
          "propagator failed the CPTP check (trace preservation error " +
              std::to_string(cptp.trace_preservation_error) + ", min eigenvalue " +
              std::to_string(cptp.worst.min_eigenvalue) + ")");

  prepare_output(c.output);
  if (c.propagator.dump_matrix) {
    const fs::path dump = c.output / "propagator.qsop";
    auto out = open_output(dump, std::ios::binary);
    write_superoperator(out, u);
    require(out.good(), ErrorKind::kIo, "failed writing '" + dump.string() + "'");
    summary["matrix_dump"] = dump.string();
  }
  write_json(c.output / "propagate_summary.json", summary);
  log << "propagate: total " << sp.timing.total_seconds() << " s, identity distance "
      << identity_distance << ", CPTP ok\n";
}

void cmd_evolve(const RunConfig& c, std::ostream& log) {
  validate(c, Command::kEvolve);
  const DotSystem system(hubbard_params(c, c.n_dots));
  const Eigen::Index dim = system.dim();
  auto state_in = open_input(*c.evolve.initial_state);
  const CMatrix rho0 = read_state(state_in, dim);
  DensityTolerance tol;
  tol.trace = kCptpTolerance;
  tol.hermiticity = kCptpTolerance;
  require(is_density_matrix(rho0, tol), ErrorKind::kConfig,
          "config: evolve.initial_state: not a density matrix (trace 1, Hermitian, PSD)");

  Superoperator u;
  TimingBreakdown timing;
  if (c.evolve.propagator) {
    auto in = open_input(*c.evolve.propagator, std::ios::binary);
    u = read_superoperator(in);
    require(u.rows() == dim * dim, ErrorKind::kConfig,
            "config: evolve.propagator: dump dimension " + std::to_string(u.rows()) +
                " does not match D^2 = " + std::to_string(dim * dim));
  } else {
    const PulseSchedule schedule = control_schedule(c, c.n_dots, c.controls.n_slices);
    SuperPropagator sp =
        build_superpropagator(schedule, system, jump_operators(c, c.n_dots), options_from(c));
    u = std::move(sp.entries);
    timing = sp.timing;
  }
  const CMatrix rho = apply_propagator(u, rho0);
  const DensityDiagnostics diag = density_diagnostics(rho);

  prepare_output(c.output);
  {
    auto out = open_output(c.output / "final_state.csv");
    write_state(out, rho);
  }
  write_json(c.output / "evolve_summary.json",
             {{"n_dots", c.n_dots},
              {"hilbert_dim", dim},
              {"timing", to_json(timing)},
              {"diagnostics", to_json(diag)},
              {"purity", (rho * rho).trace().real()},
              {"fidelity_with_initial", uhlmann_fidelity(rho0, rho)}});
  log << "evolve: wrote " << (c.output / "final_state.csv").string() << '\n';
}

void cmd_optimize(const RunConfig& c, std::ostream& log) {
  validate(c, Command::kOptimize);
  DotSystem system(hubbard_params(c, c.n_dots));
  JumpOperatorSet jumps = jump_operators(c, c.n_dots);
  CalibrationTarget target;
  target.kind = c.target.kind == RunConfig::Target::Kind::kGate ? CalibrationTarget::Kind::kGate
                                                                : CalibrationTarget::Kind::kProjection;
  target.matrix = c.target.matrix;
  CalibrationProblem problem =
      make_calibration_problem(std::move(system), std::move(jumps), c.encoding, target,
                               c.optimizer.projection_mode, c.controls.n_slices, c.controls.duration);
  problem.strategy = c.propagator.strategy;
  problem.workers = c.workers;
  const CalibrationObjective objective(std::move(problem));

  OptimizerConfig opt;
  opt.adam = c.optimizer.adam;
  opt.stopping = c.optimizer.stopping;
  opt.init_scale = c.controls.init_scale;
  opt.seed = c.seed;
  opt.initial = c.controls.coefficients;

  log << "optimize: N=" << c.n_dots << " M=" << c.controls.n_slices
      << " max_iters=" << opt.stopping.max_iters << '\n';
  const CalibrationResult result = optimize(objective, opt);

  prepare_output(c.output);
  {
    auto out = open_output(c.output / "pulses.csv");
    write_pulse_table(out, result.schedule);
  }
  {
    auto out = open_output(c.output / "loss_history.csv");
    write_loss_history(out, result.loss_history);
  }
  write_json(c.output / "calibration_summary.json",
             {{"best_loss", result.best_loss},
              {"final_loss", result.loss_history.back()},
              {"iterations", result.iterations},
              {"converged", result.converged},
              {"stop_reason", result.stop_reason},
              {"final_projection", to_json(result.final_projection)}});
  log << "optimize: best loss " << result.best_loss << " after " << result.iterations
      << " updates (" << result.stop_reason << ")\n";
}

void cmd_fit(const RunConfig& c, std::ostream& log) {
  validate(c, Command::kFit);
  const CharacterizationGrid grid = load_grid(*c.fit.grid);
  const DecayReport decay = extract_decay_times(grid, *c.fit.voltage);
  json report = {{"voltage_used", decay.voltage_used},
                 {"row", decay.row},
                 {"t2", decay.t2},
                 {"fit", to_json(decay.fit)},
                 {"residual_rms", decay.fit.residual_rms}};
  if (c.fit.relaxation_trace) {
    auto in = open_input(*c.fit.relaxation_trace);
    std::vector<double> t, y;
    read_trace(in, t, y);
    const RelaxationReport relax = extract_relaxation_time(t, y);
    report["t1"] = relax.t1;
    report["relaxation_fit"] = to_json(relax.fit);
  }
  prepare_output(c.output);
  write_json(c.output / "fit_report.json", report);
  log << "fit: voltage " << decay.voltage_used << " T2 = " << decay.t2;
  if (report.contains("t1")) log << " T1 = " << report["t1"].get<double>();
  log << '\n';
}

std::vector<BenchRecord> cmd_bench(const RunConfig& c, std::ostream& log) {
  validate(c, Command::kBench);
  std::vector<BenchRecord> records;
  for (int n : c.bench.dots) {
    const DotSystem system(hubbard_params(c, n));
    const JumpOperatorSet jumps = jump_operators(c, n);
    std::mt19937_64 rng(c.seed);
    const CMatrix probe = random_density_matrix(system.dim(), rng);
    for (int m : c.bench.slices) {
      const PulseSchedule schedule = control_schedule(c, n, m);
      const double bytes = estimate_working_set_bytes(system, jumps, m, c.propagator.strategy);
      if (bytes > c.bench.memory_budget_bytes) {
        BenchRecord skipped{n, m, 0, "magnus", 0.0, 0.0, 0.0, 0.0, {}, 0};
        std::ostringstream why;
        why << "skipped: working set " << bytes << " B exceeds budget " << c.bench.memory_budget_bytes
            << " B";
        skipped.status = why.str();
        log << "bench: warning: N=" << n << " M=" << m << ' ' << skipped.status << '\n';
        records.push_back(std::move(skipped));
        continue;
      }
      const auto start = std::chrono::steady_clock::now();
      const CMatrix oracle =
          reference_evolve(probe, schedule, system, jumps, c.bench.oracle_steps_per_slice);
      const double oracle_seconds = seconds_since(start);
      std::vector<BenchRecord> point;
      for (int w : c.bench.workers) {
        PropagatorOptions opts = options_from(c);
        opts.workers = w;
        const SuperPropagator sp = build_superpropagator(schedule, system, jumps, opts);
        BenchRecord r{n, m, w, "magnus", sp.timing.expansion_seconds, sp.timing.reduction_seconds,
                      sp.timing.total_seconds(), 0.0, "ok", superoperator_hash(sp.entries)};
        r.fidelity_vs_oracle = uhlmann_fidelity(apply_propagator(sp, probe), oracle);
        log << "bench: N=" << n << " M=" << m << " workers=" << w << " total " << r.total_seconds
            << " s (reduction " << r.reduction_seconds << " s) fidelity " << r.fidelity_vs_oracle
            << '\n';
        records.push_back(r);
      }
      records.push_back(
          {n, m, 1, "serial-ode", oracle_seconds, 0.0, oracle_seconds, 1.0, "ok", 0});
    }
  }
  prepare_output(c.output);
  auto out = open_output(c.output / "bench.csv");
  write_bench_report(out, records);
  return records;
}

void run_command(Command command, const RunConfig& config, std::ostream& log) {
  switch (command) {
    case Command::kPropagate: cmd_propagate(config, log); return;
    case Command::kEvolve: cmd_evolve(config, log); return;
    case Command::kOptimize: cmd_optimize(config, log); return;
    case Command::kFit: cmd_fit(config, log); return;
    case Command::kBench: cmd_bench(config, log); return;
  }
}

}  // namespace qdsim
