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

#include "qdsim/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include "json.hpp"
#include "qdsim/liouville.hpp"

namespace qdsim {
namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& field, const std::string& what) {
  fail(ErrorKind::kConfig, "config: " + field + ": " + what);
}

std::string join(const std::string& parent, const std::string& key) {
  return parent.empty() ? key : parent + "." + key;
}

void check_keys(const json& obj, const std::string& field,
                std::initializer_list<std::string_view> allowed) {
  if (!obj.is_object()) bad(field.empty() ? "<root>" : field, "expected an object");
  for (const auto& [key, value] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      bad(join(field, key), "unknown key");
    }
  }
}

double as_number(const json& v, const std::string& field) {
  if (!v.is_number()) bad(field, "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) bad(field, "must be finite");
  return x;
}

double as_positive(const json& v, const std::string& field) {
  const double x = as_number(v, field);
  if (x <= 0.0) bad(field, "must be positive");
  return x;
}

std::int64_t as_integer(const json& v, const std::string& field) {
  if (!v.is_number_integer()) bad(field, "expected an integer");
  return v.get<std::int64_t>();
}

int as_int_at_least(const json& v, const std::string& field, int lo) {
  const std::int64_t x = as_integer(v, field);
  if (x < lo || x > 1'000'000'000) bad(field, "must be an integer >= " + std::to_string(lo));
  return static_cast<int>(x);
}

std::string as_string(const json& v, const std::string& field) {
  if (!v.is_string()) bad(field, "expected a string");
  return v.get<std::string>();
}

bool as_bool(const json& v, const std::string& field) {
  if (!v.is_boolean()) bad(field, "expected true or false");
  return v.get<bool>();
}

std::filesystem::path as_path(const json& v, const std::string& field,
                              const std::filesystem::path& base) {
  const std::string s = as_string(v, field);
  if (s.empty()) bad(field, "path must not be empty");
  std::filesystem::path p(s);
  return p.is_relative() && !base.empty() ? base / p : p;
}

std::vector<int> as_int_list(const json& v, const std::string& field, int lo) {
  if (!v.is_array() || v.empty()) bad(field, "expected a nonempty list of integers");
  std::vector<int> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out.push_back(as_int_at_least(v[i], field + "[" + std::to_string(i) + "]", lo));
  }
  return out;
}

Complex as_complex(const json& v, const std::string& field) {
  if (v.is_number()) return {as_number(v, field), 0.0};
  if (v.is_array() && v.size() == 2) {
    return {as_number(v[0], field + "[0]"), as_number(v[1], field + "[1]")};
  }
  bad(field, "expected a number or a [re, im] pair");
}

template <typename Scalar, typename Entry>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> as_matrix(const json& v,
                                                                const std::string& field,
                                                                Entry entry) {
  if (!v.is_array() || v.empty()) bad(field, "expected a nonempty list of rows");
  const std::size_t cols = v[0].is_array() ? v[0].size() : 0;
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> m(static_cast<Eigen::Index>(v.size()),
                                                          static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < v.size(); ++r) {
    const std::string row_field = field + "[" + std::to_string(r) + "]";
    if (!v[r].is_array() || v[r].size() != cols) bad(row_field, "rows must have equal length");
    for (std::size_t c = 0; c < cols; ++c) {
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          entry(v[r][c], row_field + "[" + std::to_string(c) + "]");
    }
  }
  return m;
}

void parse_hubbard(const json& j, RunConfig::Hubbard& h) {
  check_keys(j, "hubbard", {"u_onsite", "chem_potential", "u_neighbor"});
  if (j.contains("u_onsite")) h.u_onsite = as_number(j["u_onsite"], "hubbard.u_onsite");
  if (j.contains("u_neighbor")) h.u_neighbor = as_number(j["u_neighbor"], "hubbard.u_neighbor");
  if (j.contains("chem_potential")) {
    const json& v = j["chem_potential"];
    h.chem_potential.clear();
    if (v.is_array()) {
      if (v.empty()) bad("hubbard.chem_potential", "list must not be empty");
      for (std::size_t i = 0; i < v.size(); ++i) {
        h.chem_potential.push_back(
            as_number(v[i], "hubbard.chem_potential[" + std::to_string(i) + "]"));
      }
    } else {
      h.chem_potential.push_back(as_number(v, "hubbard.chem_potential"));
    }
  }
}

void parse_controls(const json& j, RunConfig::ControlSection& c) {
  check_keys(j, "controls", {"n_slices", "duration", "coefficients", "init_scale"});
  if (j.contains("n_slices")) c.n_slices = as_int_at_least(j["n_slices"], "controls.n_slices", 1);
  if (j.contains("duration")) c.duration = as_positive(j["duration"], "controls.duration");
  if (j.contains("init_scale")) {
    c.init_scale = as_number(j["init_scale"], "controls.init_scale");
    if (c.init_scale < 0.0) bad("controls.init_scale", "must be nonnegative");
  }
  if (j.contains("coefficients")) {
    c.coefficients = as_matrix<double>(j["coefficients"], "controls.coefficients", as_number);
  }
}

void parse_target(const json& j, RunConfig::Target& t) {
  check_keys(j, "target", {"gate", "matrix", "projection"});
  const int given = static_cast<int>(j.contains("gate")) + static_cast<int>(j.contains("matrix")) +
                    static_cast<int>(j.contains("projection"));
  if (given != 1) bad("target", "give exactly one of gate, matrix or projection");
  if (j.contains("gate")) {
    t.kind = RunConfig::Target::Kind::kGate;
    t.gate_name = as_string(j["gate"], "target.gate");
    try {
      t.matrix = named_gate(t.gate_name);
    } catch (const Error&) {
      bad("target.gate", "unknown gate '" + t.gate_name + "' (expected X, Z, H or I)");
    }
  } else if (j.contains("matrix")) {
    t.kind = RunConfig::Target::Kind::kGate;
    t.matrix = as_matrix<Complex>(j["matrix"], "target.matrix", as_complex);
    if (t.matrix.rows() != 2 || t.matrix.cols() != 2) bad("target.matrix", "must be 2x2");
    if (!is_unitary(t.matrix, 1e-8)) bad("target.matrix", "must be unitary");
  } else {
    t.kind = RunConfig::Target::Kind::kProjection;
    t.matrix = as_matrix<Complex>(j["projection"], "target.projection", as_complex);
  }
}

void parse_optimizer(const json& j, RunConfig::Optimizer& o) {
  check_keys(j, "optimizer",
             {"lr", "beta1", "beta2", "eps", "max_iters", "loss_tol", "plateau_tol",
              "plateau_window", "projection_mode"});
  if (j.contains("lr")) o.adam.lr = as_positive(j["lr"], "optimizer.lr");
  for (const auto& [key, slot] :
       {std::pair{"beta1", &o.adam.beta1}, std::pair{"beta2", &o.adam.beta2}}) {
    if (!j.contains(key)) continue;
    *slot = as_number(j[key], std::string("optimizer.") + key);
    if (*slot < 0.0 || *slot >= 1.0) bad(std::string("optimizer.") + key, "must lie in [0, 1)");
  }
  if (j.contains("eps")) o.adam.eps = as_positive(j["eps"], "optimizer.eps");
  if (j.contains("max_iters")) {
    o.stopping.max_iters = as_int_at_least(j["max_iters"], "optimizer.max_iters", 0);
  }
  if (j.contains("loss_tol")) {
    o.stopping.loss_tol = as_number(j["loss_tol"], "optimizer.loss_tol");
    if (o.stopping.loss_tol < 0.0) bad("optimizer.loss_tol", "must be nonnegative");
  }
  if (j.contains("plateau_tol")) {
    o.stopping.plateau_tol = as_number(j["plateau_tol"], "optimizer.plateau_tol");
    if (o.stopping.plateau_tol < 0.0) bad("optimizer.plateau_tol", "must be nonnegative");
  }
  if (j.contains("plateau_window")) {
    o.stopping.plateau_window = as_int_at_least(j["plateau_window"], "optimizer.plateau_window", 1);
  }
  if (j.contains("projection_mode")) {
    const std::string mode = as_string(j["projection_mode"], "optimizer.projection_mode");
    if (mode == "paper") {
      o.projection_mode = ProjectionMode::kPaper;
    } else if (mode == "extended") {
      o.projection_mode = ProjectionMode::kExtended;
    } else {
      bad("optimizer.projection_mode", "expected \"paper\" or \"extended\", got \"" + mode + "\"");
    }
  }
}

void parse_propagator(const json& j, RunConfig::Propagator& p) {
  check_keys(j, "propagator", {"strategy", "dump_matrix"});
  if (j.contains("strategy")) {
    const std::string s = as_string(j["strategy"], "propagator.strategy");
    if (s == "dense") {
      p.strategy = ExpansionStrategy::kDense;
    } else if (s == "sectors") {
      p.strategy = ExpansionStrategy::kSectors;
    } else {
      bad("propagator.strategy", "expected \"dense\" or \"sectors\", got \"" + s + "\"");
    }
  }
  if (j.contains("dump_matrix")) p.dump_matrix = as_bool(j["dump_matrix"], "propagator.dump_matrix");
}

void parse_bench(const json& j, RunConfig::Bench& b) {
  check_keys(j, "bench",
             {"dots", "slices", "workers", "memory_budget_bytes", "oracle_steps_per_slice"});
  if (j.contains("dots")) {
    b.dots = as_int_list(j["dots"], "bench.dots", 1);
    for (int n : b.dots) {
      if (n > 3) bad("bench.dots", "chains longer than 3 dots are not supported");
    }
  }
  if (j.contains("slices")) b.slices = as_int_list(j["slices"], "bench.slices", 1);
  if (j.contains("workers")) b.workers = as_int_list(j["workers"], "bench.workers", 1);
  if (j.contains("memory_budget_bytes")) {
    b.memory_budget_bytes = as_positive(j["memory_budget_bytes"], "bench.memory_budget_bytes");
  }
  if (j.contains("oracle_steps_per_slice")) {
    b.oracle_steps_per_slice =
        as_int_at_least(j["oracle_steps_per_slice"], "bench.oracle_steps_per_slice", 1);
  }
}

}  // namespace

Command parse_command(const std::string& name) {
  if (name == "propagate") return Command::kPropagate;
  if (name == "evolve") return Command::kEvolve;
  if (name == "optimize") return Command::kOptimize;
  if (name == "fit") return Command::kFit;
  if (name == "bench") return Command::kBench;
  fail(ErrorKind::kInvalidArgument, "unknown command '" + name + "'");
}

std::string to_string(Command command) {
  switch (command) {
    case Command::kPropagate: return "propagate";
    case Command::kEvolve: return "evolve";
    case Command::kOptimize: return "optimize";
    case Command::kFit: return "fit";
    case Command::kBench: return "bench";
  }
  return "?";
}

RunConfig parse_config(const std::string& text, const std::filesystem::path& base_dir) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(ErrorKind::kConfig, std::string("config: malformed JSON: ") + e.what());
  }
  check_keys(j, "",
             {"n_dots", "hubbard", "controls", "decoherence", "encoding", "target", "optimizer",
              "propagator", "evolve", "fit", "bench", "workers", "seed", "output"});
  RunConfig c;
  if (j.contains("n_dots")) {
    c.n_dots = as_int_at_least(j["n_dots"], "n_dots", 1);
    if (c.n_dots > 3) bad("n_dots", "chains longer than 3 dots are not supported");
  }
  if (j.contains("hubbard")) parse_hubbard(j["hubbard"], c.hubbard);
  if (j.contains("controls")) parse_controls(j["controls"], c.controls);
  if (j.contains("decoherence")) {
    const json& d = j["decoherence"];
    check_keys(d, "decoherence", {"t1", "t2"});
    if (d.contains("t1") && !d["t1"].is_null()) c.decoherence.t1 = as_positive(d["t1"], "decoherence.t1");
    if (d.contains("t2") && !d["t2"].is_null()) c.decoherence.t2 = as_positive(d["t2"], "decoherence.t2");
  }
  if (j.contains("encoding")) {
    const std::string e = as_string(j["encoding"], "encoding");
    if (e == "as-printed") {
      c.encoding = EncodingVariant::kAsPrinted;
    } else if (e == "standard-dfs") {
      c.encoding = EncodingVariant::kStandardDfs;
    } else {
      bad("encoding", "expected \"as-printed\" or \"standard-dfs\", got \"" + e + "\"");
    }
  }
  if (j.contains("target")) parse_target(j["target"], c.target);
  if (j.contains("optimizer")) parse_optimizer(j["optimizer"], c.optimizer);
  if (j.contains("propagator")) parse_propagator(j["propagator"], c.propagator);
  if (j.contains("evolve")) {
    const json& e = j["evolve"];
    check_keys(e, "evolve", {"initial_state", "propagator"});
    if (e.contains("initial_state")) {
      c.evolve.initial_state = as_path(e["initial_state"], "evolve.initial_state", base_dir);
    }
    if (e.contains("propagator")) {
      c.evolve.propagator = as_path(e["propagator"], "evolve.propagator", base_dir);
    }
  }
  if (j.contains("fit")) {
    const json& f = j["fit"];
    check_keys(f, "fit", {"grid", "voltage", "relaxation_trace"});
    if (f.contains("grid")) c.fit.grid = as_path(f["grid"], "fit.grid", base_dir);
    if (f.contains("voltage")) c.fit.voltage = as_number(f["voltage"], "fit.voltage");
    if (f.contains("relaxation_trace")) {
      c.fit.relaxation_trace = as_path(f["relaxation_trace"], "fit.relaxation_trace", base_dir);
    }
  }
  if (j.contains("bench")) parse_bench(j["bench"], c.bench);
  if (j.contains("workers")) c.workers = as_int_at_least(j["workers"], "workers", 1);
  if (j.contains("seed")) {
    const json& s = j["seed"];
    if (!s.is_number_integer() || (s.is_number_integer() && !s.is_number_unsigned() && s.get<std::int64_t>() < 0)) {
      bad("seed", "expected a nonnegative integer");
    }
    c.seed = s.get<std::uint64_t>();
  }
  if (j.contains("output")) c.output = as_path(j["output"], "output", base_dir);
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(in.good(), ErrorKind::kIo, "cannot open config file '" + path.string() + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str(), path.parent_path());
}

void validate(const RunConfig& c, Command command) {
  const std::size_t mu = c.hubbard.chem_potential.size();
  const auto check_mu = [&](int n) {
    if (mu != 1 && mu < static_cast<std::size_t>(n)) {
      bad("hubbard.chem_potential", "needs one entry or at least " + std::to_string(n) +
                                        " entries, got " + std::to_string(mu));
    }
  };
  const auto check_coefficients = [&] {
    if (!c.controls.coefficients) return;
    const RMatrix& k = *c.controls.coefficients;
    if (k.rows() != c.controls.n_slices || k.cols() != c.n_dots - 1) {
      bad("controls.coefficients",
          "expected " + std::to_string(c.controls.n_slices) + " rows of " +
              std::to_string(c.n_dots - 1) + " entries, got " + std::to_string(k.rows()) + "x" +
              std::to_string(k.cols()));
    }
  };
  if (mu != 1 && command != Command::kBench && command != Command::kFit &&
      mu != static_cast<std::size_t>(c.n_dots)) {
    bad("hubbard.chem_potential", "needs one entry or exactly n_dots = " +
                                      std::to_string(c.n_dots) + " entries, got " +
                                      std::to_string(mu));
  }
  switch (command) {
    case Command::kPropagate:
      check_coefficients();
      break;
    case Command::kEvolve:
      check_coefficients();
      if (!c.evolve.initial_state) bad("evolve.initial_state", "required by the evolve command");
      break;
    case Command::kOptimize: {
      check_coefficients();
      if (c.target.kind == RunConfig::Target::Kind::kNone) {
        bad("target", "required by the optimize command");
      }
      if (c.n_dots < 2) bad("n_dots", "calibration needs at least two dots");
      if (c.target.kind == RunConfig::Target::Kind::kGate && c.n_dots != 3) {
        bad("target", "a logical gate target needs the 3-dot exchange-only encoding but n_dots = " +
                          std::to_string(c.n_dots) +
                          "; for a 2-dot chain give target.projection (a projected target "
                          "in self-consistency mode) instead");
      }
      if (c.target.kind == RunConfig::Target::Kind::kProjection) {
        const Eigen::Index k = c.optimizer.projection_mode == ProjectionMode::kPaper ? 2 : 4;
        if (c.target.matrix.rows() != k || c.target.matrix.cols() != k) {
          bad("target.projection", "must be " + std::to_string(k) + "x" + std::to_string(k) +
                                       " in this projection mode");
        }
      }
      break;
    }
    case Command::kFit:
      if (!c.fit.grid) bad("fit.grid", "required by the fit command");
      if (!c.fit.voltage) bad("fit.voltage", "required by the fit command");
      break;
    case Command::kBench:
      for (int n : c.bench.dots) check_mu(n);
      break;
  }
}

HubbardParams hubbard_params(const RunConfig& c, int n_dots) {
  HubbardParams p;
  p.n_dots = n_dots;
  p.u_onsite = c.hubbard.u_onsite;
  p.u_neighbor = c.hubbard.u_neighbor;
  const auto& mu = c.hubbard.chem_potential;
  if (mu.size() == 1) {
    p.chem_potential.assign(static_cast<std::size_t>(n_dots), mu.front());
  } else {
    if (mu.size() < static_cast<std::size_t>(n_dots)) bad("hubbard.chem_potential", "too few entries");
    p.chem_potential.assign(mu.begin(), mu.begin() + n_dots);
  }
  p.validate();
  return p;
}

JumpOperatorSet jump_operators(const RunConfig& c, int n_dots) {
  if (!c.decoherence.t1 && !c.decoherence.t2) return {};
  return make_jump_operators(c.decoherence.t1, c.decoherence.t2,
                             logical_lowering(reference_pair(n_dots, c.encoding)));
}

PulseSchedule control_schedule(const RunConfig& c, int n_dots, int n_slices) {
  if (c.controls.coefficients && n_dots == c.n_dots && n_slices == c.controls.n_slices) {
    return PulseSchedule(*c.controls.coefficients, c.controls.duration);
  }
  return PulseSchedule(initial_coefficients(n_slices, n_dots - 1, c.controls.init_scale, c.seed),
                       c.controls.duration);
}

}  // namespace qdsim
