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
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <sys/wait.h>

#include "json.hpp"
#include "qdsim/characterize.hpp"
#include "qdsim/cli.hpp"
#include "qdsim/liouville.hpp"
#include "test_support.hpp"

namespace qdsim {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / (std::string("qdsim-cli-") + info->name() + "-" +
                                        std::to_string(::getpid()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path write(const std::string& name, const std::string& text) const {
    std::ofstream(dir_ / name) << text;
    return dir_ / name;
  }

  RunConfig config(json j) const {
    if (!j.contains("output")) j["output"] = "out";
    return parse_config(j.dump(), dir_);
  }

  static json read_json(const fs::path& p) {
    std::ifstream in(p);
    return json::parse(in);
  }

  int run_cli(const std::string& args) const {
    const std::string cmd = std::string(QDSIM_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  fs::path dir_;
};

std::ostringstream sink;

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorKind::kIo;
}

TEST(Config, DefaultsAndFieldMessages) {
  const RunConfig c = parse_config("{}");
  EXPECT_EQ(c.n_dots, 2);
  EXPECT_EQ(c.optimizer.adam.lr, 0.01);
  EXPECT_EQ(c.optimizer.stopping.max_iters, 1000);
  EXPECT_EQ(c.optimizer.stopping.plateau_window, 50);
  EXPECT_EQ(c.bench.memory_budget_bytes, 8e9);
  EXPECT_EQ(c.encoding, EncodingVariant::kAsPrinted);
  const auto message = [](const std::string& text) {
    try {
      parse_config(text);
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::kConfig);
      return std::string(e.what());
    }
    return std::string();
  };
  EXPECT_NE(message(R"({"hubbard": {"u_onsite": "big"}})").find("hubbard.u_onsite"), std::string::npos);
  EXPECT_NE(message(R"({"encoding": "dfs"})").find("encoding"), std::string::npos);
  EXPECT_NE(message(R"({"controls": {"n_slices": 0}})").find("controls.n_slices"), std::string::npos);
  EXPECT_NE(message(R"({"decoherence": {"t1": -2}})").find("decoherence.t1"), std::string::npos);
  EXPECT_NE(message(R"({"colour": 1})").find("unknown key"), std::string::npos);
  EXPECT_NE(message(R"({"target": {"gate": "Q"}})").find("target.gate"), std::string::npos);
  EXPECT_NE(message(R"({"optimizer": {"projection_mode": "full"}})").find("projection_mode"), std::string::npos);
  EXPECT_NE(message("{not json").find("malformed"), std::string::npos);
}

TEST(Config, TargetsAndMatrices) {
  const RunConfig g = parse_config(R"({"target": {"gate": "H"}})");
  EXPECT_EQ(g.target.kind, RunConfig::Target::Kind::kGate);
  EXPECT_LE(max_abs(g.target.matrix - named_gate("H")), 0.0);
  const RunConfig m = parse_config(R"({"target": {"matrix": [[0, [0, -1]], [[0, 1], 0]]}})");
  EXPECT_EQ(m.target.matrix(0, 1), Complex(0.0, -1.0));
  EXPECT_THROW(parse_config(R"({"target": {"matrix": [[1, 1], [1, 1]]}})"), Error);
  const RunConfig p = parse_config(R"({"target": {"projection": [[0.9, 0.1], [0.1, 0.9]]}})");
  EXPECT_EQ(p.target.kind, RunConfig::Target::Kind::kProjection);
  EXPECT_THROW(parse_config(R"({"target": {"gate": "X", "projection": [[1]]}})"), Error);
}

TEST(Config, CommandValidation) {
  const RunConfig gate2 = parse_config(R"({"n_dots": 2, "target": {"gate": "X"}})");
  try {
    validate(gate2, Command::kOptimize);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kConfig);
    EXPECT_NE(std::string(e.what()).find("target.projection"), std::string::npos);
  }
  EXPECT_EQ(kind_of([] { validate(parse_config("{}"), Command::kOptimize); }), ErrorKind::kConfig);
  EXPECT_EQ(kind_of([] { validate(parse_config("{}"), Command::kFit); }), ErrorKind::kConfig);
  EXPECT_EQ(kind_of([] { validate(parse_config("{}"), Command::kEvolve); }), ErrorKind::kConfig);
  const RunConfig shape = parse_config(R"({"controls": {"n_slices": 3, "coefficients": [[1], [2]]}})");
  EXPECT_EQ(kind_of([&] { validate(shape, Command::kPropagate); }), ErrorKind::kConfig);
  const RunConfig mu = parse_config(R"({"n_dots": 3, "hubbard": {"chem_potential": [1, 2]}})");
  EXPECT_EQ(kind_of([&] { validate(mu, Command::kPropagate); }), ErrorKind::kConfig);
  EXPECT_EQ(parse_command("bench"), Command::kBench);
  EXPECT_THROW(parse_command("plot"), Error);
}

TEST(Config, ExitStatusCodes) {
  EXPECT_EQ(exit_status(ErrorKind::kConfig), 2);
  EXPECT_EQ(exit_status(ErrorKind::kNumerical), 3);
  EXPECT_EQ(exit_status(ErrorKind::kDegenerateSignal), 3);
  EXPECT_EQ(exit_status(ErrorKind::kIo), 4);
  EXPECT_EQ(exit_status(ErrorKind::kParse), 4);
}

TEST(Dump, BitExactRoundTripAndLayout) {
  std::mt19937_64 rng(1);
  const Superoperator u = testing::random_matrix(9, 9, rng);
  std::stringstream buffer;
  write_superoperator(buffer, u);
  const std::string bytes = buffer.str();
  ASSERT_EQ(bytes.size(), 16u + 81u * 16u);
  EXPECT_EQ(bytes.substr(0, 4), "QSOP");
  EXPECT_EQ(bytes[4], 1);
  EXPECT_EQ(bytes[5], 0);
  EXPECT_EQ(static_cast<unsigned char>(bytes[8]), 9u);
  double first_im = 0.0;
  std::memcpy(&first_im, bytes.data() + 24, 8);
  EXPECT_EQ(first_im, u(0, 0).imag());
  double second_re = 0.0;  // row-major: (0, 1) follows (0, 0)
  std::memcpy(&second_re, bytes.data() + 32, 8);
  EXPECT_EQ(second_re, u(0, 1).real());
  const Superoperator back = read_superoperator(buffer);
  EXPECT_EQ(back, u);
  EXPECT_EQ(superoperator_hash(back), superoperator_hash(u));
  std::istringstream junk("QSOX");
  EXPECT_THROW(read_superoperator(junk), Error);
}

TEST(StateFile, RoundTripAndErrors) {
  std::mt19937_64 rng(2);
  const CMatrix rho = random_density_matrix(4, rng);
  std::stringstream buffer;
  write_state(buffer, rho);
  EXPECT_EQ(read_state(buffer, 4), rho);
  std::istringstream bad("row,col,re,im\n0,7,1,0\n");
  EXPECT_THROW(read_state(bad, 4), ParseError);
}

TEST_F(CliTest, PropagateZeroControlClosedSystem) {
  const RunConfig c = config({{"n_dots", 2},
                              {"controls", {{"n_slices", 8}, {"init_scale", 0.0}}},
                              {"propagator", {{"dump_matrix", true}}}});
  cmd_propagate(c, sink);
  const json s = read_json(dir_ / "out" / "propagate_summary.json");
  EXPECT_LE(s["identity_distance"].get<double>(), 1e-13);
  EXPECT_TRUE(s["cptp"]["passed"].get<bool>());
  std::ifstream dump(dir_ / "out" / "propagator.qsop", std::ios::binary);
  const Superoperator u = read_superoperator(dump);
  EXPECT_EQ(u.rows(), 256);
}

TEST_F(CliTest, PropagateThreeDots) {
  const RunConfig c = config({{"n_dots", 3},
                              {"hubbard", {{"u_onsite", 4.0}, {"chem_potential", 0.1}}},
                              {"controls", {{"n_slices", 8}}},
                              {"decoherence", {{"t1", 10.0}, {"t2", 10.0}}}});
  cmd_propagate(c, sink);
  const json s = read_json(dir_ / "out" / "propagate_summary.json");
  EXPECT_EQ(s["liouville_dim"].get<int>(), 4096);
  EXPECT_TRUE(s["cptp"]["passed"].get<bool>());
}

TEST_F(CliTest, PropagateWorkersGiveIdenticalHash) {
  json j = {{"n_dots", 2}, {"controls", {{"n_slices", 16}}}, {"decoherence", {{"t1", 3.0}}}, {"seed", 5}};
  std::string hashes[2];
  for (int w : {1, 8}) {
    j["workers"] = w;
    j["output"] = "out" + std::to_string(w);
    cmd_propagate(config(j), sink);
    hashes[w == 8] = read_json(dir_ / j["output"].get<std::string>() / "propagate_summary.json")["propagator_hash"];
  }
  EXPECT_EQ(hashes[0], hashes[1]);
}

TEST_F(CliTest, EvolveFromStateFileAndDump) {
  std::mt19937_64 rng(3);
  const CMatrix rho0 = random_density_matrix(16, rng);
  {
    std::ofstream out(dir_ / "rho0.csv");
    write_state(out, rho0);
  }
  json j = {{"n_dots", 2},
            {"controls", {{"n_slices", 4}}},
            {"decoherence", {{"t2", 2.0}}},
            {"propagator", {{"dump_matrix", true}}},
            {"evolve", {{"initial_state", "rho0.csv"}}}};
  cmd_propagate(config(j), sink);
  cmd_evolve(config(j), sink);
  std::ifstream a(dir_ / "out" / "final_state.csv");
  const CMatrix rebuilt = read_state(a, 16);
  j["evolve"]["propagator"] = "out/propagator.qsop";
  j["output"] = "out_dump";
  cmd_evolve(config(j), sink);
  std::ifstream b(dir_ / "out_dump" / "final_state.csv");
  EXPECT_EQ(read_state(b, 16), rebuilt);
  EXPECT_TRUE(is_density_matrix(rebuilt));
}

TEST_F(CliTest, EvolveRejectsNonPhysicalState) {
  write("bad.csv", "row,col,re,im\n0,0,2,0\n");
  const RunConfig c = config({{"evolve", {{"initial_state", "bad.csv"}}}});
  EXPECT_EQ(kind_of([&] { cmd_evolve(c, sink); }), ErrorKind::kConfig);
  EXPECT_FALSE(fs::exists(dir_ / "out"));
}

TEST_F(CliTest, OptimizeWritesTables) {
  const DotSystem sys(HubbardParams{1.0, {0.0, 0.0}, 0.5, 2});
  const auto u = build_superpropagator(PulseSchedule(RMatrix::Constant(8, 1, 0.7), 5.0), sys, {});
  const CMatrix target = project_propagator(u.entries, projection_matrix(reference_pair(2)));
  json projection = json::array();
  for (int r = 0; r < 2; ++r) projection.push_back({target(r, 0).real(), target(r, 1).real()});
  const RunConfig c = config({{"n_dots", 2},
                              {"hubbard", {{"u_onsite", 1.0}, {"u_neighbor", 0.5}}},
                              {"controls", {{"n_slices", 8}, {"duration", 5.0}}},
                              {"target", {{"projection", projection}}},
                              {"optimizer", {{"max_iters", 300}}}});
  cmd_optimize(c, sink);
  std::ifstream pulses(dir_ / "out" / "pulses.csv");
  std::string header;
  std::getline(pulses, header);
  EXPECT_EQ(header, "slice_index,t_start,t_end,c_0");
  int rows = 0;
  for (std::string line; std::getline(pulses, line);) ++rows;
  EXPECT_EQ(rows, 8);
  const json s = read_json(dir_ / "out" / "calibration_summary.json");
  EXPECT_LE(s["best_loss"].get<double>(), 1e-4);
}

TEST_F(CliTest, OptimizeZeroIterations) {
  const RunConfig c = config({{"target", {{"projection", {{1, 0}, {0, 1}}}}},
                              {"optimizer", {{"max_iters", 0}}},
                              {"output", "nested/dir/out"}});
  cmd_optimize(c, sink);
  std::ifstream history(dir_ / "nested" / "dir" / "out" / "loss_history.csv");
  int lines = 0;
  for (std::string line; std::getline(history, line);) ++lines;
  EXPECT_EQ(lines, 2);
}

TEST_F(CliTest, FitReportAndErrors) {
  CharacterizationGrid g;
  g.voltages = {0.2, 0.4};
  for (int i = 0; i < 100; ++i) g.times.push_back(0.05 * i);
  g.amplitudes.resize(2, 100);
  for (int i = 0; i < 100; ++i) {
    const double t = g.times[static_cast<std::size_t>(i)];
    g.amplitudes(0, i) = 0.4;  // flat row
    g.amplitudes(1, i) = std::exp(-t / 3.5) * std::cos(4.0 * t);
  }
  {
    std::ofstream out(dir_ / "grid.csv");
    write_grid(out, g);
  }
  std::ostringstream trace;
  trace << "time,population\n";
  for (int i = 0; i < 60; ++i) trace << 0.25 * i << ',' << std::exp(-0.25 * i / 5.0) << '\n';
  write("t1.csv", trace.str());

  cmd_fit(config({{"fit", {{"grid", "grid.csv"}, {"voltage", 0.4}, {"relaxation_trace", "t1.csv"}}}}), sink);
  const json r = read_json(dir_ / "out" / "fit_report.json");
  EXPECT_NEAR(r["t2"].get<double>(), 3.5, 3.5e-4);
  EXPECT_NEAR(r["t1"].get<double>(), 5.0, 5e-6);
  EXPECT_EQ(r["voltage_used"].get<double>(), 0.4);

  const RunConfig flat = config({{"fit", {{"grid", "grid.csv"}, {"voltage", 0.2}}}, {"output", "flat"}});
  EXPECT_EQ(kind_of([&] { cmd_fit(flat, sink); }), ErrorKind::kDegenerateSignal);
  EXPECT_FALSE(fs::exists(dir_ / "flat"));
  const RunConfig missing = config({{"fit", {{"grid", "nope.csv"}, {"voltage", 0.2}}}});
  EXPECT_EQ(kind_of([&] { cmd_fit(missing, sink); }), ErrorKind::kIo);
}

TEST_F(CliTest, BenchRecordsAndBudget) {
  const RunConfig c = config({{"decoherence", {{"t1", 10.0}, {"t2", 10.0}}},
                              {"bench", {{"dots", {1, 2, 3}},
                                         {"slices", {8}},
                                         {"workers", {1, 2}},
                                         {"memory_budget_bytes", 5e7},
                                         {"oracle_steps_per_slice", 200}}}});
  const auto records = cmd_bench(c, sink);
  int skipped = 0, magnus = 0;
  std::uint64_t hash[2] = {0, 0};
  for (const BenchRecord& r : records) {
    EXPECT_GE(r.total_seconds, 0.0);
    if (r.status != "ok") {
      ++skipped;
      EXPECT_EQ(r.n_dots, 3);
      continue;
    }
    EXPECT_GE(r.fidelity_vs_oracle, 0.0);
    EXPECT_LE(r.fidelity_vs_oracle, 1.0);
    if (r.method == "magnus") {
      ++magnus;
      EXPECT_GE(r.fidelity_vs_oracle, 1.0 - 1e-8);
      if (r.n_dots == 2) hash[r.workers == 2] = r.propagator_hash;
    }
  }
  EXPECT_EQ(skipped, 1);
  EXPECT_EQ(magnus, 4);
  EXPECT_EQ(hash[0], hash[1]);
  std::ifstream csv(dir_ / "out" / "bench.csv");
  std::string header;
  std::getline(csv, header);
  EXPECT_EQ(header.rfind("n_dots,n_slices,workers,method,expansion_seconds,reduction_seconds,total_seconds,fidelity_vs_oracle", 0), 0u);
}

TEST_F(CliTest, BinaryExitCodes) {
  const fs::path ok = write("ok.json", R"({"n_dots": 1, "controls": {"n_slices": 2}, "output": "bin-out"})");
  EXPECT_EQ(run_cli("propagate --config " + ok.string()), 0);
  EXPECT_TRUE(fs::exists(dir_ / "bin-out" / "propagate_summary.json"));
  EXPECT_EQ(run_cli("propagate --config " + ok.string() + " --output " + (dir_ / "flag-out").string()), 0);
  EXPECT_TRUE(fs::exists(dir_ / "flag-out" / "propagate_summary.json"));
  const fs::path bad = write("bad.json", R"({"n_dots": 2, "encoding": "triplet", "output": "never"})");
  EXPECT_EQ(run_cli("propagate --config " + bad.string()), 2);
  EXPECT_FALSE(fs::exists(dir_ / "never"));
  const fs::path fit = write("fit.json", R"({"fit": {"grid": "absent.csv", "voltage": 1.0}})");
  EXPECT_EQ(run_cli("fit --config " + fit.string()), 4);
  EXPECT_EQ(run_cli("propagate --config " + (dir_ / "missing.json").string()), 4);
  EXPECT_EQ(run_cli("--config " + ok.string()), 1);
  EXPECT_EQ(run_cli("teleport --config " + ok.string()), 1);
}

}  // namespace
}  // namespace qdsim
