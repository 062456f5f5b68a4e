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

// qdsim: command-line driver.
//
//   qdsim <propagate|evolve|optimize|fit|bench> --config run.json
//         [--workers N] [--seed S] [--output DIR]

#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "qdsim/cli.hpp"
#include "qdsim/config.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Quantum-dot Lindblad simulator and pulse calibrator"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<int> workers;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> output;
  app.add_option("--config", config_path, "JSON run configuration")->required();
  app.add_option("--workers", workers, "worker threads (overrides config)")
      ->check(CLI::PositiveNumber);
  app.add_option("--seed", seed, "random seed (overrides config)");
  app.add_option("--output", output, "output directory (overrides config)");
  app.fallthrough();

  for (const char* name : {"propagate", "evolve", "optimize", "fit", "bench"}) {
    app.add_subcommand(name, std::string("run the ") + name + " command");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    const qdsim::Command command = qdsim::parse_command(app.get_subcommands().front()->get_name());
    qdsim::RunConfig config = qdsim::load_config(config_path);
    if (workers) config.workers = *workers;
    if (seed) config.seed = *seed;
    if (output) config.output = *output;
    qdsim::run_command(command, config, std::cerr);
  } catch (const qdsim::Error& e) {
    std::cerr << "qdsim: error: " << e.what() << '\n';
    return qdsim::exit_status(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "qdsim: error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
