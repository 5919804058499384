// Copyright 2026 The qdmd Authors
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

// Batch driver: simulate snapshot data, run the classical and quantum DMD
// pipelines, reconstruct mode states, and emit cost reports.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "qdmd/io.hpp"
#include "qdmd/pipeline.hpp"

namespace {

constexpr int kExitParseError = 2;
constexpr int kExitValidationError = 3;
constexpr int kExitModuleError = 4;

struct CommonArgs {
  std::string matrix_path;
  std::string initial_path;
  std::string snapshot_path;
  int T = 4;
  int L = 0;  // 0 = derive from the initial-states file / snapshot
  double dt = 0.1;
  double rank_tol = 1e-8;
  std::uint64_t shots = 0;
  std::uint64_t seed = 0;
  int bits = 12;
  double epsilon = 0.05;
  double b = 0.5;
  int grid = 64;
  std::string out_path;
};

void add_common_flags(CLI::App* cmd, CommonArgs& args, bool needs_system) {
  if (needs_system) {
    cmd->add_option("--matrix", args.matrix_path,
                    "coefficient matrix A (matrix file)");
    cmd->add_option("--initial", args.initial_path,
                    "initial states, one per column (matrix file)");
    cmd->add_option("--snapshot", args.snapshot_path,
                    "pre-simulated snapshot file (alternative to --matrix)");
    cmd->add_option("-T,--steps", args.T, "time steps per trajectory");
    cmd->add_option("-L,--trajectories", args.L,
                    "trajectory count (snapshot files only; T*L must be M)");
    cmd->add_option("--dt", args.dt, "integration time step");
  }
  cmd->add_option("--rank-tol", args.rank_tol, "rank truncation tolerance");
  cmd->add_option("--shots", args.shots, "shots per site; 0 = exact mode");
  cmd->add_option("--seed", args.seed, "64-bit master seed");
  cmd->add_option("--bits", args.bits, "value-register width b");
  cmd->add_option("--epsilon", args.epsilon, "estimation/phase error budget");
  cmd->add_option("--b", args.b, "reference modification constant");
  cmd->add_option("--grid", args.grid, "phase grid points");
  cmd->add_option("-o,--out", args.out_path, "output path (default stdout)");
}

qdmd::RunConfig make_config(const CommonArgs& args) {
  qdmd::RunConfig cfg;
  if (!args.snapshot_path.empty()) {
    cfg.snapshot = qdmd::read_snapshot_file(args.snapshot_path,
                                            args.L > 0 ? args.T : 0, args.L);
  } else {
    if (args.matrix_path.empty() || args.initial_path.empty())
      throw qdmd::ValidationError(
          "input", "provide --snapshot or both --matrix and --initial");
    cfg.A = qdmd::parse_matrix_file(args.matrix_path);
    cfg.initial_states = qdmd::parse_matrix_file(args.initial_path);
    cfg.T = args.T;
    cfg.dt = args.dt;
  }
  cfg.rank_tol = args.rank_tol;
  cfg.shots = args.shots;
  cfg.seed = args.seed;
  cfg.register5_bits = args.bits;
  cfg.epsilon = args.epsilon;
  cfg.b_modification = args.b;
  cfg.grid_points = args.grid;
  return cfg;
}

void emit(const std::string& out_path, const std::string& text) {
  if (out_path.empty()) {
    std::cout << text << '\n';
    return;
  }
  std::ofstream out(out_path);
  if (!out) throw qdmd::ValidationError("out", "cannot write " + out_path);
  out << text << '\n';
}

int run(int argc, char** argv) {
  CLI::App app{"qdmd: quantum dynamic mode decomposition simulator"};
  app.require_subcommand(1);

  CommonArgs sim_args, dmd_args, modes_args, cost_args;

  CLI::App* sim = app.add_subcommand(
      "simulate", "integrate xdot = A x and write a snapshot file");
  add_common_flags(sim, sim_args, true);

  CLI::App* dmd = app.add_subcommand(
      "dmd", "classical and quantum estimation of the projected operator");
  add_common_flags(dmd, dmd_args, true);
  bool classical_only = false, quantum_only = false;
  dmd->add_flag("--classical-only", classical_only, "skip the quantum pipeline");
  dmd->add_flag("--quantum-only", quantum_only, "skip the classical report");

  CLI::App* modes = app.add_subcommand(
      "modes", "dmd plus coherent mode-state reconstruction");
  add_common_flags(modes, modes_args, true);
  bool all = false;
  modes->add_flag("--all", all, "also include the cost report");

  CLI::App* cost = app.add_subcommand("cost", "sampling cost report");
  add_common_flags(cost, cost_args, true);

  CLI11_PARSE(app, argc, argv);

  if (sim->parsed()) {
    if (sim_args.matrix_path.empty() || sim_args.initial_path.empty())
      throw qdmd::ValidationError("input", "simulate needs --matrix and --initial");
    qdmd::CMatrix A = qdmd::parse_matrix_file(sim_args.matrix_path);
    qdmd::CMatrix x0 = qdmd::parse_matrix_file(sim_args.initial_path);
    qdmd::SnapshotData data =
        qdmd::simulate_snapshots(A, x0, sim_args.T, sim_args.dt);
    if (sim_args.out_path.empty())
      throw qdmd::ValidationError("out", "simulate needs --out");
    qdmd::write_snapshot_file(sim_args.out_path, data);
    std::cerr << "wrote " << data.N << "x" << data.M() << " snapshot to "
              << sim_args.out_path << '\n';
    return 0;
  }

  qdmd::PipelineMode mode = qdmd::PipelineMode::All;
  const CommonArgs* args = nullptr;
  if (dmd->parsed()) {
    args = &dmd_args;
    if (classical_only)
      mode = qdmd::PipelineMode::Classical;
    else if (quantum_only)
      mode = qdmd::PipelineMode::Quantum;
    else
      mode = qdmd::PipelineMode::All;
  } else if (modes->parsed()) {
    args = &modes_args;
    mode = all ? qdmd::PipelineMode::All : qdmd::PipelineMode::Modes;
  } else {
    args = &cost_args;
    mode = qdmd::PipelineMode::Cost;
  }

  qdmd::RunConfig cfg = make_config(*args);
  qdmd::Json doc = qdmd::run_pipeline(cfg, mode);
  if (doc.contains("classical") && doc["classical"].value("ill_conditioned", false))
    std::cerr << "warning: " << doc["classical"]["warning"].get<std::string>()
              << '\n';
  emit(args->out_path, doc.dump(2));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const qdmd::ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return kExitParseError;
  } catch (const qdmd::ValidationError& e) {
    std::cerr << "validation error: " << e.what() << '\n';
    return kExitValidationError;
  } catch (const qdmd::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitModuleError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
