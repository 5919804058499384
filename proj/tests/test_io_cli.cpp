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

#include <catch2/catch_amalgamated.hpp>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "oracles.hpp"
#include "qdmd/io.hpp"
#include "qdmd/pipeline.hpp"

using namespace qdmd;

namespace {

std::string temp_path(const std::string& name) {
  return "/tmp/qdmd_test_" + name;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  out << content;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_cli(const std::string& args) {
  std::string cmd = std::string(QDMD_CLI_PATH) + " " + args + " 2>/dev/null";
  int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

}  // namespace

TEST_CASE("complex literal parsing") {
  REQUIRE(parse_complex("1+0i", 1, 1) == Complex(1, 0));
  REQUIRE(parse_complex("-0.1+1i", 1, 1) == Complex(-0.1, 1));
  REQUIRE(parse_complex("2.5-3.25i", 1, 1) == Complex(2.5, -3.25));
  REQUIRE(parse_complex("4", 1, 1) == Complex(4, 0));
  REQUIRE_THROWS_AS(parse_complex("abc", 1, 1), ParseError);
  REQUIRE_THROWS_AS(parse_complex("1+2", 1, 1), ParseError);
  REQUIRE_THROWS_AS(parse_complex("1+2j", 1, 1), ParseError);
}

TEST_CASE("matrix file identity example") {
  std::string path = temp_path("id.mat");
  write_file(path, "2 2\n1+0i 0+0i\n0+0i 1+0i\n");
  CMatrix m = parse_matrix_file(path);
  REQUIRE((m - CMatrix::Identity(2, 2)).norm() == 0.0);
}

TEST_CASE("matrix round trip is exact") {
  RngStream rng(1, "roundtrip");
  CMatrix m = oracle::random_matrix(3, 5, rng);
  m *= 1e-7;  // exercise digits far from 1
  std::string path = temp_path("rt.mat");
  write_matrix_file(path, m);
  CMatrix back = parse_matrix_file(path);
  REQUIRE(back.rows() == 3);
  REQUIRE(back.cols() == 5);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 5; ++j) REQUIRE(back(i, j) == m(i, j));
}

TEST_CASE("truncated row reports its location") {
  std::string path = temp_path("bad.mat");
  write_file(path, "2 3\n1+0i 2+0i 3+0i\n4+0i 5+0i\n");
  try {
    parse_matrix_file(path);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    REQUIRE(e.line == 3);
    REQUIRE(std::string(e.what()).find("row 2") != std::string::npos);
  }
}

TEST_CASE("snapshot file round trip") {
  RngStream rng(2, "snap");
  CMatrix A = oracle::random_stable_system(3, rng);
  double dt = 0.7 / spectral_norm(A);
  CMatrix x0 = oracle::random_matrix(3, 2, rng);
  SnapshotData d = simulate_snapshots(A, x0, 3, dt);

  std::string path = temp_path("snap.dat");
  write_snapshot_file(path, d);
  SnapshotData back = read_snapshot_file(path, 3, 2);
  REQUIRE(back.N == 3);
  REQUIRE(back.T == 3);
  REQUIRE(back.L == 2);
  REQUIRE(back.dt == d.dt);
  REQUIRE((back.X - d.X).norm() == 0.0);
  REQUIRE((back.Xprime - d.Xprime).norm() == 0.0);

  // Default trajectory structure is one trajectory of M steps.
  SnapshotData flat = read_snapshot_file(path);
  REQUIRE(flat.T == 6);
  REQUIRE(flat.L == 1);

  REQUIRE_THROWS_AS(read_snapshot_file(path, 4, 2), ValidationError);
}

TEST_CASE("run_pipeline on frozen dynamics: trivial spectrum end to end") {
  RunConfig cfg;
  cfg.A = CMatrix::Zero(2, 2);
  cfg.initial_states = CMatrix::Identity(2, 2);
  cfg.T = 2;
  cfg.dt = 0.5;
  Json doc = run_pipeline(cfg, PipelineMode::All);

  for (const auto& eig : doc["classical"]["eigenvalues"]) {
    REQUIRE(eig[0].get<double>() == Catch::Approx(1.0).margin(1e-9));
    REQUIRE(eig[1].get<double>() == Catch::Approx(0.0).margin(1e-9));
  }
  REQUIRE(doc["quantum"]["kprime_max_deviation"].get<double>() < 1e-10);
  for (const auto& m : doc["modes"])
    REQUIRE(m["fidelity"].get<double>() >= 1.0 - 1e-10);
}

TEST_CASE("run_pipeline is deterministic for a fixed seed") {
  RunConfig cfg;
  RngStream rng(3, "pipe");
  cfg.A = oracle::random_stable_system(2, rng);
  cfg.dt = 0.6 / spectral_norm(cfg.A);
  cfg.initial_states = oracle::random_matrix(2, 2, rng);
  cfg.T = 2;
  cfg.shots = 5000;
  cfg.seed = 99;
  std::string a = run_pipeline(cfg, PipelineMode::All).dump();
  std::string b = run_pipeline(cfg, PipelineMode::All).dump();
  REQUIRE(a == b);
  cfg.seed = 100;
  REQUIRE(run_pipeline(cfg, PipelineMode::All).dump() != a);
}

TEST_CASE("cli: simulate then dmd from the snapshot") {
  std::string matrix = temp_path("cli_A.mat");
  write_file(matrix, "2 2\n-0.1+0i 1+0i\n-1+0i -0.1+0i\n");
  std::string init = temp_path("cli_x0.mat");
  write_file(init, "2 1\n1+0i\n0.2+0.1i\n");
  std::string snap = temp_path("cli_snap.dat");
  std::string out = temp_path("cli_out.json");

  REQUIRE(run_cli("simulate --matrix " + matrix + " --initial " + init +
                  " -T 4 --dt 0.5 --out " + snap) == 0);
  REQUIRE(run_cli("dmd --snapshot " + snap + " -T 4 -L 1 --shots 0 --out " +
                  out) == 0);
  Json doc = Json::parse(read_file(out));
  REQUIRE(doc["quantum"]["kprime_max_deviation"].get<double>() < 1e-9);
}

TEST_CASE("cli: exit codes distinguish error classes") {
  std::string bad = temp_path("cli_bad.mat");
  write_file(bad, "2 2\n1+0i\n");  // truncated row
  std::string init = temp_path("cli_x0b.mat");
  write_file(init, "2 1\n1+0i\n0+0i\n");
  REQUIRE(run_cli("dmd --matrix " + bad + " --initial " + init) == 2);

  // Missing inputs: validation error.
  REQUIRE(run_cli("dmd") == 3);

  // Step too large: module error.
  std::string rot = temp_path("cli_rot.mat");
  write_file(rot, "2 2\n0+0i 1+0i\n-1+0i 0+0i\n");
  REQUIRE(run_cli("dmd --matrix " + rot + " --initial " + init +
                  " -T 2 --dt 1.6") == 4);
}

TEST_CASE("cli runs are byte identical for a fixed seed") {
  std::string matrix = temp_path("cli_det_A.mat");
  write_file(matrix, "2 2\n-0.2+0i 0.8+0i\n-0.8+0i -0.2+0i\n");
  std::string init = temp_path("cli_det_x0.mat");
  write_file(init, "2 1\n1+0i\n0.5-0.1i\n");
  std::string out1 = temp_path("cli_det1.json");
  std::string out2 = temp_path("cli_det2.json");
  std::string args = "modes --matrix " + matrix + " --initial " + init +
                     " -T 4 --dt 0.5 --shots 2000 --seed 42 --all --out ";
  REQUIRE(run_cli(args + out1) == 0);
  REQUIRE(run_cli(args + out2) == 0);
  REQUIRE(read_file(out1) == read_file(out2));
  REQUIRE_FALSE(read_file(out1).empty());
}
