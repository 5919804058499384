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
#include <cmath>

#include "oracles.hpp"
#include "qdmd/dmdcore.hpp"

using namespace qdmd;

namespace {

SnapshotData oscillator_data(double dt = 0.5, int T = 4, int L = 1) {
  CMatrix A(2, 2);
  A << Complex(-0.1, 0), Complex(1, 0), Complex(-1, 0), Complex(-0.1, 0);
  CMatrix x0(2, L);
  x0.col(0) << Complex(1, 0), Complex(0.2, 0.1);
  if (L > 1) x0.col(1) << Complex(-0.3, 0.5), Complex(1, 0);
  return simulate_snapshots(A, x0, T, dt);
}

}  // namespace

TEST_CASE("identity evolution yields unit eigenvalues") {
  CMatrix x0(2, 1);
  x0 << Complex(0.6, 0.1), Complex(-0.4, 0.3);
  SnapshotData d = simulate_snapshots(CMatrix::Zero(2, 2), x0, 3, 0.5);
  DmdResult res = exact_dmd(d, 1e-8);
  // X' = X: every eigenvalue on the retained subspace is 1. Rank is 1
  // (all columns identical), so a single eigenvalue survives.
  REQUIRE(res.R == 1);
  REQUIRE(std::abs(res.eigenvalues[0] - Complex(1, 0)) < 1e-10);
}

TEST_CASE("oscillator spectrum is recovered through the principal log") {
  SnapshotData d = oscillator_data();
  DmdResult res = exact_dmd(d, 1e-8);
  REQUIRE(res.R == 2);
  Complex target0 = std::exp(Complex(-0.1, 1.0) * 0.5);
  Complex target1 = std::exp(Complex(-0.1, -1.0) * 0.5);
  REQUIRE(oracle::multiset_match(res.eigenvalues, {target0, target1}, 1e-10));

  std::vector<Complex> expo;
  for (const auto& e : res.cont_exponents) {
    REQUIRE(e.has_value());
    expo.push_back(*e);
  }
  REQUIRE(oracle::multiset_match(expo, {Complex(-0.1, 1), Complex(-0.1, -1)},
                                 1e-8));
}

TEST_CASE("generic diagonalizable system: exponents match eig(A)") {
  RngStream rng(21, "dmd_generic");
  std::vector<Complex> target;
  CMatrix A = oracle::random_stable_system(4, rng, nullptr, &target);
  double dt = 0.8 / spectral_norm(A);
  CMatrix x0 = oracle::random_matrix(4, 2, rng);
  SnapshotData d = simulate_snapshots(A, x0, 4, dt);  // M = 8 >= N

  DmdResult res = exact_dmd(d, 1e-10);
  std::vector<Complex> expo;
  for (const auto& e : res.cont_exponents)
    if (e) expo.push_back(*e);
  REQUIRE(oracle::multiset_match(expo, target, 1e-8));

  // Eigen-residual invariant.
  for (std::size_t r = 0; r < res.eigenvalues.size(); ++r) {
    CVector lhs = res.kprime * res.modes_small.col(r);
    CVector rhs = res.eigenvalues[r] * res.modes_small.col(r);
    REQUIRE((lhs - rhs).norm() < 1e-8);
  }
  REQUIRE((res.Q.adjoint() * res.Q - CMatrix::Identity(res.R, res.R)).norm() <
          1e-10);
}

TEST_CASE("eigenvalues are invariant under per-column phase gauges of Q") {
  SnapshotData d = oscillator_data(0.4, 4, 2);
  DmdResult plain = exact_dmd(d, 1e-8);
  RngStream rng(5, "gauge");
  CVector ref = oracle::random_unit_vector(2, rng);
  DmdResult gauged = exact_dmd(d, 1e-8, ref);
  REQUIRE(oracle::multiset_match(plain.eigenvalues, gauged.eigenvalues, 1e-9));
  // The matrices themselves differ by a diagonal-unitary conjugation.
  REQUIRE((plain.kprime - gauged.kprime).norm() > 0.0);
}

TEST_CASE("schur_dmd cross-checks exact_dmd on diagonalizable data") {
  SnapshotData d = oscillator_data(0.45, 4, 2);
  DmdResult res = exact_dmd(d, 1e-8);
  SchurDmdResult sres = schur_dmd(d, 1e-8);
  std::vector<Complex> sdiag;
  for (int i = 0; i < sres.S.rows(); ++i) sdiag.push_back(sres.S(i, i));
  REQUIRE(oracle::multiset_match(sdiag, res.eigenvalues, 1e-8));
  REQUIRE((res.kprime - sres.W_small * sres.S * sres.W_small.adjoint()).norm() <
          1e-8);
}

TEST_CASE("identity data gives S = I") {
  CMatrix x0(2, 2);
  x0 << 1, 0, 0, 1;
  SnapshotData d = simulate_snapshots(CMatrix::Zero(2, 2), x0, 2, 1.0);
  SchurDmdResult sres = schur_dmd(d, 1e-8);
  REQUIRE((sres.S - CMatrix::Identity(sres.S.rows(), sres.S.cols())).norm() <
          1e-10);
}

TEST_CASE("Jordan system: schur is stable while eig warns") {
  const Complex lambda(-0.2, 0.0);
  CMatrix A(2, 2);
  A << lambda, 1.0, 0.0, lambda;
  const double dt = 0.01;
  CMatrix x0(2, 2);
  x0 << 1, 0, 0, 1;
  SnapshotData d = simulate_snapshots(A, x0, 2, dt);

  SchurDmdResult sres = schur_dmd(d, 1e-8);
  Complex target = std::exp(dt * lambda);
  REQUIRE(std::abs(sres.S(0, 0) - target) < 1e-8);
  REQUIRE(std::abs(sres.S(1, 1) - target) < 1e-8);
  // Residual stays small even though the operator is defective.
  DmdResult res = exact_dmd(d, 1e-8);
  REQUIRE((res.kprime - sres.W_small * sres.S * sres.W_small.adjoint()).norm() <
          1e-8);
  REQUIRE(res.ill_conditioned);
  REQUIRE(res.eigvec_condition > 1e6);
  REQUIRE_FALSE(res.warning.empty());
}

TEST_CASE("continuous_exponents closed forms and branch handling") {
  REQUIRE(std::abs(continuous_exponents({Complex(1, 0)}, 1.0)[0]) < 1e-14);

  Complex l = std::exp(Complex(0, 0.3));
  REQUIRE(std::abs(continuous_exponents({l}, 1.0)[0] - Complex(0, 0.3)) <
          1e-14);

  Complex z = std::exp(Complex(-0.1, 2.0) * 0.4);
  REQUIRE(std::abs(continuous_exponents({z}, 0.4)[0] - Complex(-0.1, 2.0)) <
          1e-12);

  REQUIRE_THROWS_AS(continuous_exponents({Complex(0, 0)}, 1.0),
                    ZeroEigenvalueError);
}
