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
#include "qdmd/estimators.hpp"

using namespace qdmd;

namespace {

RegisterLayout qubits3() { return RegisterLayout({{"1", 3}}); }

PureState rand_state(std::uint64_t seed, const char* label) {
  RngStream rng(seed, label);
  return PureState::from_amplitudes(qubits3(),
                                    oracle::random_unit_vector(8, rng));
}

double fit_loglog_slope(const std::vector<double>& x,
                        const std::vector<double>& y) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

TEST_CASE("swap2 exact endpoints and overlap oracle") {
  PureState a = rand_state(1, "sw2a");
  PureState b = rand_state(2, "sw2b");
  RngStream rng(0, "unused");

  REQUIRE(swap2(a, a, 0, rng).value == Catch::Approx(1.0));

  CVector e0 = CVector::Zero(8), e1 = CVector::Zero(8);
  e0(0) = 1;
  e1(1) = 1;
  PureState s0 = PureState::from_amplitudes(qubits3(), e0);
  PureState s1 = PureState::from_amplitudes(qubits3(), e1);
  REQUIRE(swap2(s0, s1, 0, rng).value == Catch::Approx(0.0).margin(1e-14));

  double expect = std::norm(overlap(a, b));
  REQUIRE(swap2(a, b, 0, rng).value == Catch::Approx(expect).margin(1e-12));
  REQUIRE(swap2(a, b, 0, rng).std_error == 0.0);
}

TEST_CASE("swap3 exact endpoints and the triple-product oracle") {
  PureState a = rand_state(3, "sw3a");
  PureState b = rand_state(4, "sw3b");
  PureState c = rand_state(5, "sw3c");
  RngStream rng(0, "unused");

  REQUIRE(swap3(a, a, a, Part::Re, 0, rng).value == Catch::Approx(1.0));
  REQUIRE(swap3(a, a, a, Part::Im, 0, rng).value ==
          Catch::Approx(0.0).margin(1e-14));

  CVector e0 = CVector::Zero(8), e1 = CVector::Zero(8);
  e0(0) = 1;
  e1(1) = 1;
  PureState s0 = PureState::from_amplitudes(qubits3(), e0);
  PureState s1 = PureState::from_amplitudes(qubits3(), e1);
  REQUIRE(swap3(s0, s1, c, Part::Re, 0, rng).value ==
          Catch::Approx(0.0).margin(1e-14));

  Complex t = overlap(a, b) * overlap(b, c) * overlap(c, a);
  REQUIRE(swap3(a, b, c, Part::Re, 0, rng).value ==
          Catch::Approx(t.real()).margin(1e-12));
  REQUIRE(swap3(a, b, c, Part::Im, 0, rng).value ==
          Catch::Approx(t.imag()).margin(1e-12));
}

TEST_CASE("swap3 with psi2 = psi0 reduces to swap2") {
  PureState a = rand_state(6, "red_a");
  PureState b = rand_state(7, "red_b");
  RngStream rng(0, "unused");
  double via3 = swap3(a, b, a, Part::Re, 0, rng).value;
  double via2 = swap2(a, b, 0, rng).value;
  REQUIRE(via3 == Catch::Approx(via2).margin(1e-12));
  REQUIRE(swap3(a, b, a, Part::Im, 0, rng).value ==
          Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("hadamard test on identical and orthogonal components") {
  RegisterLayout lay({{"p", 2}, {"x", 1}});
  RngStream rng(0, "unused");

  // (|a>|0> + |a>|1>)/sqrt(2): identical components, Re part 1.
  CVector a(4);
  a << 0.5, 0.5, 0.5, 0.5;
  CVector amps = CVector::Zero(8);
  for (int i = 0; i < 4; ++i) {
    amps(2 * i) = a(i) / std::sqrt(2.0);
    amps(2 * i + 1) = a(i) / std::sqrt(2.0);
  }
  PureState s = PureState::from_amplitudes(lay, amps);
  REQUIRE(hadamard_test(s, {"x"}, {0}, {1}, Part::Re, 0, rng).value ==
          Catch::Approx(1.0));
  REQUIRE(hadamard_test(s, {"x"}, {0}, {1}, Part::Im, 0, rng).value ==
          Catch::Approx(0.0).margin(1e-14));

  // Orthogonal components.
  CVector amps2 = CVector::Zero(8);
  amps2(0) = 1.0 / std::sqrt(2.0);          // |00>|0>
  amps2(2 * 1 + 1) = 1.0 / std::sqrt(2.0);  // |01>|1>
  PureState s2 = PureState::from_amplitudes(lay, amps2);
  REQUIRE(hadamard_test(s2, {"x"}, {0}, {1}, Part::Re, 0, rng).value ==
          Catch::Approx(0.0).margin(1e-14));

  REQUIRE_THROWS_AS(hadamard_test(s, {"x"}, {1}, {1}, Part::Re, 0, rng),
                    BadBasisLabelsError);
}

TEST_CASE("hadamard test recovers both parts of the branch inner product") {
  RngStream gen(8, "hadamard_rand");
  RegisterLayout lay({{"p", 2}, {"x", 1}});
  CVector psi_i = oracle::random_vector(4, gen);
  CVector psi_j = oracle::random_vector(4, gen);
  double norm = std::sqrt(psi_i.squaredNorm() + psi_j.squaredNorm());
  psi_i /= norm;
  psi_j /= norm;
  CVector amps = CVector::Zero(8);
  for (int i = 0; i < 4; ++i) {
    amps(2 * i) = psi_i(i);
    amps(2 * i + 1) = psi_j(i);
  }
  PureState s = PureState::from_amplitudes(lay, amps);
  Complex ip = psi_i.dot(psi_j);
  RngStream rng(0, "unused");
  REQUIRE(hadamard_test(s, {"x"}, {0}, {1}, Part::Re, 0, rng).value ==
          Catch::Approx(2 * ip.real()).margin(1e-12));
  REQUIRE(hadamard_test(s, {"x"}, {0}, {1}, Part::Im, 0, rng).value ==
          Catch::Approx(2 * ip.imag()).margin(1e-12));
}

TEST_CASE("exact-mode outputs stay in [-1, 1]") {
  for (int trial = 0; trial < 25; ++trial) {
    PureState a = rand_state(100 + trial, "range_a");
    PureState b = rand_state(200 + trial, "range_b");
    PureState c = rand_state(300 + trial, "range_c");
    RngStream rng(0, "unused");
    for (double v : {swap2(a, b, 0, rng).value,
                     swap3(a, b, c, Part::Re, 0, rng).value,
                     swap3(a, b, c, Part::Im, 0, rng).value}) {
      REQUIRE(v >= -1.0 - 1e-12);
      REQUIRE(v <= 1.0 + 1e-12);
    }
  }
}

TEST_CASE("sampled swap2 error shrinks as one over sqrt(shots)") {
  PureState a = rand_state(9, "noise_a");
  PureState b = rand_state(10, "noise_b");
  RngStream exact_rng(0, "unused");
  const double truth = swap2(a, b, 0, exact_rng).value;

  std::vector<double> shots_axis, rms_axis;
  const int seeds = 40;
  for (int p = 0; p < 20; ++p) {
    auto shots =
        static_cast<std::uint64_t>(std::round(std::pow(10.0, 2.0 + p * 0.2)));
    double sq = 0.0;
    for (int seed = 0; seed < seeds; ++seed) {
      RngStream rng(seed, "noise_scaling/" + std::to_string(p));
      double err = swap2(a, b, shots, rng).value - truth;
      sq += err * err;
    }
    shots_axis.push_back(static_cast<double>(shots));
    rms_axis.push_back(std::sqrt(sq / seeds));
  }
  double slope = fit_loglog_slope(shots_axis, rms_axis);
  REQUIRE(slope > -0.6);
  REQUIRE(slope < -0.4);
}

TEST_CASE("sampled std_error approximates the binomial prediction") {
  PureState a = rand_state(11, "se_a");
  PureState b = rand_state(12, "se_b");
  const std::uint64_t shots = 10000;
  RngStream rng(13, "se_draws");
  EstimatorResult r = swap2(a, b, shots, rng);
  RngStream exact_rng(0, "unused");
  double t = swap2(a, b, 0, exact_rng).value;
  double predicted = 2.0 * std::sqrt((1 + t) / 2 * (1 - t) / 2 / shots);
  REQUIRE(r.std_error == Catch::Approx(predicted).epsilon(0.2));
}
