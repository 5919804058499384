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
#include "qdmd/qstate.hpp"

using namespace qdmd;

namespace {

PureState two_register_state() {
  // (|0>|a> + |1>|b>)/sqrt(2) with |a> = |0>, |b> = (|0>+|1>)/sqrt(2)
  RegisterLayout lay({{"c", 1}, {"t", 1}});
  CVector amps(4);
  const double s = 1.0 / std::sqrt(2.0);
  amps << s, 0.0, s * s, s * s;
  return PureState::from_amplitudes(lay, amps);
}

}  // namespace

TEST_CASE("register layout validates names and size") {
  REQUIRE_THROWS_AS(RegisterLayout({{"x", 2}, {"x", 1}}), ValidationError);
  REQUIRE_THROWS_AS(RegisterLayout({{"x", 25}}), ValidationError);
  RegisterLayout lay({{"a", 2}, {"b", 1}, {"c", 0}});
  REQUIRE(lay.total_qubits() == 3);
  REQUIRE(lay.dim() == 8);
  REQUIRE(lay.extract(0b101, lay.index_of("a")) == 0b10);
  REQUIRE(lay.extract(0b101, lay.index_of("b")) == 1);
  REQUIRE(lay.extract(0b101, lay.index_of("c")) == 0);
  REQUIRE(lay.compose({0b10, 1, 0}) == 0b101);
}

TEST_CASE("register_distribution basis and uniform cases") {
  RegisterLayout lay({{"q", 1}});
  CVector zero(2);
  zero << 1.0, 0.0;
  auto p = register_distribution(PureState::from_amplitudes(lay, zero), "q");
  REQUIRE(p[0] == Catch::Approx(1.0));
  REQUIRE(p[1] == Catch::Approx(0.0));

  CVector plus(2);
  plus << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  p = register_distribution(PureState::from_amplitudes(lay, plus), "q");
  REQUIRE(p[0] == Catch::Approx(0.5));
  REQUIRE(p[1] == Catch::Approx(0.5));

  REQUIRE_THROWS_AS(
      register_distribution(PureState::from_amplitudes(lay, plus), "bogus"),
      UnknownRegisterError);
}

TEST_CASE("measurement of a deterministic register is the identity") {
  RegisterLayout lay({{"c", 1}, {"t", 2}});
  CVector amps = CVector::Zero(8);
  amps(0b100) = Complex(0.6, 0.0);
  amps(0b110) = Complex(0.0, 0.8);
  PureState s = PureState::from_amplitudes(lay, amps);
  RngStream rng(1, "meas");
  auto out = measure_register(s, "c", rng);
  REQUIRE(out.outcome == 1);
  REQUIRE(out.probability == Catch::Approx(1.0));
  REQUIRE((out.collapsed.amplitudes - s.amplitudes).norm() < 1e-12);
}

TEST_CASE("measurement collapses and renormalizes the remaining register") {
  PureState s = two_register_state();
  bool saw0 = false, saw1 = false;
  for (int seed = 0; seed < 32 && !(saw0 && saw1); ++seed) {
    RngStream rng(seed, "collapse");
    auto out = measure_register(s, "c", rng);
    REQUIRE(out.probability == Catch::Approx(0.5));
    auto p = register_distribution(out.collapsed, "t");
    if (out.outcome == 0) {
      saw0 = true;
      REQUIRE(p[0] == Catch::Approx(1.0));
    } else {
      saw1 = true;
      REQUIRE(p[0] == Catch::Approx(0.5));
      REQUIRE(p[1] == Catch::Approx(0.5));
    }
  }
  REQUIRE(saw0);
  REQUIRE(saw1);
}

TEST_CASE("collapse then marginalize obeys the law of total probability") {
  RngStream gen(77, "ltp");
  RegisterLayout lay({{"a", 2}, {"b", 2}});
  PureState s =
      PureState::from_amplitudes(lay, oracle::random_unit_vector(16, gen));
  auto pb = register_distribution(s, "b");
  auto pa = register_distribution(s, "a");

  std::vector<double> reassembled(4, 0.0);
  for (std::size_t outcome = 0; outcome < 4; ++outcome) {
    if (pa[outcome] <= 0.0) continue;
    CVector proj = CVector::Zero(16);
    for (std::size_t bidx = 0; bidx < 16; ++bidx)
      if (lay.extract(bidx, 0) == outcome) proj(bidx) = s.amplitudes(bidx);
    PureState collapsed = PureState::from_amplitudes(lay, proj, true);
    auto cond = register_distribution(collapsed, "b");
    for (std::size_t o = 0; o < 4; ++o) reassembled[o] += pa[outcome] * cond[o];
  }
  for (std::size_t o = 0; o < 4; ++o)
    REQUIRE(reassembled[o] == Catch::Approx(pb[o]).margin(1e-10));
}

TEST_CASE("sampled measurement ratio matches binomial statistics") {
  PureState s = two_register_state();
  const int shots = 100000;
  RngStream rng(5, "binomial");
  int ones = 0;
  for (int i = 0; i < shots; ++i)
    if (measure_register(s, "c", rng).outcome == 1) ++ones;
  double phat = static_cast<double>(ones) / shots;
  double sigma = std::sqrt(0.25 / shots);
  REQUIRE(std::abs(phat - 0.5) < 5 * sigma);
}

TEST_CASE("sampling with a fixed seed is reproducible") {
  PureState s = two_register_state();
  auto draw = [&](std::uint64_t seed) {
    RngStream rng(seed, "repro");
    std::vector<std::size_t> outs;
    for (int i = 0; i < 100; ++i)
      outs.push_back(measure_register(s, "t", rng).outcome);
    return outs;
  };
  REQUIRE(draw(123) == draw(123));
  REQUIRE(draw(123) != draw(124));
}

TEST_CASE("overlap is the conjugate dot product") {
  RngStream rng(3, "overlap");
  RegisterLayout lay({{"a", 3}});
  CVector va = oracle::random_unit_vector(8, rng);
  CVector vb = oracle::random_unit_vector(8, rng);
  PureState a = PureState::from_amplitudes(lay, va);
  PureState b = PureState::from_amplitudes(lay, vb);

  REQUIRE(std::abs(overlap(a, a) - Complex(1, 0)) < 1e-14);

  Complex expect{0.0, 0.0};
  for (int i = 0; i < 8; ++i) expect += std::conj(va(i)) * vb(i);
  REQUIRE(std::abs(overlap(a, b) - expect) < 1e-14);

  CVector e0 = CVector::Zero(8), e1 = CVector::Zero(8);
  e0(0) = 1.0;
  e1(1) = 1.0;
  REQUIRE(std::abs(overlap(PureState::from_amplitudes(lay, e0),
                           PureState::from_amplitudes(lay, e1))) < 1e-14);

  RegisterLayout other({{"z", 3}});
  PureState c = PureState::from_amplitudes(other, va);
  REQUIRE_THROWS_AS(overlap(a, c), LayoutMismatchError);
}
