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
#include <numbers>

#include "oracles.hpp"
#include "qdmd/costmodel.hpp"

using namespace qdmd;

TEST_CASE("brayton formula closed values") {
  // n = 1, m = 1: delta = 1, Gamma = 1, E = ln(1) + gamma = gamma.
  REQUIRE(brayton_expected_trials(1, 1, {1.0}) ==
          Catch::Approx(kEulerMascheroni).margin(1e-12));

  // Uniform n = 8, m = 1: n (ln n + gamma) ~ 21.25.
  std::vector<double> uni8(8, 0.125);
  double expect = 8.0 * (std::log(8.0) + kEulerMascheroni);
  REQUIRE(brayton_expected_trials(8, 1, uni8) ==
          Catch::Approx(expect).margin(1e-9));
  REQUIRE(expect == Catch::Approx(21.25).margin(0.01));
}

TEST_CASE("brayton rejects degenerate inputs") {
  REQUIRE_THROWS_AS(brayton_expected_trials(2, 1, {1.0, 0.0}),
                    DegenerateDistributionError);
  REQUIRE_THROWS_AS(brayton_expected_trials(2, 1, {0.9, 0.2}),
                    DegenerateDistributionError);
  REQUIRE_THROWS_AS(brayton_expected_trials(0, 1, {}), DomainError);
}

TEST_CASE("coupon collector closed cases") {
  RngStream rng(1, "mc_single");
  McEstimate single = coupon_collector_mc({1.0}, 5, 200, rng);
  REQUIRE(single.mean == Catch::Approx(5.0));
  REQUIRE(single.std_error == Catch::Approx(0.0));

  // Classic two-coupon expectation: 3 draws.
  RngStream rng2(2, "mc_pair");
  McEstimate pair = coupon_collector_mc({0.5, 0.5}, 1, 20000, rng2);
  REQUIRE(std::abs(pair.mean - 3.0) < 5 * pair.std_error);

  RngStream rng3(3, "mc_guard");
  REQUIRE_THROWS_AS(coupon_collector_mc({1.0}, 1, 50, rng3), DomainError);
}

TEST_CASE("table1 budgets at unit overlaps and scaling in epsilon") {
  Table1Budgets b = table1_budgets(0.1, 1.0, 1.0, 1.0, 1.0);
  REQUIRE(b.norm_ratio == 100);
  REQUIRE(b.sigma_readout == 1);
  REQUIRE(b.chi1_u == 100);
  REQUIRE(b.left_gram == 100);
  REQUIRE(b.right_gram == 100);
  REQUIRE(b.chi2_overlap == 100);

  Table1Budgets half = table1_budgets(0.05, 1.0, 1.0, 1.0, 1.0);
  REQUIRE(half.norm_ratio == 4 * b.norm_ratio);
  REQUIRE(half.left_gram == 4 * b.left_gram);
  REQUIRE(half.sigma_readout == 1);
}

TEST_CASE("table1 budgets shrink as overlaps grow") {
  Table1Budgets weak = table1_budgets(0.1, 0.1, 0.1, 0.4, 0.2);
  Table1Budgets strong = table1_budgets(0.1, 0.4, 0.4, 0.5, 0.5);
  REQUIRE(strong.left_gram < weak.left_gram);
  REQUIRE(strong.right_gram < weak.right_gram);
  REQUIRE(strong.chi2_overlap < weak.chi2_overlap);
}

TEST_CASE("total qSVD count: clamp, monotonicity, and domain") {
  REQUIRE(total_qsvd_count(1.0, 2, 1.0, 1.0) == Catch::Approx(1.0));
  REQUIRE_THROWS_AS(total_qsvd_count(1.0, 1, 1.0, 1.0), DomainError);

  double base = total_qsvd_count(3.0, 4, 0.2, 0.1);
  REQUIRE(total_qsvd_count(3.0, 4, 0.4, 0.1) <= base);
  REQUIRE(total_qsvd_count(3.0, 4, 0.2, 0.2) <= base);
}

TEST_CASE("mode pipeline count scales as R^3 at zeta4 = 1/2") {
  const double kappa = 2.0;
  auto log_factor = [&](int R) {
    return std::log(kappa * kappa * std::log(static_cast<double>(R)));
  };
  double r4 = mode_qsvd_count(kappa, 4, 0.5) / log_factor(4);
  double r8 = mode_qsvd_count(kappa, 8, 0.5) / log_factor(8);
  REQUIRE(r8 / r4 == Catch::Approx(8.0).margin(1e-9));
}

TEST_CASE("cost report wiring and instance inequalities") {
  // A plausible desk-scale instance.
  std::vector<double> sh_joint = {0.8, 0.5, 0.33};
  double total = 0.0;
  for (double s : sh_joint) total += s * s;
  for (double& s : sh_joint) s /= std::sqrt(total);
  std::vector<double> sh_X = {0.75, 0.6, 0.28};
  total = 0.0;
  for (double s : sh_X) total += s * s;
  for (double& s : sh_X) s /= std::sqrt(total);
  std::vector<double> sh_Xp = sh_X;

  RngStream rng(4, "frames");
  CMatrix U = oracle::random_isometry(8, 3, rng);
  CMatrix V = oracle::random_isometry(8, 3, rng);
  ReferenceStates refs = build_reference_states(U, U, U, V, V, 3);

  CostReport rep =
      build_cost_report(sh_joint, sh_X, sh_Xp, 0.45, 0.55, refs, 0.1);
  REQUIRE(rep.kappa >= 1.0);
  REQUIRE(rep.eta >= 2.0 - 1e-12);
  REQUIRE(rep.eta <= std::numbers::e * std::numbers::e + 1.0);
  REQUIRE(rep.sigma_kappa_inequality);
  REQUIRE(rep.total_qsvd >= 1.0);
  REQUIRE(rep.brayton.at("joint") > 0.0);
}

TEST_CASE("brayton tracks the Monte Carlo collector for single copies") {
  // m = 1 keeps the asymptotic honest even at small n.
  for (int n : {4, 8}) {
    std::vector<double> p(n, 1.0 / n);
    double formula = brayton_expected_trials(n, 1, p);
    RngStream rng(10 + n, "mc_uniform");
    McEstimate mc = coupon_collector_mc(p, 1, 10000, rng);
    REQUIRE(std::abs(formula - mc.mean) / mc.mean < 0.25);
  }
}
