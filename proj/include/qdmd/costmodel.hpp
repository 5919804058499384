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

#ifndef QDMD_COSTMODEL_HPP
#define QDMD_COSTMODEL_HPP

#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <string>
#include <vector>

#include "qdmd/errors.hpp"
#include "qdmd/refstates.hpp"
#include "qdmd/rng.hpp"

namespace qdmd {

inline constexpr double kEulerMascheroni = 0.57721566490153286;

/// Brayton's asymptotic expected number of random draws to collect m copies
/// of each of n objects:
///   E_m(n) = (n/delta) [ln(Gamma n) + (m-1) ln ln(Gamma n) + gamma
///             + (m-1) ln(1/delta)],   Gamma = l delta^{m-1}/(m-1)!
/// with delta = n p_min and l the measure of minimum-probability indices
/// under the piecewise-constant density. The o(1) term is dropped, so at
/// desk-scale n this is a formula value, not the exact expectation.
inline double brayton_expected_trials(int n, int m,
                                      const std::vector<double>& probabilities) {
  if (n < 1 || m < 1) throw DomainError("brayton: n and m must be >= 1");
  if (static_cast<int>(probabilities.size()) != n)
    throw DimensionMismatchError("brayton: probability count != n");
  double pmin = probabilities[0];
  double sum = 0.0;
  for (double p : probabilities) {
    if (p <= 0.0)
      throw DegenerateDistributionError("brayton: zero-probability index");
    pmin = std::min(pmin, p);
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw DegenerateDistributionError("brayton: probabilities must sum to 1");

  int min_count = 0;
  for (double p : probabilities)
    if (p <= pmin * (1.0 + 1e-12)) ++min_count;
  const double l = static_cast<double>(min_count) / n;
  const double delta = n * pmin;

  double log_fact = 0.0;
  for (int k = 2; k < m; ++k) log_fact += std::log(static_cast<double>(k));
  const double Gamma = l * std::pow(delta, m - 1) / std::exp(log_fact);
  const double gn = Gamma * n;

  double value = std::log(gn) + kEulerMascheroni +
                 (m - 1) * std::log(1.0 / delta);
  if (m > 1) value += (m - 1) * std::log(std::log(gn));
  return (n / delta) * value;
}

struct McEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::uint64_t trials = 0;
};

/// Direct simulation of the m-copy coupon collector: mean number of draws
/// until every index has been seen at least m times.
inline McEstimate coupon_collector_mc(const std::vector<double>& probabilities,
                                      int m, std::uint64_t trials,
                                      RngStream& rng) {
  if (trials < 100) throw DomainError("coupon_collector_mc: trials < 100");
  const int n = static_cast<int>(probabilities.size());
  double sum = 0.0, sum2 = 0.0;
  std::vector<int> counts(n);
  for (std::uint64_t t = 0; t < trials; ++t) {
    std::fill(counts.begin(), counts.end(), 0);
    int incomplete = n;
    std::uint64_t draws = 0;
    while (incomplete > 0) {
      double u = rng.uniform01();
      double cum = 0.0;
      int pick = n - 1;
      for (int i = 0; i < n; ++i) {
        cum += probabilities[i];
        if (u < cum) {
          pick = i;
          break;
        }
      }
      ++draws;
      if (++counts[pick] == m) --incomplete;
    }
    const double d = static_cast<double>(draws);
    sum += d;
    sum2 += d * d;
  }
  McEstimate est;
  est.trials = trials;
  est.mean = sum / static_cast<double>(trials);
  const double var =
      (sum2 - sum * sum / static_cast<double>(trials)) /
      static_cast<double>(trials - 1);
  est.std_error = std::sqrt(var / static_cast<double>(trials));
  return est;
}

/// Per-row repetition budgets of the elemental estimation processes, each
/// scaling expression evaluated with constant factor 1 at the worst-case
/// overlaps. These are relative budgets, not guarantees.
struct Table1Budgets {
  std::uint64_t norm_ratio = 0;     // O(1/eps^2)
  std::uint64_t sigma_readout = 1;  // single bit-string readout
  std::uint64_t chi1_u = 0;         // two-state SWAP, O(1/eps^2)
  std::uint64_t left_gram = 0;      // three-state SWAP over zeta1
  std::uint64_t right_gram = 0;     // three-state SWAP over zeta2
  std::uint64_t chi2_overlap = 0;   // Fig. 2 process
};

inline Table1Budgets table1_budgets(double epsilon, double zeta1, double zeta2,
                                    double P_min_branch,
                                    double min_sigma_hat_sq) {
  if (epsilon <= 0.0 || epsilon >= 1.0)
    throw DomainError("table1_budgets: epsilon must be in (0,1)");
  if (zeta1 <= 0.0 || zeta2 <= 0.0)
    throw ZeroReferenceOverlapError("table1_budgets: zeta vanishes");
  const double e2 = epsilon * epsilon;
  Table1Budgets b;
  b.norm_ratio = static_cast<std::uint64_t>(std::ceil(1.0 / e2));
  b.sigma_readout = 1;
  b.chi1_u = static_cast<std::uint64_t>(std::ceil(1.0 / e2));
  b.left_gram =
      static_cast<std::uint64_t>(std::ceil(1.0 / (zeta1 * zeta1 * e2)));
  b.right_gram =
      static_cast<std::uint64_t>(std::ceil(1.0 / (zeta2 * zeta2 * e2)));
  b.chi2_overlap = static_cast<std::uint64_t>(
      std::ceil(1.0 / (P_min_branch * min_sigma_hat_sq * zeta1 * e2)));
  return b;
}

/// Total quantum-SVD count for estimating the projected operator:
/// (kappa R / (zeta eps))^2 ln(kappa^2 ln R), clamped to >= 1.
inline double total_qsvd_count(double kappa, int R, double zeta,
                               double epsilon) {
  if (R < 2) throw DomainError("total_qsvd_count: needs R >= 2");
  if (zeta <= 0.0 || zeta > 1.0 || epsilon <= 0.0 || epsilon > 1.0)
    throw DomainError("total_qsvd_count: zeta and epsilon must be in (0,1]");
  const double main = std::pow(kappa * R / (zeta * epsilon), 2);
  const double logfac = std::log(kappa * kappa * std::log(static_cast<double>(R)));
  return std::max(1.0, main * logfac);
}

/// Companion count for the recursive coherent addition:
/// (kappa^2/zeta4) R^{2 + log2(1/zeta4)} ln(kappa^2 ln R), clamped to >= 1.
inline double mode_qsvd_count(double kappa, int R, double zeta4) {
  if (R < 2) throw DomainError("mode_qsvd_count: needs R >= 2");
  if (zeta4 <= 0.0 || zeta4 > 1.0)
    throw DomainError("mode_qsvd_count: zeta4 must be in (0,1]");
  const double expo = 2.0 + std::log2(1.0 / zeta4);
  const double main =
      (kappa * kappa / zeta4) * std::pow(static_cast<double>(R), expo);
  const double logfac = std::log(kappa * kappa * std::log(static_cast<double>(R)));
  return std::max(1.0, main * logfac);
}

/// Analytic sampling-cost summary of one instance.
struct CostReport {
  double kappa = 0.0;  // max over X, X', [X X']
  std::map<std::string, double> kappa_Z;
  double eta = 0.0;    // 1/min(P_X, P_X')
  double P_X = 0.0, P_Xp = 0.0;
  double zeta = 0.0, zeta1 = 0.0, zeta2 = 0.0, zeta3 = 0.0, zeta4 = 0.0;
  Table1Budgets table1;
  std::map<std::string, double> brayton;  // expected draws per matrix
  double total_qsvd = 0.0;
  double mode_qsvd = 0.0;
  std::map<std::string, std::uint64_t> mode_phase_budget;
  bool sigma_kappa_inequality = false;  // 1/min sigma_hat^2 <= R kappa^2
};

inline double condition_number(const std::vector<double>& sigma_hat) {
  if (sigma_hat.empty()) throw EmptySpectrumError();
  double lo = sigma_hat[0], hi = sigma_hat[0];
  for (double s : sigma_hat) {
    lo = std::min(lo, s);
    hi = std::max(hi, s);
  }
  return hi / lo;
}

/// Assemble the cost report from instance spectra and reference overlaps.
/// m is the copy count used for the Brayton collection estimates.
inline CostReport build_cost_report(const std::vector<double>& sh_joint,
                                    const std::vector<double>& sh_X,
                                    const std::vector<double>& sh_Xp,
                                    double P_X, double P_Xp,
                                    const ReferenceStates& refs,
                                    double epsilon, int m = 1) {
  CostReport rep;
  rep.kappa_Z["joint"] = condition_number(sh_joint);
  rep.kappa_Z["X"] = condition_number(sh_X);
  rep.kappa_Z["Xp"] = condition_number(sh_Xp);
  rep.kappa = std::max({rep.kappa_Z["joint"], rep.kappa_Z["X"], rep.kappa_Z["Xp"]});
  rep.P_X = P_X;
  rep.P_Xp = P_Xp;
  rep.eta = 1.0 / std::min(P_X, P_Xp);
  rep.zeta1 = refs.zeta1;
  rep.zeta2 = refs.zeta2;
  rep.zeta = refs.zeta;

  auto weights = [](const std::vector<double>& sh) {
    std::vector<double> p(sh.size());
    double total = 0.0;
    for (double s : sh) total += s * s;
    for (std::size_t i = 0; i < sh.size(); ++i) p[i] = sh[i] * sh[i] / total;
    return p;
  };
  rep.brayton["joint"] = brayton_expected_trials(
      static_cast<int>(sh_joint.size()), m, weights(sh_joint));
  rep.brayton["X"] =
      brayton_expected_trials(static_cast<int>(sh_X.size()), m, weights(sh_X));
  rep.brayton["Xp"] = brayton_expected_trials(static_cast<int>(sh_Xp.size()),
                                              m, weights(sh_Xp));

  double min_shat_sq = 1.0;
  for (double s : sh_joint) min_shat_sq = std::min(min_shat_sq, s * s);
  for (double s : sh_X) min_shat_sq = std::min(min_shat_sq, s * s);
  for (double s : sh_Xp) min_shat_sq = std::min(min_shat_sq, s * s);
  rep.table1 = table1_budgets(epsilon, refs.zeta1, refs.zeta2,
                              std::min(P_X, P_Xp), min_shat_sq);

  const int R = static_cast<int>(sh_joint.size());
  if (R >= 2) {
    rep.total_qsvd = total_qsvd_count(rep.kappa, R, refs.zeta, epsilon);
    rep.mode_qsvd = mode_qsvd_count(rep.kappa, R, 0.5);
  }

  // 1/min sigma_hat^2 <= R kappa^2 per retained spectrum.
  rep.sigma_kappa_inequality = true;
  auto check = [&](const std::vector<double>& sh) {
    double lo = sh[0];
    for (double s : sh) lo = std::min(lo, s);
    double k = condition_number(sh);
    if (1.0 / (lo * lo) > sh.size() * k * k * (1.0 + 1e-9))
      rep.sigma_kappa_inequality = false;
  };
  check(sh_joint);
  check(sh_X);
  check(sh_Xp);
  return rep;
}

}  // namespace qdmd

#endif  // QDMD_COSTMODEL_HPP
