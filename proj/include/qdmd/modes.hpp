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

#ifndef QDMD_MODES_HPP
#define QDMD_MODES_HPP

#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "qdmd/errors.hpp"
#include "qdmd/estimators.hpp"
#include "qdmd/matrix.hpp"
#include "qdmd/qstate.hpp"
#include "qdmd/qsvd.hpp"
#include "qdmd/rng.hpp"

namespace qdmd {

struct CoherentAddResult {
  PureState state;
  double success_prob = 0.0;
  double empirical_acceptance = 0.0;  // sampled mode only
  std::uint64_t shots = 0;
};

/// Post-selected coherent addition of two states:
/// Psi ~ alpha (<chi|psi1>/|<chi|psi1>|) psi0 + beta (<chi|psi0>/|<chi|psi0>|) psi1.
/// The success probability is c0 c1/(c0+c1) times the squared norm of the
/// unnormalized output, which reduces to c0 c1/(c0+c1) for orthogonal
/// inputs (c_i = |<chi|psi_i>|^2).
inline CoherentAddResult coherent_add(const PureState& psi0,
                                      const PureState& psi1, Complex alpha,
                                      Complex beta, const PureState& chi,
                                      std::uint64_t shots = 0,
                                      RngStream* rng = nullptr) {
  if (std::abs(std::norm(alpha) + std::norm(beta) - 1.0) > 1e-10)
    throw ValidationError("alpha,beta", "|alpha|^2 + |beta|^2 must be 1");
  Complex ovl0 = overlap(chi, psi0);
  Complex ovl1 = overlap(chi, psi1);
  if (std::abs(ovl0) < 1e-14 || std::abs(ovl1) < 1e-14)
    throw ZeroReferenceOverlapError(
        "coherent_add: reference orthogonal to an input");
  const double c0 = std::norm(ovl0);
  const double c1 = std::norm(ovl1);

  CVector unnorm = alpha * (ovl1 / std::abs(ovl1)) * psi0.amplitudes +
                   beta * (ovl0 / std::abs(ovl0)) * psi1.amplitudes;
  CoherentAddResult res;
  res.success_prob = (c0 * c1 / (c0 + c1)) * unnorm.squaredNorm();
  res.state = PureState::from_amplitudes(psi0.layout, std::move(unnorm), true);
  if (shots > 0 && rng != nullptr) {
    std::uint64_t accepted = 0;
    for (std::uint64_t i = 0; i < shots; ++i)
      if (rng->bernoulli(res.success_prob)) ++accepted;
    res.empirical_acceptance =
        static_cast<double>(accepted) / static_cast<double>(shots);
    res.shots = shots;
  }
  return res;
}

struct OutOfPhaseResult {
  CVector coeffs;  // coefficients over the u basis, hidden phases applied
  double success_prob = 0.0;
};

/// Out-of-phase superposition protocol: prepares
/// sum_r alpha_r e^{i phi_r} |u_r> via controlled rotations against the SVD
/// oracle. The hidden phases phi come from the tomography circuits and are
/// unknown to the estimation path. Success probability is |a|^2 with
/// a = min over nonzero alpha of |sigma_hat_r / alpha_r|.
inline OutOfPhaseResult out_of_phase_superposition(
    const CVector& alphas, const std::vector<double>& sigma_hat,
    const std::vector<double>& hidden_phases) {
  if (std::abs(alphas.norm() - 1.0) > 1e-10)
    throw ValidationError("alphas", "amplitude vector must be unit norm");
  const int R = static_cast<int>(alphas.size());
  double a = std::numeric_limits<double>::infinity();
  for (int r = 0; r < R; ++r) {
    if (alphas(r) == Complex{0.0, 0.0}) continue;
    a = std::min(a, sigma_hat[r] / std::abs(alphas(r)));
  }
  OutOfPhaseResult res;
  res.coeffs.resize(R);
  for (int r = 0; r < R; ++r)
    res.coeffs(r) = alphas(r) * std::polar(1.0, hidden_phases[r]);
  res.success_prob = a * a;
  return res;
}

inline OutOfPhaseResult out_of_phase_superposition(
    const CVector& alphas, const SvdOracle& oracle,
    const std::vector<double>& hidden_phases) {
  return out_of_phase_superposition(alphas, oracle.sigma_hat, hidden_phases);
}

/// One two-state addition step of the recursive tree.
struct AdditionNode {
  std::vector<int> set, I0, I1;
  int left = -1, right = -1;  // child node index, or -1 for a singleton side
  double mag0 = 0.0, mag1 = 0.0;      // sqrt(partial weight sums)
  double theta0 = 0.0, theta1 = 0.0;  // estimated arg<chi_add|psi_Ij>
  // amp builds psi_set by the out-of-phase protocol; ref_amp builds the
  // unmodified chi_add; theta_star is the grid-search phase recovered while
  // composing amp from the children.
  CVector amp, ref_amp;  // coefficient space (dimension R)
  CVector chi_add;       // full state space; may mix in chi1 when modified
  double theta_star = 0.0;
  bool b_modified = false;
  double chi1_overlap_abs = 0.0;  // |<chi1|chi_add>| after any modification
  double ref_prep_success = 0.0;  // out-of-phase success of building chi_add
};

struct AdditionPlan {
  int R = 0;
  CVector weights;                  // normalized target amplitudes w~'_r
  std::vector<AdditionNode> nodes;  // post-order, root last
  double zeta3 = 1.0;
  double zeta4 = 1.0;
  std::map<std::string, std::uint64_t> phase_shot_budget;
};

namespace detail {

inline double subtree_weight(const CVector& w, const std::vector<int>& idx) {
  double s = 0.0;
  for (int r : idx) s += std::norm(w(r));
  return s;
}

inline int build_tree(AdditionPlan& plan, std::vector<int> set) {
  AdditionNode node;
  node.set = set;
  const int n = static_cast<int>(set.size());
  const int half = (n + 1) / 2;
  node.I0.assign(set.begin(), set.begin() + half);
  node.I1.assign(set.begin() + half, set.end());
  if (node.I0.size() > 1) node.left = build_tree(plan, node.I0);
  if (node.I1.size() > 1) node.right = build_tree(plan, node.I1);
  const double w0 = subtree_weight(plan.weights, node.I0);
  const double w1 = subtree_weight(plan.weights, node.I1);
  if (w0 <= 0.0 || w1 <= 0.0)
    throw DomainError("plan_tree: a branch carries zero target weight");
  node.mag0 = std::sqrt(w0 / (w0 + w1));
  node.mag1 = std::sqrt(w1 / (w0 + w1));
  plan.nodes.push_back(std::move(node));
  return static_cast<int>(plan.nodes.size()) - 1;
}

/// Normalized coefficients of the ideal branch state psi_I over the u basis.
inline CVector branch_coeffs(const CVector& w, const std::vector<int>& idx) {
  CVector c = CVector::Zero(w.size());
  for (int r : idx) c(r) = w(r);
  return c / c.norm();
}

/// Grid search over theta in [0, 2pi) maximizing the fidelity
/// |<base + e^{i theta} rot | target>|^2 / ||base + e^{i theta} rot||^2,
/// with one parabolic refinement step.
inline std::pair<double, double> grid_search_phase(const CVector& base,
                                                   const CVector& rot,
                                                   const CVector& target,
                                                   int grid_points) {
  auto fidelity = [&](double th) {
    CVector c = base + std::polar(1.0, th) * rot;
    return std::norm(c.dot(target)) / c.squaredNorm();
  };
  const double step = 2.0 * std::numbers::pi / grid_points;
  int best = 0;
  double fbest = -1.0;
  std::vector<double> f(grid_points);
  for (int g = 0; g < grid_points; ++g) {
    f[g] = fidelity(g * step);
    if (f[g] > fbest) {
      fbest = f[g];
      best = g;
    }
  }
  const double fm = f[(best + grid_points - 1) % grid_points];
  const double fp = f[(best + 1) % grid_points];
  double theta = best * step;
  const double denom = fm - 2.0 * fbest + fp;
  if (denom < 0.0) theta += 0.5 * step * (fm - fp) / denom;
  theta = std::fmod(theta + 2.0 * std::numbers::pi, 2.0 * std::numbers::pi);
  return {theta, std::max(fbest, fidelity(theta))};
}

}  // namespace detail

/// Balanced binary partition of {1..R} (lexicographic split) with per-node
/// amplitudes from the partial weight sums. Tree depth is ceil(log2 R).
inline AdditionPlan plan_tree(const CVector& weights) {
  const int R = static_cast<int>(weights.size());
  if (R < 1) throw DomainError("plan_tree: empty weight vector");
  AdditionPlan plan;
  plan.R = R;
  plan.weights = weights / weights.norm();
  if (R == 1) return plan;  // single leaf, no additions
  std::vector<int> all(R);
  for (int r = 0; r < R; ++r) all[r] = r;
  detail::build_tree(plan, std::move(all));
  return plan;
}

/// Compose, per node, the amplitude vector that out-of-phase-builds
/// psi_set (child vectors joined with the relative phase recovered by a
/// fidelity grid search — the induction step of the construction proof),
/// then build the node reference chi_add = (e^{i phi0} psi_I0 +
/// e^{i phi1} psi_I1)/sqrt(2) the same way. Whenever
/// |<chi1|chi_add>| <= b/2 the reference is modified to
/// C (chi_add + b chi1) and the proven lower bounds are re-verified.
inline void build_addition_references(AdditionPlan& plan, const CMatrix& U,
                                      const CVector& chi1,
                                      const std::vector<double>& sigma_hat,
                                      const std::vector<double>& hidden_phases,
                                      int grid_points = 64, double b = 0.5) {
  if (b <= 0.0 || b >= 1.0 / std::sqrt(2.0))
    throw ValidationError("b", "must lie in (0, 1/sqrt(2))");
  if (grid_points < 8) throw ValidationError("grid_points", "must be >= 8");
  plan.zeta3 = 1.0;
  plan.zeta4 = 1.0;

  auto amp_of_side = [&](const AdditionNode& node, int side) -> CVector {
    int child = (side == 0) ? node.left : node.right;
    const std::vector<int>& idx = (side == 0) ? node.I0 : node.I1;
    if (child >= 0) return plan.nodes[child].amp;
    return CVector::Unit(plan.R, idx.front());
  };

  for (auto& node : plan.nodes) {
    const double w0 = detail::subtree_weight(plan.weights, node.I0);
    const double w1 = detail::subtree_weight(plan.weights, node.I1);
    const double W = w0 + w1;
    CVector a0 = amp_of_side(node, 0);
    CVector a1 = amp_of_side(node, 1);

    // Candidate alpha(theta) = sqrt(w0/W) a0 + e^{i theta} sqrt(w1/W) a1.
    // The search sees only fidelity values, never the hidden phases.
    CVector target = detail::branch_coeffs(plan.weights, node.set);
    CVector built0 =
        out_of_phase_superposition(a0, sigma_hat, hidden_phases).coeffs;
    CVector built1 =
        out_of_phase_superposition(a1, sigma_hat, hidden_phases).coeffs;
    auto [theta_star, peak] = detail::grid_search_phase(
        std::sqrt(w0 / W) * built0, std::sqrt(w1 / W) * built1, target,
        grid_points);
    const double coarse = 2.0 * std::numbers::pi / grid_points;
    if (peak < 1.0 - coarse * coarse)
      throw GridTooCoarseError("build_addition_references: fidelity peak " +
                               std::to_string(peak) +
                               " below 1 - (2pi/grid)^2");
    node.theta_star = theta_star;
    node.amp = std::sqrt(w0 / W) * a0 +
               std::polar(1.0, theta_star) * std::sqrt(w1 / W) * a1;

    // Reference amplitude vector (a0 + a1)/sqrt(2) on disjoint supports.
    node.ref_amp = (a0 + a1) / std::sqrt(2.0);
    OutOfPhaseResult ref =
        out_of_phase_superposition(node.ref_amp, sigma_hat, hidden_phases);
    node.ref_prep_success = ref.success_prob;
    node.chi_add = U * ref.coeffs;

    Complex c3 = chi1.dot(node.chi_add);
    if (std::abs(c3) <= b / 2.0) {
      CVector modified = node.chi_add + b * chi1;
      node.chi_add = modified / modified.norm();
      node.b_modified = true;
      c3 = chi1.dot(node.chi_add);
      if (std::abs(c3) < b / (2.0 * (1.0 + b)) - 1e-12)
        throw BoundViolationError(
            "b-modification failed to restore <chi1|chi_add>");
    }
    node.chi1_overlap_abs = std::abs(c3);
    plan.zeta3 = std::min(plan.zeta3, std::norm(c3));

    const double side_lower = (1.0 / std::sqrt(2.0) - b) / (1.0 + b);
    for (int side = 0; side < 2; ++side) {
      CVector built_branch = U * (side == 0 ? built0 : built1);
      double ovl = std::abs(node.chi_add.dot(built_branch));
      if (node.b_modified && ovl < side_lower - 1e-12)
        throw BoundViolationError(
            "b-modification broke the reference/branch overlap bound");
      plan.zeta4 = std::min(plan.zeta4, ovl * ovl);
    }
  }
}

/// Estimate theta_{Ij} for every node through the measurement protocol:
/// <chi_add|psi_Ij> expanded over the estimated <chi_add|u_r>, which come
/// from three-state SWAP tests against chi1 divided by the known
/// <u_r|chi1> values and the Hadamard-test estimate of <chi1|chi_add>.
/// In sampled mode each site's shots follow the budget that keeps the
/// per-node phase error below epsilon/ceil(log2 R).
inline void estimate_addition_phases(AdditionPlan& plan, const CMatrix& U,
                                     const CVector& chi1,
                                     const std::vector<double>& chi1_u_abs,
                                     double epsilon, bool exact,
                                     std::uint64_t seed) {
  if (plan.R == 1) return;
  const double depth = std::ceil(std::log2(static_cast<double>(plan.R)));
  const double sqrtR = std::sqrt(static_cast<double>(plan.R));
  PureState chi1_state = PureState::from_vector("1", chi1);

  for (std::size_t k = 0; k < plan.nodes.size(); ++k) {
    auto& node = plan.nodes[k];
    PureState chi_add_state = PureState::from_vector("1", node.chi_add);

    // <chi1|chi_add> via the Hadamard test on a two-branch ancilla state.
    Complex c3;
    {
      RegisterLayout lay(
          {{"1", chi1_state.layout.registers()[0].qubits}, {"a", 1}});
      CVector amps = CVector::Zero(static_cast<Eigen::Index>(lay.dim()));
      for (Eigen::Index i = 0; i < chi1_state.amplitudes.size(); ++i) {
        amps(2 * i) = chi1_state.amplitudes(i) / std::sqrt(2.0);
        amps(2 * i + 1) = chi_add_state.amplitudes(i) / std::sqrt(2.0);
      }
      PureState two = PureState::from_amplitudes(lay, std::move(amps), true);
      std::string site = "mode_phase/node" + std::to_string(k) + "/c3";
      std::uint64_t shots = 0;
      if (!exact) {
        double prec = (2.0 / std::numbers::pi) * (1.0 / std::sqrt(2.0)) *
                      node.chi1_overlap_abs * epsilon / (sqrtR * depth);
        double min_a = chi1_u_abs[node.set.front()];
        for (int r : node.set) min_a = std::min(min_a, chi1_u_abs[r]);
        prec *= min_a;
        // Each quadrature at prec/sqrt(2) keeps the complex error at prec.
        shots = static_cast<std::uint64_t>(std::ceil(2.0 / (prec * prec)));
        plan.phase_shot_budget[site] = 2 * shots;
      }
      RngStream rng_re(seed, site + "/re");
      RngStream rng_im(seed, site + "/im");
      c3 = Complex(
          hadamard_test(two, {"a"}, {0}, {1}, Part::Re, shots, rng_re).value,
          hadamard_test(two, {"a"}, {0}, {1}, Part::Im, shots, rng_im).value);
    }
    if (std::abs(c3) < 1e-14)
      throw ZeroReferenceOverlapError(
          "estimate_addition_phases: <chi1|chi_add> = 0");

    for (int side = 0; side < 2; ++side) {
      const std::vector<int>& idx = (side == 0) ? node.I0 : node.I1;
      const double Wj = detail::subtree_weight(plan.weights, idx);
      Complex inner{0.0, 0.0};
      for (int r : idx) {
        std::string site = "mode_phase/node" + std::to_string(k) + "/j" +
                           std::to_string(side) + "/u" + std::to_string(r);
        PureState u_state = PureState::from_vector("1", U.col(r));
        std::uint64_t shots = 0;
        if (!exact) {
          double prec = (2.0 / std::numbers::pi) * (1.0 / std::sqrt(2.0)) *
                        chi1_u_abs[r] * node.chi1_overlap_abs * epsilon /
                        (sqrtR * depth);
          shots = static_cast<std::uint64_t>(std::ceil(2.0 / (prec * prec)));
          plan.phase_shot_budget[site] = 2 * shots;
        }
        RngStream rng_re(seed, site + "/re");
        RngStream rng_im(seed, site + "/im");
        Complex triple(
            swap3(chi_add_state, u_state, chi1_state, Part::Re, shots, rng_re)
                .value,
            swap3(chi_add_state, u_state, chi1_state, Part::Im, shots, rng_im)
                .value);
        // triple = <chi_add|u_r><u_r|chi1><chi1|chi_add>
        inner += plan.weights(r) * triple / (chi1_u_abs[r] * c3);
      }
      inner /= std::sqrt(Wj);
      if (side == 0)
        node.theta0 = std::arg(inner);
      else
        node.theta1 = std::arg(inner);
    }
  }
}

struct ModeBuildResult {
  PureState state;
  double fidelity = 0.0;             // against the direct superposition
  double success_multistep = 0.0;    // product over tree additions
  double success_single_step = 0.0;  // out-of-phase preps + root addition
  std::vector<double> node_success;  // per addition step
};

/// Bottom-up recursive coherent addition of the planned tree. Phases must
/// already be estimated. Fidelity is reported against the directly
/// constructed superposition sum_r w~'_r |u_r>.
inline ModeBuildResult build_mode(const AdditionPlan& plan, const CMatrix& U,
                                  const std::vector<double>& sigma_hat,
                                  const std::vector<double>& hidden_phases) {
  PureState target_state = PureState::from_vector("1", U * plan.weights);
  if (plan.R == 1) {
    return {target_state, 1.0, 1.0, sigma_hat[0] * sigma_hat[0], {}};
  }

  std::vector<PureState> built;
  built.reserve(plan.nodes.size());
  ModeBuildResult res;
  res.success_multistep = 1.0;

  auto side_state = [&](const AdditionNode& node, int side) -> PureState {
    int child = (side == 0) ? node.left : node.right;
    if (child >= 0) return built[child];
    int r = (side == 0) ? node.I0.front() : node.I1.front();
    // Leaves are singular vector states straight from the SVD oracle; every
    // prepared copy carries its tomography phase.
    return PureState::from_vector(
        "1", U.col(r) * std::polar(1.0, hidden_phases[r]));
  };

  for (const auto& node : plan.nodes) {
    PureState s0 = side_state(node, 0);
    PureState s1 = side_state(node, 1);
    PureState chi_add = PureState::from_vector("1", node.chi_add);
    Complex alpha = node.mag0 * std::polar(1.0, node.theta0);
    Complex beta = node.mag1 * std::polar(1.0, node.theta1);
    CoherentAddResult add = coherent_add(s0, s1, alpha, beta, chi_add);
    built.push_back(add.state);
    res.node_success.push_back(add.success_prob);
    res.success_multistep *= add.success_prob;
  }
  res.state = built.back();
  res.fidelity = std::norm(overlap(res.state, target_state));

  // Single-step alternative: prepare the root's two branches with the
  // out-of-phase protocol and run one addition. The output state is the
  // same (the circuit is invariant to input global phases); only the
  // success accounting differs.
  const auto& root = plan.nodes.back();
  res.success_single_step = res.node_success.back();
  for (int side = 0; side < 2; ++side) {
    int child = (side == 0) ? root.left : root.right;
    CVector amp =
        (child >= 0)
            ? plan.nodes[child].amp
            : CVector::Unit(plan.R,
                            side == 0 ? root.I0.front() : root.I1.front());
    res.success_single_step *=
        out_of_phase_superposition(amp, sigma_hat, hidden_phases).success_prob;
  }
  return res;
}

/// One-call mode reconstruction for the pipeline: prune zero-weight
/// entries, plan, build references, estimate phases, add. `weights` is the
/// eigenvector column w~'_r; chi1_u_abs are the known |<chi1|u_r>| values.
struct ModeReconstruction {
  AdditionPlan plan;
  ModeBuildResult result;
};

inline ModeReconstruction run_mode_reconstruction(
    const CVector& weights, const CMatrix& U, const CVector& chi1,
    const std::vector<double>& chi1_u_abs, const std::vector<double>& sigma_hat,
    const std::vector<double>& hidden_phases, double epsilon, bool exact,
    std::uint64_t seed, int grid_points = 64, double b = 0.5) {
  std::vector<int> support;
  for (Eigen::Index r = 0; r < weights.size(); ++r)
    if (std::abs(weights(r)) > 1e-14) support.push_back(static_cast<int>(r));
  if (support.empty()) throw DomainError("mode weights are all zero");

  CVector w(support.size());
  CMatrix Usub(U.rows(), support.size());
  std::vector<double> sh(support.size()), hp(support.size()),
      ca(support.size());
  for (std::size_t i = 0; i < support.size(); ++i) {
    w(static_cast<Eigen::Index>(i)) = weights(support[i]);
    Usub.col(static_cast<Eigen::Index>(i)) = U.col(support[i]);
    sh[i] = sigma_hat[support[i]];
    hp[i] = hidden_phases[support[i]];
    ca[i] = chi1_u_abs[support[i]];
  }

  ModeReconstruction rec;
  rec.plan = plan_tree(w);
  build_addition_references(rec.plan, Usub, chi1, sh, hp, grid_points, b);
  estimate_addition_phases(rec.plan, Usub, chi1, ca, epsilon, exact, seed);
  rec.result = build_mode(rec.plan, Usub, sh, hp);
  return rec;
}

}  // namespace qdmd

#endif  // QDMD_MODES_HPP
