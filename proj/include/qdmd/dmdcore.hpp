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

#ifndef QDMD_DMDCORE_HPP
#define QDMD_DMDCORE_HPP

#include <cmath>
#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "qdmd/dynamics.hpp"
#include "qdmd/errors.hpp"
#include "qdmd/kprime.hpp"
#include "qdmd/matrix.hpp"
#include "qdmd/numerics.hpp"

namespace qdmd {

/// Classical exact-DMD output: the projected operator, its spectrum, and
/// the reduced/full modes.
struct DmdResult {
  int R = 0;
  CMatrix Q;             // N x R, dominant left singular vectors of [X X']
  CMatrix kprime;        // R x R
  std::vector<Complex> eigenvalues;
  CMatrix modes_small;   // columns w'_r
  CMatrix modes_full;    // columns Q w'_r
  /// (ln lambda)/dt per eigenvalue; empty optional where lambda = 0 (the
  /// projected operator is rank deficient there and no rate is defined).
  std::vector<std::optional<Complex>> cont_exponents;
  double eigvec_condition = 0.0;
  bool ill_conditioned = false;  // eigenvector matrix condition > 1e6
  std::string warning;
};

struct SchurDmdResult {
  CMatrix W_small;  // R x R unitary
  CMatrix S;        // R x R upper triangular
  CMatrix W_full;   // N x R
};

/// Principal-branch continuous-time exponents (ln lambda)/dt. Frequencies
/// beyond |Im| = pi/dt alias; sampling densely enough is the caller's
/// responsibility.
inline std::vector<Complex> continuous_exponents(
    const std::vector<Complex>& eigenvalues, double dt) {
  std::vector<Complex> out;
  out.reserve(eigenvalues.size());
  for (Complex l : eigenvalues) {
    if (l == Complex{0.0, 0.0}) throw ZeroEigenvalueError();
    out.push_back(std::log(l) / dt);
  }
  return out;
}

namespace detail {

/// Shared truncation step: Q from [X X'] and the projected operator
/// Q^dag X' X^+ Q. With a phase reference, all left singular vector phases
/// are fixed against it first so the matrix is gauge-comparable with the
/// quantum pipeline's output.
inline std::pair<SvdFactors, CMatrix> project_kprime(
    const SnapshotData& data, double tol,
    const std::optional<CVector>& phase_ref) {
  SvdFactors fJ = svd_truncated(hcat(data.X, data.Xprime), tol);
  SvdFactors fX = svd_truncated(data.X, tol);
  if (phase_ref) {
    fix_left_phases(fJ, *phase_ref, "joint");
    fix_left_phases(fX, *phase_ref, "X");
  }
  CMatrix kp = fJ.U.adjoint() * data.Xprime * pinv_truncated(fX) * fJ.U;
  return {std::move(fJ), std::move(kp)};
}

}  // namespace detail

inline DmdResult exact_dmd(const SnapshotData& data, double tol,
                           const std::optional<CVector>& phase_ref = {}) {
  auto [fJ, kp] = detail::project_kprime(data, tol, phase_ref);
  DmdResult res;
  res.R = fJ.rank;
  res.Q = fJ.U;
  res.kprime = std::move(kp);
  auto [vals, vecs] = eig(res.kprime);
  res.eigenvalues = std::move(vals);
  res.modes_small = std::move(vecs);
  res.modes_full = res.Q * res.modes_small;

  Eigen::JacobiSVD<CMatrix> wsvd(res.modes_small);
  const auto& sv = wsvd.singularValues();
  res.eigvec_condition =
      sv(sv.size() - 1) > 0.0 ? sv(0) / sv(sv.size() - 1)
                              : std::numeric_limits<double>::infinity();
  if (res.eigvec_condition > 1e6) {
    res.ill_conditioned = true;
    res.warning =
        "eigenvector matrix condition number " +
        std::to_string(res.eigvec_condition) +
        " exceeds 1e6; the operator is nearly defective, use schur_dmd";
  }

  res.cont_exponents.reserve(res.eigenvalues.size());
  for (Complex l : res.eigenvalues) {
    if (std::abs(l) < 1e-300)
      res.cont_exponents.emplace_back(std::nullopt);
    else
      res.cont_exponents.emplace_back(std::log(l) / data.dt);
  }
  return res;
}

/// Schur-based DMD for (nearly) defective operators: the same projected
/// matrix, factored as W S W^dag instead of eigendecomposed.
inline SchurDmdResult schur_dmd(const SnapshotData& data, double tol) {
  auto [fJ, kp] = detail::project_kprime(data, tol, std::nullopt);
  auto [W, S] = schur(kp);
  SchurDmdResult res;
  res.W_small = std::move(W);
  res.S = std::move(S);
  res.W_full = fJ.U * res.W_small;
  return res;
}

}  // namespace qdmd

#endif  // QDMD_DMDCORE_HPP
