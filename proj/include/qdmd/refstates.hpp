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

#ifndef QDMD_REFSTATES_HPP
#define QDMD_REFSTATES_HPP

#include <cmath>
#include <string>
#include <vector>

#include "qdmd/errors.hpp"
#include "qdmd/matrix.hpp"
#include "qdmd/qstate.hpp"

namespace qdmd {

/// Reference states for the inner-product phase conventions, built in
/// stages from the singular vector frames.
///
/// chi1 is assembled from the left singular vectors: the equal-weight
/// superposition over the joint-matrix frame, then a correction over the
/// X vectors whose overlap fell below 1/(4R) (weight 1/(2 sqrt(R))), then a
/// correction over the X' vectors below 1/(14 R sqrt(R)) (weight 1/(7R)).
/// chi2 mirrors the first correction stage on the conjugated right singular
/// vectors of X and X'.
struct ReferenceStates {
  CVector chi1;  // dimension of the left singular vector space
  CVector chi2;  // dimension of the right singular vector space
  int R = 0;

  double zeta1 = 0.0;  // min |<chi1|u>|^2 over all three frames
  double zeta2 = 0.0;  // min |<chi2|v*>|^2 over X, X'
  double zeta = 0.0;   // min(zeta1, zeta2)

  double C11 = 1.0;  // normalizing constant of the first chi1 correction
  double C12 = 1.0;  // normalizing constant of the second chi1 correction
  double C21 = 1.0;  // normalizing constant of the chi2 correction

  std::vector<int> S11;  // X indices corrected in chi1 stage 1
  std::vector<int> S12;  // X' indices corrected in chi1 stage 2
  std::vector<int> S21;  // X' indices corrected in chi2

  // Frames the states were built from, kept for bound verification.
  CMatrix U_joint, U_X, U_Xp;
  CMatrix Vc_X, Vc_Xp;  // conjugated right singular vectors

  PureState chi1_state(const std::string& reg = "1") const {
    return PureState::from_vector(reg, chi1);
  }
};

namespace detail {

inline CVector equal_superposition(const CMatrix& frame, int count) {
  CVector v = CVector::Zero(frame.rows());
  for (int r = 0; r < count; ++r) v += frame.col(r);
  return v / std::sqrt(static_cast<double>(count));
}

}  // namespace detail

/// Stage-1 correction shared by chi1 and chi2: starting from base (an equal
/// superposition over `primary`), collect the `secondary` columns whose
/// overlap magnitude is at most `threshold` and add their equal
/// superposition with the given weight. Returns the normalized state, the
/// normalizing constant, and the membership set (ties at the threshold are
/// included).
inline CVector correction_stage(const CVector& base, const CMatrix& secondary,
                                double threshold, double weight,
                                double& norm_const, std::vector<int>& members) {
  members.clear();
  for (int r = 0; r < secondary.cols(); ++r)
    if (std::abs(base.dot(secondary.col(r))) <= threshold) members.push_back(r);
  if (members.empty()) {
    norm_const = 1.0;
    return base;
  }
  CVector phi = CVector::Zero(base.size());
  for (int r : members) phi += secondary.col(r);
  phi /= std::sqrt(static_cast<double>(members.size()));
  CVector unnorm = base + weight * phi;
  norm_const = 1.0 / unnorm.norm();
  return norm_const * unnorm;
}

/// Build chi1 from the left singular vector frames of [X X'], X, and X'.
/// R is the dominant rank (the column count of U_joint).
inline void build_chi1(ReferenceStates& refs, const CMatrix& U_joint,
                       const CMatrix& U_X, const CMatrix& U_Xp, int R) {
  if (R < 1) throw EmptySpectrumError("build_chi1: R = 0");
  const double sqrtR = std::sqrt(static_cast<double>(R));

  CVector chi10 = detail::equal_superposition(U_joint, R);
  CVector chi11 = correction_stage(chi10, U_X, 1.0 / (4.0 * R),
                                   1.0 / (2.0 * sqrtR), refs.C11, refs.S11);
  refs.chi1 = correction_stage(chi11, U_Xp, 1.0 / (14.0 * R * sqrtR),
                               1.0 / (7.0 * R), refs.C12, refs.S12);

  refs.R = R;
  refs.U_joint = U_joint;
  refs.U_X = U_X;
  refs.U_Xp = U_Xp;
  refs.zeta1 = 1.0;
  for (const CMatrix* frame : {&U_joint, &U_X, &U_Xp})
    for (int r = 0; r < frame->cols(); ++r)
      refs.zeta1 =
          std::min(refs.zeta1, std::norm(refs.chi1.dot(frame->col(r))));
  refs.zeta = std::min(refs.zeta1, refs.zeta2 > 0.0 ? refs.zeta2 : 1.0);
}

/// Build chi2 from the conjugated right singular vector frames of X and X'.
inline void build_chi2(ReferenceStates& refs, const CMatrix& Vc_X,
                       const CMatrix& Vc_Xp, int R) {
  if (R < 1) throw EmptySpectrumError("build_chi2: R = 0");
  const double sqrtR = std::sqrt(static_cast<double>(R));
  const int base_count = std::min<int>(R, static_cast<int>(Vc_X.cols()));

  CVector chi20 = detail::equal_superposition(Vc_X, base_count);
  refs.chi2 = correction_stage(chi20, Vc_Xp, 1.0 / (4.0 * R),
                               1.0 / (2.0 * sqrtR), refs.C21, refs.S21);

  refs.Vc_X = Vc_X;
  refs.Vc_Xp = Vc_Xp;
  refs.zeta2 = 1.0;
  for (const CMatrix* frame : {&Vc_X, &Vc_Xp})
    for (int r = 0; r < frame->cols(); ++r)
      refs.zeta2 =
          std::min(refs.zeta2, std::norm(refs.chi2.dot(frame->col(r))));
  refs.zeta = std::min(refs.zeta1 > 0.0 ? refs.zeta1 : 1.0, refs.zeta2);
}

/// Build both reference states. The u frames must be column-orthonormal
/// within each matrix; the constructions and proofs rely on nothing else.
inline ReferenceStates build_reference_states(const CMatrix& U_joint,
                                              const CMatrix& U_X,
                                              const CMatrix& U_Xp,
                                              const CMatrix& Vc_X,
                                              const CMatrix& Vc_Xp, int R) {
  ReferenceStates refs;
  build_chi1(refs, U_joint, U_X, U_Xp, R);
  build_chi2(refs, Vc_X, Vc_Xp, R);
  return refs;
}

struct BoundMargin {
  std::string label;
  double value = 0.0;
  double bound = 0.0;
  double margin = 0.0;
};

/// Check every proven overlap lower bound with exact overlaps and return
/// the margins. A violation signals an implementation bug, not a property
/// of the data, and throws.
inline std::vector<BoundMargin> verify_bounds(const ReferenceStates& refs) {
  const double R = static_cast<double>(refs.R);
  const double sqrtR = std::sqrt(R);
  std::vector<BoundMargin> report;

  auto check = [&](const std::string& label, const CVector& chi,
                   const CMatrix& frame, double bound) {
    for (int r = 0; r < frame.cols(); ++r) {
      double value = std::abs(chi.dot(frame.col(r)));
      report.push_back({label + "[" + std::to_string(r + 1) + "]", value,
                        bound, value - bound});
      if (value < bound)
        throw BoundViolationError("reference bound violated at " +
                                  report.back().label);
    }
  };

  check("chi1|u_joint", refs.chi1, refs.U_joint, 1.0 / (6.0 * sqrtR));
  check("chi1|u_X", refs.chi1, refs.U_X, 1.0 / (48.0 * R));
  check("chi1|u_Xp", refs.chi1, refs.U_Xp, 1.0 / (16.0 * R * sqrtR));
  check("chi2|v_X*", refs.chi2, refs.Vc_X, 1.0 / (3.0 * sqrtR));
  check("chi2|v_Xp*", refs.chi2, refs.Vc_Xp, 1.0 / (6.0 * R));
  return report;
}

/// Preparation success probabilities of the staged reference-state
/// circuits, evaluated from the instance spectra.
struct PrepReport {
  double a0 = 0.0;
  double a1 = 0.0;
  double a2 = 0.0;
  double success_chi1_stage0 = 0.0;  // a0^2
  double success_chi1_stage1 = 0.0;  // (a0 / 2 C11)^2
  double success_chi1 = 0.0;         // (a0 / (C12 C11))^2
  double success_chi2 = 0.0;         // 1 / ((2 + 1/2R) C21^2)
  double success_chi2_direct = 0.0;  // post-selected branch norm, computed
                                     // from the protocol state itself
};

/// Evaluate a0, a1, a2 (supplement min-formulas over the correction sets)
/// and the staged success probabilities. sigma_hat vectors are the
/// normalized singular values of [X X'], X, and X'; P_X and P_Xp are the
/// fourth-register branch probabilities.
inline PrepReport prep_success_probabilities(
    const ReferenceStates& refs, double P_X, double P_Xp,
    const std::vector<double>& sh_joint, const std::vector<double>& sh_X,
    const std::vector<double>& sh_Xp) {
  const double R = static_cast<double>(refs.R);
  PrepReport rep;

  double min_joint = sh_joint[0];
  for (int r = 0; r < refs.R && r < static_cast<int>(sh_joint.size()); ++r)
    min_joint = std::min(min_joint, sh_joint[r]);
  double a0 = std::sqrt(R) * min_joint;

  if (!refs.S11.empty()) {
    double m = sh_X[refs.S11.front()];
    for (int r : refs.S11) m = std::min(m, sh_X[r]);
    a0 = std::min(a0, std::sqrt(2.0 * P_X * R * refs.S11.size()) * m);
  }
  if (!refs.S12.empty()) {
    double m = sh_Xp[refs.S12.front()];
    for (int r : refs.S12) m = std::min(m, sh_Xp[r]);
    double c = 7.0 * refs.C11;
    a0 = std::min(a0, std::sqrt(c * c * P_Xp * R * R * refs.S12.size() / 2.0) * m);
  }

  rep.a0 = a0;
  rep.a1 = a0 * std::sqrt(1.0 / (2.0 * P_X * R));
  rep.a2 = a0 * std::sqrt(2.0 / (49.0 * refs.C11 * refs.C11 * P_Xp * R * R));
  rep.success_chi1_stage0 = a0 * a0;
  rep.success_chi1_stage1 = std::pow(a0 / (2.0 * refs.C11), 2);
  rep.success_chi1 = std::pow(a0 / (refs.C12 * refs.C11), 2);

  if (refs.S21.empty()) {
    // No correction branch: the chi2 protocol is the deterministic
    // uncompute sequence with no post-selection.
    rep.success_chi2 = 1.0;
    rep.success_chi2_direct = 1.0;
  } else {
    rep.success_chi2 = 1.0 / ((2.0 + 1.0 / (2.0 * R)) * refs.C21 * refs.C21);
    // Direct route: build the pre-measurement protocol state over the
    // v-space tensor the fourth-register qubit and take the norm of the
    // post-selected branch after the Hadamard.
    const Eigen::Index dim = refs.Vc_X.rows();
    const int base_count = std::min<int>(refs.R, static_cast<int>(refs.Vc_X.cols()));
    CVector branch0 = CVector::Zero(dim);
    CVector branch1 = CVector::Zero(dim);
    for (int r = 0; r < base_count; ++r)
      branch0 += refs.Vc_X.col(r) / std::sqrt(R);
    for (int r : refs.S21)
      branch1 += refs.Vc_Xp.col(r) /
                 (2.0 * std::sqrt(R * static_cast<double>(refs.S21.size())));
    const double prep_norm = std::sqrt(1.0 / (1.0 + 1.0 / (4.0 * R)));
    CVector after_H = (branch0 + branch1) / std::sqrt(2.0);
    rep.success_chi2_direct = std::pow(prep_norm, 2) * after_H.squaredNorm();
  }
  return rep;
}

}  // namespace qdmd

#endif  // QDMD_REFSTATES_HPP
