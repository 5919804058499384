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

#ifndef QDMD_KPRIME_HPP
#define QDMD_KPRIME_HPP

#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "qdmd/dynamics.hpp"
#include "qdmd/errors.hpp"
#include "qdmd/estimators.hpp"
#include "qdmd/matrix.hpp"
#include "qdmd/numerics.hpp"
#include "qdmd/qstate.hpp"
#include "qdmd/qsvd.hpp"
#include "qdmd/refstates.hpp"
#include "qdmd/rng.hpp"

namespace qdmd {

using OverlapKey = std::pair<std::string, int>;  // (matrix tag, index r)

/// Everything estimated on the way to the R x R matrix: the norm ratio f,
/// the decoded spectra, the three Gram factors, the reference overlaps used
/// to resolve phases, and the per-site shot ledger.
struct KPrimeEstimate {
  CMatrix kprime;
  double norm_ratio = 0.0;
  std::vector<double> sigma_hat_X;
  std::vector<double> sigma_hat_Xp;
  CMatrix left_gram_QUp;   // Q^dagger U'
  CMatrix left_gram_UQ;    // U^dagger Q
  CMatrix right_gram_VpV;  // V'^dagger V
  std::map<OverlapKey, Complex> chi1_u_overlaps;
  std::map<OverlapKey, Complex> chi2_v_overlaps;
  std::map<std::string, std::uint64_t> shot_ledger;
  /// First-order per-entry standard error of kprime, propagated from the
  /// independent measurement sites. Zero in exact mode.
  Eigen::MatrixXd kprime_std_error;
};

/// Assembly identity: f (Q^dag U') Sigma'^ (V'^dag V) Sigma^^-1 (U^dag Q).
inline CMatrix assemble_kprime_matrix(double f, const CMatrix& gram_QUp,
                                      const std::vector<double>& sh_Xp,
                                      const CMatrix& gram_VpV,
                                      const std::vector<double>& sh_X,
                                      const CMatrix& gram_UQ) {
  const auto Rp = static_cast<Eigen::Index>(sh_Xp.size());
  const auto Rx = static_cast<Eigen::Index>(sh_X.size());
  if (gram_QUp.cols() != Rp || gram_VpV.rows() != Rp ||
      gram_VpV.cols() != Rx || gram_UQ.rows() != Rx ||
      gram_QUp.rows() != gram_UQ.cols())
    throw DimensionMismatchError("assemble_kprime: factor shapes disagree");
  CMatrix sp = CMatrix::Zero(Rp, Rp);
  for (Eigen::Index i = 0; i < Rp; ++i) sp(i, i) = sh_Xp[i];
  CMatrix sxinv = CMatrix::Zero(Rx, Rx);
  for (Eigen::Index i = 0; i < Rx; ++i) sxinv(i, i) = 1.0 / sh_X[i];
  return f * gram_QUp * sp * gram_VpV * sxinv * gram_UQ;
}

/// Norm ratio f = ||X'||_F / ||X||_F from the fourth register of the joint
/// data state: sqrt(Pr[1]/Pr[0]).
inline EstimatorResult estimate_norm_ratio(const PureState& joint,
                                           std::uint64_t shots, RngStream& rng,
                                           std::string site = "norm_ratio") {
  std::vector<double> p = register_distribution(joint, "4");
  if (p[0] <= 0.0)
    throw DegenerateBranchError("norm ratio: Pr[reg4 = 0] vanishes");
  if (shots == 0) return {std::sqrt(p[1] / p[0]), 0, 0.0, std::move(site)};

  std::uint64_t ones = 0;
  for (std::uint64_t i = 0; i < shots; ++i)
    if (rng.bernoulli(p[1])) ++ones;
  if (ones == shots)
    throw DegenerateBranchError("norm ratio: no reg4 = 0 outcomes observed");
  const double S = static_cast<double>(shots);
  const double p1 = static_cast<double>(ones) / S;
  const double p0 = 1.0 - p1;
  const double f = std::sqrt(p1 / p0);
  EstimatorResult res;
  res.value = f;
  res.shots = shots;
  if (ones > 0) {
    // Delta method through r = p1/(1-p1), f = sqrt(r).
    double var_r = p1 / (S * p0 * p0 * p0);
    res.std_error = 0.5 * std::sqrt(var_r) / f;
  } else {
    res.std_error = 1.0 / S;
  }
  res.site_label = std::move(site);
  return res;
}

/// Decoded sigma_hat values recovered from `samples` draws of the SVD
/// oracle's value register. Indices never observed land in `missing`;
/// costmodel's coupon-collector analysis predicts how often that happens.
struct SingularReadout {
  std::vector<double> sigma_hat;  // per retained index; NaN where missing
  std::vector<int> observed;
  std::vector<int> missing;
  std::uint64_t samples = 0;
};

inline SingularReadout read_singular_values(const CMatrix& Z, double tol,
                                            int b, std::uint64_t samples,
                                            RngStream& rng) {
  SvdOracle oracle = svd_oracle_state(Z, tol, b);
  const int R = oracle.factors.rank;
  std::vector<bool> seen(R, false);
  for (std::uint64_t s = 0; s < samples; ++s) {
    double u = rng.uniform01();
    double cum = 0.0;
    int r = R - 1;
    for (int i = 0; i < R; ++i) {
      cum += oracle.probs[i];
      if (u < cum) {
        r = i;
        break;
      }
    }
    seen[r] = true;
  }
  SingularReadout out;
  out.samples = samples;
  out.sigma_hat.assign(R, std::nan(""));
  for (int r = 0; r < R; ++r) {
    if (seen[r]) {
      out.sigma_hat[r] = std::sqrt(decode_sigma_sq(oracle.patterns[r], b));
      out.observed.push_back(r);
    } else {
      out.missing.push_back(r);
    }
  }
  return out;
}

/// Re-gauge every singular vector pair so arg<chi1|u_r> = 0. The right
/// vector is multiplied by the same phase, preserving Z v_r = sigma_r u_r.
inline void fix_left_phases(SvdFactors& f, const CVector& chi1,
                            const std::string& tag = "") {
  for (int r = 0; r < f.rank; ++r) {
    Complex ovl = chi1.dot(f.U.col(r));
    if (std::abs(ovl) < 1e-14)
      throw ZeroReferenceOverlapError("fix_left_phases: <chi1|u_" +
                                      std::to_string(r + 1) + "^" + tag +
                                      "> = 0");
    Complex phase = ovl / std::abs(ovl);
    f.U.col(r) *= std::conj(phase);
    f.V.col(r) *= std::conj(phase);
  }
}

namespace detail {

struct ScalarEstimate {
  double value = 0.0;
  double std_error = 0.0;
};

/// sqrt of a swap2 estimate of |<chi1|u>|^2, guarded: a sampled site whose
/// overlap is within ten standard errors of zero aborts, telling the caller
/// to rebuild the reference states before dividing by it.
inline ScalarEstimate overlap_from_swap2(const EstimatorResult& r) {
  if (r.shots == 0) return {std::sqrt(std::max(0.0, r.value)), 0.0};
  if (r.value <= 0.0)
    throw ZeroReferenceOverlapError("reference overlap at site " +
                                    r.site_label +
                                    " is indistinguishable from zero");
  double v = std::sqrt(r.value);
  double se = r.std_error / (2.0 * v);
  if (v < 10.0 * se)
    throw ZeroReferenceOverlapError("reference overlap at site " +
                                    r.site_label + " is below 10 std errors");
  return {v, se};
}

}  // namespace detail

/// Raw measured scalars of the whole estimation, one entry per independent
/// rng site. K'~ is a deterministic function of these, which is what makes
/// first-order error propagation straightforward.
struct KPrimeSites {
  int R_J = 0, R_X = 0, R_Xp = 0;
  detail::ScalarEstimate f;
  std::vector<double> sh_X, sh_Xp;  // readout; quantization only, se = 0
  std::map<OverlapKey, detail::ScalarEstimate> chi1_u;
  // Cyclic triple products from the three-state SWAP tests.
  Eigen::MatrixXd QUp_re, QUp_im, QUp_re_se, QUp_im_se;  // R_J x R_Xp
  Eigen::MatrixXd UQ_re, UQ_im, UQ_re_se, UQ_im_se;      // R_X x R_J
  Eigen::MatrixXd VpV_re, VpV_im, VpV_re_se, VpV_im_se;  // R_Xp x R_X
  // Fig. 2 Hadamard-test outputs per (Z, r).
  std::map<OverlapKey, detail::ScalarEstimate> fig2_re, fig2_im;
};

/// All divisions and the final matrix product, from raw sites to the
/// estimate. Also the target of the perturbation loop below.
inline KPrimeEstimate assemble_kprime(const KPrimeSites& s) {
  KPrimeEstimate est;
  est.norm_ratio = s.f.value;
  est.sigma_hat_X = s.sh_X;
  est.sigma_hat_Xp = s.sh_Xp;

  auto a = [&](const std::string& tag, int r) {
    return s.chi1_u.at({tag, r}).value;
  };

  est.left_gram_QUp.resize(s.R_J, s.R_Xp);
  for (int r = 0; r < s.R_J; ++r)
    for (int rp = 0; rp < s.R_Xp; ++rp)
      est.left_gram_QUp(r, rp) = Complex(s.QUp_re(r, rp), s.QUp_im(r, rp)) /
                                 (a("joint", r) * a("Xp", rp));

  est.left_gram_UQ.resize(s.R_X, s.R_J);
  for (int r = 0; r < s.R_X; ++r)
    for (int rp = 0; rp < s.R_J; ++rp)
      est.left_gram_UQ(r, rp) = Complex(s.UQ_re(r, rp), s.UQ_im(r, rp)) /
                                (a("X", r) * a("joint", rp));

  const double f2 = s.f.value * s.f.value;
  const double P_X = 1.0 / (1.0 + f2);
  const double P_Xp = f2 / (1.0 + f2);
  if (P_X <= 0.0 || P_Xp <= 0.0)
    throw DegenerateBranchError("assemble_kprime: a data branch has zero weight");

  for (const std::string& tag : {std::string("X"), std::string("Xp")}) {
    const double P = (tag == "X") ? P_X : P_Xp;
    const auto& sh = (tag == "X") ? s.sh_X : s.sh_Xp;
    const int R = (tag == "X") ? s.R_X : s.R_Xp;
    for (int r = 0; r < R; ++r) {
      Complex t(s.fig2_re.at({tag, r}).value, s.fig2_im.at({tag, r}).value);
      est.chi2_v_overlaps[{tag, r}] = t / (std::sqrt(P) * sh[r] * a(tag, r));
    }
  }

  est.right_gram_VpV.resize(s.R_Xp, s.R_X);
  for (int r = 0; r < s.R_Xp; ++r)
    for (int rp = 0; rp < s.R_X; ++rp) {
      Complex t(s.VpV_re(r, rp), s.VpV_im(r, rp));
      Complex ovlA = est.chi2_v_overlaps.at({"Xp", r});
      Complex ovlB = est.chi2_v_overlaps.at({"X", rp});
      est.right_gram_VpV(r, rp) = std::conj(t) / (std::conj(ovlA) * ovlB);
    }

  for (const auto& [key, val] : s.chi1_u)
    est.chi1_u_overlaps[key] = Complex(val.value, 0.0);

  est.kprime =
      assemble_kprime_matrix(s.f.value, est.left_gram_QUp, s.sh_Xp,
                             est.right_gram_VpV, s.sh_X, est.left_gram_UQ);
  return est;
}

/// Root-sum-square of the kprime shift caused by a one-standard-error
/// perturbation of each measured scalar, all sites independent.
inline Eigen::MatrixXd propagate_kprime_errors(const KPrimeSites& sites) {
  const CMatrix base = assemble_kprime(sites).kprime;
  Eigen::MatrixXd var = Eigen::MatrixXd::Zero(base.rows(), base.cols());
  auto add = [&](KPrimeSites& mod) {
    CMatrix shifted = assemble_kprime(mod).kprime;
    var += (shifted - base).cwiseAbs2().real();
  };
  {
    KPrimeSites m = sites;
    if (m.f.std_error > 0.0) {
      m.f.value += m.f.std_error;
      add(m);
    }
  }
  for (const auto& [key, sc] : sites.chi1_u) {
    if (sc.std_error <= 0.0) continue;
    KPrimeSites m = sites;
    m.chi1_u[key].value += sc.std_error;
    add(m);
  }
  for (const auto& [key, sc] : sites.fig2_re) {
    if (sc.std_error <= 0.0) continue;
    KPrimeSites m = sites;
    m.fig2_re[key].value += sc.std_error;
    add(m);
  }
  for (const auto& [key, sc] : sites.fig2_im) {
    if (sc.std_error <= 0.0) continue;
    KPrimeSites m = sites;
    m.fig2_im[key].value += sc.std_error;
    add(m);
  }
  auto sweep = [&](const Eigen::MatrixXd& se, Eigen::MatrixXd KPrimeSites::*val) {
    for (Eigen::Index i = 0; i < se.rows(); ++i)
      for (Eigen::Index j = 0; j < se.cols(); ++j) {
        if (se(i, j) <= 0.0) continue;
        KPrimeSites m = sites;
        (m.*val)(i, j) += se(i, j);
        add(m);
      }
  };
  sweep(sites.QUp_re_se, &KPrimeSites::QUp_re);
  sweep(sites.QUp_im_se, &KPrimeSites::QUp_im);
  sweep(sites.UQ_re_se, &KPrimeSites::UQ_re);
  sweep(sites.UQ_im_se, &KPrimeSites::UQ_im);
  sweep(sites.VpV_re_se, &KPrimeSites::VpV_re);
  sweep(sites.VpV_im_se, &KPrimeSites::VpV_im);
  return var.cwiseSqrt();
}

/// Six-register protocol state feeding the Fig. 2 inner-product circuit.
/// The quantum SVD of Z runs conditioned on registers 4 and 6, leaving the
/// other data branch unexpanded; register 6 = 1 carries chi1 (x) chi2.
inline PureState build_fig2_state(const SnapshotData& data,
                                  const SvdFactors& fZ,
                                  const std::vector<std::uint64_t>& patterns,
                                  bool z_is_xprime, const CVector& chi1,
                                  const CVector& chi2, int bits,
                                  double joint_norm) {
  const int q1 = qubits_for(static_cast<std::size_t>(data.N));
  const int q2 = qubits_for(static_cast<std::size_t>(data.L));
  const int q3 = qubits_for(static_cast<std::size_t>(data.T));
  RegisterLayout layout(
      {{"1", q1}, {"2", q2}, {"3", q3}, {"4", 1}, {"5", bits}, {"6", 1}});
  CVector amps = CVector::Zero(static_cast<Eigen::Index>(layout.dim()));
  const double inv = 1.0 / (std::sqrt(2.0) * joint_norm);

  auto basis = [&](int i, int j, std::size_t r4, std::size_t r5,
                   std::size_t r6) {
    return layout.compose({static_cast<std::size_t>(i),
                           static_cast<std::size_t>(j / data.T),
                           static_cast<std::size_t>(j % data.T), r4, r5, r6});
  };

  // SVD branch of Z.
  const std::size_t z4 = z_is_xprime ? 1 : 0;
  for (int r = 0; r < fZ.rank; ++r) {
    const double coeff = fZ.sigma[r] * inv;
    for (int i = 0; i < data.N; ++i) {
      if (fZ.U(i, r) == Complex{0.0, 0.0}) continue;
      for (int j = 0; j < data.M(); ++j)
        amps(basis(i, j, z4, patterns[r], 0)) +=
            coeff * fZ.U(i, r) * std::conj(fZ.V(j, r));
    }
  }
  // Unexpanded branch of the other matrix.
  const CMatrix& other = z_is_xprime ? data.X : data.Xprime;
  for (int i = 0; i < data.N; ++i)
    for (int j = 0; j < data.M(); ++j)
      amps(basis(i, j, 1 - z4, 0, 0)) += other(i, j) * inv;
  // Reference branch.
  for (int i = 0; i < data.N; ++i) {
    if (chi1(i) == Complex{0.0, 0.0}) continue;
    for (int j = 0; j < data.M(); ++j)
      amps(basis(i, j, 0, 0, 1)) += chi1(i) * chi2(j) / std::sqrt(2.0);
  }
  // The rank truncation leaves a norm deficit bounded by tol^2/2.
  return PureState::from_amplitudes(layout, std::move(amps), true);
}

/// Configuration of the quantum estimation pipeline. shots == 0 selects
/// exact-expectation mode, which also idealizes the value register
/// (exact sigma_hat, index-valued register 5).
struct QuantumKPrimeConfig {
  double rank_tol = 1e-8;
  int bits = 12;
  std::uint64_t shots = 0;
  std::uint64_t seed = 0;
};

struct QuantumKPrimeResult {
  KPrimeEstimate estimate;
  ReferenceStates refs;
  SvdFactors fJ, fX, fXp;  // phase-fixed factors
  double P_X = 0.0, P_Xp = 0.0;  // exact branch probabilities
};

/// Run the whole Step 3 estimation: norm ratio, spectra readout, phase
/// fixing against chi1, left/right Gram estimation, chi2 overlaps through
/// the Fig. 2 protocol, and assembly.
inline QuantumKPrimeResult run_quantum_kprime(const SnapshotData& data,
                                              const QuantumKPrimeConfig& cfg) {
  QuantumKPrimeResult out;
  const bool exact = (cfg.shots == 0);
  const CMatrix J = hcat(data.X, data.Xprime);
  out.fJ = svd_truncated(J, cfg.rank_tol);
  out.fX = svd_truncated(data.X, cfg.rank_tol);
  out.fXp = svd_truncated(data.Xprime, cfg.rank_tol);
  const int R_J = out.fJ.rank, R_X = out.fX.rank, R_Xp = out.fXp.rank;
  if (exact && (std::uint64_t{1} << cfg.bits) < static_cast<std::uint64_t>(R_J))
    throw ValidationError("bits", "value register too narrow to index ranks");

  build_chi1(out.refs, out.fJ.U, out.fX.U, out.fXp.U, R_J);
  fix_left_phases(out.fJ, out.refs.chi1, "joint");
  fix_left_phases(out.fX, out.refs.chi1, "X");
  fix_left_phases(out.fXp, out.refs.chi1, "Xp");
  build_chi2(out.refs, out.fX.V.conjugate(), out.fXp.V.conjugate(), R_J);
  out.refs.U_joint = out.fJ.U;
  out.refs.U_X = out.fX.U;
  out.refs.U_Xp = out.fXp.U;

  const double P_X = std::pow(out.fX.frobenius_norm / out.fJ.frobenius_norm, 2);
  const double P_Xp =
      std::pow(out.fXp.frobenius_norm / out.fJ.frobenius_norm, 2);
  out.P_X = P_X;
  out.P_Xp = P_Xp;
  if (P_X <= 0.0 || P_Xp <= 0.0)
    throw DegenerateBranchError("run_quantum_kprime: a data branch is empty");

  KPrimeSites sites;
  sites.R_J = R_J;
  sites.R_X = R_X;
  sites.R_Xp = R_Xp;
  std::map<std::string, std::uint64_t> ledger;
  auto stream = [&](const std::string& label) {
    return RngStream(cfg.seed, label);
  };
  auto charge = [&](const std::string& label) {
    ledger[label] = cfg.shots;
  };

  // Norm ratio from the joint data state.
  {
    PureState joint = encode_data_state(data, DataMatrix::Joint);
    RngStream rng = stream("norm_ratio");
    EstimatorResult r = estimate_norm_ratio(joint, cfg.shots, rng);
    sites.f = {r.value, r.std_error};
    charge("norm_ratio");
  }

  // Spectra: exact mode takes the idealized register values; sampled mode
  // decodes the b-bit patterns actually observed.
  if (exact) {
    sites.sh_X = out.fX.sigma_hat();
    sites.sh_Xp = out.fXp.sigma_hat();
    ledger["readout/X"] = 1;
    ledger["readout/Xp"] = 1;
  } else {
    RngStream rx = stream("readout/X");
    SingularReadout rox =
        read_singular_values(data.X, cfg.rank_tol, cfg.bits, cfg.shots, rx);
    RngStream rxp = stream("readout/Xp");
    SingularReadout roxp = read_singular_values(data.Xprime, cfg.rank_tol,
                                                cfg.bits, cfg.shots, rxp);
    if (!rox.missing.empty() || !roxp.missing.empty())
      throw DomainError(
          "read_singular_values: some indices were never sampled; "
          "increase --shots");
    sites.sh_X = rox.sigma_hat;
    sites.sh_Xp = roxp.sigma_hat;
    ledger["readout/X"] = cfg.shots;
    ledger["readout/Xp"] = cfg.shots;
  }

  // Singular vector states and the reference state on register 1.
  PureState chi1_state = PureState::from_vector("1", out.refs.chi1);
  auto u_states = [&](const SvdFactors& f) {
    std::vector<PureState> states;
    states.reserve(f.rank);
    for (int r = 0; r < f.rank; ++r)
      states.push_back(PureState::from_vector("1", f.U.col(r)));
    return states;
  };
  std::vector<PureState> us_J = u_states(out.fJ);
  std::vector<PureState> us_X = u_states(out.fX);
  std::vector<PureState> us_Xp = u_states(out.fXp);

  // |<chi1|u>| via the two-state SWAP test (real positive after fixing).
  auto chi1_sites = [&](const std::string& tag,
                        const std::vector<PureState>& us) {
    for (int r = 0; r < static_cast<int>(us.size()); ++r) {
      std::string label = "swap2/" + tag + "/" + std::to_string(r);
      RngStream rng = stream(label);
      EstimatorResult res = swap2(chi1_state, us[r], cfg.shots, rng, label);
      sites.chi1_u[{tag, r}] = detail::overlap_from_swap2(res);
      charge(label);
    }
  };
  chi1_sites("joint", us_J);
  chi1_sites("X", us_X);
  chi1_sites("Xp", us_Xp);

  // Left Gram triples <chi1|u><u|u'><u'|chi1>.
  auto gram_sites = [&](const std::string& tag,
                        const std::vector<PureState>& rows,
                        const std::vector<PureState>& cols,
                        Eigen::MatrixXd& re, Eigen::MatrixXd& im,
                        Eigen::MatrixXd& re_se, Eigen::MatrixXd& im_se) {
    const auto nr = static_cast<Eigen::Index>(rows.size());
    const auto nc = static_cast<Eigen::Index>(cols.size());
    re.resize(nr, nc);
    im.resize(nr, nc);
    re_se.resize(nr, nc);
    im_se.resize(nr, nc);
    for (Eigen::Index r = 0; r < nr; ++r)
      for (Eigen::Index c = 0; c < nc; ++c) {
        std::string base = "swap3/" + tag + "/" + std::to_string(r) + "/" +
                           std::to_string(c);
        RngStream rng_re = stream(base + "/re");
        EstimatorResult rre =
            swap3(chi1_state, rows[r], cols[c], Part::Re, cfg.shots, rng_re,
                  base + "/re");
        RngStream rng_im = stream(base + "/im");
        EstimatorResult rim =
            swap3(chi1_state, rows[r], cols[c], Part::Im, cfg.shots, rng_im,
                  base + "/im");
        re(r, c) = rre.value;
        im(r, c) = rim.value;
        re_se(r, c) = rre.std_error;
        im_se(r, c) = rim.std_error;
        charge(base + "/re");
        charge(base + "/im");
      }
  };
  gram_sites("QUp", us_J, us_Xp, sites.QUp_re, sites.QUp_im, sites.QUp_re_se,
             sites.QUp_im_se);
  gram_sites("UQ", us_X, us_J, sites.UQ_re, sites.UQ_im, sites.UQ_re_se,
             sites.UQ_im_se);

  // chi2 overlaps through the six-register protocol state.
  for (bool z_is_xprime : {false, true}) {
    const std::string tag = z_is_xprime ? "Xp" : "X";
    const SvdFactors& fZ = z_is_xprime ? out.fXp : out.fX;
    std::vector<std::uint64_t> patterns(fZ.rank);
    std::vector<double> shat = fZ.sigma_hat();
    for (int r = 0; r < fZ.rank; ++r)
      patterns[r] = exact ? static_cast<std::uint64_t>(r)
                          : encode_sigma_sq(shat[r] * shat[r], cfg.bits);
    if (!exact)
      for (int r = 0; r < fZ.rank; ++r)
        for (int s = r + 1; s < fZ.rank; ++s)
          if (patterns[r] == patterns[s] && shat[r] != shat[s])
            throw SingularValueCollisionError(
                "fig2/" + tag + ": register-5 collision between r=" +
                std::to_string(r) + " and r=" + std::to_string(s));
    PureState fig2 =
        build_fig2_state(data, fZ, patterns, z_is_xprime, out.refs.chi1,
                         out.refs.chi2, cfg.bits, out.fJ.frobenius_norm);
    const std::size_t z4 = z_is_xprime ? 1 : 0;
    for (int r = 0; r < fZ.rank; ++r) {
      std::string base = "fig2/" + tag + "/" + std::to_string(r);
      RngStream rng_re = stream(base + "/re");
      EstimatorResult rre =
          hadamard_test(fig2, {"4", "5", "6"}, {0, 0, 1}, {z4, patterns[r], 0},
                        Part::Re, cfg.shots, rng_re, base + "/re");
      RngStream rng_im = stream(base + "/im");
      EstimatorResult rim =
          hadamard_test(fig2, {"4", "5", "6"}, {0, 0, 1}, {z4, patterns[r], 0},
                        Part::Im, cfg.shots, rng_im, base + "/im");
      sites.fig2_re[{tag, r}] = {rre.value, rre.std_error};
      sites.fig2_im[{tag, r}] = {rim.value, rim.std_error};
      charge(base + "/re");
      charge(base + "/im");
    }
  }

  // Right Gram triples on the conjugated right singular vector states.
  PureState chi2_state = PureState::from_vector("v", out.refs.chi2);
  auto v_states = [&](const SvdFactors& f) {
    std::vector<PureState> states;
    states.reserve(f.rank);
    for (int r = 0; r < f.rank; ++r)
      states.push_back(PureState::from_vector("v", f.V.col(r).conjugate()));
    return states;
  };
  std::vector<PureState> vs_X = v_states(out.fX);
  std::vector<PureState> vs_Xp = v_states(out.fXp);
  {
    const auto nr = static_cast<Eigen::Index>(vs_Xp.size());
    const auto nc = static_cast<Eigen::Index>(vs_X.size());
    sites.VpV_re.resize(nr, nc);
    sites.VpV_im.resize(nr, nc);
    sites.VpV_re_se.resize(nr, nc);
    sites.VpV_im_se.resize(nr, nc);
    for (Eigen::Index r = 0; r < nr; ++r)
      for (Eigen::Index c = 0; c < nc; ++c) {
        std::string base =
            "swap3/VpV/" + std::to_string(r) + "/" + std::to_string(c);
        RngStream rng_re = stream(base + "/re");
        EstimatorResult rre = swap3(chi2_state, vs_Xp[r], vs_X[c], Part::Re,
                                    cfg.shots, rng_re, base + "/re");
        RngStream rng_im = stream(base + "/im");
        EstimatorResult rim = swap3(chi2_state, vs_Xp[r], vs_X[c], Part::Im,
                                    cfg.shots, rng_im, base + "/im");
        sites.VpV_re(r, c) = rre.value;
        sites.VpV_im(r, c) = rim.value;
        sites.VpV_re_se(r, c) = rre.std_error;
        sites.VpV_im_se(r, c) = rim.std_error;
        charge(base + "/re");
        charge(base + "/im");
      }
  }

  out.estimate = assemble_kprime(sites);
  out.estimate.shot_ledger = std::move(ledger);
  out.estimate.kprime_std_error =
      exact ? Eigen::MatrixXd::Zero(R_J, R_J).eval()
            : propagate_kprime_errors(sites);
  return out;
}

}  // namespace qdmd

#endif  // QDMD_KPRIME_HPP
