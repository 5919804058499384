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

#ifndef QDMD_PIPELINE_HPP
#define QDMD_PIPELINE_HPP

#include <json.hpp>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "qdmd/costmodel.hpp"
#include "qdmd/dmdcore.hpp"
#include "qdmd/dynamics.hpp"
#include "qdmd/errors.hpp"
#include "qdmd/io.hpp"
#include "qdmd/kprime.hpp"
#include "qdmd/modes.hpp"
#include "qdmd/refstates.hpp"

namespace qdmd {

using Json = nlohmann::ordered_json;

enum class PipelineMode { Classical, Quantum, Modes, Cost, All };

struct RunConfig {
  std::optional<SnapshotData> snapshot;  // pre-simulated data, if any
  CMatrix A;                             // used when snapshot is empty
  CMatrix initial_states;
  int T = 1;
  double dt = 0.1;
  double rank_tol = 1e-8;
  std::uint64_t shots = 0;  // 0 = exact mode
  std::uint64_t seed = 0;
  int register5_bits = 12;
  double epsilon = 0.05;
  double b_modification = 0.5;
  int grid_points = 64;

  void validate() const {
    if (dt <= 0.0) throw ValidationError("dt", "must be > 0");
    if (rank_tol <= 0.0 || rank_tol >= 1.0)
      throw ValidationError("rank_tol", "must be in (0,1)");
    if (b_modification <= 0.0 || b_modification >= 1.0 / std::sqrt(2.0))
      throw ValidationError("b", "must be in (0, 1/sqrt(2))");
    if (register5_bits < 4) throw ValidationError("bits", "must be >= 4");
    if (epsilon <= 0.0 || epsilon >= 1.0)
      throw ValidationError("epsilon", "must be in (0,1)");
  }
};

namespace detail {

inline Json json_complex(Complex z) { return Json::array({z.real(), z.imag()}); }

inline Json json_matrix(const CMatrix& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(json_complex(m(i, j)));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Json json_real_vector(const std::vector<double>& v) {
  return Json(v);
}

inline Json json_eigs(const std::vector<Complex>& v) {
  Json arr = Json::array();
  for (Complex z : v) arr.push_back(json_complex(z));
  return arr;
}

}  // namespace detail

/// Run the batch pipeline and emit the result document. Deterministic for a
/// fixed config: every sampling site derives its stream from (seed, label)
/// and results merge in fixed label order.
inline Json run_pipeline(const RunConfig& cfg, PipelineMode mode) {
  cfg.validate();
  SnapshotData data =
      cfg.snapshot ? *cfg.snapshot
                   : simulate_snapshots(cfg.A, cfg.initial_states, cfg.T, cfg.dt);

  Json doc;
  doc["schema_version"] = 1;
  doc["config"] = {{"N", data.N},
                   {"L", data.L},
                   {"T", data.T},
                   {"dt", data.dt},
                   {"rank_tol", cfg.rank_tol},
                   {"shots", cfg.shots},
                   {"seed", cfg.seed},
                   {"register5_bits", cfg.register5_bits},
                   {"epsilon", cfg.epsilon},
                   {"b_modification", cfg.b_modification},
                   {"grid_points", cfg.grid_points}};

  const bool want_quantum = mode != PipelineMode::Classical;
  const bool want_classical =
      mode == PipelineMode::Classical || mode == PipelineMode::All;
  const bool want_modes = mode == PipelineMode::Modes || mode == PipelineMode::All;
  const bool want_cost = mode == PipelineMode::Cost || mode == PipelineMode::All;

  std::optional<QuantumKPrimeResult> qres;
  if (want_quantum) {
    QuantumKPrimeConfig qcfg;
    qcfg.rank_tol = cfg.rank_tol;
    qcfg.bits = cfg.register5_bits;
    qcfg.shots = cfg.shots;
    qcfg.seed = cfg.seed;
    qres = run_quantum_kprime(data, qcfg);
  }

  std::optional<DmdResult> classical;
  if (want_classical || want_quantum) {
    std::optional<CVector> gauge;
    if (qres) gauge = qres->refs.chi1;
    classical = exact_dmd(data, cfg.rank_tol, gauge);
  }

  if (want_classical) {
    Json c;
    c["R"] = classical->R;
    c["eigenvalues"] = detail::json_eigs(classical->eigenvalues);
    Json expo = Json::array();
    for (const auto& e : classical->cont_exponents)
      expo.push_back(e ? detail::json_complex(*e) : Json(nullptr));
    c["cont_exponents"] = std::move(expo);
    c["kprime"] = detail::json_matrix(classical->kprime);
    c["eigvec_condition"] = classical->eigvec_condition;
    c["ill_conditioned"] = classical->ill_conditioned;
    if (classical->ill_conditioned) c["warning"] = classical->warning;
    SchurDmdResult sres = schur_dmd(data, cfg.rank_tol);
    Json sdiag = Json::array();
    for (Eigen::Index i = 0; i < sres.S.rows(); ++i)
      sdiag.push_back(detail::json_complex(sres.S(i, i)));
    c["schur_diag"] = std::move(sdiag);
    doc["classical"] = std::move(c);
  }

  if (want_quantum) {
    const KPrimeEstimate& est = qres->estimate;
    Json q;
    q["R"] = qres->fJ.rank;
    q["norm_ratio"] = est.norm_ratio;
    q["sigma_hat_X"] = detail::json_real_vector(est.sigma_hat_X);
    q["sigma_hat_Xp"] = detail::json_real_vector(est.sigma_hat_Xp);
    q["kprime"] = detail::json_matrix(est.kprime);
    auto [vals, vecs] = eig(est.kprime);
    q["eigenvalues"] = detail::json_eigs(vals);
    q["zeta"] = qres->refs.zeta;
    q["zeta1"] = qres->refs.zeta1;
    q["zeta2"] = qres->refs.zeta2;
    Json ledger = Json::object();
    std::uint64_t total = 0;
    for (const auto& [site, shots] : est.shot_ledger) total += shots;
    ledger["total"] = total;
    ledger["sites"] = est.shot_ledger.size();
    q["shot_ledger"] = std::move(ledger);

    // Elementwise deviation against the gauge-aligned classical oracle.
    double dev = (est.kprime - classical->kprime).cwiseAbs().maxCoeff();
    q["kprime_max_deviation"] = dev;
    doc["quantum"] = std::move(q);
  }

  if (want_modes) {
    auto [vals, vecs] = eig(qres->estimate.kprime);
    const int R = qres->fJ.rank;
    std::vector<double> sh_J = qres->fJ.sigma_hat();
    std::vector<double> chi1_u_abs(R);
    for (int r = 0; r < R; ++r)
      chi1_u_abs[r] =
          std::abs(qres->refs.chi1.dot(qres->fJ.U.col(r)));
    std::vector<double> hidden(R);
    {
      RngStream rng(cfg.seed, "hidden_phases");
      for (int r = 0; r < R; ++r)
        hidden[r] = rng.uniform(0.0, 2.0 * std::numbers::pi);
    }
    Json marr = Json::array();
    for (int r = 0; r < R; ++r) {
      ModeReconstruction rec = run_mode_reconstruction(
          vecs.col(r), qres->fJ.U, qres->refs.chi1, chi1_u_abs, sh_J, hidden,
          cfg.epsilon, cfg.shots == 0, cfg.seed + static_cast<std::uint64_t>(r),
          cfg.grid_points, cfg.b_modification);
      Json m;
      m["mode"] = r + 1;
      m["eigenvalue"] = detail::json_complex(vals[r]);
      m["fidelity"] = rec.result.fidelity;
      m["success_multistep"] = rec.result.success_multistep;
      m["success_single_step"] = rec.result.success_single_step;
      m["zeta3"] = rec.plan.zeta3;
      m["zeta4"] = rec.plan.zeta4;
      marr.push_back(std::move(m));
    }
    doc["modes"] = std::move(marr);
  }

  if (want_cost) {
    const ReferenceStates& refs = qres->refs;
    CostReport rep = build_cost_report(
        qres->fJ.sigma_hat(), qres->fX.sigma_hat(), qres->fXp.sigma_hat(),
        qres->P_X, qres->P_Xp, refs, cfg.epsilon);
    Json c;
    c["kappa"] = rep.kappa;
    c["kappa_Z"] = rep.kappa_Z;
    c["eta"] = rep.eta;
    c["P_X"] = rep.P_X;
    c["P_Xp"] = rep.P_Xp;
    c["zeta"] = rep.zeta;
    c["zeta1"] = rep.zeta1;
    c["zeta2"] = rep.zeta2;
    c["table1"] = {{"norm_ratio", rep.table1.norm_ratio},
                   {"sigma_readout", rep.table1.sigma_readout},
                   {"chi1_u", rep.table1.chi1_u},
                   {"left_gram", rep.table1.left_gram},
                   {"right_gram", rep.table1.right_gram},
                   {"chi2_overlap", rep.table1.chi2_overlap}};
    c["brayton"] = rep.brayton;
    c["total_qsvd"] = rep.total_qsvd;
    c["mode_qsvd"] = rep.mode_qsvd;
    c["sigma_kappa_inequality"] = rep.sigma_kappa_inequality;
    PrepReport prep = prep_success_probabilities(
        refs, qres->P_X, qres->P_Xp, qres->fJ.sigma_hat(),
        qres->fX.sigma_hat(), qres->fXp.sigma_hat());
    c["prep"] = {{"a0", prep.a0},
                 {"a1", prep.a1},
                 {"a2", prep.a2},
                 {"success_chi1_stage0", prep.success_chi1_stage0},
                 {"success_chi1_stage1", prep.success_chi1_stage1},
                 {"success_chi1", prep.success_chi1},
                 {"success_chi2", prep.success_chi2},
                 {"success_chi2_direct", prep.success_chi2_direct}};
    doc["cost"] = std::move(c);
  }

  return doc;
}

}  // namespace qdmd

#endif  // QDMD_PIPELINE_HPP
