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

#ifndef QDMD_DYNAMICS_HPP
#define QDMD_DYNAMICS_HPP

#include <cmath>
#include <string>
#include <utility>

#include "qdmd/errors.hpp"
#include "qdmd/matrix.hpp"
#include "qdmd/numerics.hpp"
#include "qdmd/qstate.hpp"

namespace qdmd {

/// Snapshot pair matrices X, X' with column j of X' one time step after
/// column j of X. Columns are ordered k*T + t for trajectory k and step t.
struct SnapshotData {
  CMatrix X;       // N x M
  CMatrix Xprime;  // N x M
  double dt = 0.0;
  int N = 0;
  int L = 0;
  int T = 0;

  int M() const { return T * L; }
};

enum class DataMatrix { X, Xprime, Joint };

/// Integrate xdot = A x exactly (via the matrix exponential) for L initial
/// states over T steps each. The step matrix exp(dt A) is applied
/// iteratively, so successive columns satisfy x' = exp(dt A) x to machine
/// precision by construction.
inline SnapshotData simulate_snapshots(const CMatrix& A,
                                       const CMatrix& initial_states, int T,
                                       double dt) {
  if (A.rows() != A.cols())
    throw DimensionMismatchError("simulate_snapshots: A not square");
  if (initial_states.rows() != A.rows())
    throw DimensionMismatchError(
        "simulate_snapshots: initial state dimension != A dimension");
  if (T < 1) throw ValidationError("T", "must be >= 1");
  if (initial_states.cols() < 1) throw ValidationError("L", "must be >= 1");
  if (dt <= 0.0) throw ValidationError("dt", "must be > 0");
  const double anorm = spectral_norm(A);
  if (dt * anorm > 1.0 + 1e-12)
    throw StepTooLargeError("simulate_snapshots: dt*||A||_2 = " +
                            std::to_string(dt * anorm) + " exceeds 1");

  const int N = static_cast<int>(A.rows());
  const int L = static_cast<int>(initial_states.cols());
  const CMatrix K = expm(A, dt);

  SnapshotData data;
  data.dt = dt;
  data.N = N;
  data.L = L;
  data.T = T;
  data.X.resize(N, T * L);
  data.Xprime.resize(N, T * L);
  for (int k = 0; k < L; ++k) {
    CVector x = initial_states.col(k);
    for (int t = 0; t < T; ++t) {
      data.X.col(k * T + t) = x;
      x = K * x;
      data.Xprime.col(k * T + t) = x;
    }
  }
  return data;
}

namespace detail {

/// Basis index of column j = k*T + t inside registers 2 (trajectory) and
/// 3 (time step). Non-power-of-two L, T leave zero-padded basis states.
inline std::size_t column_basis(int j, int T, int q3) {
  int k = j / T;
  int t = j % T;
  return (static_cast<std::size_t>(k) << q3) | static_cast<std::size_t>(t);
}

}  // namespace detail

/// Register layout used by data-state encodings: |i>_1 |k>_2 |t>_3 and,
/// for the joint state, a fourth single-qubit register selecting X or X'.
inline RegisterLayout data_layout(const SnapshotData& d, bool with_reg4) {
  std::vector<Register> regs{{"1", qubits_for(static_cast<std::size_t>(d.N))},
                             {"2", qubits_for(static_cast<std::size_t>(d.L))},
                             {"3", qubits_for(static_cast<std::size_t>(d.T))}};
  if (with_reg4) regs.push_back({"4", 1});
  return RegisterLayout(regs);
}

/// Amplitude-encode a data matrix: the amplitude of |i>_1 |k>_2 |t>_3 is
/// entry (i, kT+t) divided by the Frobenius norm. Joint encodes
/// |X>|0>_4 + |X'>|1>_4, normalized by ||[X X']||_F.
inline PureState encode_data_state(const SnapshotData& d, DataMatrix which) {
  const bool joint = (which == DataMatrix::Joint);
  RegisterLayout layout = data_layout(d, joint);
  const int q3 = qubits_for(static_cast<std::size_t>(d.T));
  const int q23 = qubits_for(static_cast<std::size_t>(d.L)) + q3;
  CVector amps = CVector::Zero(static_cast<Eigen::Index>(layout.dim()));

  auto put = [&](const CMatrix& m, int reg4_value) {
    for (int j = 0; j < d.M(); ++j) {
      std::size_t col = detail::column_basis(j, d.T, q3);
      for (int i = 0; i < d.N; ++i) {
        std::size_t basis = (static_cast<std::size_t>(i) << q23) | col;
        if (joint) basis = (basis << 1) | static_cast<std::size_t>(reg4_value);
        amps(static_cast<Eigen::Index>(basis)) = m(i, j);
      }
    }
  };

  if (which == DataMatrix::X || joint) put(d.X, 0);
  if (which == DataMatrix::Xprime) put(d.Xprime, 0);
  if (joint) put(d.Xprime, 1);
  return PureState::from_amplitudes(layout, std::move(amps), true);
}

}  // namespace qdmd

#endif  // QDMD_DYNAMICS_HPP
