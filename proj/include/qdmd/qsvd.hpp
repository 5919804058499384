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

#ifndef QDMD_QSVD_HPP
#define QDMD_QSVD_HPP

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "qdmd/errors.hpp"
#include "qdmd/matrix.hpp"
#include "qdmd/numerics.hpp"
#include "qdmd/qstate.hpp"
#include "qdmd/rng.hpp"

namespace qdmd {

/// Fixed-point encoding of sigma_hat^2 into the value register:
/// q = round(sigma_hat^2 * 2^b), clamped to 2^b - 1.
inline std::uint64_t encode_sigma_sq(double sigma_hat_sq, int b) {
  auto q = static_cast<std::uint64_t>(std::llround(sigma_hat_sq * std::pow(2.0, b)));
  std::uint64_t maxq = (std::uint64_t{1} << b) - 1;
  return q > maxq ? maxq : q;
}

inline double decode_sigma_sq(std::uint64_t bits, int b) {
  return static_cast<double>(bits) / std::pow(2.0, b);
}

/// One sampled output of the quantum SVD: a singular value with its
/// collapsed left and (conjugated) right singular vector states.
struct SingularTriple {
  int r = 0;  // 0-based index into the retained spectrum
  double sigma_hat = 0.0;
  PureState u_state;
  PureState v_conj_state;
  std::uint64_t register5_bits = 0;
};

/// Ideal quantum-SVD oracle for one data matrix. `state` is the statevector
/// |SVD(Z_hat)> over registers u, v and the b-qubit value register "5";
/// the classical factors are kept alongside so degenerate spectra can still
/// be sampled triple-by-triple.
struct SvdOracle {
  PureState state;
  SvdFactors factors;
  std::vector<double> sigma_hat;        // sigma_r / ||Z||_F
  std::vector<double> probs;            // sampling weights, sum exactly 1
  std::vector<std::uint64_t> patterns;  // register-5 value per retained r
  int bits = 0;
  bool exact_register = false;
};

/// Build |SVD(Z_hat)> = sum_r sigma_hat_r |u_r>|v_r*>|q_r>_5 from the
/// rank-truncated classical SVD. The truncated tail weight is renormalized
/// away. With exact_register the value register stores the index r itself,
/// an infinite-precision idealization that sidesteps rounding collisions.
inline SvdOracle svd_oracle_state(const CMatrix& Z, double tol, int b,
                                  bool exact_register = false) {
  if (b < 4) throw ValidationError("bits", "register-5 width must be >= 4");
  SvdFactors f = svd_truncated(Z, tol);
  const int R = f.rank;

  std::vector<double> shat = f.sigma_hat();
  double total = 0.0;
  for (double s : shat) total += s * s;
  const double renorm = 1.0 / std::sqrt(total);

  std::vector<std::uint64_t> patterns(R);
  for (int r = 0; r < R; ++r) {
    patterns[r] = exact_register ? static_cast<std::uint64_t>(r)
                                 : encode_sigma_sq(shat[r] * shat[r], b);
  }
  if (!exact_register) {
    for (int r = 0; r < R; ++r)
      for (int s = r + 1; s < R; ++s)
        if (patterns[r] == patterns[s] && shat[r] != shat[s])
          throw SingularValueCollisionError(
              "svd_oracle_state: sigma_hat^2 values for r=" + std::to_string(r) +
              " and r=" + std::to_string(s) + " share the " + std::to_string(b) +
              "-bit pattern " + std::to_string(patterns[r]));
  }

  const int qu = qubits_for(static_cast<std::size_t>(Z.rows()));
  const int qv = qubits_for(static_cast<std::size_t>(Z.cols()));
  RegisterLayout layout({{"u", qu}, {"v", qv}, {"5", b}});
  CVector amps = CVector::Zero(static_cast<Eigen::Index>(layout.dim()));
  for (int r = 0; r < R; ++r) {
    const double w = shat[r] * renorm;
    for (int i = 0; i < Z.rows(); ++i) {
      if (f.U(i, r) == Complex{0.0, 0.0}) continue;
      for (int j = 0; j < Z.cols(); ++j) {
        std::size_t basis = layout.compose({static_cast<std::size_t>(i),
                                            static_cast<std::size_t>(j),
                                            patterns[r]});
        amps(static_cast<Eigen::Index>(basis)) +=
            w * f.U(i, r) * std::conj(f.V(j, r));
      }
    }
  }

  SvdOracle oracle;
  oracle.state = PureState::from_amplitudes(layout, std::move(amps), true);
  oracle.factors = std::move(f);
  oracle.probs.resize(R);
  for (int r = 0; r < R; ++r)
    oracle.probs[r] = shat[r] * shat[r] * renorm * renorm;
  oracle.sigma_hat = std::move(shat);
  oracle.patterns = std::move(patterns);
  oracle.bits = b;
  oracle.exact_register = exact_register;
  return oracle;
}

/// Measure the value register: triple r is drawn with probability
/// sigma_hat_r^2. The collapsed registers are returned as standalone
/// u and v* states.
inline SingularTriple sample_triple(const SvdOracle& oracle, RngStream& rng) {
  const int R = oracle.factors.rank;
  double u = rng.uniform01();
  int r = R - 1;
  double cum = 0.0;
  for (int i = 0; i < R; ++i) {
    cum += oracle.probs[i];
    if (u < cum) {
      r = i;
      break;
    }
  }
  SingularTriple t;
  t.r = r;
  t.sigma_hat = oracle.sigma_hat[r];
  t.register5_bits = oracle.patterns[r];
  t.u_state = PureState::from_vector("u", oracle.factors.U.col(r));
  t.v_conj_state = PureState::from_vector("v", oracle.factors.V.col(r).conjugate());
  return t;
}

}  // namespace qdmd

#endif  // QDMD_QSVD_HPP
