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

#ifndef QDMD_ESTIMATORS_HPP
#define QDMD_ESTIMATORS_HPP

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "qdmd/errors.hpp"
#include "qdmd/qstate.hpp"
#include "qdmd/rng.hpp"

namespace qdmd {

enum class Part { Re, Im };

/// Output of one measurement primitive. shots == 0 marks exact-expectation
/// mode, where std_error is identically zero.
struct EstimatorResult {
  double value = 0.0;
  std::uint64_t shots = 0;
  double std_error = 0.0;
  std::string site_label;
};

namespace detail {

/// Empirical Pr[0] - Pr[1] of a Bernoulli ancilla with Pr[0] = (1+target)/2,
/// plus the plug-in standard error of the difference.
inline EstimatorResult sample_diff(double target, std::uint64_t shots,
                                   RngStream& rng, std::string site) {
  const double p0 = 0.5 * (1.0 + target);
  std::uint64_t zeros = 0;
  for (std::uint64_t i = 0; i < shots; ++i)
    if (rng.bernoulli(p0)) ++zeros;
  const double phat = static_cast<double>(zeros) / static_cast<double>(shots);
  EstimatorResult res;
  res.value = 2.0 * phat - 1.0;
  res.shots = shots;
  res.std_error =
      2.0 * std::sqrt(phat * (1.0 - phat) / static_cast<double>(shots));
  res.site_label = std::move(site);
  return res;
}

}  // namespace detail

/// Two-state SWAP test: Pr[0] - Pr[1] = |<psi0|psi1>|^2.
inline EstimatorResult swap2(const PureState& psi0, const PureState& psi1,
                             std::uint64_t shots, RngStream& rng,
                             std::string site_label = "swap2") {
  const double target = std::norm(overlap(psi0, psi1));
  if (shots == 0) return {target, 0, 0.0, std::move(site_label)};
  return detail::sample_diff(target, shots, rng, std::move(site_label));
}

/// Three-state SWAP test: Pr[0] - Pr[1] equals the chosen part of the cyclic
/// triple product <psi0|psi1><psi1|psi2><psi2|psi0>.
inline EstimatorResult swap3(const PureState& psi0, const PureState& psi1,
                             const PureState& psi2, Part part,
                             std::uint64_t shots, RngStream& rng,
                             std::string site_label = "swap3") {
  const Complex triple =
      overlap(psi0, psi1) * overlap(psi1, psi2) * overlap(psi2, psi0);
  const double target = (part == Part::Re) ? triple.real() : triple.imag();
  if (shots == 0) return {target, 0, 0.0, std::move(site_label)};
  return detail::sample_diff(target, shots, rng, std::move(site_label));
}

/// Hadamard-type inner product estimation on a single prepared state.
///
/// index_regs name the registers whose joint computational-basis values i, j
/// label the two branches; the remaining registers carry the unnormalized
/// components psi_i, psi_j. The two-dimensional Hadamard H_ij acts as the
/// identity on the orthogonal complement, and
/// Pr[i] - Pr[j] = 2 Re <psi_i|psi_j> (with the |j> -> -i|j> phase shift,
/// 2 Im <psi_i|psi_j>).
inline EstimatorResult hadamard_test(const PureState& s,
                                     const std::vector<std::string>& index_regs,
                                     const std::vector<std::size_t>& i_values,
                                     const std::vector<std::size_t>& j_values,
                                     Part part, std::uint64_t shots,
                                     RngStream& rng,
                                     std::string site_label = "hadamard") {
  if (index_regs.size() != i_values.size() ||
      index_regs.size() != j_values.size())
    throw BadBasisLabelsError("hadamard_test: label arity mismatch");
  if (i_values == j_values)
    throw BadBasisLabelsError("hadamard_test: i and j must differ");

  // Bit masks of the index registers inside the global basis index.
  std::size_t mask = 0, ibits = 0, jbits = 0;
  for (std::size_t k = 0; k < index_regs.size(); ++k) {
    int ri = s.layout.index_of(index_regs[k]);
    std::size_t rdim = s.layout.reg_dim(ri);
    if (i_values[k] >= rdim || j_values[k] >= rdim)
      throw BadBasisLabelsError("hadamard_test: label exceeds register range");
    int shift = s.layout.shift(ri);
    mask |= (rdim - 1) << shift;
    ibits |= i_values[k] << shift;
    jbits |= j_values[k] << shift;
  }

  // <psi_i|psi_j> over the payload (non-index) registers.
  Complex ip{0.0, 0.0};
  double ni = 0.0, nj = 0.0;
  for (std::size_t b = 0; b < s.layout.dim(); ++b) {
    std::size_t sel = b & mask;
    if (sel == ibits) {
      Complex ai = s.amplitudes(b);
      Complex aj = s.amplitudes((b & ~mask) | jbits);
      ip += std::conj(ai) * aj;
      ni += std::norm(ai);
      nj += std::norm(aj);
    }
  }
  if (part == Part::Im) ip *= Complex{0.0, -1.0};  // |j> -> -i|j>
  const double target = 2.0 * ip.real();
  if (shots == 0) return {target, 0, 0.0, std::move(site_label)};

  // Post-gate outcome probabilities: i, j, or anything else.
  const double pi = 0.5 * (ni + nj) + ip.real();
  const double pj = 0.5 * (ni + nj) - ip.real();
  std::uint64_t ci = 0, cj = 0;
  for (std::uint64_t k = 0; k < shots; ++k) {
    double u = rng.uniform01();
    if (u < pi)
      ++ci;
    else if (u < pi + pj)
      ++cj;
  }
  const double S = static_cast<double>(shots);
  const double phat_i = static_cast<double>(ci) / S;
  const double phat_j = static_cast<double>(cj) / S;
  const double diff = phat_i - phat_j;
  EstimatorResult res;
  res.value = diff;
  res.shots = shots;
  res.std_error = std::sqrt(
      std::max(0.0, (phat_i + phat_j - diff * diff)) / S);
  res.site_label = std::move(site_label);
  return res;
}

}  // namespace qdmd

#endif  // QDMD_ESTIMATORS_HPP
