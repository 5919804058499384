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

#ifndef QDMD_QSTATE_HPP
#define QDMD_QSTATE_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "qdmd/errors.hpp"
#include "qdmd/matrix.hpp"
#include "qdmd/rng.hpp"

namespace qdmd {

inline int qubits_for(std::size_t dim) {
  int q = 0;
  while ((std::size_t{1} << q) < dim) ++q;
  return q;
}

struct Register {
  std::string name;
  int qubits = 0;  // 0 qubits = trivial register with a single outcome
};

/// Ordered register list. The first register holds the most significant
/// bits of the basis index, matching the left-to-right order of ket labels.
class RegisterLayout {
 public:
  RegisterLayout() = default;
  explicit RegisterLayout(std::vector<Register> regs) : regs_(std::move(regs)) {
    int total = 0;
    for (std::size_t i = 0; i < regs_.size(); ++i) {
      for (std::size_t j = i + 1; j < regs_.size(); ++j)
        if (regs_[i].name == regs_[j].name)
          throw ValidationError("layout", "duplicate register name " + regs_[i].name);
      total += regs_[i].qubits;
    }
    if (total > 24) throw ValidationError("layout", "more than 24 qubits");
    total_qubits_ = total;
    int shift = total;
    shifts_.resize(regs_.size());
    for (std::size_t i = 0; i < regs_.size(); ++i) {
      shift -= regs_[i].qubits;
      shifts_[i] = shift;
    }
  }

  const std::vector<Register>& registers() const { return regs_; }
  int total_qubits() const { return total_qubits_; }
  std::size_t dim() const { return std::size_t{1} << total_qubits_; }

  int index_of(const std::string& name) const {
    for (std::size_t i = 0; i < regs_.size(); ++i)
      if (regs_[i].name == name) return static_cast<int>(i);
    throw UnknownRegisterError(name);
  }

  int shift(int reg_index) const { return shifts_[reg_index]; }

  std::size_t reg_dim(int reg_index) const {
    return std::size_t{1} << regs_[reg_index].qubits;
  }

  /// Value of one register inside a global basis index.
  std::size_t extract(std::size_t basis, int reg_index) const {
    return (basis >> shifts_[reg_index]) & (reg_dim(reg_index) - 1);
  }

  /// Compose a global basis index from per-register values.
  std::size_t compose(const std::vector<std::size_t>& values) const {
    std::size_t idx = 0;
    for (std::size_t i = 0; i < regs_.size(); ++i)
      idx |= values[i] << shifts_[i];
    return idx;
  }

  bool operator==(const RegisterLayout& other) const {
    if (regs_.size() != other.regs_.size()) return false;
    for (std::size_t i = 0; i < regs_.size(); ++i)
      if (regs_[i].name != other.regs_[i].name ||
          regs_[i].qubits != other.regs_[i].qubits)
        return false;
    return true;
  }

 private:
  std::vector<Register> regs_;
  std::vector<int> shifts_;
  int total_qubits_ = 0;
};

/// Normalized statevector over a register layout. Immutable by convention:
/// operations return new states.
struct PureState {
  RegisterLayout layout;
  CVector amplitudes;

  static PureState from_amplitudes(RegisterLayout lay, CVector amps,
                                   bool renormalize = false) {
    if (amps.size() != static_cast<Eigen::Index>(lay.dim()))
      throw DimensionMismatchError("PureState: amplitude count != 2^qubits");
    double n = amps.norm();
    if (n == 0.0) throw ZeroMatrixError("PureState: zero amplitude vector");
    if (renormalize)
      amps /= n;
    else if (std::abs(n - 1.0) > 1e-10)
      throw ValidationError("amplitudes", "state norm deviates from 1");
    return PureState{std::move(lay), std::move(amps)};
  }

  /// One register holding a (zero-padded) vector.
  static PureState from_vector(const std::string& reg_name, const CVector& v,
                               bool renormalize = true) {
    int q = qubits_for(static_cast<std::size_t>(v.size()));
    CVector amps = CVector::Zero(Eigen::Index{1} << q);
    amps.head(v.size()) = v;
    return from_amplitudes(RegisterLayout({{reg_name, q}}), std::move(amps),
                           renormalize);
  }
};

/// Exact outcome distribution of one register (marginal over the rest).
inline std::vector<double> register_distribution(const PureState& s,
                                                 const std::string& reg) {
  int ri = s.layout.index_of(reg);
  std::vector<double> p(s.layout.reg_dim(ri), 0.0);
  for (std::size_t b = 0; b < s.layout.dim(); ++b)
    p[s.layout.extract(b, ri)] += std::norm(s.amplitudes(b));
  return p;
}

struct MeasurementOutcome {
  std::size_t outcome = 0;
  PureState collapsed;
  double probability = 0.0;
};

/// Projective measurement of one register. The outcome is drawn from the
/// exact distribution (support only); the collapsed state keeps the full
/// layout with the measured register pinned to the outcome.
inline MeasurementOutcome measure_register(const PureState& s,
                                           const std::string& reg,
                                           RngStream& rng) {
  int ri = s.layout.index_of(reg);
  std::vector<double> p = register_distribution(s, reg);
  double u = rng.uniform01();
  std::size_t outcome = 0;
  double cum = 0.0, chosen = 0.0;
  bool found = false;
  for (std::size_t o = 0; o < p.size(); ++o) {
    if (p[o] <= 0.0) continue;
    cum += p[o];
    if (!found && u < cum) {
      outcome = o;
      chosen = p[o];
      found = true;
    }
  }
  if (!found) {  // u landed in rounding slack; take the last supported value
    for (std::size_t o = p.size(); o-- > 0;)
      if (p[o] > 0.0) {
        outcome = o;
        chosen = p[o];
        break;
      }
  }
  CVector amps = CVector::Zero(s.amplitudes.size());
  double scale = 1.0 / std::sqrt(chosen);
  for (std::size_t b = 0; b < s.layout.dim(); ++b)
    if (s.layout.extract(b, ri) == outcome) amps(b) = s.amplitudes(b) * scale;
  return {outcome,
          PureState::from_amplitudes(s.layout, std::move(amps), true), chosen};
}

/// Exact inner product <a|b>.
inline Complex overlap(const PureState& a, const PureState& b) {
  if (!(a.layout == b.layout)) throw LayoutMismatchError();
  return a.amplitudes.dot(b.amplitudes);  // Eigen dot conjugates the left side
}

}  // namespace qdmd

#endif  // QDMD_QSTATE_HPP
