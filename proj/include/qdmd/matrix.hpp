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

#ifndef QDMD_MATRIX_HPP
#define QDMD_MATRIX_HPP

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <complex>

#include "qdmd/errors.hpp"

namespace qdmd {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

inline bool is_finite(const CMatrix& m) { return m.allFinite(); }

inline double frobenius_norm(const CMatrix& m) { return m.norm(); }

/// Spectral norm (largest singular value).
inline double spectral_norm(const CMatrix& m) {
  if (m.size() == 0) return 0.0;
  return m.jacobiSvd().singularValues()(0);
}

/// Horizontal concatenation [A B].
inline CMatrix hcat(const CMatrix& a, const CMatrix& b) {
  if (a.rows() != b.rows())
    throw DimensionMismatchError("hcat: row counts differ");
  CMatrix out(a.rows(), a.cols() + b.cols());
  out << a, b;
  return out;
}

}  // namespace qdmd

#endif  // QDMD_MATRIX_HPP
