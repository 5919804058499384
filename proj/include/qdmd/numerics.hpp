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

#ifndef QDMD_NUMERICS_HPP
#define QDMD_NUMERICS_HPP

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>
#include <vector>

#include "qdmd/errors.hpp"
#include "qdmd/matrix.hpp"

namespace qdmd {

/// Rank-truncated SVD factor set: Z ~= U diag(sigma) V^dagger.
///
/// U and V have orthonormal columns; sigma is descending and strictly
/// positive. Column phases are canonical: the largest-magnitude entry of
/// each left singular vector is real positive, with the right vector
/// synchronized so Z v_r = sigma_r u_r is preserved.
struct SvdFactors {
  CMatrix U;                  // n x R
  std::vector<double> sigma;  // R values, descending
  CMatrix V;                  // m x R
  double frobenius_norm = 0.0;
  int rank = 0;

  /// sigma_r / ||Z||_F, the singular values of the normalized matrix.
  std::vector<double> sigma_hat() const {
    std::vector<double> out(sigma.size());
    for (std::size_t i = 0; i < sigma.size(); ++i)
      out[i] = sigma[i] / frobenius_norm;
    return out;
  }

  CMatrix reconstruct() const {
    CMatrix s = CMatrix::Zero(rank, rank);
    for (int i = 0; i < rank; ++i) s(i, i) = sigma[i];
    return U * s * V.adjoint();
  }
};

namespace detail {

/// Lexicographic order on complex column vectors, comparing (re, im) pairs.
inline bool lex_less(const CVector& a, const CVector& b) {
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (a(i).real() != b(i).real()) return a(i).real() < b(i).real();
    if (a(i).imag() != b(i).imag()) return a(i).imag() < b(i).imag();
  }
  return false;
}

/// Multiply column r of U and V by a phase making the largest-magnitude
/// entry of U.col(r) real positive. Leaves U diag(s) V^dagger unchanged.
inline void canonical_phase(CMatrix& U, CMatrix& V, int r) {
  Eigen::Index imax = 0;
  double best = -1.0;
  for (Eigen::Index i = 0; i < U.rows(); ++i) {
    double a = std::abs(U(i, r));
    if (a > best) {
      best = a;
      imax = i;
    }
  }
  if (best <= 0.0) return;
  Complex phase = U(imax, r) / best;
  U.col(r) /= phase;
  V.col(r) /= phase;
}

}  // namespace detail

/// Rank-truncated SVD. R is the smallest rank whose tail energy
/// sqrt(sum_{r>R} sigma_r^2) is below tol * ||Z||_F. Ordering ties between
/// equal singular values are broken by lexicographic comparison of the
/// (phase-canonicalized) left singular vectors, so the output is
/// reproducible.
inline SvdFactors svd_truncated(const CMatrix& Z, double tol) {
  if (!is_finite(Z)) throw DomainError("svd_truncated: non-finite input");
  if (tol <= 0.0 || tol >= 1.0)
    throw DomainError("svd_truncated: tol must be in (0,1)");
  const double normF = frobenius_norm(Z);
  if (normF == 0.0) throw ZeroMatrixError();

  Eigen::JacobiSVD<CMatrix> svd(Z, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& s = svd.singularValues();
  const int n = static_cast<int>(s.size());

  // Smallest R with tail below tolerance.
  int rank = n;
  double tail2 = 0.0;
  for (int r = n; r >= 1; --r) {
    double candidate = tail2 + s(r - 1) * s(r - 1);
    if (std::sqrt(candidate) < tol * normF) {
      tail2 = candidate;
      rank = r - 1;
    } else {
      break;
    }
  }
  if (rank == 0) rank = 1;  // normF > 0 guarantees s(0) > 0

  SvdFactors f;
  f.frobenius_norm = normF;
  f.rank = rank;
  f.U = svd.matrixU().leftCols(rank);
  f.V = svd.matrixV().leftCols(rank);
  f.sigma.assign(s.data(), s.data() + rank);
  for (int r = 0; r < rank; ++r) detail::canonical_phase(f.U, f.V, r);

  // Stable ordering within groups of exactly equal singular values.
  for (int i = 0; i + 1 < rank; ++i) {
    if (f.sigma[i] == f.sigma[i + 1] &&
        detail::lex_less(f.U.col(i + 1), f.U.col(i))) {
      f.U.col(i).swap(f.U.col(i + 1));
      f.V.col(i).swap(f.V.col(i + 1));
    }
  }
  return f;
}

/// Eigendecomposition of a square matrix. Eigenvectors are unit norm with
/// the phase fixed so the largest-magnitude entry is real positive.
inline std::pair<std::vector<Complex>, CMatrix> eig(const CMatrix& M) {
  if (M.rows() != M.cols()) throw DimensionMismatchError("eig: matrix not square");
  Eigen::ComplexEigenSolver<CMatrix> solver(M, /*computeEigenvectors=*/true);
  if (solver.info() != Eigen::Success)
    throw NonConvergenceError("eig: QR iteration did not converge");
  CMatrix W = solver.eigenvectors();
  CMatrix dummyV = CMatrix::Zero(W.rows(), W.cols());
  for (int r = 0; r < W.cols(); ++r) {
    W.col(r).normalize();
    detail::canonical_phase(W, dummyV, r);
  }
  std::vector<Complex> vals(M.rows());
  for (Eigen::Index i = 0; i < M.rows(); ++i) vals[i] = solver.eigenvalues()(i);
  return {vals, W};
}

/// Schur decomposition M = W S W^dagger with unitary W and upper
/// triangular S.
inline std::pair<CMatrix, CMatrix> schur(const CMatrix& M) {
  if (M.rows() != M.cols())
    throw DimensionMismatchError("schur: matrix not square");
  Eigen::ComplexSchur<CMatrix> dec(M, /*computeU=*/true);
  if (dec.info() != Eigen::Success)
    throw NonConvergenceError("schur: QR iteration did not converge");
  return {dec.matrixU(), dec.matrixT()};
}

/// Matrix exponential exp(t A) by scaling and squaring with a Taylor series
/// truncated at machine precision.
inline CMatrix expm(const CMatrix& A, double t = 1.0) {
  if (A.rows() != A.cols())
    throw DimensionMismatchError("expm: matrix not square");
  if (!std::isfinite(t)) throw DomainError("expm: non-finite time");
  const Eigen::Index n = A.rows();
  CMatrix B = t * A;
  if (!is_finite(B)) throw DomainError("expm: non-finite input");

  double norm1 = B.cwiseAbs().colwise().sum().maxCoeff();
  int squarings = 0;
  if (norm1 > 0.5) {
    squarings = static_cast<int>(std::ceil(std::log2(norm1 / 0.5)));
    B /= std::pow(2.0, squarings);
  }

  CMatrix result = CMatrix::Identity(n, n);
  CMatrix term = CMatrix::Identity(n, n);
  for (int k = 1; k <= 40; ++k) {
    term = (term * B) / static_cast<double>(k);
    result += term;
    if (term.norm() <= 1e-18 * result.norm()) break;
  }
  for (int i = 0; i < squarings; ++i) result = result * result;
  return result;
}

/// Moore-Penrose pseudo-inverse from truncated factors: V diag(1/sigma) U^dagger.
inline CMatrix pinv_truncated(const SvdFactors& f) {
  CMatrix sinv = CMatrix::Zero(f.rank, f.rank);
  for (int i = 0; i < f.rank; ++i) sinv(i, i) = 1.0 / f.sigma[i];
  return f.V * sinv * f.U.adjoint();
}

}  // namespace qdmd

#endif  // QDMD_NUMERICS_HPP
