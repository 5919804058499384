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

#ifndef QDMD_ERRORS_HPP
#define QDMD_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace qdmd {

/// Base class for all qdmd errors. Subclasses map to distinct exit codes
/// in the CLI driver.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class ZeroMatrixError : public Error {
 public:
  explicit ZeroMatrixError(const std::string& what = "matrix has zero Frobenius norm")
      : Error(what) {}
};

class NonConvergenceError : public Error {
 public:
  explicit NonConvergenceError(const std::string& what) : Error(what) {}
};

class StepTooLargeError : public Error {
 public:
  explicit StepTooLargeError(const std::string& what) : Error(what) {}
};

class UnknownRegisterError : public Error {
 public:
  explicit UnknownRegisterError(const std::string& name)
      : Error("unknown register: " + name) {}
};

class LayoutMismatchError : public Error {
 public:
  explicit LayoutMismatchError(const std::string& what = "register layouts differ")
      : Error(what) {}
};

class SingularValueCollisionError : public Error {
 public:
  explicit SingularValueCollisionError(const std::string& what) : Error(what) {}
};

class BadBasisLabelsError : public Error {
 public:
  explicit BadBasisLabelsError(const std::string& what) : Error(what) {}
};

class DegenerateBranchError : public Error {
 public:
  explicit DegenerateBranchError(const std::string& what) : Error(what) {}
};

/// Thrown when a reference-state overlap needed as a divisor is zero (or,
/// in sampled mode, statistically indistinguishable from zero).
class ZeroReferenceOverlapError : public Error {
 public:
  explicit ZeroReferenceOverlapError(const std::string& site) : Error(site) {}
};

class ZeroEigenvalueError : public Error {
 public:
  explicit ZeroEigenvalueError(const std::string& what = "eigenvalue is zero; log undefined")
      : Error(what) {}
};

class DimensionMismatchError : public Error {
 public:
  explicit DimensionMismatchError(const std::string& what) : Error(what) {}
};

class EmptySpectrumError : public Error {
 public:
  explicit EmptySpectrumError(const std::string& what = "no retained singular values")
      : Error(what) {}
};

class BoundViolationError : public Error {
 public:
  explicit BoundViolationError(const std::string& what) : Error(what) {}
};

class GridTooCoarseError : public Error {
 public:
  explicit GridTooCoarseError(const std::string& what) : Error(what) {}
};

class DegenerateDistributionError : public Error {
 public:
  explicit DegenerateDistributionError(const std::string& what) : Error(what) {}
};

class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what) : Error(what) {}
};

/// Input file syntax error with 1-based location.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, int line, int column = 0)
      : Error(what + " (line " + std::to_string(line) +
              (column > 0 ? ", column " + std::to_string(column) : "") + ")"),
        line(line),
        column(column) {}
  int line;
  int column;
};

/// Semantic error in a parsed configuration value.
class ValidationError : public Error {
 public:
  ValidationError(const std::string& field, const std::string& what)
      : Error(field + ": " + what), field(field) {}
  std::string field;
};

}  // namespace qdmd

#endif  // QDMD_ERRORS_HPP
