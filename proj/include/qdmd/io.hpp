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

#ifndef QDMD_IO_HPP
#define QDMD_IO_HPP

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "qdmd/dynamics.hpp"
#include "qdmd/errors.hpp"
#include "qdmd/matrix.hpp"

namespace qdmd {

/// Complex literal syntax: `a+bi` or `a-bi`, decimal only, no whitespace
/// inside a number. A bare `a` is accepted as a real entry.
inline Complex parse_complex(const std::string& token, int line, int column) {
  const char* begin = token.c_str();
  char* end = nullptr;
  double re = std::strtod(begin, &end);
  if (end == begin)
    throw ParseError("invalid complex literal '" + token + "'", line, column);
  if (*end == '\0') return {re, 0.0};
  if (*end != '+' && *end != '-')
    throw ParseError("invalid complex literal '" + token + "'", line, column);
  const char* imag_begin = end;
  double im = std::strtod(imag_begin, &end);
  if (end == imag_begin || *end != 'i' || *(end + 1) != '\0')
    throw ParseError("invalid complex literal '" + token + "'", line, column);
  return {re, im};
}

/// 17 significant digits, enough for exact double round-trips.
inline std::string format_complex(Complex z) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g%+.17gi", z.real(), z.imag());
  return buf;
}

/// Matrix format: line 1 `rows cols`, then `rows` lines of `cols`
/// whitespace-separated complex literals. `line_no` tracks the absolute
/// line number for error reporting when embedded in a larger file.
inline CMatrix parse_matrix_stream(std::istream& in, int& line_no) {
  std::string line;
  if (!std::getline(in, line))
    throw ParseError("missing matrix header", line_no + 1);
  ++line_no;
  std::istringstream header(line);
  long rows = 0, cols = 0;
  if (!(header >> rows >> cols) || rows < 1 || cols < 1)
    throw ParseError("matrix header must be 'rows cols'", line_no);

  CMatrix m(rows, cols);
  for (long i = 0; i < rows; ++i) {
    if (!std::getline(in, line))
      throw ParseError("missing row " + std::to_string(i + 1), line_no + 1);
    ++line_no;
    std::istringstream row(line);
    std::string token;
    for (long j = 0; j < cols; ++j) {
      if (!(row >> token))
        throw ParseError("row " + std::to_string(i + 1) + " has only " +
                             std::to_string(j) + " of " + std::to_string(cols) +
                             " entries",
                         line_no, static_cast<int>(j + 1));
      m(i, j) = parse_complex(token, line_no, static_cast<int>(j + 1));
    }
    std::string extra;
    if (row >> extra)
      throw ParseError("row " + std::to_string(i + 1) + " has extra entries",
                       line_no, static_cast<int>(cols + 1));
  }
  if (!is_finite(m)) throw ValidationError("matrix", "non-finite entries");
  return m;
}

inline CMatrix parse_matrix_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("path", "cannot open " + path);
  int line_no = 0;
  return parse_matrix_stream(in, line_no);
}

inline void write_matrix_stream(std::ostream& out, const CMatrix& m) {
  out << m.rows() << ' ' << m.cols() << '\n';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out << ' ';
      out << format_complex(m(i, j));
    }
    out << '\n';
  }
}

inline void write_matrix_file(const std::string& path, const CMatrix& m) {
  std::ofstream out(path);
  if (!out) throw ValidationError("path", "cannot write " + path);
  write_matrix_stream(out, m);
}

/// Snapshot file: header `N M dt`, then the X block and the X' block in
/// matrix format. T and L are not stored; pass them when the trajectory
/// structure matters (default: one trajectory of M steps).
inline void write_snapshot_file(const std::string& path,
                                const SnapshotData& d) {
  std::ofstream out(path);
  if (!out) throw ValidationError("path", "cannot write " + path);
  char dtbuf[32];
  std::snprintf(dtbuf, sizeof(dtbuf), "%.17g", d.dt);
  out << d.N << ' ' << d.M() << ' ' << dtbuf << '\n';
  write_matrix_stream(out, d.X);
  write_matrix_stream(out, d.Xprime);
}

inline SnapshotData read_snapshot_file(const std::string& path, int T = 0,
                                       int L = 0) {
  std::ifstream in(path);
  if (!in) throw ValidationError("path", "cannot open " + path);
  int line_no = 0;
  std::string line;
  if (!std::getline(in, line)) throw ParseError("missing snapshot header", 1);
  ++line_no;
  std::istringstream header(line);
  long N = 0, M = 0;
  double dt = 0.0;
  if (!(header >> N >> M >> dt) || N < 1 || M < 1)
    throw ParseError("snapshot header must be 'N M dt'", line_no);
  if (dt <= 0.0) throw ValidationError("dt", "must be > 0");

  SnapshotData d;
  d.X = parse_matrix_stream(in, line_no);
  d.Xprime = parse_matrix_stream(in, line_no);
  if (d.X.rows() != N || d.X.cols() != M)
    throw ValidationError("X", "block shape disagrees with snapshot header");
  if (d.Xprime.rows() != N || d.Xprime.cols() != M)
    throw ValidationError("Xprime", "block shape disagrees with snapshot header");
  d.N = static_cast<int>(N);
  d.dt = dt;
  if (T == 0 && L == 0) {
    d.T = static_cast<int>(M);
    d.L = 1;
  } else {
    if (T < 1 || L < 1 || static_cast<long>(T) * L != M)
      throw ValidationError("T,L", "T*L must equal the column count M");
    d.T = T;
    d.L = L;
  }
  return d;
}

}  // namespace qdmd

#endif  // QDMD_IO_HPP
