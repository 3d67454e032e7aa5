// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "cpi/sparse.hpp"

namespace cpi::mm {

// Reads a real/integer Matrix Market coordinate file, general or symmetric storage.
inline SymSparseMatrix read(std::istream& in, const std::string& name = "<stream>") {
  auto fail = [&](std::size_t line, const std::string& why) {
    throw Error(ErrorCode::ParseError, name + ":" + std::to_string(line) + ": " + why);
  };

  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) fail(1, "empty file");
  ++line_no;

  std::istringstream header(line);
  std::string banner, object, format, field, symmetry;
  header >> banner >> object >> format >> field >> symmetry;
  auto lower = [](std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
  };
  if (banner != "%%MatrixMarket" || lower(object) != "matrix") fail(line_no, "missing %%MatrixMarket matrix banner");
  if (lower(format) != "coordinate") fail(line_no, "only coordinate format is supported");
  field = lower(field);
  if (field != "real" && field != "integer" && field != "double") fail(line_no, "unsupported field '" + field + "'");
  symmetry = lower(symmetry);
  if (symmetry != "general" && symmetry != "symmetric") fail(line_no, "unsupported symmetry '" + symmetry + "'");

  long long rows = -1, cols = -1, nnz = -1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '%') continue;
    std::istringstream size_line(line);
    if (!(size_line >> rows >> cols >> nnz)) fail(line_no, "malformed size line");
    break;
  }
  if (rows < 0) fail(line_no, "missing size line");
  if (rows != cols) {
    throw Error(ErrorCode::DimensionMismatch, name + ": matrix is " + std::to_string(rows) + "x" +
                                                  std::to_string(cols) + ", expected square");
  }

  std::vector<Triplet> entries;
  entries.reserve(static_cast<std::size_t>(std::max(0LL, nnz)));
  while (static_cast<long long>(entries.size()) < nnz && std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '%') continue;
    std::istringstream entry(line);
    long long i = 0, j = 0;
    double v = 0.0;
    if (!(entry >> i >> j >> v)) fail(line_no, "malformed entry");
    if (i < 1 || j < 1 || i > rows || j > cols) fail(line_no, "index out of range");
    if (symmetry == "symmetric" && j > i) fail(line_no, "upper-triangle entry in symmetric storage");
    entries.emplace_back(static_cast<int>(i - 1), static_cast<int>(j - 1), v);
  }
  if (static_cast<long long>(entries.size()) != nnz) {
    fail(line_no, "expected " + std::to_string(nnz) + " entries, found " + std::to_string(entries.size()));
  }
  return SymSparseMatrix::from_triplets(static_cast<Index>(rows), entries, symmetry == "symmetric");
}

inline SymSparseMatrix read_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  return read(in, path.string());
}

// Writes the lower triangle in symmetric storage; 17 significant digits round-trip exactly.
inline void write(std::ostream& out, const SymSparseMatrix& m) {
  std::vector<Coordinate> lower;
  for (const Coordinate& c : m.entries()) {
    if (c.row >= c.col) lower.push_back(c);
  }
  out << "%%MatrixMarket matrix coordinate real symmetric\n";
  out << m.size() << ' ' << m.size() << ' ' << lower.size() << '\n';
  out << std::setprecision(17);
  for (const Coordinate& c : lower) out << c.row + 1 << ' ' << c.col + 1 << ' ' << c.value << '\n';
}

inline void write_file(const std::filesystem::path& path, const SymSparseMatrix& m) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  write(out, m);
}

}  // namespace cpi::mm
