// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "cpi/cpi_basis.hpp"

namespace cpi::io {

static_assert(std::endian::native == std::endian::little, "basis files are little-endian");

inline constexpr char kBasisMagic[4] = {'C', 'P', 'I', 'B'};
inline constexpr std::uint32_t kBasisVersion = 1;

namespace detail {

class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}

  template <class T>
  void put(T value) {
    static_assert(std::is_trivially_copyable_v<T>);
    out_.write(reinterpret_cast<const char*>(&value), sizeof(T));
  }
  void put_doubles(const double* data, std::int64_t count) {
    out_.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(count * sizeof(double)));
  }
  void put_vector(const Vector& v) {
    put<std::int64_t>(v.size());
    put_doubles(v.data(), v.size());
  }
  void put_matrix(const Matrix& m) {
    put<std::int64_t>(m.rows());
    put<std::int64_t>(m.cols());
    put_doubles(m.data(), m.size());
  }
  void put_sparse(SparseMatrix m) {
    m.makeCompressed();
    put<std::int64_t>(m.rows());
    put<std::int64_t>(m.cols());
    put<std::int64_t>(m.nonZeros());
    for (Index c = 0; c <= m.cols(); ++c) put<std::int64_t>(m.outerIndexPtr()[c]);
    for (Index k = 0; k < m.nonZeros(); ++k) put<std::int64_t>(m.innerIndexPtr()[k]);
    put_doubles(m.valuePtr(), m.nonZeros());
  }

 private:
  std::ostream& out_;
};

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  template <class T>
  T get() {
    T value{};
    in_.read(reinterpret_cast<char*>(&value), sizeof(T));
    if (!in_) throw Error(ErrorCode::ParseError, "basis file truncated");
    return value;
  }
  std::int64_t get_count(std::int64_t limit = std::int64_t{1} << 40) {
    const auto n = get<std::int64_t>();
    if (n < 0 || n > limit) throw Error(ErrorCode::ParseError, "basis file holds an invalid size " + std::to_string(n));
    return n;
  }
  void get_doubles(double* data, std::int64_t count) {
    in_.read(reinterpret_cast<char*>(data), static_cast<std::streamsize>(count * sizeof(double)));
    if (!in_) throw Error(ErrorCode::ParseError, "basis file truncated");
  }
  Vector get_vector() {
    Vector v(get_count());
    get_doubles(v.data(), v.size());
    return v;
  }
  Matrix get_matrix() {
    const auto rows = get_count();
    const auto cols = get_count();
    Matrix m(rows, cols);
    get_doubles(m.data(), m.size());
    return m;
  }
  SparseMatrix get_sparse() {
    const auto rows = get_count(std::numeric_limits<int>::max());
    const auto cols = get_count(std::numeric_limits<int>::max());
    const auto nnz = get_count(std::numeric_limits<int>::max());
    std::vector<int> outer(static_cast<std::size_t>(cols + 1));
    std::vector<int> inner(static_cast<std::size_t>(nnz));
    std::vector<double> values(static_cast<std::size_t>(nnz));
    for (auto& o : outer) o = static_cast<int>(get<std::int64_t>());
    for (auto& i : inner) {
      i = static_cast<int>(get<std::int64_t>());
      if (i < 0 || i >= rows) throw Error(ErrorCode::ParseError, "sparse row index out of range");
    }
    get_doubles(values.data(), nnz);
    if (outer.front() != 0 || outer.back() != nnz || !std::is_sorted(outer.begin(), outer.end())) {
      throw Error(ErrorCode::ParseError, "sparse column pointers are inconsistent");
    }
    SparseMatrix m = Eigen::Map<const SparseMatrix>(rows, cols, nnz, outer.data(), inner.data(), values.data());
    return m;
  }

 private:
  std::istream& in_;
};

}  // namespace detail

inline void write_basis(std::ostream& out, const ReducedBasis& basis) {
  detail::Writer w(out);
  out.write(kBasisMagic, 4);
  w.put<std::uint32_t>(kBasisVersion);
  const CpiPlan& p = basis.plan;
  w.put<double>(p.upper);
  w.put<double>(p.gamma);
  w.put<std::int64_t>(p.points);
  w.put_doubles(p.xi.data(), static_cast<std::int64_t>(p.xi.size()));
  w.put<double>(p.tol);
  w.put<double>(p.alpha_bound);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(p.mode));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(basis.mode));
  w.put<std::int64_t>(basis.projector_rank);
  w.put<std::int64_t>(basis.coupling_count);
  w.put<std::int64_t>(basis.sample_columns);
  w.put<std::uint8_t>(basis.used_lu_fallback ? 1 : 0);
  w.put_vector(basis.sigma);
  w.put_matrix(*basis.exterior.basis);
  w.put_matrix(*basis.exterior.stiffness);
  w.put_matrix(*basis.exterior.mass);
  w.put_sparse(basis.a22 ? *basis.a22 : SparseMatrix(basis.rows(), basis.rows()));
  w.put_sparse(basis.m22 ? *basis.m22 : SparseMatrix(basis.rows(), basis.rows()));
  if (!out) throw Error(ErrorCode::IoError, "failed to write basis");
}

inline ReducedBasis read_basis(std::istream& in) {
  char magic[4] = {};
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kBasisMagic, 4) != 0) throw Error(ErrorCode::ParseError, "not a CPI basis file");
  detail::Reader r(in);
  const auto version = r.get<std::uint32_t>();
  if (version != kBasisVersion) {
    throw Error(ErrorCode::ParseError, "unsupported basis format version " + std::to_string(version));
  }
  ReducedBasis b;
  CpiPlan& p = b.plan;
  p.upper = r.get<double>();
  p.gamma = r.get<double>();
  p.points = static_cast<int>(r.get_count(1 << 20));
  p.xi.resize(static_cast<std::size_t>(p.points));
  r.get_doubles(p.xi.data(), p.points);
  p.tol = r.get<double>();
  p.alpha_bound = r.get<double>();
  const auto plan_mode = r.get<std::uint32_t>();
  const auto used_mode = r.get<std::uint32_t>();
  if (plan_mode > 2 || used_mode > 2) throw Error(ErrorCode::ParseError, "unknown basis mode");
  p.mode = static_cast<BasisMode>(plan_mode);
  b.mode = static_cast<BasisMode>(used_mode);
  b.projector_rank = r.get_count();
  b.coupling_count = r.get_count();
  b.sample_columns = r.get_count();
  b.used_lu_fallback = r.get<std::uint8_t>() != 0;
  b.sigma = r.get_vector();
  Matrix q = r.get_matrix();
  Matrix qtaq = r.get_matrix();
  Matrix qtmq = r.get_matrix();
  if (qtaq.rows() != q.cols() || qtaq.cols() != q.cols() || qtmq.rows() != q.cols() || qtmq.cols() != q.cols()) {
    throw Error(ErrorCode::ParseError, "reduced blocks do not match the basis dimension");
  }
  b.exterior = {std::make_shared<const Matrix>(std::move(q)), std::make_shared<const Matrix>(std::move(qtaq)),
                std::make_shared<const Matrix>(std::move(qtmq))};
  b.a22 = std::make_shared<const SparseMatrix>(r.get_sparse());
  b.m22 = std::make_shared<const SparseMatrix>(r.get_sparse());
  if (b.a22->rows() != b.rows() || b.m22->rows() != b.rows()) {
    throw Error(ErrorCode::ParseError, "stored exterior blocks do not match the basis rows");
  }
  p.validate();
  return b;
}

inline void save_basis(const std::filesystem::path& path, const ReducedBasis& basis) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
  write_basis(out, basis);
}

inline ReducedBasis load_basis(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  return read_basis(in);
}

}  // namespace cpi::io
