#pragma once

// Reader/writer for the Matrix Market exchange format (real/integer fields,
// general/symmetric/skew-symmetric, coordinate or array storage).

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "icmor/core/error.hpp"
#include "icmor/core/state_matrix.hpp"

namespace icmor::io {

namespace detail {

struct MarketHeader {
  bool coordinate = true;
  enum class Symmetry { general, symmetric, skew } symmetry = Symmetry::general;
};

inline std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

inline MarketHeader parse_header(const std::string& line, const std::filesystem::path& path) {
  std::istringstream is(line);
  std::string banner, object, format, field, symmetry;
  is >> banner >> object >> format >> field >> symmetry;
  if (lower(banner) != "%%matrixmarket" || lower(object) != "matrix")
    throw Error("io", "not a Matrix Market matrix file: " + path.string());
  MarketHeader h;
  format = lower(format);
  if (format == "coordinate")
    h.coordinate = true;
  else if (format == "array")
    h.coordinate = false;
  else
    throw Error("io", "unsupported Matrix Market format '" + format + "' in " + path.string());
  field = lower(field);
  if (field != "real" && field != "integer" && field != "double")
    throw Error("io", "unsupported Matrix Market field '" + field + "' in " + path.string());
  symmetry = lower(symmetry);
  if (symmetry == "general")
    h.symmetry = MarketHeader::Symmetry::general;
  else if (symmetry == "symmetric")
    h.symmetry = MarketHeader::Symmetry::symmetric;
  else if (symmetry == "skew-symmetric")
    h.symmetry = MarketHeader::Symmetry::skew;
  else
    throw Error("io", "unsupported Matrix Market symmetry '" + symmetry + "' in " + path.string());
  return h;
}

inline bool next_data_line(std::istream& in, std::string& line) {
  while (std::getline(in, line)) {
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '%') continue;
    return true;
  }
  return false;
}

}  // namespace detail

/// Reads a Matrix Market file into a sparse matrix (either storage format).
inline SparseMatrix read_sparse(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("io", "cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw Error("io", "empty file " + path.string());
  const auto header = detail::parse_header(line, path);
  if (!detail::next_data_line(in, line)) throw Error("io", "missing size line in " + path.string());
  std::istringstream sz(line);
  Index rows = 0, cols = 0, entries = 0;
  sz >> rows >> cols;
  if (header.coordinate) sz >> entries;
  if (!sz || rows < 0 || cols < 0) throw Error("io", "malformed size line in " + path.string());

  using Sym = detail::MarketHeader::Symmetry;
  std::vector<Eigen::Triplet<double>> triplets;
  auto push = [&](Index i, Index j, double v) {
    triplets.emplace_back(i, j, v);
    if (i != j && header.symmetry == Sym::symmetric) triplets.emplace_back(j, i, v);
    if (i != j && header.symmetry == Sym::skew) triplets.emplace_back(j, i, -v);
  };
  if (header.coordinate) {
    triplets.reserve(static_cast<std::size_t>(entries) * 2);
    for (Index k = 0; k < entries; ++k) {
      if (!detail::next_data_line(in, line))
        throw Error("io", "unexpected end of data in " + path.string());
      std::istringstream ls(line);
      Index i = 0, j = 0;
      double v = 0;
      ls >> i >> j >> v;
      if (!ls || i < 1 || j < 1 || i > rows || j > cols)
        throw Error("io", "malformed entry '" + line + "' in " + path.string());
      push(i - 1, j - 1, v);
    }
  } else {
    // Column-major; symmetric variants store the lower triangle only.
    for (Index j = 0; j < cols; ++j) {
      const Index start = header.symmetry == Sym::general ? 0 : (header.symmetry == Sym::skew ? j + 1 : j);
      for (Index i = start; i < rows; ++i) {
        if (!detail::next_data_line(in, line))
          throw Error("io", "unexpected end of data in " + path.string());
        double v = std::stod(line);
        if (v != 0.0) push(i, j, v);
      }
    }
  }
  SparseMatrix m(rows, cols);
  m.setFromTriplets(triplets.begin(), triplets.end());
  m.makeCompressed();
  return m;
}

inline Matrix read_dense(const std::filesystem::path& path) { return Matrix(read_sparse(path)); }

/// Reads a vector stored as an n x 1 (or 1 x n) matrix.
inline Vector read_vector(const std::filesystem::path& path) {
  Matrix m = read_dense(path);
  if (m.cols() == 1) return m.col(0);
  if (m.rows() == 1) return m.row(0).transpose();
  throw Error("io", "expected a vector (n x 1) in " + path.string());
}

/// True when the file declares coordinate (sparse) storage.
inline bool is_coordinate_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("io", "cannot open " + path.string());
  std::string line;
  std::getline(in, line);
  return detail::parse_header(line, path).coordinate;
}

inline void write_dense(const std::filesystem::path& path, const Matrix& m,
                        const std::string& comment = {}) {
  std::ofstream out(path);
  if (!out) throw Error("io", "cannot write " + path.string());
  out << "%%MatrixMarket matrix array real general\n";
  if (!comment.empty()) out << "% " << comment << "\n";
  out << m.rows() << " " << m.cols() << "\n";
  out << std::setprecision(17);
  for (Index j = 0; j < m.cols(); ++j)
    for (Index i = 0; i < m.rows(); ++i) out << m(i, j) << "\n";
}

inline void write_sparse(const std::filesystem::path& path, const SparseMatrix& m,
                         const std::string& comment = {}) {
  std::ofstream out(path);
  if (!out) throw Error("io", "cannot write " + path.string());
  out << "%%MatrixMarket matrix coordinate real general\n";
  if (!comment.empty()) out << "% " << comment << "\n";
  out << m.rows() << " " << m.cols() << " " << m.nonZeros() << "\n";
  out << std::setprecision(17);
  for (Index k = 0; k < m.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(m, k); it; ++it)
      out << it.row() + 1 << " " << it.col() + 1 << " " << it.value() << "\n";
}

}  // namespace icmor::io
