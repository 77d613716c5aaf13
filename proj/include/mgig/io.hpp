#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "mgig/data.hpp"
#include "mgig/errors.hpp"
#include "mgig/linalg.hpp"

namespace mgig {

/// Shortest exact decimal form of a double; stable across runs.
inline std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.push_back("");
  return fields;
}

inline bool is_blank(const std::string& s) {
  return s.find_first_not_of(" \t\r\n") == std::string::npos;
}

inline double parse_cell(const std::string& cell, const std::string& context) {
  if (is_blank(cell)) return std::nan("");
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(cell, &pos);
  } catch (const std::exception&) {
    throw ValidationError(context + ": cannot parse '" + cell + "'");
  }
  while (pos < cell.size() && std::isspace(static_cast<unsigned char>(cell[pos]))) ++pos;
  if (pos != cell.size()) throw ValidationError(context + ": cannot parse '" + cell + "'");
  return v;  // "NaN"/"nan" parse to NaN, marking a missing cell
}

}  // namespace detail

/// Dense CSV, one row per line; empty cells or NaN mark missing entries.
inline Matrix read_dense_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open '" + path + "'");
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t width = 0;
  while (std::getline(in, line)) {
    if (detail::is_blank(line)) continue;
    const auto fields = detail::split_csv_line(line);
    std::vector<double> row;
    row.reserve(fields.size());
    for (const auto& f : fields) row.push_back(detail::parse_cell(f, path));
    if (width == 0) width = row.size();
    if (row.size() != width) {
      throw ValidationError(path + ": ragged row (expected " + std::to_string(width) +
                            " cells, got " + std::to_string(row.size()) + ")");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ValidationError(path + ": no data rows");
  Matrix m(rows.size(), width);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < width; ++j) m(i, j) = rows[i][j];
  }
  return m;
}

inline void write_dense_csv(const std::string& path, const Matrix& m) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write '" + path + "'");
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      const double v = m(i, j);
      if (std::isnan(v)) {
        // empty cell marks a missing entry
      } else {
        out << fmt_double(v);
      }
    }
    out << '\n';
  }
}

/// Sparse triplets: one-line header, then "row,col,value" with 0-based indices.
inline std::vector<MatrixEntry> read_triplets_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw ValidationError(path + ": missing header line");
  std::vector<MatrixEntry> entries;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::is_blank(line)) continue;
    const auto fields = detail::split_csv_line(line);
    if (fields.size() != 3) {
      throw ValidationError(path + ":" + std::to_string(line_no) +
                            ": expected row,col,value");
    }
    const std::string ctx = path + ":" + std::to_string(line_no);
    const double r = detail::parse_cell(fields[0], ctx);
    const double c = detail::parse_cell(fields[1], ctx);
    const double v = detail::parse_cell(fields[2], ctx);
    if (std::isnan(r) || std::isnan(c) || std::isnan(v) || r != std::floor(r) ||
        c != std::floor(c)) {
      throw ValidationError(ctx + ": malformed triplet");
    }
    entries.push_back(MatrixEntry{static_cast<int>(r), static_cast<int>(c), v});
  }
  return entries;
}

inline void write_triplets_csv(const std::string& path, const std::vector<MatrixEntry>& entries,
                               const std::string& header = "row,col,value") {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write '" + path + "'");
  out << header << '\n';
  for (const auto& e : entries) {
    out << e.row << ',' << e.col << ',' << fmt_double(e.value) << '\n';
  }
}

/// Square symmetric parameter matrix from dense CSV (no missing cells).
inline SymmetricMatrix read_symmetric_csv(const std::string& path) {
  const Matrix m = read_dense_csv(path);
  if (m.hasNaN()) throw ValidationError(path + ": parameter matrix has missing cells");
  return SymmetricMatrix(m, 1e-8);
}

}  // namespace mgig
