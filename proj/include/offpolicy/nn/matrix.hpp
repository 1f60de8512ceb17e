#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace offpolicy::nn {

using RowMatrixXd = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatrixMap = Eigen::Map<RowMatrixXd>;
using ConstMatrixMap = Eigen::Map<const RowMatrixXd>;

/// Dense row-major matrix of doubles. Storage is always rows * cols long.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}
  Matrix(std::size_t r, std::size_t c, std::vector<double> values)
      : rows(r), cols(c), data(std::move(values)) {
    if (data.size() != rows * cols) {
      throw std::invalid_argument("Matrix: data length " + std::to_string(data.size()) +
                                  " != " + std::to_string(rows) + "x" + std::to_string(cols));
    }
  }

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

  std::span<double> row(std::size_t r) { return {data.data() + r * cols, cols}; }
  std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }

  std::size_t size() const { return data.size(); }
  bool same_shape(const Matrix& other) const { return rows == other.rows && cols == other.cols; }

  MatrixMap map() { return {data.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols)}; }
  ConstMatrixMap map() const {
    return {data.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols)};
  }

  bool operator==(const Matrix&) const = default;
};

inline bool all_finite(std::span<const double> values) {
  for (double v : values) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

/// Stacks equally sized row vectors into a matrix.
inline Matrix stack_rows(std::span<const std::vector<double>> rows) {
  if (rows.empty()) return {};
  Matrix m(rows.size(), rows.front().size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != m.cols) throw std::invalid_argument("stack_rows: ragged input");
    std::copy(rows[r].begin(), rows[r].end(), m.row(r).begin());
  }
  return m;
}

/// [left | right] column concatenation; row counts must agree.
inline Matrix hconcat(const Matrix& left, const Matrix& right) {
  if (left.rows != right.rows) throw std::invalid_argument("hconcat: row count mismatch");
  Matrix out(left.rows, left.cols + right.cols);
  for (std::size_t r = 0; r < left.rows; ++r) {
    auto dst = out.row(r);
    auto l = left.row(r);
    auto rr = right.row(r);
    std::copy(l.begin(), l.end(), dst.begin());
    std::copy(rr.begin(), rr.end(), dst.begin() + static_cast<std::ptrdiff_t>(left.cols));
  }
  return out;
}

/// Columns [first, first + count) as a new matrix.
inline Matrix column_block(const Matrix& m, std::size_t first, std::size_t count) {
  if (first + count > m.cols) throw std::out_of_range("column_block: range exceeds columns");
  Matrix out(m.rows, count);
  for (std::size_t r = 0; r < m.rows; ++r) {
    auto src = m.row(r);
    std::copy_n(src.begin() + static_cast<std::ptrdiff_t>(first), count, out.row(r).begin());
  }
  return out;
}

}  // namespace offpolicy::nn
