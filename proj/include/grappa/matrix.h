//
// Project grappa - Copyright 2026 The grappa authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef GRAPPA_MATRIX_H_
#define GRAPPA_MATRIX_H_

#include <algorithm>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace grappa {

class ShapeError: public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

// Dense row-major matrix of doubles. Vectors are represented as 1 x n rows.
class Matrix {
public:
  Matrix() = default;
  Matrix(int rows, int cols, double fill = 0.0)
      : rows_(rows), cols_(cols),
        data_(static_cast<std::size_t>(rows) * cols, fill) {
    if (rows < 0 || cols < 0)
      throw ShapeError("negative matrix dimension");
  }
  Matrix(int rows, int cols, std::vector<double> values)
      : rows_(rows), cols_(cols), data_(std::move(values)) {
    if (rows < 0 || cols < 0
        || data_.size() != static_cast<std::size_t>(rows) * cols)
      throw ShapeError("value count does not match shape");
  }

  static Matrix row(std::initializer_list<double> values) {
    return Matrix(1, static_cast<int>(values.size()),
                  std::vector<double>(values));
  }
  static Matrix row(std::span<const double> values) {
    return Matrix(1, static_cast<int>(values.size()),
                  std::vector<double>(values.begin(), values.end()));
  }
  static Matrix identity(int n) {
    Matrix m(n, n);
    for (int i = 0; i < n; ++i)
      m(i, i) = 1.0;
    return m;
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double &operator()(int r, int c) {
    return data_[static_cast<std::size_t>(r) * cols_ + c];
  }
  double operator()(int r, int c) const {
    return data_[static_cast<std::size_t>(r) * cols_ + c];
  }
  double &operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  std::span<double> row_span(int r) {
    return { data_.data() + static_cast<std::size_t>(r) * cols_,
             static_cast<std::size_t>(cols_) };
  }
  std::span<const double> row_span(int r) const {
    return { data_.data() + static_cast<std::size_t>(r) * cols_,
             static_cast<std::size_t>(cols_) };
  }

  std::vector<double> &values() { return data_; }
  const std::vector<double> &values() const { return data_; }

  bool same_shape(const Matrix &other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

  void fill(double v) { std::fill(data_.begin(), data_.end(), v); }

  std::string shape_string() const {
    return "(" + std::to_string(rows_) + "x" + std::to_string(cols_) + ")";
  }

  friend bool operator==(const Matrix &, const Matrix &) = default;

private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> data_;
};

}  // namespace grappa

#endif  // GRAPPA_MATRIX_H_
