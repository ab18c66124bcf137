#pragma once

#include <cassert>
#include <cstddef>
#include <span>
#include <vector>

namespace layerprobe {

/// Non-owning row-major view of an N x D block of doubles.
class MatrixView {
 public:
  MatrixView() = default;
  MatrixView(std::span<const double> data, std::size_t rows, std::size_t cols)
      : data_(data), rows_(rows), cols_(cols) {
    assert(data.size() == rows * cols);
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::span<const double> data() const { return data_; }
  std::span<const double> row(std::size_t i) const {
    return data_.subspan(i * cols_, cols_);
  }
  double operator()(std::size_t i, std::size_t j) const {
    return data_[i * cols_ + j];
  }

 private:
  std::span<const double> data_;
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
};

/// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : data_(rows * cols, fill), rows_(rows), cols_(cols) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> values)
      : data_(std::move(values)), rows_(rows), cols_(cols) {
    assert(data_.size() == rows * cols);
  }
  explicit Matrix(MatrixView view)
      : data_(view.data().begin(), view.data().end()),
        rows_(view.rows()),
        cols_(view.cols()) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t i, std::size_t j) {
    return data_[i * cols_ + j];
  }
  double operator()(std::size_t i, std::size_t j) const {
    return data_[i * cols_ + j];
  }

  std::span<double> row(std::size_t i) {
    return std::span<double>(data_).subspan(i * cols_, cols_);
  }
  std::span<const double> row(std::size_t i) const {
    return std::span<const double>(data_).subspan(i * cols_, cols_);
  }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

  MatrixView view() const { return MatrixView(data_, rows_, cols_); }
  operator MatrixView() const { return view(); }

  bool operator==(const Matrix&) const = default;

 private:
  std::vector<double> data_;
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
};

}  // namespace layerprobe
