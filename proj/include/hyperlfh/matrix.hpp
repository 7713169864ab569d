#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace hyperlfh {

/// Dense row-major matrix. Column vectors are R x 1, row vectors 1 x C.
/// Instantiated with double for tests/oracles and float for fast training.
template <typename T>
class Mat {
 public:
  Mat() = default;
  Mat(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols, T(0)) {}
  Mat(std::size_t rows, std::size_t cols, std::vector<T> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_)
      throw std::invalid_argument("Mat: data length " + std::to_string(data_.size()) +
                                  " != " + std::to_string(rows_) + "x" + std::to_string(cols_));
  }
  Mat(std::initializer_list<std::initializer_list<T>> rows) {
    rows_ = rows.size();
    cols_ = rows_ ? rows.begin()->size() : 0;
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
      if (r.size() != cols_) throw std::invalid_argument("Mat: ragged initializer");
      data_.insert(data_.end(), r.begin(), r.end());
    }
  }

  static Mat identity(std::size_t n) {
    Mat m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = T(1);
    return m;
  }
  static Mat full(std::size_t rows, std::size_t cols, T v) {
    Mat m(rows, cols);
    std::fill(m.data_.begin(), m.data_.end(), v);
    return m;
  }
  static Mat column(std::vector<T> v) {
    std::size_t n = v.size();
    return Mat(n, 1, std::move(v));
  }
  static Mat row(std::vector<T> v) {
    std::size_t n = v.size();
    return Mat(1, n, std::move(v));
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  T& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  T operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
  T& at(std::size_t k) { return data_[k]; }
  T at(std::size_t k) const { return data_[k]; }

  std::vector<T>& data() { return data_; }
  const std::vector<T>& data() const { return data_; }

  bool same_shape(const Mat& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

  std::string shape_str() const {
    return std::to_string(rows_) + "x" + std::to_string(cols_);
  }

  bool all_finite() const {
    for (T v : data_)
      if (!std::isfinite(static_cast<double>(v))) return false;
    return true;
  }

  T scalar() const {
    if (rows_ != 1 || cols_ != 1)
      throw std::logic_error("Mat::scalar on " + shape_str() + " matrix");
    return data_[0];
  }

  /// Max |a - b| over entries; shapes must match.
  static T max_abs_diff(const Mat& a, const Mat& b) {
    if (!a.same_shape(b))
      throw std::invalid_argument("max_abs_diff: " + a.shape_str() + " vs " + b.shape_str());
    T m = T(0);
    for (std::size_t k = 0; k < a.size(); ++k) {
      T d = std::abs(a.data_[k] - b.data_[k]);
      if (d > m) m = d;
    }
    return m;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

/// Plain value-level product, fixed i-k-j summation order (deterministic).
template <typename T>
Mat<T> matmul_value(const Mat<T>& a, const Mat<T>& b) {
  if (a.cols() != b.rows())
    throw std::invalid_argument("matmul: shape mismatch " + a.shape_str() + " * " + b.shape_str());
  Mat<T> c(a.rows(), b.cols());
  const std::size_t n = a.rows(), k = a.cols(), m = b.cols();
  const T* bdat = b.data().data();
  T* cdat = c.data().data();
  for (std::size_t i = 0; i < n; ++i) {
    T* crow = cdat + i * m;
    for (std::size_t p = 0; p < k; ++p) {
      const T av = a(i, p);
      if (av == T(0)) continue;
      const T* brow = bdat + p * m;
      for (std::size_t j = 0; j < m; ++j) crow[j] += av * brow[j];
    }
  }
  return c;
}

template <typename T>
Mat<T> transpose_value(const Mat<T>& a) {
  Mat<T> t(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  return t;
}

}  // namespace hyperlfh
