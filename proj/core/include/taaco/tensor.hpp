#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "taaco/errors.hpp"

namespace taaco {

/// Dense row-major tensor of 64-bit floats. Graph ops treat everything as
/// 2-D [rows, cols]; higher-rank shapes appear only in public returns (the
/// stacked [H, n, n] attention tensor).
class Tensor {
 public:
  Tensor() = default;
  Tensor(int64_t rows, int64_t cols) : shape_{rows, cols}, data_(check_size(rows * cols)) {}
  explicit Tensor(std::vector<int64_t> shape);

  static Tensor row(const std::vector<double>& values);  // [1, n]

  const std::vector<int64_t>& shape() const { return shape_; }
  int64_t rank() const { return static_cast<int64_t>(shape_.size()); }
  int64_t rows() const { return shape_.empty() ? 0 : shape_[0]; }
  int64_t cols() const;  // product of trailing dims
  int64_t size() const { return static_cast<int64_t>(data_.size()); }
  bool empty() const { return data_.empty(); }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  double& at(int64_t i, int64_t j) { return data_[i * cols() + j]; }
  double at(int64_t i, int64_t j) const { return data_[i * cols() + j]; }
  double& operator[](int64_t i) { return data_[i]; }
  double operator[](int64_t i) const { return data_[i]; }

  void fill(double v);
  void zero() { fill(0.0); }
  bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }
  bool all_finite() const;

  std::string shape_string() const;

 private:
  static size_t check_size(int64_t n);

  std::vector<int64_t> shape_;
  std::vector<double> data_;
};

// C = A[m,k] * B[k,n]  (accumulating variants add into C)
void gemm_nn(const Tensor& a, const Tensor& b, Tensor& c, bool accumulate = false);
// C = A[m,k] * B[n,k]^T
void gemm_nt(const Tensor& a, const Tensor& b, Tensor& c, bool accumulate = false);
// C = A[m,k]^T * B[m,n]
void gemm_tn(const Tensor& a, const Tensor& b, Tensor& c, bool accumulate = false);

}  // namespace taaco
