#include "taaco/tensor.hpp"

#include <cmath>

namespace taaco {

size_t Tensor::check_size(int64_t n) {
  if (n < 0) raise(ErrorCode::ShapeMismatch, "negative tensor size");
  return static_cast<size_t>(n);
}

Tensor::Tensor(std::vector<int64_t> shape) : shape_(std::move(shape)) {
  int64_t n = 1;
  for (int64_t d : shape_) {
    if (d < 0) raise(ErrorCode::ShapeMismatch, "negative dimension");
    n *= d;
  }
  data_.assign(check_size(n), 0.0);
}

Tensor Tensor::row(const std::vector<double>& values) {
  Tensor t(1, static_cast<int64_t>(values.size()));
  for (size_t i = 0; i < values.size(); ++i) t.data_[i] = values[i];
  return t;
}

int64_t Tensor::cols() const {
  if (shape_.empty()) return 0;
  int64_t c = 1;
  for (size_t i = 1; i < shape_.size(); ++i) c *= shape_[i];
  return c;
}

void Tensor::fill(double v) {
  for (double& x : data_) x = v;
}

bool Tensor::all_finite() const {
  for (double x : data_) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

std::string Tensor::shape_string() const {
  std::string out = "[";
  for (size_t i = 0; i < shape_.size(); ++i) {
    if (i) out += "x";
    out += std::to_string(shape_[i]);
  }
  return out + "]";
}

namespace {
void check_2d(const Tensor& t, const char* what) {
  if (t.rank() != 2) raise(ErrorCode::ShapeMismatch, std::string(what) + " must be 2-D");
}
}  // namespace

void gemm_nn(const Tensor& a, const Tensor& b, Tensor& c, bool accumulate) {
  check_2d(a, "gemm A");
  check_2d(b, "gemm B");
  int64_t m = a.rows(), k = a.cols(), n = b.cols();
  if (b.rows() != k || c.rows() != m || c.cols() != n) {
    raise(ErrorCode::ShapeMismatch,
          "gemm_nn " + a.shape_string() + " * " + b.shape_string() + " -> " + c.shape_string());
  }
  const double* A = a.data();
  const double* B = b.data();
  double* C = c.data();
  if (!accumulate) c.zero();
  for (int64_t i = 0; i < m; ++i) {
    const double* arow = A + i * k;
    double* crow = C + i * n;
    for (int64_t p = 0; p < k; ++p) {
      double av = arow[p];
      const double* brow = B + p * n;
      for (int64_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

void gemm_nt(const Tensor& a, const Tensor& b, Tensor& c, bool accumulate) {
  check_2d(a, "gemm A");
  check_2d(b, "gemm B");
  int64_t m = a.rows(), k = a.cols(), n = b.rows();
  if (b.cols() != k || c.rows() != m || c.cols() != n) {
    raise(ErrorCode::ShapeMismatch,
          "gemm_nt " + a.shape_string() + " * " + b.shape_string() + "^T -> " + c.shape_string());
  }
  const double* A = a.data();
  const double* B = b.data();
  double* C = c.data();
  for (int64_t i = 0; i < m; ++i) {
    const double* arow = A + i * k;
    double* crow = C + i * n;
    for (int64_t j = 0; j < n; ++j) {
      const double* brow = B + j * k;
      double acc = 0.0;
      for (int64_t p = 0; p < k; ++p) acc += arow[p] * brow[p];
      if (accumulate) {
        crow[j] += acc;
      } else {
        crow[j] = acc;
      }
    }
  }
}

void gemm_tn(const Tensor& a, const Tensor& b, Tensor& c, bool accumulate) {
  check_2d(a, "gemm A");
  check_2d(b, "gemm B");
  int64_t m = a.rows(), k = a.cols(), n = b.cols();
  if (b.rows() != m || c.rows() != k || c.cols() != n) {
    raise(ErrorCode::ShapeMismatch,
          "gemm_tn " + a.shape_string() + "^T * " + b.shape_string() + " -> " + c.shape_string());
  }
  const double* A = a.data();
  const double* B = b.data();
  double* C = c.data();
  if (!accumulate) c.zero();
  for (int64_t p = 0; p < m; ++p) {
    const double* arow = A + p * k;
    const double* brow = B + p * n;
    for (int64_t i = 0; i < k; ++i) {
      double av = arow[i];
      double* crow = C + i * n;
      for (int64_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

}  // namespace taaco
