#include "alerta/matrix.hpp"

#include <algorithm>
#include <cmath>

#include "alerta/errors.hpp"

namespace alerta {

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows * cols) {
    throw DimensionError("matrix " + shape() + " given " + std::to_string(data_.size()) +
                         " values");
  }
}

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r == 0 ? 0 : rows.begin()->size();
  std::vector<double> data;
  data.reserve(r * c);
  for (const auto& row : rows) {
    if (row.size() != c) throw DimensionError("ragged initializer for matrix");
    data.insert(data.end(), row.begin(), row.end());
  }
  return Matrix(r, c, std::move(data));
}

Matrix Matrix::column(std::span<const double> values) {
  return Matrix(values.size(), 1, std::vector<double>(values.begin(), values.end()));
}

std::string Matrix::shape() const {
  return std::to_string(rows_) + "x" + std::to_string(cols_);
}

bool Matrix::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

void Matrix::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

void require_same_shape(const Matrix& a, const Matrix& b, const char* what) {
  if (!a.same_shape(b)) {
    throw DimensionError(std::string(what) + ": shape mismatch " + a.shape() + " vs " +
                         b.shape());
  }
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw DimensionError("matmul: shape mismatch " + a.shape() + " * " + b.shape());
  }
  const std::size_t n = a.rows(), m = b.cols(), inner = a.cols();
  Matrix out(n, m);
  // i-k-j order still accumulates each out(i,j) over k = 0..inner-1 in sequence.
  for (std::size_t i = 0; i < n; ++i) {
    double* orow = &out(i, 0);
    for (std::size_t k = 0; k < inner; ++k) {
      const double aik = a(i, k);
      const double* brow = &b.values()[k * m];
      for (std::size_t j = 0; j < m; ++j) orow[j] += aik * brow[j];
    }
  }
  return out;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) {
    throw DimensionError("matmul_nt: shape mismatch " + a.shape() + " * (" + b.shape() +
                         ")^T");
  }
  const std::size_t n = a.rows(), m = b.rows(), inner = a.cols();
  Matrix out(n, m);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < inner; ++k) acc += a(i, k) * b(j, k);
      out(i, j) = acc;
    }
  }
  return out;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) {
    throw DimensionError("matmul_tn: shape mismatch (" + a.shape() + ")^T * " + b.shape());
  }
  const std::size_t n = a.cols(), m = b.cols(), inner = a.rows();
  Matrix out(n, m);
  for (std::size_t k = 0; k < inner; ++k) {
    const double* brow = &b.values()[k * m];
    for (std::size_t i = 0; i < n; ++i) {
      const double aki = a(k, i);
      double* orow = &out(i, 0);
      for (std::size_t j = 0; j < m; ++j) orow[j] += aki * brow[j];
    }
  }
  return out;
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

Matrix elementwise(BinaryOp op, const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "elementwise");
  Matrix out(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.size(); ++i) {
    switch (op) {
      case BinaryOp::add: out[i] = a[i] + b[i]; break;
      case BinaryOp::sub: out[i] = a[i] - b[i]; break;
      case BinaryOp::mul: out[i] = a[i] * b[i]; break;
    }
  }
  return out;
}

Matrix elementwise(UnaryOp op, const Matrix& a) {
  Matrix out(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.size(); ++i) {
    out[i] = op == UnaryOp::sigmoid ? sigmoid(a[i]) : std::tanh(a[i]);
  }
  return out;
}

Matrix add(const Matrix& a, const Matrix& b) { return elementwise(BinaryOp::add, a, b); }
Matrix sub(const Matrix& a, const Matrix& b) { return elementwise(BinaryOp::sub, a, b); }
Matrix hadamard(const Matrix& a, const Matrix& b) { return elementwise(BinaryOp::mul, a, b); }
Matrix sigmoid(const Matrix& a) { return elementwise(UnaryOp::sigmoid, a); }
Matrix tanh(const Matrix& a) { return elementwise(UnaryOp::tanh, a); }

Matrix scale(const Matrix& a, double s) {
  Matrix out = a;
  for (double& v : out.values()) v *= s;
  return out;
}

Matrix transpose(const Matrix& a) {
  Matrix out(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
  return out;
}

Matrix concat_rows(std::span<const Matrix> parts) {
  if (parts.empty()) return {};
  const std::size_t cols = parts.front().cols();
  std::size_t rows = 0;
  for (const auto& p : parts) {
    if (p.cols() != cols) {
      throw DimensionError("concat_rows: column mismatch " + parts.front().shape() + " vs " +
                           p.shape());
    }
    rows += p.rows();
  }
  std::vector<double> data;
  data.reserve(rows * cols);
  for (const auto& p : parts) data.insert(data.end(), p.values().begin(), p.values().end());
  return Matrix(rows, cols, std::move(data));
}

Matrix select_rows(const Matrix& a, std::span<const std::size_t> rows) {
  Matrix out(rows.size(), a.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] >= a.rows()) {
      throw DimensionError("select_rows: row " + std::to_string(rows[i]) + " out of range for " +
                           a.shape());
    }
    std::copy_n(&a.values()[rows[i] * a.cols()], a.cols(), &out(i, 0));
  }
  return out;
}

Matrix column_of(const Matrix& a, std::size_t c) {
  if (c >= a.cols()) {
    throw DimensionError("column_of: column " + std::to_string(c) + " out of range for " +
                         a.shape());
  }
  Matrix out(a.rows(), 1);
  for (std::size_t i = 0; i < a.rows(); ++i) out[i] = a(i, c);
  return out;
}

}  // namespace alerta
