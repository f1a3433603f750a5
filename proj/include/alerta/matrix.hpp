#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace alerta {

/// Dense row-major matrix of doubles. Column vectors are n x 1 matrices.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);
  static Matrix column(std::span<const double> values);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }

  /// "RxC", used in error messages.
  std::string shape() const;
  bool same_shape(const Matrix& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }
  bool all_finite() const;

  void fill(double v);

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

enum class UnaryOp { sigmoid, tanh };
enum class BinaryOp { add, sub, mul };

/// Product a*b. Each output entry sums over k in increasing order.
Matrix matmul(const Matrix& a, const Matrix& b);
/// a * b^T without materializing the transpose.
Matrix matmul_nt(const Matrix& a, const Matrix& b);
/// a^T * b without materializing the transpose.
Matrix matmul_tn(const Matrix& a, const Matrix& b);

Matrix elementwise(BinaryOp op, const Matrix& a, const Matrix& b);
Matrix elementwise(UnaryOp op, const Matrix& a);

Matrix add(const Matrix& a, const Matrix& b);
Matrix sub(const Matrix& a, const Matrix& b);
Matrix hadamard(const Matrix& a, const Matrix& b);
Matrix sigmoid(const Matrix& a);
Matrix tanh(const Matrix& a);
Matrix scale(const Matrix& a, double s);
Matrix transpose(const Matrix& a);

/// Stacks matrices with equal column counts on top of each other.
Matrix concat_rows(std::span<const Matrix> parts);
/// Keeps the listed rows, in the listed order.
Matrix select_rows(const Matrix& a, std::span<const std::size_t> rows);
/// Column c as a rows() x 1 matrix.
Matrix column_of(const Matrix& a, std::size_t c);

/// Overflow-free logistic function.
double sigmoid(double x);
/// ln(1 + e^x) without overflow.
double softplus(double x);

void require_same_shape(const Matrix& a, const Matrix& b, const char* what);

}  // namespace alerta
