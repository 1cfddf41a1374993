#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace apollo {

/// Dense row-major matrix of doubles. This is the carrier for weights,
/// gradients, moments and projections throughout the library. Desk-scale
/// only: values are plain std::vector buffers with value semantics, and
/// every free function below is a pure function of its inputs.
class Matrix {
 public:
  Matrix() = default;

  /// rows x cols, zero-filled.
  Matrix(std::size_t rows, std::size_t cols);

  /// Adopts an existing row-major buffer; its length must be rows*cols.
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  static Matrix identity(std::size_t n);
  static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  double* row(std::size_t i) { return data_.data() + i * cols_; }
  const double* row(std::size_t i) const { return data_.data() + i * cols_; }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

  bool same_shape(const Matrix& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix matmul(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& a);

Matrix add(const Matrix& a, const Matrix& b);
Matrix sub(const Matrix& a, const Matrix& b);
Matrix scale(const Matrix& a, double c);
Matrix hadamard(const Matrix& a, const Matrix& b);
Matrix square(const Matrix& a);

/// Elementwise a/b. No epsilon guard here; callers add one to the
/// denominator when zeros are possible.
Matrix div_elementwise(const Matrix& a, const Matrix& b);

/// y += alpha * x, in place.
void axpy(Matrix& y, double alpha, const Matrix& x);
void scale_inplace(Matrix& a, double c);

double fro_norm(const Matrix& a);

/// l2 norm of each column; result has a.cols() entries.
std::vector<double> col_norms(const Matrix& a);
/// l2 norm of each row; result has a.rows() entries.
std::vector<double> row_norms(const Matrix& a);
/// l1 norm of each column.
std::vector<double> l1_norm_cols(const Matrix& a);

bool all_finite(const Matrix& a);
double max_abs_diff(const Matrix& a, const Matrix& b);

/// ||got - want||_F / ||want||_F, or the absolute norm when want is zero.
double rel_fro_error(const Matrix& got, const Matrix& want);

/// Singular values in descending order (thin SVD of a dense matrix).
std::vector<double> singular_values(const Matrix& a);

}  // namespace apollo
