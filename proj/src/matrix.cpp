#include "apollo/matrix.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <cmath>
#include <string>

#include "apollo/errors.hpp"

namespace apollo {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw DimensionError(what);
}

std::string shape_str(const Matrix& a) {
  return std::to_string(a.rows()) + "x" + std::to_string(a.cols());
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {
  require(rows > 0 && cols > 0, "matrix dimensions must be positive");
}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  require(rows > 0 && cols > 0, "matrix dimensions must be positive");
  require(data_.size() == rows * cols, "buffer length does not match rows*cols");
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  require(rows.size() > 0, "from_rows needs at least one row");
  const std::size_t n_cols = rows.begin()->size();
  std::vector<double> buf;
  buf.reserve(rows.size() * n_cols);
  for (const auto& r : rows) {
    require(r.size() == n_cols, "from_rows rows have unequal lengths");
    buf.insert(buf.end(), r.begin(), r.end());
  }
  return Matrix(rows.size(), n_cols, std::move(buf));
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  require(a.cols() == b.rows(),
          "matmul shape mismatch: " + shape_str(a) + " * " + shape_str(b));
  Matrix c(a.rows(), b.cols());
  // i-k-j order keeps both B and C accesses contiguous in row-major storage.
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double* c_row = c.row(i);
    const double* a_row = a.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a_row[k];
      if (aik == 0.0) continue;
      const double* b_row = b.row(k);
      for (std::size_t j = 0; j < b.cols(); ++j) c_row[j] += aik * b_row[j];
    }
  }
  return c;
}

Matrix transpose(const Matrix& a) {
  Matrix t(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  return t;
}

namespace {

template <typename F>
Matrix zip(const Matrix& a, const Matrix& b, F f, const char* op) {
  require(a.same_shape(b), std::string(op) + " shape mismatch: " + shape_str(a) +
                               " vs " + shape_str(b));
  Matrix out(a.rows(), a.cols());
  auto ad = a.data();
  auto bd = b.data();
  auto od = out.data();
  for (std::size_t i = 0; i < ad.size(); ++i) od[i] = f(ad[i], bd[i]);
  return out;
}

}  // namespace

Matrix add(const Matrix& a, const Matrix& b) {
  return zip(a, b, [](double x, double y) { return x + y; }, "add");
}

Matrix sub(const Matrix& a, const Matrix& b) {
  return zip(a, b, [](double x, double y) { return x - y; }, "sub");
}

Matrix hadamard(const Matrix& a, const Matrix& b) {
  return zip(a, b, [](double x, double y) { return x * y; }, "hadamard");
}

Matrix div_elementwise(const Matrix& a, const Matrix& b) {
  return zip(a, b, [](double x, double y) { return x / y; }, "div");
}

Matrix scale(const Matrix& a, double c) {
  Matrix out = a;
  scale_inplace(out, c);
  return out;
}

Matrix square(const Matrix& a) {
  Matrix out(a.rows(), a.cols());
  auto ad = a.data();
  auto od = out.data();
  for (std::size_t i = 0; i < ad.size(); ++i) od[i] = ad[i] * ad[i];
  return out;
}

void axpy(Matrix& y, double alpha, const Matrix& x) {
  require(y.same_shape(x), "axpy shape mismatch");
  auto yd = y.data();
  auto xd = x.data();
  for (std::size_t i = 0; i < yd.size(); ++i) yd[i] += alpha * xd[i];
}

void scale_inplace(Matrix& a, double c) {
  for (double& v : a.data()) v *= c;
}

double fro_norm(const Matrix& a) {
  double acc = 0.0;
  for (double v : a.data()) acc += v * v;
  return std::sqrt(acc);
}

std::vector<double> col_norms(const Matrix& a) {
  std::vector<double> acc(a.cols(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const double* r = a.row(i);
    for (std::size_t j = 0; j < a.cols(); ++j) acc[j] += r[j] * r[j];
  }
  for (double& v : acc) v = std::sqrt(v);
  return acc;
}

std::vector<double> row_norms(const Matrix& a) {
  std::vector<double> out(a.rows(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const double* r = a.row(i);
    double acc = 0.0;
    for (std::size_t j = 0; j < a.cols(); ++j) acc += r[j] * r[j];
    out[i] = std::sqrt(acc);
  }
  return out;
}

std::vector<double> l1_norm_cols(const Matrix& a) {
  std::vector<double> acc(a.cols(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const double* r = a.row(i);
    for (std::size_t j = 0; j < a.cols(); ++j) acc[j] += std::abs(r[j]);
  }
  return acc;
}

bool all_finite(const Matrix& a) {
  for (double v : a.data())
    if (!std::isfinite(v)) return false;
  return true;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
  require(a.same_shape(b), "max_abs_diff shape mismatch");
  double m = 0.0;
  auto ad = a.data();
  auto bd = b.data();
  for (std::size_t i = 0; i < ad.size(); ++i)
    m = std::max(m, std::abs(ad[i] - bd[i]));
  return m;
}

double rel_fro_error(const Matrix& got, const Matrix& want) {
  const double denom = fro_norm(want);
  const double num = fro_norm(sub(got, want));
  return denom > 0.0 ? num / denom : num;
}

std::vector<double> singular_values(const Matrix& a) {
  Eigen::MatrixXd m(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) m(i, j) = a(i, j);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const auto& sv = svd.singularValues();
  return std::vector<double>(sv.data(), sv.data() + sv.size());
}

}  // namespace apollo
