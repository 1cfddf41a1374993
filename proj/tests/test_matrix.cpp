#include <doctest.h>

#include <cmath>

#include "apollo/errors.hpp"
#include "apollo/matrix.hpp"
#include "apollo/rng.hpp"

using namespace apollo;

TEST_CASE("matmul identity and hand values") {
  const Matrix b = Matrix::from_rows({{1, 2, 3}, {4, 5, 6}, {7, 8, 9}});
  CHECK(max_abs_diff(matmul(Matrix::identity(3), b), b) == 0.0);

  const Matrix a = Matrix::from_rows({{1, 2}, {3, 4}});
  const Matrix ones = Matrix::from_rows({{1}, {1}});
  const Matrix c = matmul(a, ones);
  CHECK(c.rows() == 2);
  CHECK(c.cols() == 1);
  CHECK(c(0, 0) == doctest::Approx(3.0));
  CHECK(c(1, 0) == doctest::Approx(7.0));
}

TEST_CASE("matmul rejects shape mismatch") {
  const Matrix a(2, 3);
  CHECK_THROWS_AS(matmul(a, a), DimensionError);
}

TEST_CASE("matmul associativity on random matrices") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Matrix a = gaussian_matrix(mix_seed(seed, 1), 4, 6, 1.0);
    const Matrix b = gaussian_matrix(mix_seed(seed, 2), 6, 5, 1.0);
    const Matrix c = gaussian_matrix(mix_seed(seed, 3), 5, 7, 1.0);
    const Matrix left = matmul(matmul(a, b), c);
    const Matrix right = matmul(a, matmul(b, c));
    CHECK(rel_fro_error(left, right) <= 1e-10);
  }
}

TEST_CASE("column norms") {
  const Matrix v = Matrix::from_rows({{3}, {4}});
  CHECK(col_norms(v) == std::vector<double>{5.0});

  const Matrix zero(3, 2);
  for (double n : col_norms(zero)) CHECK(n == 0.0);

  const auto id_norms = col_norms(Matrix::identity(2));
  CHECK(id_norms[0] == 1.0);
  CHECK(id_norms[1] == 1.0);
}

TEST_CASE("column norms are additive over stacked row blocks") {
  const Matrix a = gaussian_matrix(11, 4, 5, 1.0);
  const Matrix b = gaussian_matrix(12, 3, 5, 1.0);
  Matrix stacked(7, 5);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 5; ++j) stacked(i, j) = a(i, j);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 5; ++j) stacked(4 + i, j) = b(i, j);
  const auto na = col_norms(a);
  const auto nb = col_norms(b);
  const auto ns = col_norms(stacked);
  for (std::size_t j = 0; j < 5; ++j)
    CHECK(na[j] * na[j] + nb[j] * nb[j] == doctest::Approx(ns[j] * ns[j]).epsilon(1e-12));
}

TEST_CASE("frobenius and l1 norms") {
  CHECK(fro_norm(Matrix::from_rows({{3, 4}})) == doctest::Approx(5.0));
  const auto l1 = l1_norm_cols(Matrix::from_rows({{1, -2}, {3, 0}}));
  CHECK(l1[0] == doctest::Approx(4.0));
  CHECK(l1[1] == doctest::Approx(2.0));
}

TEST_CASE("elementwise helpers") {
  const Matrix zero(2, 2);
  CHECK(fro_norm(square(zero)) == 0.0);

  const Matrix a = Matrix::from_rows({{1, 2}, {3, 4}});
  const Matrix b = Matrix::from_rows({{2, 2}, {2, 2}});
  CHECK(max_abs_diff(add(a, b), Matrix::from_rows({{3, 4}, {5, 6}})) == 0.0);
  CHECK(max_abs_diff(sub(a, b), Matrix::from_rows({{-1, 0}, {1, 2}})) == 0.0);
  CHECK(max_abs_diff(hadamard(a, b), Matrix::from_rows({{2, 4}, {6, 8}})) == 0.0);
  CHECK(max_abs_diff(div_elementwise(a, b), Matrix::from_rows({{0.5, 1}, {1.5, 2}})) == 0.0);
  CHECK_THROWS_AS(add(a, Matrix(3, 2)), DimensionError);

  Matrix y = a;
  axpy(y, 2.0, b);
  CHECK(max_abs_diff(y, Matrix::from_rows({{5, 6}, {7, 8}})) == 0.0);
}

TEST_CASE("transpose round trip and singular values") {
  const Matrix a = gaussian_matrix(99, 5, 3, 1.0);
  CHECK(max_abs_diff(transpose(transpose(a)), a) == 0.0);

  const Matrix d = Matrix::from_rows({{3, 0, 0}, {0, 2, 0}});
  const auto sv = singular_values(d);
  REQUIRE(sv.size() == 2);
  CHECK(sv[0] == doctest::Approx(3.0));
  CHECK(sv[1] == doctest::Approx(2.0));
}

TEST_CASE("finiteness of sampled and combined matrices") {
  const Matrix a = gaussian_matrix(5, 16, 16, 2.0);
  CHECK(all_finite(a));
  CHECK(all_finite(matmul(a, a)));
  CHECK(all_finite(square(a)));
}
