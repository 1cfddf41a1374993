#include "apollo/tasks.hpp"

#include <algorithm>
#include <cmath>

#include "apollo/errors.hpp"
#include "apollo/rng.hpp"

namespace apollo {

namespace {

// Modified Gram-Schmidt with a second pass; plenty for seeded Gaussian
// input at desk scale.
Matrix orthonormalize(Matrix a) {
  for (int pass = 0; pass < 2; ++pass) {
    for (std::size_t j = 0; j < a.cols(); ++j) {
      for (std::size_t k = 0; k < j; ++k) {
        double dot = 0.0;
        for (std::size_t i = 0; i < a.rows(); ++i) dot += a(i, j) * a(i, k);
        for (std::size_t i = 0; i < a.rows(); ++i) a(i, j) -= dot * a(i, k);
      }
      double norm = 0.0;
      for (std::size_t i = 0; i < a.rows(); ++i) norm += a(i, j) * a(i, j);
      norm = std::sqrt(norm);
      if (norm == 0.0) throw NumericalError("degenerate basis in orthonormalize");
      for (std::size_t i = 0; i < a.rows(); ++i) a(i, j) /= norm;
    }
  }
  return a;
}

}  // namespace

Task make_quadratic(std::size_t dim, double condition, std::uint64_t seed) {
  if (dim < 2) throw ConfigError("quadratic dimension must be >= 2");
  if (condition < 1.0) throw ConfigError("condition number must be >= 1");

  const Matrix u = orthonormalize(gaussian_matrix(mix_seed(seed, 1), dim, dim, 1.0));
  const Matrix v = orthonormalize(gaussian_matrix(mix_seed(seed, 2), dim, dim, 1.0));
  Matrix a(dim, dim);
  for (std::size_t i = 0; i < dim; ++i) {
    const double sigma =
        dim > 1 ? std::pow(condition, static_cast<double>(i) / static_cast<double>(dim - 1))
                : 1.0;
    for (std::size_t r = 0; r < dim; ++r)
      for (std::size_t c = 0; c < dim; ++c) a(r, c) += u(r, i) * sigma * v(c, i);
  }
  const Matrix w_opt = gaussian_matrix(mix_seed(seed, 3), dim, dim, 1.0);
  const Matrix b = matmul(a, w_opt);
  const Matrix at = transpose(a);

  Task task;
  task.kind = TaskKind::QuadraticBowl;
  task.name = "quad";
  task.initial_params = {Matrix(dim, dim)};
  task.reference_params = {w_opt};
  task.eval = [a, b, at](const std::vector<Matrix>& params,
                         std::vector<Matrix>* grads) {
    const Matrix residual = sub(matmul(a, params[0]), b);
    const double loss = 0.5 * fro_norm(residual) * fro_norm(residual);
    if (grads) *grads = {matmul(at, residual)};
    return loss;
  };
  return task;
}

Task make_linear_regression(std::size_t in_dim, std::size_t out_dim,
                            std::size_t samples, std::uint64_t seed) {
  if (in_dim < 1 || out_dim < 1 || samples < 1)
    throw ConfigError("linear regression dimensions must be >= 1");
  const Matrix x = gaussian_matrix(mix_seed(seed, 1), in_dim, samples, 1.0);
  const Matrix w_opt = gaussian_matrix(mix_seed(seed, 2), out_dim, in_dim, 1.0);
  Matrix y = matmul(w_opt, x);
  axpy(y, 0.01, gaussian_matrix(mix_seed(seed, 3), out_dim, samples, 1.0));
  const Matrix xt = transpose(x);
  const double inv_n = 1.0 / static_cast<double>(samples);

  Task task;
  task.kind = TaskKind::LinearRegression;
  task.name = "linreg";
  task.initial_params = {Matrix(out_dim, in_dim)};
  task.reference_params = {w_opt};
  task.eval = [x, y, xt, inv_n](const std::vector<Matrix>& params,
                                std::vector<Matrix>* grads) {
    const Matrix residual = sub(matmul(params[0], x), y);
    const double loss = 0.5 * inv_n * fro_norm(residual) * fro_norm(residual);
    if (grads) {
      Matrix g = matmul(residual, xt);
      scale_inplace(g, inv_n);
      *grads = {std::move(g)};
    }
    return loss;
  };
  return task;
}

Task make_mlp(std::size_t input_dim, std::size_t hidden, std::size_t classes,
              std::size_t samples, std::uint64_t seed) {
  if (input_dim < 1 || hidden < 1 || classes < 1 || samples < 1)
    throw ConfigError("mlp dimensions must be >= 1");

  // Class means drawn tightly enough that clusters overlap; the training
  // loss then plateaus at a nonzero floor instead of collapsing to zero.
  Matrix x(input_dim, samples);
  std::vector<std::size_t> labels(samples);
  const Matrix means =
      gaussian_matrix(mix_seed(seed, 1), input_dim, classes, 0.35 * 0.35);
  SplitMix64 noise(mix_seed(seed, 2));
  for (std::size_t s = 0; s < samples; ++s) {
    labels[s] = s % classes;
    for (std::size_t i = 0; i < input_dim; ++i)
      x(i, s) = means(i, labels[s]) + noise.next_gaussian();
  }
  return make_mlp_from_data(std::move(x), std::move(labels), classes, hidden, seed);
}

Task make_mlp_from_data(Matrix inputs, std::vector<std::size_t> labels,
                        std::size_t classes, std::size_t hidden,
                        std::uint64_t seed) {
  if (hidden < 1 || classes < 1) throw ConfigError("mlp dimensions must be >= 1");
  if (labels.size() != inputs.cols())
    throw DimensionError("one label per input column required");
  for (std::size_t l : labels)
    if (l >= classes) throw ConfigError("label out of range");

  const std::size_t input_dim = inputs.rows();
  const std::size_t samples = inputs.cols();
  Matrix x = std::move(inputs);
  Matrix y(classes, samples);
  for (std::size_t s = 0; s < samples; ++s) y(labels[s], s) = 1.0;

  const Matrix xt = transpose(x);
  const double inv_n = 1.0 / static_cast<double>(samples);

  Task task;
  task.kind = TaskKind::MlpClassifier;
  task.name = "mlp";
  task.initial_params = {
      gaussian_matrix(mix_seed(seed, 3), hidden, input_dim, 1.0 / static_cast<double>(input_dim)),
      Matrix(hidden, 1),
      gaussian_matrix(mix_seed(seed, 4), classes, hidden, 1.0 / static_cast<double>(hidden)),
      Matrix(classes, 1),
  };
  task.eval = [x, xt, y, labels, inv_n](const std::vector<Matrix>& params,
                                        std::vector<Matrix>* grads) {
    const Matrix& w1 = params[0];
    const Matrix& b1 = params[1];
    const Matrix& w2 = params[2];
    const Matrix& b2 = params[3];
    const std::size_t n = labels.size();

    Matrix h = matmul(w1, x);
    for (std::size_t i = 0; i < h.rows(); ++i)
      for (std::size_t s = 0; s < n; ++s) h(i, s) = std::tanh(h(i, s) + b1(i, 0));

    Matrix logits = matmul(w2, h);
    for (std::size_t c = 0; c < logits.rows(); ++c)
      for (std::size_t s = 0; s < n; ++s) logits(c, s) += b2(c, 0);

    // Column-wise softmax cross-entropy, shifted by the column max.
    Matrix probs(logits.rows(), n);
    double loss = 0.0;
    for (std::size_t s = 0; s < n; ++s) {
      double max_logit = logits(0, s);
      for (std::size_t c = 1; c < logits.rows(); ++c)
        max_logit = std::max(max_logit, logits(c, s));
      double denom = 0.0;
      for (std::size_t c = 0; c < logits.rows(); ++c) {
        probs(c, s) = std::exp(logits(c, s) - max_logit);
        denom += probs(c, s);
      }
      for (std::size_t c = 0; c < logits.rows(); ++c) probs(c, s) /= denom;
      loss -= std::log(probs(labels[s], s));
    }
    loss *= inv_n;

    if (grads) {
      Matrix d_logits = sub(probs, y);
      scale_inplace(d_logits, inv_n);

      Matrix g_w2 = matmul(d_logits, transpose(h));
      Matrix g_b2(b2.rows(), 1);
      for (std::size_t c = 0; c < d_logits.rows(); ++c)
        for (std::size_t s = 0; s < n; ++s) g_b2(c, 0) += d_logits(c, s);

      Matrix d_h = matmul(transpose(w2), d_logits);
      for (std::size_t i = 0; i < d_h.rows(); ++i)
        for (std::size_t s = 0; s < n; ++s)
          d_h(i, s) *= 1.0 - h(i, s) * h(i, s);

      Matrix g_w1 = matmul(d_h, xt);
      Matrix g_b1(b1.rows(), 1);
      for (std::size_t i = 0; i < d_h.rows(); ++i)
        for (std::size_t s = 0; s < n; ++s) g_b1(i, 0) += d_h(i, s);

      *grads = {std::move(g_w1), std::move(g_b1), std::move(g_w2), std::move(g_b2)};
    }
    return loss;
  };
  return task;
}

GradientCheckReport gradient_check(const Task& task, int points,
                                   std::uint64_t seed, double tolerance) {
  GradientCheckReport report;
  report.task = task.name;
  report.tolerance = tolerance;
  report.points = points;

  for (int p = 0; p < points; ++p) {
    SplitMix64 rng(mix_seed(seed, static_cast<std::uint64_t>(p)));
    std::vector<Matrix> params = task.initial_params;
    for (Matrix& w : params)
      for (double& v : w.data()) v += 0.5 * rng.next_gaussian();

    std::vector<Matrix> grads;
    task.eval(params, &grads);
    double grad_scale = 0.0;
    for (const Matrix& g : grads) grad_scale += fro_norm(g) * fro_norm(g);
    grad_scale = std::sqrt(grad_scale);

    // Directional derivatives along random unit directions; a h ~ eps^(1/3)
    // step balances truncation and roundoff for central differences.
    for (int d = 0; d < 8; ++d) {
      std::vector<Matrix> dir;
      double dir_norm = 0.0;
      for (const Matrix& w : params) {
        Matrix m(w.rows(), w.cols());
        for (double& v : m.data()) v = rng.next_gaussian();
        dir_norm += fro_norm(m) * fro_norm(m);
        dir.push_back(std::move(m));
      }
      dir_norm = std::sqrt(dir_norm);
      for (Matrix& m : dir) scale_inplace(m, 1.0 / dir_norm);

      const double h = 6e-6;
      std::vector<Matrix> plus = params, minus = params;
      for (std::size_t k = 0; k < params.size(); ++k) {
        axpy(plus[k], h, dir[k]);
        axpy(minus[k], -h, dir[k]);
      }
      const double fd = (task.loss(plus) - task.loss(minus)) / (2.0 * h);
      double analytic = 0.0;
      for (std::size_t k = 0; k < params.size(); ++k) {
        auto gd = grads[k].data();
        auto dd = dir[k].data();
        for (std::size_t i = 0; i < gd.size(); ++i) analytic += gd[i] * dd[i];
      }
      const double denom = std::max({std::abs(fd), std::abs(analytic), 1e-8 * grad_scale});
      if (denom > 0.0)
        report.max_rel_error = std::max(report.max_rel_error,
                                        std::abs(fd - analytic) / denom);
    }
  }
  report.pass = report.max_rel_error <= tolerance;
  return report;
}

}  // namespace apollo
