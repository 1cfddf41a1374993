#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "apollo/matrix.hpp"

namespace apollo {

enum class TaskKind { QuadraticBowl, LinearRegression, MlpClassifier };

/// A desk-scale optimization problem with analytic gradients. `eval`
/// returns the loss at the given parameters and, when `grads` is non-null,
/// fills it with one gradient matrix per parameter (matching shapes). All
/// task data is baked in at construction, so `eval` is pure.
struct Task {
  TaskKind kind = TaskKind::QuadraticBowl;
  std::string name;
  std::vector<Matrix> initial_params;
  // Planted solution when the task has one (quadratic and regression);
  // empty otherwise.
  std::vector<Matrix> reference_params;
  std::function<double(const std::vector<Matrix>&, std::vector<Matrix>*)> eval;

  double loss(const std::vector<Matrix>& params) const { return eval(params, nullptr); }
};

/// f(W) = 1/2 ||A W - B||_F^2 with A = U diag(sigma) V^T, singular values
/// log-spaced in [1, condition], and B = A W_opt for a seeded W_opt. The
/// optimum loss is exactly zero.
Task make_quadratic(std::size_t dim, double condition, std::uint64_t seed);

/// Least squares on synthetic data: f(W) = 1/(2N) ||W X - Y||_F^2 with
/// Y = W_opt X plus small noise. W is out_dim x in_dim.
Task make_linear_regression(std::size_t in_dim, std::size_t out_dim,
                            std::size_t samples, std::uint64_t seed);

/// Two-layer classifier (affine, tanh, affine, softmax cross-entropy) on
/// seeded Gaussian clusters, one cluster per class. Weight matrices are
/// deliberately non-square. Parameters: W1, b1, W2, b2.
Task make_mlp(std::size_t input_dim, std::size_t hidden, std::size_t classes,
              std::size_t samples, std::uint64_t seed);

/// Same classifier on caller-provided data. `inputs` is input_dim x
/// samples, labels[s] < classes names the target column.
Task make_mlp_from_data(Matrix inputs, std::vector<std::size_t> labels,
                        std::size_t classes, std::size_t hidden,
                        std::uint64_t seed);

struct GradientCheckReport {
  std::string task;
  double max_rel_error = 0.0;
  double tolerance = 0.0;
  int points = 0;
  bool pass = false;
};

/// Compares the analytic gradient against central finite differences along
/// random directions and random single coordinates at `points` random
/// parameter settings.
GradientCheckReport gradient_check(const Task& task, int points,
                                   std::uint64_t seed, double tolerance = 1e-5);

}  // namespace apollo
