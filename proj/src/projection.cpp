#include "apollo/projection.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <cmath>

#include "apollo/errors.hpp"
#include "apollo/rng.hpp"

namespace apollo {

Orientation orientation_for(std::size_t rows, std::size_t cols) {
  return rows <= cols ? Orientation::RowsSmall : Orientation::ColsSmall;
}

std::string projector_kind_name(ProjectorKind kind) {
  switch (kind) {
    case ProjectorKind::RandomGaussian: return "random-gaussian";
    case ProjectorKind::TopSingular: return "top-singular";
    case ProjectorKind::Identity: return "identity";
  }
  return "unknown";
}

ProjectorState make_projector(ProjectorKind kind, std::size_t rank, long period,
                              std::uint64_t base_seed, std::uint64_t param_id,
                              std::size_t rows, std::size_t cols) {
  if (rows < 1 || cols < 1)
    throw DimensionError("projector target dimensions must be positive");
  if (period < 1) throw ConfigError("projector refresh period must be >= 1");
  ProjectorState st;
  st.kind = kind;
  st.rank = rank;
  st.period = period;
  st.base_seed = base_seed;
  st.param_id = param_id;
  st.orientation = orientation_for(rows, cols);
  st.target_rows = rows;
  st.target_cols = cols;
  const std::size_t d_small = st.d_small();
  if (rank < 1 || rank > d_small)
    throw ConfigError("projector rank " + std::to_string(rank) +
                      " out of range for parameter " + std::to_string(rows) + "x" +
                      std::to_string(cols) + " (max " + std::to_string(d_small) + ")");
  if (kind == ProjectorKind::Identity && rank != d_small)
    throw ConfigError("identity projector requires rank == min(rows, cols)");
  if (kind == ProjectorKind::Identity) st.p = Matrix::identity(d_small);
  return st;
}

namespace {

// Orientation-normalized view of the gradient: d_small x d_large.
Matrix oriented(const ProjectorState& st, const Matrix& grad) {
  return st.orientation == Orientation::RowsSmall ? grad : transpose(grad);
}

// Top-r left singular vectors of `g_small` (d_small x d_large), returned as
// an r x d_small matrix. Each vector is flipped so its largest-magnitude
// component is positive, which pins the sign left free by the SVD.
Matrix top_left_singular(const Matrix& g_small, std::size_t rank,
                         std::uint64_t param_id) {
  Eigen::MatrixXd m(g_small.rows(), g_small.cols());
  for (std::size_t i = 0; i < g_small.rows(); ++i)
    for (std::size_t j = 0; j < g_small.cols(); ++j) m(i, j) = g_small(i, j);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinU);
  const Eigen::MatrixXd& u = svd.matrixU();
  if (!u.allFinite() || !svd.singularValues().allFinite())
    throw NumericalError("svd failed for parameter " + std::to_string(param_id));
  Matrix p(rank, g_small.rows());
  for (std::size_t k = 0; k < rank; ++k) {
    std::size_t arg_max = 0;
    for (std::size_t i = 1; i < g_small.rows(); ++i)
      if (std::abs(u(i, k)) > std::abs(u(arg_max, k))) arg_max = i;
    const double sign = u(arg_max, k) < 0.0 ? -1.0 : 1.0;
    for (std::size_t i = 0; i < g_small.rows(); ++i) p(k, i) = sign * u(i, k);
  }
  return p;
}

}  // namespace

void refresh_if_due(ProjectorState& state, long step, const Matrix& grad) {
  if (step < 0) throw ConfigError("refresh step must be non-negative");
  if (step % state.period != 0) return;
  switch (state.kind) {
    case ProjectorKind::Identity:
      state.p = Matrix::identity(state.d_small());
      break;
    case ProjectorKind::RandomGaussian: {
      const std::uint64_t seed = mix_seed(mix_seed(state.base_seed, state.param_id),
                                          static_cast<std::uint64_t>(state.refresh_count));
      state.p = gaussian_matrix(seed, state.rank, state.d_small(),
                                1.0 / static_cast<double>(state.rank));
      break;
    }
    case ProjectorKind::TopSingular: {
      if (grad.rows() != state.target_rows || grad.cols() != state.target_cols)
        throw DimensionError("gradient shape does not match projector target");
      state.p = top_left_singular(oriented(state, grad), state.rank, state.param_id);
      break;
    }
  }
  ++state.refresh_count;
}

Matrix project(const ProjectorState& state, const Matrix& grad) {
  if (grad.rows() != state.target_rows || grad.cols() != state.target_cols)
    throw DimensionError("gradient shape does not match projector target");
  if (state.p.empty())
    throw NumericalError("projector used before its first refresh");
  return state.orientation == Orientation::RowsSmall ? matmul(state.p, grad)
                                                     : matmul(state.p, transpose(grad));
}

Matrix project_back(const ProjectorState& state, const Matrix& low_rank) {
  if (low_rank.rows() != state.rank || low_rank.cols() != state.d_large())
    throw DimensionError("low-rank update has the wrong shape");
  Matrix full = matmul(transpose(state.p), low_rank);  // d_small x d_large
  return state.orientation == Orientation::RowsSmall ? full : transpose(full);
}

Matrix apply_scaling(const Matrix& g, std::span<const double> s, Orientation orientation) {
  const std::size_t channels =
      orientation == Orientation::RowsSmall ? g.cols() : g.rows();
  if (s.size() != channels)
    throw DimensionError("scaling vector length " + std::to_string(s.size()) +
                         " does not match channel count " + std::to_string(channels));
  Matrix out(g.rows(), g.cols());
  if (orientation == Orientation::RowsSmall) {
    for (std::size_t i = 0; i < g.rows(); ++i)
      for (std::size_t j = 0; j < g.cols(); ++j) out(i, j) = g(i, j) * s[j];
  } else {
    for (std::size_t i = 0; i < g.rows(); ++i) {
      const double si = s[i];
      for (std::size_t j = 0; j < g.cols(); ++j) out(i, j) = g(i, j) * si;
    }
  }
  return out;
}

Matrix apply_scaling(const Matrix& g, double s) { return scale(g, s); }

std::vector<double> channel_norms(const Matrix& g, Orientation orientation) {
  return orientation == Orientation::RowsSmall ? col_norms(g) : row_norms(g);
}

}  // namespace apollo
