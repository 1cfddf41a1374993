#pragma once

#include <cstdint>
#include <span>
#include <string>

#include "apollo/matrix.hpp"

namespace apollo {

enum class ProjectorKind {
  RandomGaussian,  // reseeded N(0, 1/rank) matrix, the default
  TopSingular,     // top-r left singular vectors of the current gradient
  Identity,        // no compression; used by equivalence tests
};

/// Which side of the parameter gets compressed. RowsSmall means rows <=
/// cols: the projector acts on rows and channels run along columns.
/// ColsSmall is the transposed case, so channels always lie along the
/// parameter's larger dimension.
enum class Orientation { RowsSmall, ColsSmall };

Orientation orientation_for(std::size_t rows, std::size_t cols);

std::string projector_kind_name(ProjectorKind kind);

/// Per-parameter projector. The projection matrix is regenerated whenever
/// step % period == 0 (step 0 included); for RandomGaussian it is a pure
/// function of (base_seed, param_id, refresh_count), so a state can be
/// reconstructed from those three values alone.
struct ProjectorState {
  ProjectorKind kind = ProjectorKind::RandomGaussian;
  std::size_t rank = 1;
  long period = 200;
  std::uint64_t base_seed = 0;
  std::uint64_t param_id = 0;
  long refresh_count = 0;
  Orientation orientation = Orientation::RowsSmall;
  std::size_t target_rows = 0;
  std::size_t target_cols = 0;
  Matrix p;  // rank x d_small; empty until the first refresh

  std::size_t d_small() const { return std::min(target_rows, target_cols); }
  std::size_t d_large() const { return std::max(target_rows, target_cols); }
};

/// Validates rank against the parameter shape (rank <= min(rows, cols);
/// Identity additionally requires rank == min(rows, cols)).
ProjectorState make_projector(ProjectorKind kind, std::size_t rank, long period,
                              std::uint64_t base_seed, std::uint64_t param_id,
                              std::size_t rows, std::size_t cols);

/// Regenerates the projection when the step is on the refresh schedule,
/// otherwise leaves the state untouched. TopSingular recomputes the basis
/// from `grad`; RandomGaussian only derives a fresh seed.
void refresh_if_due(ProjectorState& state, long step, const Matrix& grad);

/// Compress the gradient: P*G for RowsSmall, P*G^T for ColsSmall. The
/// result is rank x d_large, so column j is always channel j.
Matrix project(const ProjectorState& state, const Matrix& grad);

/// Map a rank x d_large matrix back to the parameter's own shape via P^T.
Matrix project_back(const ProjectorState& state, const Matrix& low_rank);

/// Scale channel j of `g` by s[j]; channels are columns for RowsSmall and
/// rows for ColsSmall. s must have d_large entries.
Matrix apply_scaling(const Matrix& g, std::span<const double> s, Orientation orientation);

/// Uniform (tensor-wise) scaling.
Matrix apply_scaling(const Matrix& g, double s);

/// Channel norms of a full-shape matrix: column norms for RowsSmall, row
/// norms for ColsSmall. Always d_large entries.
std::vector<double> channel_norms(const Matrix& g, Orientation orientation);

}  // namespace apollo
