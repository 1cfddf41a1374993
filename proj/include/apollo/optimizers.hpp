#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "apollo/matrix.hpp"
#include "apollo/projection.hpp"

namespace apollo {

enum class Variant { AdamW, Sgd, Apollo, ApolloMini, GaloreRp };

std::string variant_name(Variant v);
Variant variant_from_name(const std::string& name);

/// Shared hyperparameter bundle for every optimizer variant. Fields that a
/// variant does not use are ignored by its step function.
struct OptimizerConfig {
  Variant variant = Variant::AdamW;
  double lr = 1e-3;
  double scale = 1.0;  // alpha, multiplies the structured update
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double weight_decay = 0.0;
  std::optional<double> growth_limit = std::nullopt;  // gamma > 1; nullopt = off
  std::size_t rank = 1;
  long period = 200;  // projector refresh period
  bool bias_correction = true;
  ProjectorKind projector = ProjectorKind::RandomGaussian;

  static OptimizerConfig adamw(double lr);
  static OptimizerConfig sgd(double lr);
  static OptimizerConfig apollo(double lr, std::size_t rank);
  static OptimizerConfig apollo_mini(double lr);
  static OptimizerConfig galore_rp(double lr, std::size_t rank);

  void validate() const;
};

/// Full-shape AdamW state. prev_update_norm is only touched by the
/// channel-wise reference rule, which shares the growth limiter with the
/// low-rank variants.
struct AdamWState {
  Matrix m;
  Matrix v;
  long step = 0;
  std::optional<double> prev_update_norm;
};

/// Low-rank state for Apollo, ApolloMini and GaloreRp: moments live in the
/// rank x d_large space defined by the projector. Moments start at zero.
struct ApolloState {
  Matrix m;
  Matrix v;
  long step = 0;
  std::optional<double> prev_update_norm;
  ProjectorState projector;
};

AdamWState make_adamw_state(std::size_t rows, std::size_t cols);
ApolloState make_apollo_state(const OptimizerConfig& cfg, std::uint64_t base_seed,
                              std::uint64_t param_id, std::size_t rows,
                              std::size_t cols);

/// Per-step diagnostics. update_norm is the Frobenius norm of the applied
/// gradient-derived update before the learning rate, i.e. the quantity the
/// growth limiter tracks.
struct StepInfo {
  std::vector<double> scales;  // per-channel factors; one entry for tensor-wise
  double mean_scale = 0.0;
  double update_norm = 0.0;
  bool limited = false;
};

StepInfo adamw_step(Matrix& w, const Matrix& g, AdamWState& state,
                    const OptimizerConfig& cfg);

/// Channel-wise learning-rate rule computed from full-shape moments:
/// s_j = ||m_hat/(sqrt(v_hat)+eps) channel j|| / (||g channel j|| + eps),
/// applied to the raw gradient. Reference implementation that apollo_step
/// must reproduce under an identity projector.
StepInfo structured_adamw_step(Matrix& w, const Matrix& g, AdamWState& state,
                               const OptimizerConfig& cfg);

StepInfo apollo_step(Matrix& w, const Matrix& g, ApolloState& state,
                     const OptimizerConfig& cfg);

StepInfo sgd_step(Matrix& w, const Matrix& g, const OptimizerConfig& cfg);

/// Low-rank AdamW baseline: runs AdamW on the projected gradient and maps
/// the update back through the projector transpose.
StepInfo galore_rp_step(Matrix& w, const Matrix& g, ApolloState& state,
                        const OptimizerConfig& cfg);

struct LimiterResult {
  double norm = 0.0;
  bool limited = false;
};

/// Caps the growth of consecutive update norms: when prev_norm is present
/// and ||update|| > gamma * prev_norm, rescales the update in place to norm
/// gamma * prev_norm. Returns the recorded norm of the final update. A
/// missing or zero prev_norm gives no growth reference and passes through.
LimiterResult norm_growth_limiter(Matrix& update, std::optional<double> prev_norm,
                                  double gamma);

/// Stored optimizer-state scalars per m x n parameter (m <= n) at rank r.
/// The low-rank variants carry a constant 2 for the sampling seed and the
/// limiter's previous norm.
std::size_t state_element_count(Variant v, std::size_t m, std::size_t n,
                                std::size_t r);

}  // namespace apollo
