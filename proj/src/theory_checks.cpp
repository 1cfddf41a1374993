#include "apollo/theory_checks.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "apollo/errors.hpp"
#include "apollo/optimizers.hpp"
#include "apollo/projection.hpp"
#include "apollo/rng.hpp"

namespace apollo {

namespace {

// Three binomial standard errors at the bound itself; finite trials of a
// true tail bound then stay below bound + slack with overwhelming margin.
double binomial_slack(double bound, long trials) {
  const double p = std::clamp(bound, 0.0, 1.0);
  return 3.0 * std::sqrt(p * (1.0 - p) / static_cast<double>(trials));
}

double quantile(std::vector<double> sorted, double q) {
  if (sorted.empty()) return 0.0;
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

OptimizerConfig fixed_projection_config(Variant variant, std::size_t rank,
                                        long steps) {
  OptimizerConfig cfg;
  cfg.variant = variant;
  cfg.lr = 1e-3;
  cfg.rank = rank;
  cfg.period = steps + 1;  // refresh once at step 0, then never
  cfg.bias_correction = false;
  cfg.growth_limit = std::nullopt;
  cfg.scale = 1.0;
  return cfg;
}

}  // namespace

BoundCheckReport check_norm_preservation(std::size_t rank, std::size_t dim,
                                         double epsilon, long trials,
                                         std::uint64_t seed) {
  if (rank < 1 || trials < 1) throw ConfigError("rank and trials must be >= 1");
  if (!(epsilon > 0.0 && epsilon < 1.0))
    throw ConfigError("epsilon must lie in (0, 1)");

  const Matrix x = gaussian_matrix(mix_seed(seed, 0xF1), dim, 1, 1.0);
  const double x_sq = fro_norm(x) * fro_norm(x);

  long failures = 0;
  for (long t = 0; t < trials; ++t) {
    const Matrix p = gaussian_matrix(mix_seed(seed, static_cast<std::uint64_t>(t)),
                                     rank, dim, 1.0 / static_cast<double>(rank));
    const Matrix px = matmul(p, x);
    const double px_sq = fro_norm(px) * fro_norm(px);
    if (std::abs(px_sq - x_sq) > epsilon * x_sq) ++failures;
  }

  BoundCheckReport report;
  report.check = "norm-preservation";
  report.trials = trials;
  report.epsilon = epsilon;
  report.bound = std::min(1.0, 2.0 * std::exp(-static_cast<double>(rank) * epsilon *
                                              epsilon / 8.0));
  report.slack = binomial_slack(report.bound, trials);
  report.empirical_failure_rate =
      static_cast<double>(failures) / static_cast<double>(trials);
  report.pass = report.empirical_failure_rate <= report.bound + report.slack;
  report.params = {{"rank", static_cast<double>(rank)},
                   {"dim", static_cast<double>(dim)}};
  return report;
}

IdentityCheckReport check_first_moment_identity(std::size_t rows, std::size_t cols,
                                                std::size_t rank, long steps,
                                                std::uint64_t seed) {
  const OptimizerConfig cfg = fixed_projection_config(Variant::Apollo, rank, steps);
  ApolloState state = make_apollo_state(cfg, seed, 0, rows, cols);
  Matrix w(rows, cols);

  const Orientation orientation = orientation_for(rows, cols);
  Matrix full_moment(std::min(rows, cols), std::max(rows, cols));

  IdentityCheckReport report;
  report.check = "first-moment";
  report.tolerance = 1e-10;
  for (long t = 0; t < steps; ++t) {
    const Matrix g = gaussian_matrix(mix_seed(seed, 0x1000 + t), rows, cols, 1.0);
    apollo_step(w, g, state, cfg);

    const Matrix oriented = orientation == Orientation::RowsSmall ? g : transpose(g);
    scale_inplace(full_moment, cfg.beta1);
    axpy(full_moment, 1.0 - cfg.beta1, oriented);
    const Matrix projected_full = matmul(state.projector.p, full_moment);
    report.max_rel_error =
        std::max(report.max_rel_error, rel_fro_error(state.m, projected_full));
  }
  report.pass = report.max_rel_error <= report.tolerance;
  report.params = {{"rows", static_cast<double>(rows)},
                   {"cols", static_cast<double>(cols)},
                   {"rank", static_cast<double>(rank)},
                   {"steps", static_cast<double>(steps)}};
  return report;
}

IdentityCheckReport check_second_moment_recursion(std::size_t rows, std::size_t cols,
                                                  std::size_t rank, long steps,
                                                  std::uint64_t seed) {
  const OptimizerConfig cfg = fixed_projection_config(Variant::Apollo, rank, steps);
  ApolloState state = make_apollo_state(cfg, seed, 0, rows, cols);
  Matrix w(rows, cols);

  const std::size_t channels = state.projector.d_large();
  // Channel norms ||R_k[:, j]||^2 for every past step.
  std::vector<std::vector<double>> sq_norm_history;

  IdentityCheckReport report;
  report.check = "second-moment-recursion";
  report.tolerance = 1e-10;
  for (long t = 0; t < steps; ++t) {
    const Matrix g = gaussian_matrix(mix_seed(seed, 0x2000 + t), rows, cols, 1.0);
    apollo_step(w, g, state, cfg);
    // Same projection the step used: the only refresh happens at t = 0.
    const Matrix r = project(state.projector, g);

    std::vector<double> sq(channels, 0.0);
    const std::vector<double> norms = col_norms(r);
    for (std::size_t j = 0; j < channels; ++j) sq[j] = norms[j] * norms[j];
    sq_norm_history.push_back(std::move(sq));

    const std::vector<double> lhs = l1_norm_cols(state.v);
    for (std::size_t j = 0; j < channels; ++j) {
      double rhs = 0.0;
      for (long k = 0; k <= t; ++k)
        rhs += std::pow(cfg.beta2, static_cast<double>(k)) *
               sq_norm_history[static_cast<std::size_t>(t - k)][j];
      rhs *= 1.0 - cfg.beta2;
      const double denom = std::max(std::abs(rhs), 1e-300);
      report.max_rel_error =
          std::max(report.max_rel_error, std::abs(lhs[j] - rhs) / denom);
    }
  }
  report.pass = report.max_rel_error <= report.tolerance;
  report.params = {{"rows", static_cast<double>(rows)},
                   {"cols", static_cast<double>(cols)},
                   {"rank", static_cast<double>(rank)},
                   {"steps", static_cast<double>(steps)}};
  return report;
}

std::size_t rank_for_second_moment_bound(double epsilon, long steps, double delta) {
  if (!(epsilon > 0.0 && epsilon < 1.0))
    throw ConfigError("epsilon must lie in (0, 1)");
  if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("delta must lie in (0, 1)");
  const double r = 8.0 / (epsilon * epsilon) *
                   std::log(2.0 * static_cast<double>(steps) / delta);
  return static_cast<std::size_t>(std::ceil(r));
}

BoundCheckReport check_second_moment_bound(std::size_t dim, std::size_t channels,
                                           std::size_t rank, long steps,
                                           double epsilon, long trials,
                                           std::uint64_t seed) {
  if (trials < 1) throw ConfigError("trials must be >= 1");
  const double beta2 = 0.999;

  long failures = 0;
  for (long trial = 0; trial < trials; ++trial) {
    const std::uint64_t trial_seed = mix_seed(seed, static_cast<std::uint64_t>(trial));
    // The bound's rank requirement can exceed dim, so the projection is
    // built directly rather than through a ProjectorState.
    const Matrix p = gaussian_matrix(mix_seed(trial_seed, 0xA), rank, dim,
                                     1.0 / static_cast<double>(rank));
    Matrix v_full(dim, channels);
    Matrix v_low(rank, channels);
    for (long t = 0; t < steps; ++t) {
      const Matrix g = gaussian_matrix(mix_seed(trial_seed, 0xB00 + t), dim,
                                       channels, 1.0);
      const Matrix r = matmul(p, g);
      auto vf = v_full.data();
      auto gd = g.data();
      for (std::size_t i = 0; i < vf.size(); ++i)
        vf[i] = beta2 * vf[i] + (1.0 - beta2) * gd[i] * gd[i];
      auto vl = v_low.data();
      auto rd = r.data();
      for (std::size_t i = 0; i < vl.size(); ++i)
        vl[i] = beta2 * vl[i] + (1.0 - beta2) * rd[i] * rd[i];
    }
    const std::vector<double> full_l1 = l1_norm_cols(v_full);
    const std::vector<double> low_l1 = l1_norm_cols(v_low);
    for (std::size_t j = 0; j < channels; ++j) {
      if (low_l1[j] < (1.0 - epsilon) * full_l1[j] ||
          low_l1[j] > (1.0 + epsilon) * full_l1[j])
        ++failures;
    }
  }

  BoundCheckReport report;
  report.check = "second-moment-bound";
  report.trials = trials;
  report.epsilon = epsilon;
  report.bound = std::min(1.0, static_cast<double>(steps) *
                                   std::exp(-static_cast<double>(rank) * epsilon *
                                            epsilon / 8.0));
  report.slack = binomial_slack(report.bound, trials);
  report.empirical_failure_rate = static_cast<double>(failures) /
                                  static_cast<double>(trials * static_cast<long>(channels));
  report.pass = report.empirical_failure_rate <= report.bound + report.slack;
  report.params = {{"dim", static_cast<double>(dim)},
                   {"channels", static_cast<double>(channels)},
                   {"rank", static_cast<double>(rank)},
                   {"steps", static_cast<double>(steps)}};
  return report;
}

RatioBoundReport check_ratio_bound(std::size_t rows, std::size_t cols,
                                   std::size_t rank, long steps, long trials,
                                   std::uint64_t seed) {
  const long burn_in = 5;
  if (steps <= burn_in) throw ConfigError("ratio bound needs steps > burn-in");

  const std::size_t d_small = std::min(rows, cols);
  const std::size_t d_large = std::max(rows, cols);
  const double compensation =
      std::sqrt(static_cast<double>(d_small) / static_cast<double>(rank));
  const double compensation_channel =
      std::sqrt(static_cast<double>(d_large) / static_cast<double>(rank));

  std::vector<double> samples;
  samples.reserve(static_cast<std::size_t>(trials * (steps - burn_in)) * d_large);

  for (long trial = 0; trial < trials; ++trial) {
    const std::uint64_t trial_seed = mix_seed(seed, static_cast<std::uint64_t>(trial));

    OptimizerConfig low_cfg = fixed_projection_config(Variant::Apollo, rank, steps);
    low_cfg.epsilon = 0.0;
    OptimizerConfig full_cfg = low_cfg;

    ApolloState low_state = make_apollo_state(low_cfg, trial_seed, 0, rows, cols);
    AdamWState full_state = make_adamw_state(rows, cols);
    Matrix w_low(rows, cols);
    Matrix w_full(rows, cols);

    for (long t = 0; t < steps; ++t) {
      const Matrix g =
          gaussian_matrix(mix_seed(trial_seed, 0xC00 + t), rows, cols, 1.0);
      const StepInfo low = apollo_step(w_low, g, low_state, low_cfg);
      const StepInfo full = structured_adamw_step(w_full, g, full_state, full_cfg);
      if (t < burn_in) continue;
      for (std::size_t j = 0; j < low.scales.size(); ++j) {
        if (full.scales[j] <= 0.0) continue;
        samples.push_back(compensation * low.scales[j] / full.scales[j]);
      }
    }
  }

  std::sort(samples.begin(), samples.end());
  RatioBoundReport report;
  report.check = "ratio-bound";
  report.trials = trials;
  report.steps = steps;
  report.burn_in = burn_in;
  report.compensation = compensation;
  report.compensation_channel_axis = compensation_channel;
  report.median = quantile(samples, 0.5);
  report.median_channel_axis = report.median * compensation_channel / compensation;
  report.p5 = quantile(samples, 0.05);
  report.p95 = quantile(samples, 0.95);
  long in_bracket = 0;
  for (double s : samples)
    if (s >= 0.25 && s <= 4.0) ++in_bracket;
  report.fraction_in_loose_bracket =
      samples.empty() ? 0.0
                      : static_cast<double>(in_bracket) / static_cast<double>(samples.size());
  report.pass = report.median >= 0.5 && report.median <= 2.0 &&
                report.fraction_in_loose_bracket >= 0.9;
  report.params = {{"rows", static_cast<double>(rows)},
                   {"cols", static_cast<double>(cols)},
                   {"rank", static_cast<double>(rank)}};
  return report;
}

IdentityCheckReport check_identity_oracle(long steps, int seeds, std::uint64_t seed,
                                          double tolerance) {
  IdentityCheckReport report;
  report.check = "identity-oracle";
  report.tolerance = tolerance;

  const std::size_t shapes[][2] = {{8, 12}, {12, 8}, {16, 16}};
  for (int s = 0; s < seeds; ++s) {
    const std::uint64_t run_seed = mix_seed(seed, static_cast<std::uint64_t>(s));
    const auto& shape = shapes[s % 3];
    const std::size_t rows = shape[0], cols = shape[1];
    const std::size_t rank = std::min(rows, cols);

    OptimizerConfig low_cfg;
    low_cfg.variant = Variant::Apollo;
    low_cfg.lr = 1e-2;
    low_cfg.rank = rank;
    low_cfg.period = 7;  // refreshes are no-ops for the identity projector
    low_cfg.projector = ProjectorKind::Identity;
    low_cfg.growth_limit = 1.01;
    low_cfg.weight_decay = 0.01;
    OptimizerConfig full_cfg = low_cfg;

    ApolloState low_state = make_apollo_state(low_cfg, run_seed, 0, rows, cols);
    AdamWState full_state = make_adamw_state(rows, cols);
    Matrix w_low = gaussian_matrix(mix_seed(run_seed, 1), rows, cols, 1.0);
    Matrix w_full = w_low;

    for (long t = 0; t < steps; ++t) {
      const Matrix g = gaussian_matrix(mix_seed(run_seed, 0xD00 + t), rows, cols, 1.0);
      apollo_step(w_low, g, low_state, low_cfg);
      structured_adamw_step(w_full, g, full_state, full_cfg);
      report.max_rel_error =
          std::max(report.max_rel_error, rel_fro_error(w_low, w_full));
    }
  }
  report.pass = report.max_rel_error <= report.tolerance;
  report.params = {{"steps", static_cast<double>(steps)},
                   {"seeds", static_cast<double>(seeds)}};
  return report;
}

}  // namespace apollo
