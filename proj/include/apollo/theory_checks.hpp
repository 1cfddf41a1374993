#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "apollo/matrix.hpp"

namespace apollo {

/// Outcome of a Monte-Carlo tail-bound check. `bound` is the theoretical
/// failure probability; `slack` adds three binomial standard errors of the
/// bound so that a finite number of trials cannot fail a true statement.
struct BoundCheckReport {
  std::string check;
  long trials = 0;
  double epsilon = 0.0;
  double bound = 0.0;
  double slack = 0.0;
  double empirical_failure_rate = 0.0;
  bool pass = false;
  std::map<std::string, double> params;
};

/// Outcome of an exact algebraic identity check.
struct IdentityCheckReport {
  std::string check;
  double max_rel_error = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  std::map<std::string, double> params;
};

/// Distribution summary of the compensated scale ratio between the
/// low-rank and full-space channel rules. The compensation used is
/// sqrt(d_small / rank), i.e. the compressed-axis dimensions; the report
/// also carries the channel-axis alternative sqrt(d_large / rank) and the
/// median it would produce, since the two differ on non-square parameters.
struct RatioBoundReport {
  std::string check;
  long trials = 0;
  long steps = 0;
  long burn_in = 0;
  double compensation = 0.0;
  double compensation_channel_axis = 0.0;
  double median = 0.0;
  double median_channel_axis = 0.0;
  double p5 = 0.0;
  double p95 = 0.0;
  double fraction_in_loose_bracket = 0.0;  // share of samples in [0.25, 4]
  bool pass = false;
  std::map<std::string, double> params;
};

/// Draws a fixed vector x in R^dim, then a fresh N(0, 1/rank) projection
/// per trial, and counts trials with | ||Px||^2 - ||x||^2 | > eps*||x||^2.
/// Passes when the empirical rate stays within 2*exp(-rank*eps^2/8) plus
/// slack.
BoundCheckReport check_norm_preservation(std::size_t rank, std::size_t dim,
                                         double epsilon, long trials,
                                         std::uint64_t seed);

/// With a fixed projection over all steps, the low-rank first moment must
/// equal the projected full-space first moment exactly (up to roundoff).
/// Exercises the real optimizer state, not a re-derivation.
IdentityCheckReport check_first_moment_identity(std::size_t rows, std::size_t cols,
                                                std::size_t rank, long steps,
                                                std::uint64_t seed);

/// Exact per-channel l1 recursion for the low-rank second moment: its
/// channel sums must equal the decay-weighted sums of projected-gradient
/// channel norms at every step.
IdentityCheckReport check_second_moment_recursion(std::size_t rows, std::size_t cols,
                                                  std::size_t rank, long steps,
                                                  std::uint64_t seed);

/// Smallest rank for which the second-moment channel bound holds with
/// failure probability delta/2 over `steps` steps at tolerance epsilon:
/// ceil((8/eps^2) * log(2*steps/delta)).
std::size_t rank_for_second_moment_bound(double epsilon, long steps, double delta);

/// Monte-Carlo check of the per-channel second-moment bracket
/// (1 +/- eps) * ||V[:,j]||_1 after `steps` steps, with a fresh projection
/// per trial. The implied failure bound is steps * exp(-rank*eps^2/8).
BoundCheckReport check_second_moment_bound(std::size_t dim, std::size_t channels,
                                           std::size_t rank, long steps,
                                           double epsilon, long trials,
                                           std::uint64_t seed);

/// Runs the full-space channel rule and the low-rank rule side by side on
/// identical gradient streams (fixed projection, bias correction off,
/// epsilon 0) and summarizes sqrt(d_small/rank) * s_low/s_full across
/// channels and post-burn-in steps. Passes when the median lands in
/// [0.5, 2] and at least 90% of samples lie in [0.25, 4].
RatioBoundReport check_ratio_bound(std::size_t rows, std::size_t cols,
                                   std::size_t rank, long steps, long trials,
                                   std::uint64_t seed);

/// Trajectory equivalence of the low-rank rule under an identity projector
/// against the full-space channel rule, over fresh random runs.
IdentityCheckReport check_identity_oracle(long steps, int seeds, std::uint64_t seed,
                                          double tolerance = 1e-9);

}  // namespace apollo
