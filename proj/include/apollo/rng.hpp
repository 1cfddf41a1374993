#pragma once

#include <cstdint>

#include "apollo/matrix.hpp"

namespace apollo {

/// SplitMix64 counter generator (Steele/Lea/Flood construction): the state
/// advances by a fixed odd constant and each output is a finalizer hash of
/// the state, so draw k is a pure function of (seed, k). Identical seeds
/// give identical integer streams on any platform; Gaussian draws use the
/// Marsaglia polar method and are additionally stable wherever IEEE-754
/// doubles and a faithfully rounded libm are in use.
///
/// There is deliberately no global generator. Every sampling site owns a
/// SplitMix64 seeded through mix_seed so that results never depend on
/// iteration order across parameters, trials or threads.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64();

  /// Uniform double in (0, 1].
  double next_unit();

  /// Standard normal deviate.
  double next_gaussian();

 private:
  std::uint64_t state_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

/// SplitMix64 finalizer; a fixed bijective 64-bit hash.
std::uint64_t mix64(std::uint64_t z);

/// Order-sensitive seed combiner: mix_seed(a, b) != mix_seed(b, a) in
/// general. Derived seeds for projector refreshes are
/// mix_seed(mix_seed(base_seed, param_id), refresh_count).
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

/// rows x cols matrix of i.i.d. N(0, variance) entries, determined
/// entirely by the seed.
Matrix gaussian_matrix(std::uint64_t seed, std::size_t rows, std::size_t cols,
                       double variance);

}  // namespace apollo
