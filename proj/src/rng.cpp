#include "apollo/rng.hpp"

#include <cmath>

#include "apollo/errors.hpp"

namespace apollo {

namespace {
constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;
}

std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ULL;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBULL;
  z ^= z >> 31;
  return z;
}

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  return mix64(mix64(a + kGamma) ^ (b + kGamma));
}

std::uint64_t SplitMix64::next_u64() {
  state_ += kGamma;
  return mix64(state_);
}

double SplitMix64::next_unit() {
  // 53 mantissa bits; +1 keeps the value strictly positive so that
  // log(next_unit()) is always finite.
  return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
}

double SplitMix64::next_gaussian() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  // Marsaglia polar method; avoids trig so the only libm calls are
  // sqrt and log.
  double v1 = 0.0, v2 = 0.0, s = 0.0;
  do {
    v1 = 2.0 * next_unit() - 1.0;
    v2 = 2.0 * next_unit() - 1.0;
    s = v1 * v1 + v2 * v2;
  } while (s >= 1.0 || s == 0.0);
  const double f = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v2 * f;
  have_spare_ = true;
  return v1 * f;
}

Matrix gaussian_matrix(std::uint64_t seed, std::size_t rows, std::size_t cols,
                       double variance) {
  if (rows < 1 || cols < 1)
    throw DimensionError("gaussian_matrix dimensions must be positive");
  if (!(variance > 0.0))
    throw ConfigError("gaussian_matrix variance must be positive");
  SplitMix64 rng(seed);
  const double sd = std::sqrt(variance);
  Matrix out(rows, cols);
  for (double& v : out.data()) v = sd * rng.next_gaussian();
  return out;
}

}  // namespace apollo
