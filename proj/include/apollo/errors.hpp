#pragma once

#include <stdexcept>
#include <string>

namespace apollo {

// Shape disagreement between operands (matmul, elementwise ops, scaling).
class DimensionError : public std::invalid_argument {
 public:
  explicit DimensionError(const std::string& what) : std::invalid_argument(what) {}
};

// Invalid configuration: bad hyperparameter, unknown tag, rank too large.
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

// Numerical failure inside an otherwise valid computation (e.g. SVD).
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

// Training loss became non-finite or exceeded the divergence threshold.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& what, long step)
      : std::runtime_error(what), step_(step) {}
  long step() const { return step_; }

 private:
  long step_;
};

}  // namespace apollo
