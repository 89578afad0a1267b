#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace fracgrad {

/// Dense real vector used for iterates and gradients.
using Vec = std::vector<double>;

inline constexpr const char* kVersion = "fracgrad 0.1.0";

/// Input outside the mathematical domain of an operation (poles, x <= a, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Unknown names, invalid hyperparameters, malformed config files.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A simulated state left the finite region; `step` is the offending index.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& what, std::size_t step)
      : std::runtime_error(what), step_(step) {}
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

inline void require_same_dim(std::size_t expected, std::size_t got, const char* what) {
  if (expected != got) {
    throw DimensionError(std::string(what) + ": expected dimension " + std::to_string(expected) +
                         ", got " + std::to_string(got));
  }
}

/// Formats with 17 significant digits (round-trip exact for doubles).
std::string fmt17(double value);

}  // namespace fracgrad
