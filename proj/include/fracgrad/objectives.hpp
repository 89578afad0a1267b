#pragma once

#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fracgrad/common.hpp"
#include "fracgrad/random.hpp"

namespace fracgrad {

/// Closed sampling interval for one coordinate.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// Differentiable test function with analytic gradient and known minimum.
struct ObjectiveFn {
  std::string name;
  std::size_t dim = 0;
  std::function<double(std::span<const double>)> eval;
  std::function<Vec(std::span<const double>)> grad;
  std::vector<Interval> domain;
  double global_min_value = 0.0;
  std::vector<Vec> global_min_points;
};

/// Lower bound applied before taking logs of objective values.
inline constexpr double kLogShift = 1e-12;

/// max(f - f* + kLogShift, kLogShift): the quantity whose log the meta-loss uses.
inline double shifted_value(const ObjectiveFn& fn, double f_val) {
  const double s = f_val - fn.global_min_value + kLogShift;
  return s > kLogShift ? s : kLogShift;
}

/// All registered functions, in a fixed order. Immutable after first use.
const std::vector<ObjectiveFn>& registry();

/// Throws ConfigError for unknown names.
const ObjectiveFn& lookup(std::string_view name);

/// Uniform draw from fn.domain, one coordinate after another.
Vec sample_start(const ObjectiveFn& fn, Rng& rng);

}  // namespace fracgrad
