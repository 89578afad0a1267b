#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fracgrad/common.hpp"
#include "fracgrad/frac_calculus.hpp"

namespace fracgrad {

enum class OptimizerKind { gd, momentum_gd, adam, adamw, rmsprop, adagrad, adafactor, frac_gd, fgf };

std::string_view kind_name(OptimizerKind kind);
/// Accepts the names from kind_name plus the aliases "momentum", "fracgd".
OptimizerKind parse_kind(std::string_view name);
bool is_baseline(OptimizerKind kind);

struct Hyper {
  double lr = 1e-3;
  double beta1 = 0.9;          // momentum / first-moment decay
  double beta2 = 0.999;        // second-moment decay (adam, adamw)
  double eps = 1e-8;
  double weight_decay = 0.0;   // decoupled (adamw only)
  double rms_decay = 0.9;      // rmsprop
  double adafactor_decay = -0.8;
  double adafactor_clip = 1.0;
  FracConfig frac{};           // frac_gd and fgf use frac.alpha
  /// fgf memory window; nullopt keeps the whole history.
  std::optional<std::size_t> memory_window{};
};

/// Published default constants for `kind`; lr is left for the caller's grid.
Hyper default_hyper(OptimizerKind kind);

struct OptimizerState {
  OptimizerKind kind = OptimizerKind::gd;
  Vec iterate;
  Hyper hyper;
  std::size_t step_count = 0;
  Vec first_moment;                // momentum buffer / adam m
  Vec second_moment;               // adam v, rmsprop, adagrad accumulator, adafactor column factor
  double adafactor_row = 0.0;      // adafactor row factor (single row)
  std::vector<Vec> history;        // fgf: X_0 ... X_k
  Vec memory_coefficients;         // fgf: c_0 ... c_k
};

OptimizerState make_state(OptimizerKind kind, Vec x0, const Hyper& hyper);

/// Standard first-order update for the baseline kinds.
OptimizerState baseline_step(OptimizerState state, std::span<const double> grad);

/// X <- X - lr * frac_taylor_direction(f, grad).
OptimizerState frac_gd_step(OptimizerState state, double f_val, std::span<const double> grad);

/// Memory weights of the fractional gradient-flow scheme:
/// c_j = (-1)^j (alpha choose j+1), j = 0..k.
Vec fgf_coefficients(double alpha, std::size_t k);

/// X_{k+1} = -lr^alpha grad + sum_{j < min(k+1, W)} c_j X_{k-j}.
OptimizerState fgf_step(OptimizerState state, std::span<const double> grad);

/// Dispatches on state.kind.
OptimizerState step(OptimizerState state, double f_val, std::span<const double> grad);

}  // namespace fracgrad
