#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "fracgrad/common.hpp"
#include "fracgrad/objectives.hpp"
#include "fracgrad/random.hpp"

namespace fracgrad {

/// Optimized coordinates are (log_sigma, log_rho); beta stays fixed.
struct LorenzParams {
  double log_sigma = 0.0;
  double log_rho = 0.0;
  double beta = 8.0 / 3.0;

  static LorenzParams from_natural(double sigma, double rho, double beta = 8.0 / 3.0);
};

struct LorenzState {
  double x = 1.2;
  double y = 1.3;
  double z = 1.6;
};

using LorenzTrajectory = std::vector<LorenzState>;

/// Rollout settings shared by simulation, loss and gradient estimators.
struct LorenzSetup {
  LorenzParams truth = LorenzParams::from_natural(10.0, 28.0);
  LorenzState initial{};
  std::size_t steps = 400;
  double dt = 0.005;
  double divergence_cap = 1e6;
};

std::array<double, 3> lorenz_rhs(const LorenzState& s, const LorenzParams& p);

/// Forward Euler; the result includes s0. Throws DivergenceError when a
/// coordinate exceeds `cap` in magnitude or stops being finite.
LorenzTrajectory simulate(const LorenzParams& p, const LorenzState& s0, std::size_t steps,
                          double dt, double cap = 1e6);

/// Mean over states of |s_k(p) - target_k|^2; +inf when the rollout diverges.
double lorenz_loss(const LorenzParams& p, const LorenzTrajectory& target, const LorenzSetup& setup);

/// Reverse-mode gradient of lorenz_loss w.r.t. (log_sigma, log_rho) through
/// the Euler rollout. The adjoint is reset at every multiple of `window`.
std::array<double, 2> tbtt_gradient(const LorenzParams& p, const LorenzTrajectory& target,
                                    const LorenzSetup& setup, std::size_t window);

/// Antithetic evolution-strategies estimate (stand-in for NRES). Pair i
/// draws its perturbation from derive_seed(seed, i).
struct EsResult {
  std::array<double, 2> gradient{};
  std::size_t capped_samples = 0;
};
inline constexpr double kEsLossCap = 1e9;

EsResult es_gradient(const std::function<double(const std::array<double, 2>&)>& loss,
                     const std::array<double, 2>& at, std::size_t pairs, double noise_sigma,
                     std::uint64_t seed);
EsResult es_gradient(const LorenzParams& p, const LorenzTrajectory& target,
                     const LorenzSetup& setup, std::size_t pairs, double noise_sigma,
                     std::uint64_t seed);

enum class LorenzUpdate { gd, fgf };
enum class LorenzEstimator { tbtt, es };

struct LorenzRunConfig {
  LorenzUpdate update = LorenzUpdate::gd;
  LorenzEstimator estimator = LorenzEstimator::tbtt;
  double alpha = 0.995;  // fgf only
  double lr = 1e-3;
  std::size_t iters = 100;
  std::uint64_t seed = 0;
  std::size_t tbtt_window = 16;
  std::size_t es_pairs = 16;
  double es_noise = 0.1;
  double init_log_sigma_offset = 0.5;
  double init_log_rho_offset = -0.5;
  /// Per-seed Gaussian jitter added to the initial point; 0 disables it.
  double init_jitter = 0.05;
  LorenzSetup setup{};
};

struct LorenzCurvePoint {
  std::size_t iter = 0;
  double loss = 0.0;
  double log_sigma = 0.0;
  double log_rho = 0.0;
};

struct LorenzCurve {
  std::vector<LorenzCurvePoint> points;
  bool diverged = false;
  std::optional<std::size_t> diverged_at;
  std::size_t capped_samples = 0;
};

LorenzParams initial_params(const LorenzRunConfig& cfg);

/// One point per iteration (loss at the iterate before its update). After a
/// divergence the remaining points repeat the last iterate with loss = inf.
LorenzCurve optimize_lorenz(const LorenzRunConfig& cfg);

void write_lorenz_csv(std::ostream& out, const LorenzCurve& curve);

// --- loss landscape sweeps on a scalar objective ----------------------------

struct SweepAxis {
  std::string name;
  std::vector<double> values;
};

/// "lo:hi:n" (linear, inclusive) or "lo:hi:n:log" (log-spaced, inclusive).
SweepAxis parse_axis(const std::string& name, const std::string& spec);

enum class SweepMethod { momentum, fgf };

struct SweepCell {
  double v1 = 0.0;
  double v2 = 0.0;
  double final_f = 0.0;
  bool diverged = false;
};

struct SweepGrid {
  SweepAxis axis1;
  SweepAxis axis2;
  std::vector<SweepCell> cells;  // axis1 outer, axis2 inner

  const SweepCell& at(std::size_t i, std::size_t j) const { return cells[i * axis2.values.size() + j]; }
};

inline constexpr double kChaoticStart = 2.5;

/// Runs `horizon` steps per cell from x0. Axes: (momentum, lr) for
/// momentum-GD, (alpha, lr) for FGF. `threads` = 0 uses the environment cap.
SweepGrid landscape_sweep(const ObjectiveFn& fn, SweepMethod method, const SweepAxis& axis1,
                          const SweepAxis& axis2, std::size_t horizon, const Vec& x0,
                          std::size_t threads = 0);

void write_sweep_csv(std::ostream& out, const SweepGrid& grid);

/// Share of all cells that did not diverge and end within `tol` of the global minimum.
double near_optimal_fraction(const SweepGrid& grid, double f_min, double tol);
/// Largest |final_f| difference between horizontally or vertically adjacent non-diverged cells.
double max_adjacent_gap(const SweepGrid& grid);

}  // namespace fracgrad
