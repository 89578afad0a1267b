#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "fracgrad/common.hpp"
#include "fracgrad/optimizers.hpp"

namespace fracgrad {

/// One optimizer entry of a benchmark. Meta entries carry a checkpoint path
/// and skip the lr grid.
struct OptimizerSpec {
  std::string label;
  OptimizerKind kind = OptimizerKind::gd;
  bool is_meta = false;
  std::filesystem::path checkpoint;
};

/// Parses "gd", "adam", "fracgd", "fgf", "meta:<path>", ...
OptimizerSpec parse_optimizer_spec(const std::string& text);

struct BenchConfig {
  std::string target_fn = "rosenbrock2d";
  std::size_t n_starts = 1000;
  std::size_t horizon = 1000;
  double eps = 1e-3;
  std::vector<double> lr_grid = {1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6};
  std::vector<OptimizerSpec> optimizers;
  std::uint64_t seed = 0;
  double frac_alpha = 0.9;   // frac_gd and fgf
  std::optional<std::size_t> fgf_window;
  /// 0 = worker_count().
  std::size_t threads = 0;

  void validate() const;
};

/// |f - f*| <= eps (inclusive).
inline bool converged(double f_val, double f_min, double eps) {
  const double d = f_val - f_min;
  return (d < 0 ? -d : d) <= eps;
}

struct TrajectoryRecord {
  Vec start;
  bool converged = false;
  std::size_t converged_at = 0;  // first converged step (0-based), else the horizon
  double final_f = 0.0;
};

struct LrResult {
  double lr = 0.0;
  double convergence_rate = 0.0;
  double mean_truncated_length = 0.0;
};

struct OptimizerReport {
  std::string label;
  std::optional<double> best_lr;
  double convergence_rate = 0.0;
  double mean_truncated_length = 0.0;
  std::vector<LrResult> lr_results;
  std::vector<TrajectoryRecord> trajectories;
};

struct RunReport {
  BenchConfig config;
  std::vector<OptimizerReport> optimizers;
};

/// Start points shared by every optimizer: start i uses derive_seed(seed, i).
std::vector<Vec> benchmark_starts(const BenchConfig& cfg);

/// Runs every optimizer over the shared starts. lr-based methods keep the
/// grid value with the best rate (ties: shorter mean length, then smaller lr).
RunReport run_benchmark(const BenchConfig& cfg);

/// Aggregates per-trajectory records into a rate and mean truncated length.
LrResult summarize(const std::vector<TrajectoryRecord>& records, double lr);

/// Writes summary.csv, trajectories.csv and report.json into `dir`.
void emit_report(const RunReport& report, const std::filesystem::path& dir);

std::string summary_csv(const RunReport& report);
std::string trajectories_csv(const RunReport& report);
std::string report_json(const RunReport& report);

}  // namespace fracgrad
