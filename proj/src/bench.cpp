#include "fracgrad/bench.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "fracgrad/meta_optimizer.hpp"
#include "fracgrad/objectives.hpp"
#include "fracgrad/parallel.hpp"
#include "fracgrad/random.hpp"

namespace fracgrad {
namespace {

using json = nlohmann::json;

bool finite_vec(const Vec& v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

// Runs one trajectory; `advance` maps (x, f, grad) to the next iterate.
template <typename Advance>
TrajectoryRecord run_trajectory(const ObjectiveFn& fn, const Vec& start, const BenchConfig& cfg,
                                Advance&& advance) {
  TrajectoryRecord rec{start, false, cfg.horizon, 0.0};
  Vec x = start;
  for (std::size_t t = 0;; ++t) {
    const double f = fn.eval(x);
    rec.final_f = f;
    if (!std::isfinite(f)) break;
    if (converged(f, fn.global_min_value, cfg.eps)) {
      rec.converged = true;
      rec.converged_at = t;
      break;
    }
    if (t == cfg.horizon) break;
    const Vec g = fn.grad(x);
    x = advance(x, f, g);
    if (!finite_vec(x)) {
      rec.final_f = std::numeric_limits<double>::infinity();
      break;
    }
  }
  return rec;
}

std::vector<TrajectoryRecord> run_classical(const ObjectiveFn& fn, const std::vector<Vec>& starts,
                                            const BenchConfig& cfg, OptimizerKind kind, double lr) {
  Hyper hyper = default_hyper(kind);
  hyper.lr = lr;
  hyper.frac.alpha = cfg.frac_alpha;
  hyper.memory_window = cfg.fgf_window;
  std::vector<TrajectoryRecord> records(starts.size());
  parallel_for(starts.size(), cfg.threads, [&](std::size_t i) {
    OptimizerState state = make_state(kind, starts[i], hyper);
    records[i] = run_trajectory(fn, starts[i], cfg, [&](const Vec&, double f, const Vec& g) {
      state = step(std::move(state), f, g);
      return state.iterate;
    });
  });
  return records;
}

std::vector<TrajectoryRecord> run_meta(const ObjectiveFn& fn, const std::vector<Vec>& starts,
                                       const BenchConfig& cfg, const MetaNet& net) {
  std::vector<TrajectoryRecord> records(starts.size());
  parallel_for(starts.size(), cfg.threads, [&](std::size_t i) {
    records[i] = run_trajectory(fn, starts[i], cfg, [&](const Vec& x, double f, const Vec& g) {
      return fractional_update(x, f, g, forward(net, x, g), net.config.taylor_dx);
    });
  });
  return records;
}

bool better(const LrResult& a, const LrResult& b) {
  if (a.convergence_rate != b.convergence_rate) return a.convergence_rate > b.convergence_rate;
  if (a.mean_truncated_length != b.mean_truncated_length) {
    return a.mean_truncated_length < b.mean_truncated_length;
  }
  return a.lr < b.lr;
}

std::string num(double v) { return fmt17(v); }

}  // namespace

OptimizerSpec parse_optimizer_spec(const std::string& text) {
  OptimizerSpec spec;
  spec.label = text;
  if (text.rfind("meta:", 0) == 0) {
    spec.is_meta = true;
    spec.checkpoint = text.substr(5);
    if (spec.checkpoint.empty()) throw ConfigError("meta optimizer needs a checkpoint path");
    spec.label = "meta";
    return spec;
  }
  spec.kind = parse_kind(text);
  spec.label = std::string(kind_name(spec.kind));
  return spec;
}

void BenchConfig::validate() const {
  lookup(target_fn);
  if (n_starts < 1) throw ConfigError("bench: n_starts must be at least 1");
  if (!(eps > 0.0)) throw ConfigError("bench: eps must be positive");
  const bool needs_grid = std::any_of(optimizers.begin(), optimizers.end(),
                                      [](const OptimizerSpec& s) { return !s.is_meta; });
  if (needs_grid && lr_grid.empty()) throw ConfigError("bench: lr_grid is empty");
  for (double lr : lr_grid) {
    if (!(lr >= 0.0)) throw ConfigError("bench: learning rates must be non-negative");
  }
  if (fgf_window && *fgf_window == 0) throw ConfigError("bench: fgf_window must be positive");
}

std::vector<Vec> benchmark_starts(const BenchConfig& cfg) {
  const ObjectiveFn& fn = lookup(cfg.target_fn);
  std::vector<Vec> starts;
  starts.reserve(cfg.n_starts);
  for (std::size_t i = 0; i < cfg.n_starts; ++i) {
    Rng rng(derive_seed(cfg.seed, i));
    starts.push_back(sample_start(fn, rng));
  }
  return starts;
}

LrResult summarize(const std::vector<TrajectoryRecord>& records, double lr) {
  LrResult r{lr, 0.0, 0.0};
  if (records.empty()) return r;
  std::size_t hits = 0;
  double length = 0.0;
  for (const auto& rec : records) {
    if (rec.converged) ++hits;
    length += static_cast<double>(rec.converged_at);
  }
  r.convergence_rate = static_cast<double>(hits) / static_cast<double>(records.size());
  r.mean_truncated_length = length / static_cast<double>(records.size());
  return r;
}

RunReport run_benchmark(const BenchConfig& cfg) {
  cfg.validate();
  const ObjectiveFn& fn = lookup(cfg.target_fn);
  const std::vector<Vec> starts = benchmark_starts(cfg);

  // checkpoints are read up front so a bad one fails before any work is done
  std::vector<std::optional<MetaNet>> nets;
  for (const auto& spec : cfg.optimizers) {
    nets.push_back(spec.is_meta ? std::optional<MetaNet>(load_checkpoint(spec.checkpoint))
                                : std::nullopt);
    if (nets.back() && nets.back()->config.dim != fn.dim) {
      throw CheckpointError("checkpoint dimension does not match the target function");
    }
  }

  RunReport report{cfg, {}};
  for (std::size_t k = 0; k < cfg.optimizers.size(); ++k) {
    const OptimizerSpec& spec = cfg.optimizers[k];
    OptimizerReport out;
    out.label = spec.label;
    if (spec.is_meta) {
      out.trajectories = run_meta(fn, starts, cfg, *nets[k]);
      const LrResult r = summarize(out.trajectories, 0.0);
      out.convergence_rate = r.convergence_rate;
      out.mean_truncated_length = r.mean_truncated_length;
    } else {
      std::optional<LrResult> best;
      for (double lr : cfg.lr_grid) {
        auto records = run_classical(fn, starts, cfg, spec.kind, lr);
        const LrResult r = summarize(records, lr);
        out.lr_results.push_back(r);
        if (!best || better(r, *best)) {
          best = r;
          out.trajectories = std::move(records);
        }
      }
      out.best_lr = best->lr;
      out.convergence_rate = best->convergence_rate;
      out.mean_truncated_length = best->mean_truncated_length;
    }
    report.optimizers.push_back(std::move(out));
  }
  return report;
}

std::string summary_csv(const RunReport& report) {
  std::ostringstream out;
  out << "optimizer,best_lr,convergence_rate,mean_truncated_length\n";
  for (const auto& o : report.optimizers) {
    out << o.label << ',' << (o.best_lr ? num(*o.best_lr) : "") << ',' << num(o.convergence_rate)
        << ',' << num(o.mean_truncated_length) << '\n';
  }
  return out.str();
}

std::string trajectories_csv(const RunReport& report) {
  const std::size_t dim = lookup(report.config.target_fn).dim;
  std::ostringstream out;
  out << "optimizer,index";
  for (std::size_t d = 0; d < dim; ++d) out << ",start_" << d;
  out << ",converged,converged_at,final_f\n";
  for (const auto& o : report.optimizers) {
    for (std::size_t i = 0; i < o.trajectories.size(); ++i) {
      const auto& t = o.trajectories[i];
      out << o.label << ',' << i;
      for (double v : t.start) out << ',' << num(v);
      out << ',' << (t.converged ? 1 : 0) << ',' << t.converged_at << ',' << num(t.final_f)
          << '\n';
    }
  }
  return out.str();
}

std::string report_json(const RunReport& report) {
  const BenchConfig& cfg = report.config;
  const ObjectiveFn& fn = lookup(cfg.target_fn);
  json domain = json::array();
  for (const auto& iv : fn.domain) domain.push_back({iv.lo, iv.hi});
  json optimizers = json::array();
  for (const auto& spec : cfg.optimizers) {
    optimizers.push_back(spec.is_meta ? "meta:" + spec.checkpoint.string() : spec.label);
  }

  json doc;
  doc["metadata"] = {
      {"version", kVersion},
      {"target_fn", cfg.target_fn},
      {"domain", domain},
      {"global_min_value", fn.global_min_value},
      {"n_starts", cfg.n_starts},
      {"horizon", cfg.horizon},
      {"eps", cfg.eps},
      {"lr_grid", cfg.lr_grid},
      {"optimizers", optimizers},
      {"seed", cfg.seed},
      {"start_seeds", "start i drawn from derive_seed(seed, i)"},
      {"frac_alpha", cfg.frac_alpha},
      {"fgf_window", cfg.fgf_window ? json(*cfg.fgf_window) : json("full")},
      {"convergence", "|f - f*| <= eps, inclusive"},
      {"truncated_length", "first 0-based step index with |f - f*| <= eps, else horizon"},
      {"lr_selection", "max rate, then min mean length, then min lr"},
  };
  json results = json::array();
  for (const auto& o : report.optimizers) {
    json grid = json::array();
    for (const auto& r : o.lr_results) {
      grid.push_back({{"lr", r.lr},
                      {"convergence_rate", r.convergence_rate},
                      {"mean_truncated_length", r.mean_truncated_length}});
    }
    results.push_back({{"optimizer", o.label},
                       {"best_lr", o.best_lr ? json(*o.best_lr) : json(nullptr)},
                       {"convergence_rate", o.convergence_rate},
                       {"mean_truncated_length", o.mean_truncated_length},
                       {"lr_grid_results", grid}});
  }
  doc["results"] = std::move(results);
  return doc.dump(2) + "\n";
}

void emit_report(const RunReport& report, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  auto write = [&](const char* name, const std::string& text) {
    std::ofstream out(dir / name, std::ios::binary);
    out << text;
    if (!out) throw std::runtime_error("cannot write " + (dir / name).string());
  };
  write("summary.csv", summary_csv(report));
  write("trajectories.csv", trajectories_csv(report));
  write("report.json", report_json(report));
}

}  // namespace fracgrad
