#include "fracgrad/chaotic_lab.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

#include "fracgrad/optimizers.hpp"
#include "fracgrad/parallel.hpp"

namespace fracgrad {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool escaped(const LorenzState& s, double cap) {
  return !(std::abs(s.x) <= cap && std::abs(s.y) <= cap && std::abs(s.z) <= cap);
}

}  // namespace

LorenzParams LorenzParams::from_natural(double sigma, double rho, double beta) {
  return {std::log(sigma), std::log(rho), beta};
}

std::array<double, 3> lorenz_rhs(const LorenzState& s, const LorenzParams& p) {
  const double sigma = std::exp(p.log_sigma);
  const double rho = std::exp(p.log_rho);
  return {sigma * (s.y - s.x), s.x * (rho - s.z) - s.y, s.x * s.y - p.beta * s.z};
}

LorenzTrajectory simulate(const LorenzParams& p, const LorenzState& s0, std::size_t steps,
                          double dt, double cap) {
  if (!(dt > 0.0)) throw ConfigError("simulate: dt must be positive");
  LorenzTrajectory traj;
  traj.reserve(steps + 1);
  traj.push_back(s0);
  for (std::size_t k = 0; k < steps; ++k) {
    const LorenzState& s = traj.back();
    const auto d = lorenz_rhs(s, p);
    LorenzState next{s.x + dt * d[0], s.y + dt * d[1], s.z + dt * d[2]};
    if (escaped(next, cap)) {
      throw DivergenceError("Lorenz rollout diverged at step " + std::to_string(k + 1), k + 1);
    }
    traj.push_back(next);
  }
  return traj;
}

double lorenz_loss(const LorenzParams& p, const LorenzTrajectory& target,
                   const LorenzSetup& setup) {
  if (target.empty()) throw ConfigError("lorenz_loss: empty target");
  LorenzTrajectory traj;
  try {
    traj = simulate(p, setup.initial, target.size() - 1, setup.dt, setup.divergence_cap);
  } catch (const DivergenceError&) {
    return kInf;
  }
  double sum = 0.0;
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const double dx = traj[k].x - target[k].x;
    const double dy = traj[k].y - target[k].y;
    const double dz = traj[k].z - target[k].z;
    sum += dx * dx + dy * dy + dz * dz;
  }
  return sum / static_cast<double>(traj.size());
}

std::array<double, 2> tbtt_gradient(const LorenzParams& p, const LorenzTrajectory& target,
                                    const LorenzSetup& setup, std::size_t window) {
  if (window == 0) throw ConfigError("tbtt_gradient: window must be at least 1");
  if (target.empty()) throw ConfigError("tbtt_gradient: empty target");
  const std::size_t n = target.size() - 1;
  const LorenzTrajectory traj = simulate(p, setup.initial, n, setup.dt, setup.divergence_cap);
  const double sigma = std::exp(p.log_sigma);
  const double rho = std::exp(p.log_rho);
  const double dt = setup.dt;
  const double norm = 2.0 / static_cast<double>(n + 1);

  auto residual = [&](std::size_t k) {
    return std::array<double, 3>{norm * (traj[k].x - target[k].x),
                                 norm * (traj[k].y - target[k].y),
                                 norm * (traj[k].z - target[k].z)};
  };

  std::array<double, 2> grad{0.0, 0.0};
  std::array<double, 3> adj = residual(n);  // dL/ds_{k+1} while walking back
  for (std::size_t k = n; k-- > 0;) {
    const LorenzState& s = traj[k];
    grad[0] += dt * sigma * (s.y - s.x) * adj[0];
    grad[1] += dt * rho * s.x * adj[1];

    std::array<double, 3> carry{0.0, 0.0, 0.0};
    // the state opening each later window is treated as a constant
    const bool cut = (k + 1) % window == 0 && k + 1 < n;
    if (!cut) {
      carry[0] = adj[0] + dt * (-sigma * adj[0] + (rho - s.z) * adj[1] + s.y * adj[2]);
      carry[1] = adj[1] + dt * (sigma * adj[0] - adj[1] + s.x * adj[2]);
      carry[2] = adj[2] + dt * (-s.x * adj[1] - p.beta * adj[2]);
    }
    const auto r = residual(k);
    adj = {r[0] + carry[0], r[1] + carry[1], r[2] + carry[2]};
  }
  return grad;
}

EsResult es_gradient(const std::function<double(const std::array<double, 2>&)>& loss,
                     const std::array<double, 2>& at, std::size_t pairs, double noise_sigma,
                     std::uint64_t seed) {
  if (pairs == 0) throw ConfigError("es_gradient: pairs must be at least 1");
  if (!(noise_sigma > 0.0)) throw ConfigError("es_gradient: noise_sigma must be positive");

  struct PairResult {
    std::array<double, 2> contrib{};
    std::size_t capped = 0;
  };
  std::vector<PairResult> results(pairs);
  parallel_for(pairs, 0, [&](std::size_t i) {
    Rng rng(derive_seed(seed, i));
    const std::array<double, 2> eps{noise_sigma * rng.normal(), noise_sigma * rng.normal()};
    PairResult r;
    auto capped = [&](double v) {
      if (!std::isfinite(v) || v > kEsLossCap) {
        ++r.capped;
        return kEsLossCap;
      }
      return v;
    };
    const double plus = capped(loss({at[0] + eps[0], at[1] + eps[1]}));
    const double minus = capped(loss({at[0] - eps[0], at[1] - eps[1]}));
    r.contrib = {(plus - minus) * eps[0], (plus - minus) * eps[1]};
    results[i] = r;
  });

  EsResult out;
  const double scale = 1.0 / (2.0 * static_cast<double>(pairs) * noise_sigma * noise_sigma);
  for (const auto& r : results) {
    out.gradient[0] += r.contrib[0];
    out.gradient[1] += r.contrib[1];
    out.capped_samples += r.capped;
  }
  out.gradient[0] *= scale;
  out.gradient[1] *= scale;
  return out;
}

EsResult es_gradient(const LorenzParams& p, const LorenzTrajectory& target,
                     const LorenzSetup& setup, std::size_t pairs, double noise_sigma,
                     std::uint64_t seed) {
  return es_gradient(
      [&](const std::array<double, 2>& q) {
        return lorenz_loss({q[0], q[1], p.beta}, target, setup);
      },
      {p.log_sigma, p.log_rho}, pairs, noise_sigma, seed);
}

LorenzParams initial_params(const LorenzRunConfig& cfg) {
  LorenzParams p = cfg.setup.truth;
  p.log_sigma += cfg.init_log_sigma_offset;
  p.log_rho += cfg.init_log_rho_offset;
  if (cfg.init_jitter > 0.0) {
    Rng rng(derive_seed(cfg.seed, 0x1d5eedULL));
    p.log_sigma += cfg.init_jitter * rng.normal();
    p.log_rho += cfg.init_jitter * rng.normal();
  }
  return p;
}

LorenzCurve optimize_lorenz(const LorenzRunConfig& cfg) {
  const LorenzSetup& setup = cfg.setup;
  const LorenzTrajectory target =
      simulate(setup.truth, setup.initial, setup.steps, setup.dt, setup.divergence_cap);
  const LorenzParams p0 = initial_params(cfg);

  const OptimizerKind kind = cfg.update == LorenzUpdate::gd ? OptimizerKind::gd : OptimizerKind::fgf;
  Hyper hyper = default_hyper(kind);
  hyper.lr = cfg.lr;
  hyper.frac.alpha = cfg.alpha;
  OptimizerState state = make_state(kind, {p0.log_sigma, p0.log_rho}, hyper);

  LorenzCurve curve;
  auto mark_diverged = [&](std::size_t iter) {
    curve.diverged = true;
    curve.diverged_at = iter;
  };
  for (std::size_t it = 0; it < cfg.iters; ++it) {
    const LorenzParams p{state.iterate[0], state.iterate[1], setup.truth.beta};
    if (curve.diverged) {
      curve.points.push_back({it, kInf, p.log_sigma, p.log_rho});
      continue;
    }
    const double loss = lorenz_loss(p, target, setup);
    curve.points.push_back({it, loss, p.log_sigma, p.log_rho});
    if (!std::isfinite(loss)) {
      mark_diverged(it);
      continue;
    }

    std::array<double, 2> g{};
    if (cfg.estimator == LorenzEstimator::tbtt) {
      g = tbtt_gradient(p, target, setup, cfg.tbtt_window);
    } else {
      const EsResult es = es_gradient(p, target, setup, cfg.es_pairs, cfg.es_noise,
                                      derive_seed(cfg.seed, it + 1));
      g = es.gradient;
      curve.capped_samples += es.capped_samples;
    }
    if (!std::isfinite(g[0]) || !std::isfinite(g[1])) {
      mark_diverged(it);
      continue;
    }
    state = step(std::move(state), loss, g);
  }
  return curve;
}

void write_lorenz_csv(std::ostream& out, const LorenzCurve& curve) {
  out << "iter,loss,log_sigma,log_rho\n";
  for (const auto& p : curve.points) {
    out << p.iter << ',' << fmt17(p.loss) << ',' << fmt17(p.log_sigma) << ',' << fmt17(p.log_rho)
        << '\n';
  }
}

SweepAxis parse_axis(const std::string& name, const std::string& spec) {
  std::vector<std::string> parts;
  std::stringstream ss(spec);
  for (std::string item; std::getline(ss, item, ':');) parts.push_back(item);
  if (parts.size() != 3 && parts.size() != 4) {
    throw ConfigError("axis '" + spec + "': expected lo:hi:n or lo:hi:n:log");
  }
  double lo = 0.0;
  double hi = 0.0;
  long n = 0;
  try {
    lo = std::stod(parts[0]);
    hi = std::stod(parts[1]);
    n = std::stol(parts[2]);
  } catch (const std::exception&) {
    throw ConfigError("axis '" + spec + "': malformed number");
  }
  const bool log_spaced = parts.size() == 4;
  if (log_spaced && parts[3] != "log") throw ConfigError("axis '" + spec + "': unknown scale");
  if (n < 1) throw ConfigError("axis '" + spec + "': need at least one value");
  if (log_spaced && !(lo > 0.0 && hi > 0.0)) {
    throw ConfigError("axis '" + spec + "': log axis needs positive bounds");
  }
  SweepAxis axis{name, {}};
  for (long i = 0; i < n; ++i) {
    const double t = n == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(n - 1);
    axis.values.push_back(log_spaced ? std::exp(std::log(lo) + t * (std::log(hi) - std::log(lo)))
                                     : lo + t * (hi - lo));
  }
  return axis;
}

SweepGrid landscape_sweep(const ObjectiveFn& fn, SweepMethod method, const SweepAxis& axis1,
                          const SweepAxis& axis2, std::size_t horizon, const Vec& x0,
                          std::size_t threads) {
  if (axis1.values.empty() || axis2.values.empty()) {
    throw ConfigError("landscape_sweep: axes must be nonempty");
  }
  require_same_dim(fn.dim, x0.size(), "landscape_sweep start");
  SweepGrid grid{axis1, axis2, {}};
  const std::size_t n2 = axis2.values.size();
  grid.cells.resize(axis1.values.size() * n2);

  const OptimizerKind kind =
      method == SweepMethod::momentum ? OptimizerKind::momentum_gd : OptimizerKind::fgf;
  parallel_for(grid.cells.size(), threads, [&](std::size_t idx) {
    SweepCell cell{axis1.values[idx / n2], axis2.values[idx % n2], 0.0, false};
    Hyper hyper = default_hyper(kind);
    if (kind == OptimizerKind::momentum_gd) {
      hyper.beta1 = cell.v1;
    } else {
      hyper.frac.alpha = cell.v1;
    }
    hyper.lr = cell.v2;
    OptimizerState state = make_state(kind, x0, hyper);
    for (std::size_t t = 0; t < horizon && !cell.diverged; ++t) {
      const Vec g = fn.grad(state.iterate);
      state = step(std::move(state), 0.0, g);
      for (double v : state.iterate) {
        if (!(std::abs(v) <= 1e6)) cell.diverged = true;
      }
    }
    cell.final_f = cell.diverged ? kInf : fn.eval(state.iterate);
    if (!std::isfinite(cell.final_f)) cell.diverged = true;
    grid.cells[idx] = cell;
  });
  return grid;
}

void write_sweep_csv(std::ostream& out, const SweepGrid& grid) {
  out << "axis1,axis2,final_f,diverged\n";
  for (const auto& c : grid.cells) {
    out << fmt17(c.v1) << ',' << fmt17(c.v2) << ',' << fmt17(c.final_f) << ','
        << (c.diverged ? 1 : 0) << '\n';
  }
}

double near_optimal_fraction(const SweepGrid& grid, double f_min, double tol) {
  if (grid.cells.empty()) return 0.0;
  std::size_t hits = 0;
  for (const auto& c : grid.cells) {
    if (!c.diverged && std::abs(c.final_f - f_min) <= tol) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(grid.cells.size());
}

double max_adjacent_gap(const SweepGrid& grid) {
  const std::size_t n1 = grid.axis1.values.size();
  const std::size_t n2 = grid.axis2.values.size();
  double best = 0.0;
  auto consider = [&](const SweepCell& a, const SweepCell& b) {
    if (!a.diverged && !b.diverged) best = std::max(best, std::abs(a.final_f - b.final_f));
  };
  for (std::size_t i = 0; i < n1; ++i) {
    for (std::size_t j = 0; j < n2; ++j) {
      if (i + 1 < n1) consider(grid.at(i, j), grid.at(i + 1, j));
      if (j + 1 < n2) consider(grid.at(i, j), grid.at(i, j + 1));
    }
  }
  return best;
}

}  // namespace fracgrad
