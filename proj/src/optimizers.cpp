#include "fracgrad/optimizers.hpp"

#include <algorithm>
#include <cmath>

namespace fracgrad {
namespace {

struct KindName {
  OptimizerKind kind;
  std::string_view name;
};

constexpr KindName kKindNames[] = {
    {OptimizerKind::gd, "gd"},           {OptimizerKind::momentum_gd, "momentum_gd"},
    {OptimizerKind::adam, "adam"},       {OptimizerKind::adamw, "adamw"},
    {OptimizerKind::rmsprop, "rmsprop"}, {OptimizerKind::adagrad, "adagrad"},
    {OptimizerKind::adafactor, "adafactor"}, {OptimizerKind::frac_gd, "frac_gd"},
    {OptimizerKind::fgf, "fgf"},
};

void check_grad(const OptimizerState& state, std::span<const double> grad) {
  require_same_dim(state.iterate.size(), grad.size(), "optimizer step gradient");
}

}  // namespace

std::string_view kind_name(OptimizerKind kind) {
  for (const auto& entry : kKindNames) {
    if (entry.kind == kind) return entry.name;
  }
  return "unknown";
}

OptimizerKind parse_kind(std::string_view name) {
  if (name == "momentum") return OptimizerKind::momentum_gd;
  if (name == "fracgd") return OptimizerKind::frac_gd;
  for (const auto& entry : kKindNames) {
    if (entry.name == name) return entry.kind;
  }
  throw ConfigError("unknown optimizer '" + std::string(name) + "'");
}

bool is_baseline(OptimizerKind kind) {
  return kind != OptimizerKind::frac_gd && kind != OptimizerKind::fgf;
}

Hyper default_hyper(OptimizerKind kind) {
  Hyper h;
  switch (kind) {
    case OptimizerKind::adamw:
      h.weight_decay = 1e-2;
      break;
    case OptimizerKind::adagrad:
      h.eps = 1e-10;
      break;
    case OptimizerKind::adafactor:
      h.eps = 1e-30;
      h.beta1 = 0.0;
      break;
    case OptimizerKind::frac_gd:
      h.frac.alpha = 0.9;
      break;
    case OptimizerKind::fgf:
      h.frac.alpha = 0.9;
      break;
    default:
      break;
  }
  return h;
}

OptimizerState make_state(OptimizerKind kind, Vec x0, const Hyper& hyper) {
  if (kind == OptimizerKind::frac_gd) hyper.frac.validate();
  if (hyper.memory_window && *hyper.memory_window == 0) {
    throw ConfigError("fgf memory window must be at least 1");
  }
  OptimizerState state;
  state.kind = kind;
  state.hyper = hyper;
  state.first_moment.assign(x0.size(), 0.0);
  state.second_moment.assign(x0.size(), 0.0);
  if (kind == OptimizerKind::fgf) {
    state.history.push_back(x0);
    state.memory_coefficients = fgf_coefficients(hyper.frac.alpha, 0);
  }
  state.iterate = std::move(x0);
  return state;
}

OptimizerState baseline_step(OptimizerState state, std::span<const double> grad) {
  if (!is_baseline(state.kind)) throw ConfigError("baseline_step: not a baseline optimizer");
  check_grad(state, grad);
  const Hyper& h = state.hyper;
  Vec& x = state.iterate;
  Vec& m = state.first_moment;
  Vec& v = state.second_moment;
  const std::size_t n = x.size();
  const double t = static_cast<double>(state.step_count + 1);

  switch (state.kind) {
    case OptimizerKind::gd:
      for (std::size_t i = 0; i < n; ++i) x[i] -= h.lr * grad[i];
      break;
    case OptimizerKind::momentum_gd:
      for (std::size_t i = 0; i < n; ++i) {
        m[i] = h.beta1 * m[i] + grad[i];
        x[i] -= h.lr * m[i];
      }
      break;
    case OptimizerKind::adam:
    case OptimizerKind::adamw: {
      const double c1 = 1.0 - std::pow(h.beta1, t);
      const double c2 = 1.0 - std::pow(h.beta2, t);
      for (std::size_t i = 0; i < n; ++i) {
        m[i] = h.beta1 * m[i] + (1.0 - h.beta1) * grad[i];
        v[i] = h.beta2 * v[i] + (1.0 - h.beta2) * grad[i] * grad[i];
        double update = (m[i] / c1) / (std::sqrt(v[i] / c2) + h.eps);
        if (state.kind == OptimizerKind::adamw) update += h.weight_decay * x[i];
        x[i] -= h.lr * update;
      }
      break;
    }
    case OptimizerKind::rmsprop:
      for (std::size_t i = 0; i < n; ++i) {
        v[i] = h.rms_decay * v[i] + (1.0 - h.rms_decay) * grad[i] * grad[i];
        x[i] -= h.lr * grad[i] / (std::sqrt(v[i]) + h.eps);
      }
      break;
    case OptimizerKind::adagrad:
      for (std::size_t i = 0; i < n; ++i) {
        v[i] += grad[i] * grad[i];
        x[i] -= h.lr * grad[i] / std::sqrt(v[i] + h.eps);
      }
      break;
    case OptimizerKind::adafactor: {
      // The parameter is a 1 x n matrix: one row factor, n column factors.
      const double decay = 1.0 - std::pow(t, h.adafactor_decay);
      double row_mean = 0.0;
      for (std::size_t i = 0; i < n; ++i) row_mean += grad[i] * grad[i] + h.eps;
      row_mean /= static_cast<double>(n);
      state.adafactor_row = decay * state.adafactor_row + (1.0 - decay) * row_mean;
      Vec u(n);
      double rms = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        v[i] = decay * v[i] + (1.0 - decay) * (grad[i] * grad[i] + h.eps);
        // row * col / mean(row); with a single row the ratio is exactly v[i]
        const double vhat = state.adafactor_row * v[i] / state.adafactor_row;
        u[i] = grad[i] / std::sqrt(vhat);
        rms += u[i] * u[i];
      }
      rms = std::sqrt(rms / static_cast<double>(n));
      const double clip = std::max(1.0, rms / h.adafactor_clip);
      for (std::size_t i = 0; i < n; ++i) {
        double update = u[i] / clip;
        if (h.beta1 > 0.0) {
          m[i] = h.beta1 * m[i] + (1.0 - h.beta1) * update;
          update = m[i];
        }
        x[i] -= h.lr * update;
      }
      break;
    }
    default:
      break;
  }
  ++state.step_count;
  return state;
}

OptimizerState frac_gd_step(OptimizerState state, double f_val, std::span<const double> grad) {
  if (state.kind != OptimizerKind::frac_gd) throw ConfigError("frac_gd_step: wrong optimizer");
  check_grad(state, grad);
  const FracConfig& cfg = state.hyper.frac;
  if (!(cfg.alpha >= 0.0 && cfg.alpha <= 1.0)) {
    throw DomainError("frac_gd_step: alpha must lie in [0, 1]");
  }
  const Vec direction = frac_taylor_direction(f_val, grad, cfg, state.iterate);
  for (std::size_t i = 0; i < state.iterate.size(); ++i) {
    state.iterate[i] -= state.hyper.lr * direction[i];
  }
  ++state.step_count;
  return state;
}

Vec fgf_coefficients(double alpha, std::size_t k) {
  Vec c(k + 1);
  c[0] = alpha;
  for (std::size_t j = 1; j <= k; ++j) {
    c[j] = c[j - 1] * (static_cast<double>(j) - alpha) / static_cast<double>(j + 1);
  }
  return c;
}

OptimizerState fgf_step(OptimizerState state, std::span<const double> grad) {
  if (state.kind != OptimizerKind::fgf) throw ConfigError("fgf_step: wrong optimizer");
  check_grad(state, grad);
  if (state.history.empty()) throw ConfigError("fgf_step: empty history");
  const double alpha = state.hyper.frac.alpha;
  const std::size_t k = state.history.size() - 1;

  Vec& c = state.memory_coefficients;
  while (c.size() < k + 1) {
    const auto j = static_cast<double>(c.size());
    c.push_back(c.back() * (j - alpha) / (j + 1.0));
  }

  std::size_t terms = k + 1;
  if (state.hyper.memory_window) terms = std::min(terms, *state.hyper.memory_window);

  const double gain = std::pow(state.hyper.lr, alpha);
  Vec next(grad.size());
  for (std::size_t i = 0; i < grad.size(); ++i) next[i] = -gain * grad[i];
  for (std::size_t j = 0; j < terms; ++j) {
    const Vec& past = state.history[k - j];
    for (std::size_t i = 0; i < next.size(); ++i) next[i] += c[j] * past[i];
  }
  state.history.push_back(next);
  state.iterate = std::move(next);
  ++state.step_count;
  return state;
}

OptimizerState step(OptimizerState state, double f_val, std::span<const double> grad) {
  switch (state.kind) {
    case OptimizerKind::frac_gd:
      return frac_gd_step(std::move(state), f_val, grad);
    case OptimizerKind::fgf:
      return fgf_step(std::move(state), grad);
    default:
      return baseline_step(std::move(state), grad);
  }
}

}  // namespace fracgrad
