#include "fracgrad/frac_calculus.hpp"

#include <cmath>
#include <numbers>
#include <ostream>

namespace fracgrad {
namespace {

bool is_gamma_pole(double x) { return x <= 0.0 && x == std::floor(x); }

// 8-point Gauss-Legendre on [-1, 1]; nodes are symmetric.
constexpr std::array<double, 4> kGlNodes = {0.1834346424956498, 0.5255324099163290,
                                            0.7966664774136267, 0.9602898564975363};
constexpr std::array<double, 4> kGlWeights = {0.3626837833783620, 0.3137066458778873,
                                              0.2223810344533745, 0.1012285362903763};

// Composite Gauss-Legendre of g over [0, 1] using at least `nodes` points.
template <typename G>
double integrate_unit(const G& g, std::size_t nodes) {
  const std::size_t panels = std::max<std::size_t>(1, (nodes + 7) / 8);
  const double width = 1.0 / static_cast<double>(panels);
  double total = 0.0;
  for (std::size_t p = 0; p < panels; ++p) {
    const double mid = (static_cast<double>(p) + 0.5) * width;
    double panel = 0.0;
    for (std::size_t i = 0; i < kGlNodes.size(); ++i) {
      const double offset = 0.5 * width * kGlNodes[i];
      panel += kGlWeights[i] * (g(mid - offset) + g(mid + offset));
    }
    total += 0.5 * width * panel;
  }
  return total;
}

void require_unit_interval_order(double alpha, const char* what) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw DomainError(std::string(what) + ": alpha must lie in (0, 1)");
  }
}

// integral_0^L s^(-alpha) h(s) ds with s = L u^q, q = 1/(1-alpha).
template <typename H>
double weakly_singular_integral(const H& h, double length, double alpha, std::size_t nodes) {
  const double q = 1.0 / (1.0 - alpha);
  const double inner = integrate_unit([&](double u) { return h(length * std::pow(u, q)); }, nodes);
  return std::pow(length, 1.0 - alpha) * q * inner;
}

double taylor_dx_at(const FracConfig& cfg, std::span<const double> point, std::size_t i) {
  if (cfg.taylor_dx_mode == TaylorDxMode::fixed) return cfg.taylor_dx;
  return point[i] - cfg.terminal_a;
}

void check_taylor_inputs(std::span<const double> grad, const FracConfig& cfg,
                         std::span<const double> point) {
  if (cfg.taylor_dx_mode == TaylorDxMode::coordinate) {
    require_same_dim(grad.size(), point.size(), "frac_taylor_direction point");
  }
}

}  // namespace

void FracConfig::validate() const {
  if (!std::isfinite(alpha)) throw ConfigError("FracConfig: alpha must be finite");
  if (!(step_h > 0.0)) throw ConfigError("FracConfig: step_h must be positive");
  if (!(taylor_dx > 0.0)) throw ConfigError("FracConfig: taylor_dx must be positive");
}

double gamma_fn(double x) {
  if (is_gamma_pole(x)) throw DomainError("gamma_fn: pole at non-positive integer");
  return std::tgamma(x);
}

double recip_gamma(double x) {
  if (is_gamma_pole(x)) return 0.0;
  return 1.0 / std::tgamma(x);
}

double digamma(double x) {
  if (is_gamma_pole(x)) throw DomainError("digamma: pole at non-positive integer");
  if (x < 0.0) {
    // reflection: psi(1 - x) - psi(x) = pi cot(pi x)
    return digamma(1.0 - x) - std::numbers::pi / std::tan(std::numbers::pi * x);
  }
  double shift = 0.0;
  while (x < 10.0) {
    shift -= 1.0 / x;
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  const double series =
      inv2 * (1.0 / 12 - inv2 * (1.0 / 120 - inv2 * (1.0 / 252 - inv2 * (1.0 / 240 - inv2 / 132))));
  return shift + std::log(x) - 0.5 * inv - series;
}

double gen_binomial(double alpha, std::size_t k) {
  double b = 1.0;
  for (std::size_t j = 1; j <= k; ++j) {
    b *= (alpha - static_cast<double>(j) + 1.0) / static_cast<double>(j);
  }
  return b;
}

double gl_derivative(const ScalarFn& f, double x, const FracConfig& cfg) {
  cfg.validate();
  const double span = x - cfg.terminal_a;
  if (!(span > 0.0)) throw DomainError("gl_derivative: x must exceed the terminal");
  if (cfg.step_h > span) throw DomainError("gl_derivative: step_h exceeds x - terminal");

  const auto terms = static_cast<std::size_t>(std::floor(span / cfg.step_h * (1.0 + 1e-12)));
  double weight = 1.0;  // (-1)^k (alpha choose k)
  double sum = f(x);
  for (std::size_t k = 1; k <= terms; ++k) {
    weight *= (static_cast<double>(k) - 1.0 - cfg.alpha) / static_cast<double>(k);
    sum += weight * f(x - static_cast<double>(k) * cfg.step_h);
  }
  return sum / std::pow(cfg.step_h, cfg.alpha);
}

double rl_quadrature(const ScalarFn& f, double x, const FracConfig& cfg, std::size_t nodes) {
  require_unit_interval_order(cfg.alpha, "rl_quadrature");
  const double span = x - cfg.terminal_a;
  if (!(span > 0.0)) throw DomainError("rl_quadrature: x must exceed the terminal");

  auto fractional_integral = [&](double at) {
    return weakly_singular_integral([&](double s) { return f(at - s); }, at - cfg.terminal_a,
                                    cfg.alpha, nodes);
  };
  const double delta = 1e-5 * span;
  const double derivative =
      (fractional_integral(x + delta) - fractional_integral(x - delta)) / (2.0 * delta);
  return recip_gamma(1.0 - cfg.alpha) * derivative;
}

double caputo_quadrature(const ScalarFn& df, double x, const FracConfig& cfg, std::size_t nodes) {
  require_unit_interval_order(cfg.alpha, "caputo_quadrature");
  const double span = x - cfg.terminal_a;
  if (!(span > 0.0)) throw DomainError("caputo_quadrature: x must exceed the terminal");
  return recip_gamma(1.0 - cfg.alpha) *
         weakly_singular_integral([&](double s) { return df(x - s); }, span, cfg.alpha, nodes);
}

Vec frac_taylor_direction(double f_val, std::span<const double> grad, const FracConfig& cfg,
                          std::span<const double> point) {
  check_taylor_inputs(grad, cfg, point);
  const double drift = recip_gamma(1.0 - cfg.alpha) * f_val;
  const double scale = cfg.alpha * recip_gamma(cfg.alpha);
  Vec out(grad.size());
  for (std::size_t i = 0; i < grad.size(); ++i) {
    out[i] = drift + scale * taylor_dx_at(cfg, point, i) * grad[i];
  }
  return out;
}

Vec frac_taylor_alpha_derivative(double f_val, std::span<const double> grad,
                                 const FracConfig& cfg, std::span<const double> point) {
  require_unit_interval_order(cfg.alpha, "frac_taylor_alpha_derivative");
  check_taylor_inputs(grad, cfg, point);
  const double a = cfg.alpha;
  const double drift = f_val * digamma(1.0 - a) * recip_gamma(1.0 - a);
  const double scale = recip_gamma(a) * (1.0 - a * digamma(a));
  Vec out(grad.size());
  for (std::size_t i = 0; i < grad.size(); ++i) {
    out[i] = drift + scale * taylor_dx_at(cfg, point, i) * grad[i];
  }
  return out;
}

FracJacobian2x2 frac_jacobian_example(double x, double y, double alpha) {
  if (!(x > 0.0 && y > 0.0)) {
    throw DomainError("frac_jacobian_example: coordinates must be positive");
  }
  const double r1 = recip_gamma(1.0 - alpha);
  const double r2 = recip_gamma(2.0 - alpha);
  const double r3 = recip_gamma(3.0 - alpha);
  FracJacobian2x2 jac;
  jac.alpha = alpha;
  jac.at_point = {x, y};
  jac.entries[0][0] = std::pow(x, -alpha) * (2.0 * x * x * r3 - y * y * r1);
  jac.entries[0][1] = std::pow(y, -alpha) * (x * x * r1 - 2.0 * y * y * r3);
  jac.entries[1][0] = 3.0 * y * std::pow(x, 1.0 - alpha) * r2;
  jac.entries[1][1] = 3.0 * x * std::pow(y, 1.0 - alpha) * r2;
  return jac;
}

std::vector<GridPair> grid_transform(const LatticeSpec& lattice, double alpha) {
  if (lattice.n == 0) throw ConfigError("grid_transform: lattice needs at least one point");
  const double step =
      lattice.n > 1 ? (lattice.max - lattice.min) / static_cast<double>(lattice.n - 1) : 0.0;
  std::vector<GridPair> pairs;
  pairs.reserve(lattice.n * lattice.n);
  for (std::size_t iy = 0; iy < lattice.n; ++iy) {
    for (std::size_t ix = 0; ix < lattice.n; ++ix) {
      const std::array<double, 2> p = {lattice.min + static_cast<double>(ix) * step,
                                       lattice.min + static_cast<double>(iy) * step};
      pairs.push_back({p, frac_jacobian_example(p[0], p[1], alpha).apply(p)});
    }
  }
  return pairs;
}

void write_grid_csv(std::ostream& out, std::span<const GridPair> pairs) {
  out << "in_x,in_y,out_x,out_y\n";
  for (const auto& pair : pairs) {
    out << fmt17(pair.in[0]) << ',' << fmt17(pair.in[1]) << ',' << fmt17(pair.out[0]) << ','
        << fmt17(pair.out[1]) << '\n';
  }
}

}  // namespace fracgrad
