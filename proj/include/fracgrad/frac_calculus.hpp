#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "fracgrad/common.hpp"

namespace fracgrad {

/// How the displacement of the first-order Taylor surrogate is chosen.
///  - fixed: every coordinate uses `taylor_dx`.
///  - coordinate: coordinate i uses X_i - terminal_a.
enum class TaylorDxMode { fixed, coordinate };

/// Parameters of a fractional derivative evaluation.
struct FracConfig {
  double alpha = 0.5;
  double terminal_a = 0.0;
  double step_h = 1e-4;
  double taylor_dx = 1.0;
  TaylorDxMode taylor_dx_mode = TaylorDxMode::fixed;

  /// Throws ConfigError if step_h or taylor_dx is not positive or alpha is not finite.
  void validate() const;
};

using ScalarFn = std::function<double(double)>;

/// Gamma function. Throws DomainError at the poles {0, -1, -2, ...}.
double gamma_fn(double x);

/// 1/Gamma(x); exactly 0 at the poles of Gamma.
double recip_gamma(double x);

/// Digamma psi(x) = Gamma'(x)/Gamma(x). Throws DomainError at the poles.
double digamma(double x);

/// Generalized binomial coefficient (alpha choose k).
double gen_binomial(double alpha, std::size_t k);

/// Grunwald-Letnikov derivative with the sum anchored at cfg.terminal_a.
double gl_derivative(const ScalarFn& f, double x, const FracConfig& cfg);

/// Riemann-Liouville derivative for 0 < alpha < 1 by quadrature.
///
/// The kernel (x-t)^(-alpha) is removed by the graded substitution
/// x - t = L u^(1/(1-alpha)), after which the integrand is smooth and a
/// composite 8-point Gauss-Legendre rule with `nodes` points is applied. The
/// outer d/dx is a central difference. Intended as a reference, not a fast path.
double rl_quadrature(const ScalarFn& f, double x, const FracConfig& cfg, std::size_t nodes = 4096);

/// Caputo derivative for 0 < alpha < 1: fractional integral of `df` (f').
double caputo_quadrature(const ScalarFn& df, double x, const FracConfig& cfg,
                         std::size_t nodes = 4096);

/// First-order Taylor surrogate of D^alpha f used in the fractional update:
///   g_i = f / Gamma(1 - alpha) + alpha * dx_i * grad_i / Gamma(alpha).
/// `point` is only read in TaylorDxMode::coordinate.
Vec frac_taylor_direction(double f_val, std::span<const double> grad, const FracConfig& cfg,
                          std::span<const double> point = {});

/// d g_i / d alpha of frac_taylor_direction, for 0 < alpha < 1.
Vec frac_taylor_alpha_derivative(double f_val, std::span<const double> grad,
                                 const FracConfig& cfg, std::span<const double> point = {});

struct FracJacobian2x2 {
  std::array<std::array<double, 2>, 2> entries{};
  double alpha = 1.0;
  std::array<double, 2> at_point{};

  std::array<double, 2> apply(const std::array<double, 2>& v) const {
    return {entries[0][0] * v[0] + entries[0][1] * v[1],
            entries[1][0] * v[0] + entries[1][1] * v[1]};
  }
};

/// Fractional Jacobian of f(x, y) = (x^2 - y^2, 3xy), per-coordinate fractional
/// partials with terminal 0. Requires x > 0 and y > 0.
FracJacobian2x2 frac_jacobian_example(double x, double y, double alpha);

/// Square lattice {min + i*step}^2 with n points per side.
struct LatticeSpec {
  double min = 0.1;
  double max = 1.0;
  std::size_t n = 11;
};

struct GridPair {
  std::array<double, 2> in{};
  std::array<double, 2> out{};
};

/// Maps each lattice point p to J^alpha(p) p. Row-major: y outer, x inner.
std::vector<GridPair> grid_transform(const LatticeSpec& lattice, double alpha);

/// CSV with header in_x,in_y,out_x,out_y and 17 significant digits.
void write_grid_csv(std::ostream& out, std::span<const GridPair> pairs);

}  // namespace fracgrad
