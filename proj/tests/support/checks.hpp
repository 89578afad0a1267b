#pragma once

#include <algorithm>
#include <array>
#include <cmath>

#include "fracgrad/chaotic_lab.hpp"
#include "fracgrad/meta_optimizer.hpp"
#include "fracgrad/objectives.hpp"

namespace fracgrad {

struct GradientCheck {
  double max_rel_err = 0.0;
  std::size_t params = 0;
};

/// Central-difference check of meta_gradient over every parameter.
/// rel_err_i = |fd_i - an_i| / max(|fd_i|, |an_i|, kFloor * max_j |an_j|).
/// The floor keeps near-zero components from being scored on difference roundoff.
inline GradientCheck check_meta_gradient(const MetaNet& net, const ObjectiveFn& fn, const Vec& x,
                                         double step = 1e-6) {
  constexpr double kFloor = 1e-3;
  const Eigen::VectorXd analytic = flatten(meta_gradient(net, fn, x).grads);
  const double scale = std::max(analytic.cwiseAbs().maxCoeff(), 1e-12);
  Eigen::VectorXd theta = net.flat_params();
  MetaNet probe = net;
  auto loss_at = [&](const Eigen::VectorXd& params) {
    probe.set_flat_params(params);
    const StepDecision d = forward(probe, x, fn.grad(x));
    return meta_loss(fn, x, d.alpha, d.eta, net.config.taylor_dx);
  };
  GradientCheck out;
  out.params = static_cast<std::size_t>(theta.size());
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    const double keep = theta[i];
    theta[i] = keep + step;
    const double plus = loss_at(theta);
    theta[i] = keep - step;
    const double minus = loss_at(theta);
    theta[i] = keep;
    const double fd = (plus - minus) / (2.0 * step);
    const double denom = std::max({std::abs(fd), std::abs(analytic[i]), kFloor * scale});
    out.max_rel_err = std::max(out.max_rel_err, std::abs(fd - analytic[i]) / denom);
  }
  return out;
}

/// Objective gradient vs central differences at x, same scoring as above
/// with the floor at 1e-6 * max(max_j |an_j|, 1).
inline double objective_grad_rel_err(const ObjectiveFn& fn, const Vec& x, double step = 1e-6) {
  const Vec analytic = fn.grad(x);
  double scale = 1.0;
  for (double g : analytic) scale = std::max(scale, std::abs(g));
  double worst = 0.0;
  Vec probe = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    probe[i] = x[i] + step;
    const double plus = fn.eval(probe);
    probe[i] = x[i] - step;
    const double minus = fn.eval(probe);
    probe[i] = x[i];
    const double fd = (plus - minus) / (2.0 * step);
    const double denom = std::max({std::abs(fd), std::abs(analytic[i]), 1e-6 * scale});
    worst = std::max(worst, std::abs(fd - analytic[i]) / denom);
  }
  return worst;
}

/// Untruncated TBTT gradient vs central differences of lorenz_loss.
inline double tbtt_rel_err(const LorenzParams& p, const LorenzTrajectory& target,
                           const LorenzSetup& setup, double step = 1e-6) {
  const auto analytic = tbtt_gradient(p, target, setup, setup.steps);
  double worst = 0.0;
  for (int i = 0; i < 2; ++i) {
    LorenzParams plus = p;
    LorenzParams minus = p;
    (i == 0 ? plus.log_sigma : plus.log_rho) += step;
    (i == 0 ? minus.log_sigma : minus.log_rho) -= step;
    const double fd =
        (lorenz_loss(plus, target, setup) - lorenz_loss(minus, target, setup)) / (2.0 * step);
    const double denom = std::max({std::abs(fd), std::abs(analytic[i]), 1e-12});
    worst = std::max(worst, std::abs(fd - analytic[i]) / denom);
  }
  return worst;
}

}  // namespace fracgrad
