#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fracgrad/common.hpp"
#include "fracgrad/objectives.hpp"

namespace fracgrad {

struct MetaNetConfig {
  std::size_t dim = 2;
  std::size_t freqs_per_dim = 16;
  std::vector<std::size_t> hidden = {64, 64};
  double eta_max = 1.0;
  double taylor_dx = 1.0;
};

struct DenseLayer {
  Eigen::MatrixXd weight;  // out x in
  Eigen::VectorXd bias;
};

/// Learned optimizer network: Fourier features + tanh MLP with two logistic heads.
///
/// Input: [X, grad/|grad|, log(1 + |grad|), sin(2 pi B X), cos(2 pi B X)].
/// Output: alpha = logistic(z0) in (0, 1), eta = eta_max * logistic(z1) in (0, eta_max).
/// B is drawn once at init and never trained.
struct MetaNet {
  MetaNetConfig config;
  Eigen::MatrixXd fourier_B;  // (freqs_per_dim * dim) x dim
  std::vector<DenseLayer> layers;

  /// Glorot-normal hidden layers; the output layer starts small with biases
  /// `alpha_bias`, `eta_bias` (pre-logistic).
  static MetaNet init(const MetaNetConfig& config, std::uint64_t seed, double alpha_bias = 6.0,
                      double eta_bias = -9.0);

  std::size_t input_dim() const;
  std::size_t num_params() const;
  /// Row-major weights then bias, layer by layer.
  Eigen::VectorXd flat_params() const;
  void set_flat_params(const Eigen::VectorXd& params);
};

struct StepDecision {
  double alpha = 0.5;
  double eta = 0.0;
};

/// [sin(2 pi B X), cos(2 pi B X)].
Eigen::VectorXd fourier_features(std::span<const double> x, const Eigen::MatrixXd& B);

/// Gradient direction input; the zero vector when |grad| < 1e-12.
Eigen::VectorXd build_input(const MetaNet& net, std::span<const double> x,
                            std::span<const double> grad);

StepDecision forward(const MetaNet& net, std::span<const double> x, std::span<const double> grad);

/// X - eta * frac_taylor_direction(f, grad) with the net's fixed displacement.
Vec fractional_update(std::span<const double> x, double f_val, std::span<const double> grad,
                      const StepDecision& decision, double taylor_dx);

/// log(shifted f(X')) - log(shifted f(X)) for the fractional update X -> X'.
double meta_loss(const ObjectiveFn& fn, std::span<const double> x, double alpha, double eta,
                 double taylor_dx = 1.0);

struct MetaGradient {
  double loss = 0.0;
  StepDecision decision;
  Vec next;
  std::vector<DenseLayer> grads;  // same shapes as net.layers
};

/// Analytic d(meta_loss)/d(theta) for one step, X treated as a constant.
MetaGradient meta_gradient(const MetaNet& net, const ObjectiveFn& fn, std::span<const double> x);

Eigen::VectorXd flatten(const std::vector<DenseLayer>& layers);

enum class Regime { with_supervision, without_supervision };
std::string_view regime_name(Regime regime);
Regime parse_regime(std::string_view name);

struct MetaTrainConfig {
  Regime regime = Regime::with_supervision;
  std::string target_fn = "rosenbrock2d";
  /// Non-empty: train on exactly these functions (the target must be absent
  /// without supervision). Empty: every registered function of the net's dim.
  std::vector<std::string> pool;
  std::size_t inner_steps = 20;
  std::size_t batch_starts = 64;
  std::size_t outer_steps = 2000;
  double adamw_lr = 1e-3;
  double adamw_beta1 = 0.9;
  double adamw_beta2 = 0.999;
  double adamw_weight_decay = 1e-4;
  std::uint64_t seed = 0;
  MetaNetConfig net{};

  void validate() const;
};

struct MetaTrainRecord {
  std::vector<std::string> pool;
  std::vector<double> mean_loss;                   // per outer step
  std::vector<std::vector<std::uint16_t>> batches;  // pool indices per outer step
};

struct MetaTrainResult {
  MetaNet net;
  MetaTrainRecord record;
};

/// Functions eligible for training under `cfg`.
std::vector<const ObjectiveFn*> training_pool(const MetaTrainConfig& cfg,
                                              const std::vector<ObjectiveFn>& fns);

MetaTrainResult meta_train(const MetaTrainConfig& cfg, const std::vector<ObjectiveFn>& fns);

void save_checkpoint(const MetaNet& net, const MetaTrainConfig& cfg,
                     const std::filesystem::path& path);
std::string checkpoint_json(const MetaNet& net, const MetaTrainConfig& cfg);
/// Throws CheckpointError on I/O failure, bad version or inconsistent shapes.
MetaNet load_checkpoint(const std::filesystem::path& path);
MetaNet parse_checkpoint(const std::string& text);

}  // namespace fracgrad
