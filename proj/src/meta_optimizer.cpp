#include "fracgrad/meta_optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "fracgrad/frac_calculus.hpp"
#include "fracgrad/optimizers.hpp"
#include "fracgrad/random.hpp"

namespace fracgrad {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using json = nlohmann::json;

constexpr int kCheckpointVersion = 1;

double logistic(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

struct ForwardCache {
  std::vector<VectorXd> activations;  // input, hidden_1, ..., hidden_L
  VectorXd logits;
};

StepDecision run_forward(const MetaNet& net, const VectorXd& input, ForwardCache* cache) {
  VectorXd a = input;
  if (cache) cache->activations.push_back(a);
  for (std::size_t l = 0; l + 1 < net.layers.size(); ++l) {
    a = (net.layers[l].weight * a + net.layers[l].bias).array().tanh().matrix();
    if (cache) cache->activations.push_back(a);
  }
  const DenseLayer& head = net.layers.back();
  VectorXd z = head.weight * a + head.bias;
  if (cache) cache->logits = z;
  return {logistic(z[0]), net.config.eta_max * logistic(z[1])};
}

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

// Unrolls stop once the iterate leaves the sampling box widened by its width on each side.
bool inside_expanded_domain(const ObjectiveFn& fn, std::span<const double> x) {
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double width = fn.domain[i].hi - fn.domain[i].lo;
    if (!(x[i] >= fn.domain[i].lo - width && x[i] <= fn.domain[i].hi + width)) return false;
  }
  return true;
}

}  // namespace

MetaNet MetaNet::init(const MetaNetConfig& config, std::uint64_t seed, double alpha_bias,
                      double eta_bias) {
  if (config.dim == 0 || config.freqs_per_dim == 0) {
    throw ConfigError("MetaNet: dim and freqs_per_dim must be positive");
  }
  Rng rng(seed);
  MetaNet net;
  net.config = config;
  const auto m = static_cast<Eigen::Index>(config.freqs_per_dim * config.dim);
  net.fourier_B.resize(m, static_cast<Eigen::Index>(config.dim));
  for (Eigen::Index r = 0; r < m; ++r) {
    for (Eigen::Index c = 0; c < net.fourier_B.cols(); ++c) net.fourier_B(r, c) = rng.normal();
  }

  std::vector<std::size_t> widths = {net.input_dim()};
  widths.insert(widths.end(), config.hidden.begin(), config.hidden.end());
  widths.push_back(2);
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    const auto in = static_cast<Eigen::Index>(widths[l]);
    const auto out = static_cast<Eigen::Index>(widths[l + 1]);
    const bool head = l + 2 == widths.size();
    const double scale = head ? 1e-2 : std::sqrt(2.0 / static_cast<double>(in + out));
    DenseLayer layer{MatrixXd(out, in), VectorXd::Zero(out)};
    for (Eigen::Index r = 0; r < out; ++r) {
      for (Eigen::Index c = 0; c < in; ++c) layer.weight(r, c) = scale * rng.normal();
    }
    if (head) layer.bias << alpha_bias, eta_bias;
    net.layers.push_back(std::move(layer));
  }
  return net;
}

std::size_t MetaNet::input_dim() const {
  return 2 * config.dim + 1 + 2 * config.freqs_per_dim * config.dim;
}

std::size_t MetaNet::num_params() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += static_cast<std::size_t>(l.weight.size() + l.bias.size());
  return n;
}

Eigen::VectorXd flatten(const std::vector<DenseLayer>& layers) {
  Eigen::Index n = 0;
  for (const auto& l : layers) n += l.weight.size() + l.bias.size();
  VectorXd flat(n);
  Eigen::Index k = 0;
  for (const auto& l : layers) {
    for (Eigen::Index r = 0; r < l.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < l.weight.cols(); ++c) flat[k++] = l.weight(r, c);
    }
    for (Eigen::Index r = 0; r < l.bias.size(); ++r) flat[k++] = l.bias[r];
  }
  return flat;
}

Eigen::VectorXd MetaNet::flat_params() const { return flatten(layers); }

void MetaNet::set_flat_params(const Eigen::VectorXd& params) {
  if (static_cast<std::size_t>(params.size()) != num_params()) {
    throw DimensionError("MetaNet::set_flat_params: wrong parameter count");
  }
  Eigen::Index k = 0;
  for (auto& l : layers) {
    for (Eigen::Index r = 0; r < l.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < l.weight.cols(); ++c) l.weight(r, c) = params[k++];
    }
    for (Eigen::Index r = 0; r < l.bias.size(); ++r) l.bias[r] = params[k++];
  }
}

Eigen::VectorXd fourier_features(std::span<const double> x, const Eigen::MatrixXd& B) {
  require_same_dim(static_cast<std::size_t>(B.cols()), x.size(), "fourier_features");
  const Eigen::Map<const VectorXd> xv(x.data(), static_cast<Eigen::Index>(x.size()));
  const VectorXd phase = 2.0 * std::numbers::pi * (B * xv);
  VectorXd out(2 * phase.size());
  out << phase.array().sin().matrix(), phase.array().cos().matrix();
  return out;
}

Eigen::VectorXd build_input(const MetaNet& net, std::span<const double> x,
                            std::span<const double> grad) {
  const std::size_t d = net.config.dim;
  require_same_dim(d, x.size(), "meta net state");
  require_same_dim(d, grad.size(), "meta net gradient");
  double norm = 0.0;
  for (double g : grad) norm += g * g;
  norm = std::sqrt(norm);

  VectorXd input(static_cast<Eigen::Index>(net.input_dim()));
  Eigen::Index k = 0;
  for (double v : x) input[k++] = v;
  for (double g : grad) input[k++] = norm < 1e-12 ? 0.0 : g / norm;
  input[k++] = std::log1p(norm);
  const VectorXd features = fourier_features(x, net.fourier_B);
  input.segment(k, features.size()) = features;
  return input;
}

StepDecision forward(const MetaNet& net, std::span<const double> x, std::span<const double> grad) {
  return run_forward(net, build_input(net, x, grad), nullptr);
}

Vec fractional_update(std::span<const double> x, double f_val, std::span<const double> grad,
                      const StepDecision& decision, double taylor_dx) {
  FracConfig cfg;
  cfg.alpha = decision.alpha;
  cfg.taylor_dx = taylor_dx;
  const Vec direction = frac_taylor_direction(f_val, grad, cfg);
  Vec next(x.begin(), x.end());
  for (std::size_t i = 0; i < next.size(); ++i) next[i] -= decision.eta * direction[i];
  return next;
}

double meta_loss(const ObjectiveFn& fn, std::span<const double> x, double alpha, double eta,
                 double taylor_dx) {
  const double f = fn.eval(x);
  const Vec next = fractional_update(x, f, fn.grad(x), {alpha, eta}, taylor_dx);
  if (!all_finite(next)) return std::numeric_limits<double>::infinity();
  return std::log(shifted_value(fn, fn.eval(next))) - std::log(shifted_value(fn, f));
}

MetaGradient meta_gradient(const MetaNet& net, const ObjectiveFn& fn, std::span<const double> x) {
  const double f = fn.eval(x);
  const Vec grad = fn.grad(x);
  ForwardCache cache;
  const StepDecision decision = run_forward(net, build_input(net, x, grad), &cache);

  FracConfig cfg;
  cfg.alpha = decision.alpha;
  cfg.taylor_dx = net.config.taylor_dx;
  const Vec direction = frac_taylor_direction(f, grad, cfg);
  const Vec direction_da = frac_taylor_alpha_derivative(f, grad, cfg);

  MetaGradient out;
  out.decision = decision;
  out.next.assign(x.begin(), x.end());
  for (std::size_t i = 0; i < out.next.size(); ++i) out.next[i] -= decision.eta * direction[i];
  for (const auto& l : net.layers) {
    out.grads.push_back({MatrixXd::Zero(l.weight.rows(), l.weight.cols()),
                         VectorXd::Zero(l.bias.size())});
  }
  if (!all_finite(out.next)) {
    out.loss = std::numeric_limits<double>::infinity();
    return out;
  }

  const double f_next = fn.eval(out.next);
  const double s_next = f_next - fn.global_min_value + kLogShift;
  out.loss = std::log(shifted_value(fn, f_next)) - std::log(shifted_value(fn, f));

  // dL/dX' vanishes where the shift clamps.
  Vec dloss_dnext(x.size(), 0.0);
  if (s_next > kLogShift) {
    const Vec grad_next = fn.grad(out.next);
    for (std::size_t i = 0; i < x.size(); ++i) dloss_dnext[i] = grad_next[i] / s_next;
  }
  double dloss_deta = 0.0;
  double dloss_dalpha = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    dloss_deta -= dloss_dnext[i] * direction[i];
    dloss_dalpha -= dloss_dnext[i] * decision.eta * direction_da[i];
  }

  const double a = decision.alpha;
  const double e = decision.eta;
  VectorXd delta(2);
  delta << dloss_dalpha * a * (1.0 - a), dloss_deta * e * (1.0 - e / net.config.eta_max);

  for (std::size_t l = net.layers.size(); l-- > 0;) {
    const VectorXd& input = cache.activations[l];
    out.grads[l].weight = delta * input.transpose();
    out.grads[l].bias = delta;
    if (l == 0) break;
    const VectorXd& h = cache.activations[l];
    delta = (net.layers[l].weight.transpose() * delta).cwiseProduct(
        (1.0 - h.array().square()).matrix());
  }
  return out;
}

std::string_view regime_name(Regime regime) {
  return regime == Regime::with_supervision ? "with_supervision" : "without_supervision";
}

Regime parse_regime(std::string_view name) {
  if (name == "with" || name == "with_supervision") return Regime::with_supervision;
  if (name == "without" || name == "without_supervision") return Regime::without_supervision;
  throw ConfigError("unknown regime '" + std::string(name) + "'");
}

void MetaTrainConfig::validate() const {
  if (inner_steps == 0) throw ConfigError("meta_train: inner_steps must be positive");
  if (batch_starts == 0) throw ConfigError("meta_train: batch_starts must be positive");
  if (!(adamw_lr > 0.0)) throw ConfigError("meta_train: AdamW lr must be positive");
  if (regime == Regime::without_supervision &&
      std::find(pool.begin(), pool.end(), target_fn) != pool.end()) {
    throw ConfigError("meta_train: the target may not be in the pool without supervision");
  }
}

std::vector<const ObjectiveFn*> training_pool(const MetaTrainConfig& cfg,
                                              const std::vector<ObjectiveFn>& fns) {
  std::vector<const ObjectiveFn*> pool;
  for (const auto& fn : fns) {
    if (fn.dim != cfg.net.dim) continue;
    if (cfg.regime == Regime::without_supervision && fn.name == cfg.target_fn) continue;
    if (!cfg.pool.empty() &&
        std::find(cfg.pool.begin(), cfg.pool.end(), fn.name) == cfg.pool.end()) {
      continue;
    }
    pool.push_back(&fn);
  }
  if (!cfg.pool.empty() && pool.size() != cfg.pool.size()) {
    throw ConfigError("meta_train: pool names unknown or of the wrong dimension");
  }
  if (pool.empty()) throw ConfigError("meta_train: empty training pool");
  if (cfg.regime == Regime::without_supervision && pool.size() < 2 && cfg.pool.empty()) {
    throw ConfigError("meta_train: need at least two functions without supervision");
  }
  return pool;
}

MetaTrainResult meta_train(const MetaTrainConfig& cfg, const std::vector<ObjectiveFn>& fns) {
  cfg.validate();
  const auto pool = training_pool(cfg, fns);

  MetaTrainResult result{MetaNet::init(cfg.net, derive_seed(cfg.seed, 0)), {}};
  for (const auto* fn : pool) result.record.pool.push_back(fn->name);

  const VectorXd theta0 = result.net.flat_params();
  Hyper adamw = default_hyper(OptimizerKind::adamw);
  adamw.lr = cfg.adamw_lr;
  adamw.beta1 = cfg.adamw_beta1;
  adamw.beta2 = cfg.adamw_beta2;
  adamw.weight_decay = cfg.adamw_weight_decay;
  OptimizerState outer =
      make_state(OptimizerKind::adamw, Vec(theta0.data(), theta0.data() + theta0.size()), adamw);

  Rng rng(derive_seed(cfg.seed, 1));
  for (std::size_t step = 0; step < cfg.outer_steps; ++step) {
    std::vector<DenseLayer> acc;
    for (const auto& l : result.net.layers) {
      acc.push_back({MatrixXd::Zero(l.weight.rows(), l.weight.cols()),
                     VectorXd::Zero(l.bias.size())});
    }
    std::vector<std::uint16_t> batch;
    double loss_sum = 0.0;
    std::size_t count = 0;
    for (std::size_t b = 0; b < cfg.batch_starts; ++b) {
      const auto pick = static_cast<std::size_t>(rng.uniform01() * static_cast<double>(pool.size()));
      const ObjectiveFn& fn = *pool[std::min(pick, pool.size() - 1)];
      batch.push_back(static_cast<std::uint16_t>(std::min(pick, pool.size() - 1)));
      Vec x = sample_start(fn, rng);
      for (std::size_t t = 0; t < cfg.inner_steps; ++t) {
        MetaGradient g = meta_gradient(result.net, fn, x);
        if (!std::isfinite(g.loss)) break;
        for (std::size_t l = 0; l < acc.size(); ++l) {
          acc[l].weight += g.grads[l].weight;
          acc[l].bias += g.grads[l].bias;
        }
        loss_sum += g.loss;
        ++count;
        x = std::move(g.next);
        if (!inside_expanded_domain(fn, x)) break;
      }
    }
    result.record.batches.push_back(std::move(batch));
    result.record.mean_loss.push_back(count ? loss_sum / static_cast<double>(count) : 0.0);
    if (count == 0) continue;

    VectorXd flat = flatten(acc) / static_cast<double>(count);
    outer = baseline_step(std::move(outer), std::span<const double>(flat.data(), flat.size()));
    result.net.set_flat_params(
        Eigen::Map<const VectorXd>(outer.iterate.data(), static_cast<Eigen::Index>(outer.iterate.size())));
  }
  return result;
}

std::string checkpoint_json(const MetaNet& net, const MetaTrainConfig& cfg) {
  auto matrix = [](const MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      json row = json::array();
      for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
      rows.push_back(std::move(row));
    }
    return rows;
  };
  json doc;
  doc["format"] = "fracgrad-metanet";
  doc["version"] = kCheckpointVersion;
  doc["net"] = {{"dim", net.config.dim},
                {"freqs_per_dim", net.config.freqs_per_dim},
                {"hidden", net.config.hidden},
                {"eta_max", net.config.eta_max},
                {"taylor_dx", net.config.taylor_dx}};
  doc["fourier_B"] = matrix(net.fourier_B);
  json layers = json::array();
  for (const auto& l : net.layers) {
    layers.push_back({{"weight", matrix(l.weight)},
                      {"bias", std::vector<double>(l.bias.data(), l.bias.data() + l.bias.size())}});
  }
  doc["layers"] = std::move(layers);
  doc["config"] = {{"regime", regime_name(cfg.regime)},
                   {"target_fn", cfg.target_fn},
                   {"pool", cfg.pool},
                   {"inner_steps", cfg.inner_steps},
                   {"batch_starts", cfg.batch_starts},
                   {"outer_steps", cfg.outer_steps},
                   {"adamw", {{"lr", cfg.adamw_lr},
                              {"beta1", cfg.adamw_beta1},
                              {"beta2", cfg.adamw_beta2},
                              {"weight_decay", cfg.adamw_weight_decay}}},
                   {"seed", cfg.seed}};
  return doc.dump(1) + "\n";
}

void save_checkpoint(const MetaNet& net, const MetaTrainConfig& cfg,
                     const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CheckpointError("cannot write checkpoint " + path.string());
  out << checkpoint_json(net, cfg);
  if (!out) throw CheckpointError("failed writing checkpoint " + path.string());
}

MetaNet parse_checkpoint(const std::string& text) {
  try {
    const json doc = json::parse(text);
    if (doc.at("format").get<std::string>() != "fracgrad-metanet" ||
        doc.at("version").get<int>() != kCheckpointVersion) {
      throw CheckpointError("unsupported checkpoint format or version");
    }
    auto matrix = [](const json& rows) {
      const auto r = static_cast<Eigen::Index>(rows.size());
      const auto c = r ? static_cast<Eigen::Index>(rows.at(0).size()) : 0;
      MatrixXd m(r, c);
      for (Eigen::Index i = 0; i < r; ++i) {
        if (static_cast<Eigen::Index>(rows.at(i).size()) != c) {
          throw CheckpointError("ragged matrix in checkpoint");
        }
        for (Eigen::Index j = 0; j < c; ++j) m(i, j) = rows.at(i).at(j).get<double>();
      }
      return m;
    };
    MetaNet net;
    const json& cfg = doc.at("net");
    net.config.dim = cfg.at("dim").get<std::size_t>();
    net.config.freqs_per_dim = cfg.at("freqs_per_dim").get<std::size_t>();
    net.config.hidden = cfg.at("hidden").get<std::vector<std::size_t>>();
    net.config.eta_max = cfg.at("eta_max").get<double>();
    net.config.taylor_dx = cfg.at("taylor_dx").get<double>();
    net.fourier_B = matrix(doc.at("fourier_B"));
    for (const auto& l : doc.at("layers")) {
      const auto bias = l.at("bias").get<std::vector<double>>();
      net.layers.push_back({matrix(l.at("weight")),
                            Eigen::Map<const VectorXd>(bias.data(), static_cast<Eigen::Index>(bias.size()))});
    }

    if (net.fourier_B.rows() != static_cast<Eigen::Index>(net.config.freqs_per_dim * net.config.dim) ||
        net.fourier_B.cols() != static_cast<Eigen::Index>(net.config.dim) ||
        net.layers.size() != net.config.hidden.size() + 1) {
      throw CheckpointError("checkpoint shapes do not match its net config");
    }
    auto width = static_cast<Eigen::Index>(net.input_dim());
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
      const auto out = static_cast<Eigen::Index>(l < net.config.hidden.size() ? net.config.hidden[l] : 2);
      if (net.layers[l].weight.rows() != out || net.layers[l].weight.cols() != width ||
          net.layers[l].bias.size() != out) {
        throw CheckpointError("checkpoint layer " + std::to_string(l) + " has the wrong shape");
      }
      width = out;
    }
    return net;
  } catch (const CheckpointError&) {
    throw;
  } catch (const std::exception& e) {
    throw CheckpointError(std::string("malformed checkpoint: ") + e.what());
  }
}

MetaNet load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot read checkpoint " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_checkpoint(buffer.str());
}

}  // namespace fracgrad
