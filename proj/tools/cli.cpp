#include "cli.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include "fracgrad/chaotic_lab.hpp"
#include "fracgrad/frac_calculus.hpp"
#include "fracgrad/meta_optimizer.hpp"
#include "fracgrad/objectives.hpp"

namespace fracgrad::cli {
namespace {

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> items;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    if (!item.empty()) items.push_back(item);
  }
  return items;
}

std::vector<double> parse_doubles(const std::string& text) {
  std::vector<double> out;
  for (const auto& item : split_list(text)) {
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw ConfigError("not a number: '" + item + "'");
    }
  }
  return out;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

std::string interval_text(const Interval& iv) { return fmt::format("[{}, {}]", iv.lo, iv.hi); }

void print_functions(std::ostream& out) {
  out << fmt::format("{:<14} {:>3}  {:<34} {:>12}  {}\n", "name", "dim", "domain", "f*",
                     "argmin");
  for (const auto& fn : registry()) {
    std::string domain;
    for (std::size_t i = 0; i < fn.domain.size(); ++i) {
      domain += (i ? " x " : "") + interval_text(fn.domain[i]);
    }
    std::string points;
    for (const auto& p : fn.global_min_points) {
      points += points.empty() ? "(" : " (";
      for (std::size_t i = 0; i < p.size(); ++i) points += (i ? ", " : "") + fmt::format("{:.6g}", p[i]);
      points += ")";
    }
    out << fmt::format("{:<14} {:>3}  {:<34} {:>12.6g}  {}\n", fn.name, fn.dim, domain,
                       fn.global_min_value, points);
  }
}

}  // namespace

BenchConfig load_bench_config(const std::filesystem::path& path, std::filesystem::path* out_dir) {
  YAML::Node doc;
  try {
    doc = YAML::LoadFile(path.string());
  } catch (const YAML::Exception& e) {
    throw ConfigError("cannot read config " + path.string() + ": " + e.what());
  }
  if (!doc.IsMap()) throw ConfigError("config must be a key/value map");
  BenchConfig cfg;
  try {
    for (const auto& entry : doc) {
      const auto key = entry.first.as<std::string>();
      const YAML::Node& v = entry.second;
      if (key == "fn") {
        cfg.target_fn = v.as<std::string>();
      } else if (key == "n_starts") {
        cfg.n_starts = v.as<std::size_t>();
      } else if (key == "horizon") {
        cfg.horizon = v.as<std::size_t>();
      } else if (key == "eps") {
        cfg.eps = v.as<double>();
      } else if (key == "lr_grid") {
        cfg.lr_grid = v.as<std::vector<double>>();
      } else if (key == "optimizers") {
        for (const auto& s : v.as<std::vector<std::string>>()) {
          cfg.optimizers.push_back(parse_optimizer_spec(s));
        }
      } else if (key == "seed") {
        cfg.seed = v.as<std::uint64_t>();
      } else if (key == "frac_alpha") {
        cfg.frac_alpha = v.as<double>();
      } else if (key == "fgf_window") {
        cfg.fgf_window = v.as<std::size_t>();
      } else if (key == "out") {
        if (out_dir) *out_dir = v.as<std::string>();
      } else {
        throw ConfigError("unknown config key '" + key + "'");
      }
    }
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("bad config value: ") + e.what());
  }
  return cfg;
}

int run(const std::vector<std::string>& args) {
  CLI::App app{"Fractional-gradient optimization laboratory"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  // gridfig
  auto* gridfig = app.add_subcommand("gridfig", "Fractional Jacobian grid transform as CSV");
  double grid_alpha = 1.2;
  LatticeSpec lattice;
  std::string grid_out;
  gridfig->add_option("--alpha", grid_alpha, "Fractional order")->required();
  gridfig->add_option("--grid-min", lattice.min, "Lattice lower bound")->capture_default_str();
  gridfig->add_option("--grid-max", lattice.max, "Lattice upper bound")->capture_default_str();
  gridfig->add_option("--grid-n", lattice.n, "Points per side")->capture_default_str();
  gridfig->add_option("--out", grid_out, "Output CSV")->required();

  // fns list
  auto* fns = app.add_subcommand("fns", "Objective function registry");
  fns->require_subcommand(1);
  auto* fns_list = fns->add_subcommand("list", "Print the registered functions");

  // meta-train
  auto* train = app.add_subcommand("meta-train", "Meta-train the learned optimizer");
  MetaTrainConfig train_cfg;
  std::string regime = "with";
  std::string train_out;
  std::string pool;
  train->add_option("--regime", regime, "with | without")
      ->check(CLI::IsMember({"with", "without"}))
      ->capture_default_str();
  train->add_option("--target", train_cfg.target_fn, "Target function")->capture_default_str();
  train->add_option("--seed", train_cfg.seed, "Seed")->capture_default_str();
  train->add_option("--out", train_out, "Checkpoint path")->required();
  train->add_option("--outer-steps", train_cfg.outer_steps)->capture_default_str();
  train->add_option("--inner-steps", train_cfg.inner_steps)->capture_default_str();
  train->add_option("--batch", train_cfg.batch_starts)->capture_default_str();
  train->add_option("--lr", train_cfg.adamw_lr, "AdamW learning rate")->capture_default_str();
  train->add_option("--pool", pool, "Comma-separated training functions (default: all eligible)");

  // lorenz
  auto* lorenz = app.add_subcommand("lorenz", "Lorenz parameter recovery curve");
  LorenzRunConfig lorenz_cfg;
  std::string update = "gd";
  std::string estimator = "tbtt";
  std::string lorenz_out;
  lorenz->add_option("--update", update)->check(CLI::IsMember({"gd", "fgf"}))->capture_default_str();
  lorenz->add_option("--estimator", estimator)
      ->check(CLI::IsMember({"tbtt", "es"}))
      ->capture_default_str();
  lorenz->add_option("--alpha", lorenz_cfg.alpha)->capture_default_str();
  lorenz->add_option("--lr", lorenz_cfg.lr)->capture_default_str();
  lorenz->add_option("--iters", lorenz_cfg.iters)->capture_default_str();
  lorenz->add_option("--seed", lorenz_cfg.seed)->capture_default_str();
  lorenz->add_option("--window", lorenz_cfg.tbtt_window, "TBTT window")->capture_default_str();
  lorenz->add_option("--pairs", lorenz_cfg.es_pairs, "ES antithetic pairs")->capture_default_str();
  lorenz->add_option("--noise", lorenz_cfg.es_noise, "ES noise sigma")->capture_default_str();
  lorenz->add_option("--out", lorenz_out)->required();

  // landscape
  auto* landscape = app.add_subcommand("landscape", "Loss landscape sweep on chaotic1d");
  std::string method = "momentum";
  std::string axis1_spec;
  std::string axis2_spec;
  std::size_t horizon = 200;
  double x0 = kChaoticStart;
  std::string landscape_out;
  landscape->add_option("--method", method)
      ->check(CLI::IsMember({"momentum", "fgf"}))
      ->capture_default_str();
  landscape->add_option("--axis1", axis1_spec, "lo:hi:n[:log] (momentum or alpha)")->required();
  landscape->add_option("--axis2", axis2_spec, "lo:hi:n[:log] (learning rate)")->required();
  landscape->add_option("--horizon", horizon)->capture_default_str();
  landscape->add_option("--x0", x0, "Start point")->capture_default_str();
  landscape->add_option("--out", landscape_out)->required();

  // bench
  auto* bench = app.add_subcommand("bench", "Convergence-rate benchmark");
  std::string config_path;
  std::string bench_fn = "rosenbrock2d";
  std::string bench_opts = "gd,adam";
  std::uint64_t bench_seed = 0;
  std::string bench_out;
  std::size_t n_starts = 1000;
  std::size_t bench_horizon = 1000;
  double eps = 1e-3;
  std::string lr_grid;
  double frac_alpha = 0.9;
  auto* config_opt = bench->add_option("--config", config_path, "YAML config file");
  bench->add_option("--fn", bench_fn)->excludes(config_opt)->capture_default_str();
  bench->add_option("--opt", bench_opts, "gd,adam,fracgd,meta:<ckpt>,...")
      ->excludes(config_opt)
      ->capture_default_str();
  bench->add_option("--seed", bench_seed)->excludes(config_opt)->capture_default_str();
  bench->add_option("--n-starts", n_starts)->excludes(config_opt)->capture_default_str();
  bench->add_option("--horizon", bench_horizon)->excludes(config_opt)->capture_default_str();
  bench->add_option("--eps", eps)->excludes(config_opt)->capture_default_str();
  bench->add_option("--lr-grid", lr_grid, "Comma-separated learning rates")->excludes(config_opt);
  bench->add_option("--alpha", frac_alpha, "Order for fracgd/fgf")->excludes(config_opt);
  bench->add_option("--out", bench_out, "Output directory");

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*gridfig) {
      std::ostringstream csv;
      write_grid_csv(csv, grid_transform(lattice, grid_alpha));
      write_file(grid_out, csv.str());
    } else if (*fns_list) {
      print_functions(std::cout);
    } else if (*train) {
      train_cfg.regime = parse_regime(regime);
      train_cfg.pool = split_list(pool);
      lookup(train_cfg.target_fn);
      const MetaTrainResult result = meta_train(train_cfg, registry());
      save_checkpoint(result.net, train_cfg, train_out);
      std::ostringstream curve;
      curve << "outer_step,mean_loss\n";
      for (std::size_t i = 0; i < result.record.mean_loss.size(); ++i) {
        curve << i << ',' << fmt17(result.record.mean_loss[i]) << '\n';
      }
      write_file(train_out + ".curve.csv", curve.str());
    } else if (*lorenz) {
      lorenz_cfg.update = update == "gd" ? LorenzUpdate::gd : LorenzUpdate::fgf;
      lorenz_cfg.estimator = estimator == "tbtt" ? LorenzEstimator::tbtt : LorenzEstimator::es;
      std::ostringstream csv;
      write_lorenz_csv(csv, optimize_lorenz(lorenz_cfg));
      write_file(lorenz_out, csv.str());
    } else if (*landscape) {
      const bool momentum = method == "momentum";
      const SweepAxis axis1 = parse_axis(momentum ? "momentum" : "alpha", axis1_spec);
      const SweepAxis axis2 = parse_axis("lr", axis2_spec);
      const SweepGrid grid =
          landscape_sweep(lookup("chaotic1d"), momentum ? SweepMethod::momentum : SweepMethod::fgf,
                          axis1, axis2, horizon, {x0});
      std::ostringstream csv;
      write_sweep_csv(csv, grid);
      write_file(landscape_out, csv.str());
    } else if (*bench) {
      BenchConfig cfg;
      std::filesystem::path out_dir = bench_out;
      if (!config_path.empty()) {
        std::filesystem::path cfg_out;
        cfg = load_bench_config(config_path, &cfg_out);
        if (out_dir.empty()) out_dir = cfg_out;
      } else {
        cfg.target_fn = bench_fn;
        cfg.seed = bench_seed;
        cfg.n_starts = n_starts;
        cfg.horizon = bench_horizon;
        cfg.eps = eps;
        cfg.frac_alpha = frac_alpha;
        if (!lr_grid.empty()) cfg.lr_grid = parse_doubles(lr_grid);
        for (const auto& s : split_list(bench_opts)) cfg.optimizers.push_back(parse_optimizer_spec(s));
      }
      if (out_dir.empty()) throw ConfigError("bench: no output directory (--out or config 'out')");
      const RunReport report = run_benchmark(cfg);
      emit_report(report, out_dir);
      std::cout << summary_csv(report);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const CheckpointError& e) {
    std::cerr << "checkpoint error: " << e.what() << '\n';
    return kExitCheckpoint;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitOk;
}

}  // namespace fracgrad::cli
