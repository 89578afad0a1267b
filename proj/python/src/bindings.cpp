#include <sstream>

#include <pybind11/pybind11.h>
#include <pybind11/functional.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "fracgrad/bench.hpp"
#include "fracgrad/chaotic_lab.hpp"
#include "fracgrad/frac_calculus.hpp"
#include "fracgrad/meta_optimizer.hpp"
#include "fracgrad/objectives.hpp"
#include "fracgrad/optimizers.hpp"

namespace py = pybind11;
using namespace fracgrad;

namespace {

FracConfig frac_config(double alpha, double terminal_a, double step_h, double taylor_dx) {
  FracConfig cfg;
  cfg.alpha = alpha;
  cfg.terminal_a = terminal_a;
  cfg.step_h = step_h;
  cfg.taylor_dx = taylor_dx;
  cfg.validate();
  return cfg;
}

py::dict report_dict(const RunReport& report) {
  py::list rows;
  for (const auto& o : report.optimizers) {
    py::dict row;
    row["optimizer"] = o.label;
    row["best_lr"] = o.best_lr ? py::cast(*o.best_lr) : py::none();
    row["convergence_rate"] = o.convergence_rate;
    row["mean_truncated_length"] = o.mean_truncated_length;
    rows.append(row);
  }
  py::dict out;
  out["target_fn"] = report.config.target_fn;
  out["results"] = rows;
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Fractional-gradient optimization core";
  m.attr("__version__") = kVersion;

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<CheckpointError>(m, "CheckpointError", PyExc_IOError);
  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<DimensionError>(m, "DimensionError", PyExc_ValueError);

  m.def("gamma", &gamma_fn, py::arg("x"));
  m.def("recip_gamma", &recip_gamma, py::arg("x"));
  m.def("digamma", &digamma, py::arg("x"));
  m.def(
      "gl_derivative",
      [](const ScalarFn& f, double x, double alpha, double terminal_a, double step_h) {
        return gl_derivative(f, x, frac_config(alpha, terminal_a, step_h, 1.0));
      },
      py::arg("f"), py::arg("x"), py::arg("alpha"), py::arg("terminal_a") = 0.0,
      py::arg("step_h") = 1e-4);
  m.def(
      "rl_derivative",
      [](const ScalarFn& f, double x, double alpha, double terminal_a) {
        return rl_quadrature(f, x, frac_config(alpha, terminal_a, 1e-4, 1.0));
      },
      py::arg("f"), py::arg("x"), py::arg("alpha"), py::arg("terminal_a") = 0.0);
  m.def(
      "caputo_derivative",
      [](const ScalarFn& df, double x, double alpha, double terminal_a) {
        return caputo_quadrature(df, x, frac_config(alpha, terminal_a, 1e-4, 1.0));
      },
      py::arg("df"), py::arg("x"), py::arg("alpha"), py::arg("terminal_a") = 0.0);
  m.def(
      "frac_taylor_direction",
      [](double f_val, const Vec& grad, double alpha, double taylor_dx) {
        return frac_taylor_direction(f_val, grad, frac_config(alpha, 0.0, 1e-4, taylor_dx));
      },
      py::arg("f_val"), py::arg("grad"), py::arg("alpha"), py::arg("taylor_dx") = 1.0);
  m.def(
      "grid_transform",
      [](double alpha, double lo, double hi, std::size_t n) {
        std::vector<std::array<double, 4>> rows;
        for (const auto& p : grid_transform(LatticeSpec{lo, hi, n}, alpha)) {
          rows.push_back({p.in[0], p.in[1], p.out[0], p.out[1]});
        }
        return rows;
      },
      py::arg("alpha"), py::arg("lo") = 0.1, py::arg("hi") = 1.0, py::arg("n") = 11);

  m.def("function_names", [] {
    std::vector<std::string> names;
    for (const auto& fn : registry()) names.push_back(fn.name);
    return names;
  });
  m.def(
      "evaluate", [](const std::string& name, const Vec& x) { return lookup(name).eval(x); },
      py::arg("name"), py::arg("x"));
  m.def(
      "gradient", [](const std::string& name, const Vec& x) { return lookup(name).grad(x); },
      py::arg("name"), py::arg("x"));
  m.def(
      "global_min", [](const std::string& name) { return lookup(name).global_min_value; },
      py::arg("name"));

  m.def("fgf_coefficients", &fgf_coefficients, py::arg("alpha"), py::arg("k"));
  m.def(
      "optimize",
      [](const std::string& fn_name, const std::string& optimizer, const Vec& x0, double lr,
         std::size_t steps, double alpha) {
        const ObjectiveFn& fn = lookup(fn_name);
        require_same_dim(fn.dim, x0.size(), "optimize");
        const OptimizerKind kind = parse_kind(optimizer);
        Hyper hyper = default_hyper(kind);
        hyper.lr = lr;
        hyper.frac.alpha = alpha;
        OptimizerState state = make_state(kind, x0, hyper);
        std::vector<Vec> path{x0};
        for (std::size_t t = 0; t < steps; ++t) {
          const Vec& x = state.iterate;
          const double f = fn.eval(x);
          const Vec g = fn.grad(x);
          state = step(std::move(state), f, g);
          path.push_back(state.iterate);
        }
        return path;
      },
      py::arg("fn"), py::arg("optimizer"), py::arg("x0"), py::arg("lr"), py::arg("steps"),
      py::arg("alpha") = 0.9);

  m.def(
      "bench",
      [](const std::string& fn, const std::vector<std::string>& optimizers, std::size_t n_starts,
         std::size_t horizon, double eps, const std::vector<double>& lr_grid, std::uint64_t seed) {
        BenchConfig cfg;
        cfg.target_fn = fn;
        cfg.n_starts = n_starts;
        cfg.horizon = horizon;
        cfg.eps = eps;
        cfg.lr_grid = lr_grid;
        cfg.seed = seed;
        for (const auto& o : optimizers) cfg.optimizers.push_back(parse_optimizer_spec(o));
        RunReport report;
        {
          py::gil_scoped_release release;
          report = run_benchmark(cfg);
        }
        return report_dict(report);
      },
      py::arg("fn"), py::arg("optimizers"), py::arg("n_starts") = 1000, py::arg("horizon") = 1000,
      py::arg("eps") = 1e-3,
      py::arg("lr_grid") = std::vector<double>{1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6},
      py::arg("seed") = 0);

  m.def(
      "meta_train",
      [](const std::string& regime, const std::string& target, std::uint64_t seed,
         std::size_t outer_steps, std::size_t inner_steps, std::size_t batch,
         const std::filesystem::path& out) {
        MetaTrainConfig cfg;
        cfg.regime = parse_regime(regime);
        cfg.target_fn = target;
        cfg.seed = seed;
        cfg.outer_steps = outer_steps;
        cfg.inner_steps = inner_steps;
        cfg.batch_starts = batch;
        MetaTrainResult result = [&] {
          py::gil_scoped_release release;
          return meta_train(cfg, registry());
        }();
        save_checkpoint(result.net, cfg, out);
        return result.record.mean_loss;
      },
      py::arg("regime"), py::arg("target"), py::arg("seed"), py::arg("outer_steps") = 2000,
      py::arg("inner_steps") = 20, py::arg("batch") = 64, py::arg("out"));

  m.def(
      "lorenz",
      [](const std::string& update, const std::string& estimator, std::size_t iters,
         std::uint64_t seed) {
        LorenzRunConfig cfg;
        if (update == "gd") {
          cfg.update = LorenzUpdate::gd;
        } else if (update == "fgf") {
          cfg.update = LorenzUpdate::fgf;
        } else {
          throw ConfigError("unknown update: " + update);
        }
        if (estimator == "tbtt") {
          cfg.estimator = LorenzEstimator::tbtt;
        } else if (estimator == "es") {
          cfg.estimator = LorenzEstimator::es;
        } else {
          throw ConfigError("unknown estimator: " + estimator);
        }
        cfg.iters = iters;
        cfg.seed = seed;
        std::vector<std::array<double, 4>> rows;
        for (const auto& p : optimize_lorenz(cfg).points) {
          rows.push_back({static_cast<double>(p.iter), p.loss, p.log_sigma, p.log_rho});
        }
        return rows;
      },
      py::arg("update") = "gd", py::arg("estimator") = "tbtt", py::arg("iters") = 100,
      py::arg("seed") = 0);
}
