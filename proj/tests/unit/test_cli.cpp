#include <doctest.h>

#include "cli_harness.hpp"
#include "fracgrad/meta_optimizer.hpp"

using namespace fracgrad;
using namespace fracgrad::testing;

TEST_CASE("argument errors exit with the config code") {
  CHECK(run_cli({}) == cli::kExitConfig);
  CHECK(run_cli({"nosuch"}) == cli::kExitConfig);
  CHECK(run_cli({"gridfig", "--alpha", "0.5"}) == cli::kExitConfig);
  CHECK(run_cli({"lorenz", "--update", "adam", "--out", "/tmp/x.csv"}) == cli::kExitConfig);
  CHECK(run_cli({"landscape", "--axis1", "0:1", "--axis2", "0.1:1:3", "--out", "/tmp/x.csv"}) ==
        cli::kExitConfig);
  CHECK(run_cli({"meta-train", "--target", "nowhere", "--out", "/tmp/x.json"}) == cli::kExitConfig);
  CHECK(run_cli({"fns", "list"}) == cli::kExitOk);
}

TEST_CASE("gridfig csv") {
  const auto dir = fresh_dir("fracgrad_cli_grid");
  REQUIRE(run_cli({"gridfig", "--alpha", "1.2", "--out", (dir / "g.csv").string()}) == cli::kExitOk);
  const std::string csv = slurp(dir / "g.csv");
  CHECK(csv.rfind("in_x,in_y,out_x,out_y\n", 0) == 0);
  CHECK(count_lines(csv) == 1 + 11 * 11);
  // second row: x steps first
  std::istringstream rows(csv);
  std::string header, first, second;
  std::getline(rows, header);
  std::getline(rows, first);
  std::getline(rows, second);
  CHECK(first.rfind("0.10000000000000001,0.10000000000000001,", 0) == 0);
  CHECK(second.rfind("0.19,0.10000000000000001,", 0) == 0);
  std::filesystem::remove_all(dir);
}

TEST_CASE("lorenz and landscape csv") {
  const auto dir = fresh_dir("fracgrad_cli_chaos");
  REQUIRE(run_cli({"lorenz", "--update", "fgf", "--estimator", "es", "--iters", "5", "--seed", "2",
                   "--out", (dir / "l.csv").string()}) == cli::kExitOk);
  const std::string l = slurp(dir / "l.csv");
  CHECK(l.rfind("iter,loss,log_sigma,log_rho\n", 0) == 0);
  CHECK(count_lines(l) == 6);

  REQUIRE(run_cli({"landscape", "--method", "fgf", "--axis1", "0.1:1:3", "--axis2", "0.001:1:4:log",
                   "--horizon", "20", "--out", (dir / "s.csv").string()}) == cli::kExitOk);
  const std::string s = slurp(dir / "s.csv");
  CHECK(s.rfind("axis1,axis2,final_f,diverged\n", 0) == 0);
  CHECK(count_lines(s) == 1 + 3 * 4);
  std::filesystem::remove_all(dir);
}

TEST_CASE("bench exit codes") {
  const auto dir = fresh_dir("fracgrad_cli_bench");
  const std::string out = (dir / "out").string();
  CHECK(run_cli({"bench", "--fn", "nowhere", "--out", out}) == cli::kExitConfig);
  CHECK(run_cli({"bench", "--opt", "gd,sgdx", "--out", out}) == cli::kExitConfig);
  CHECK(run_cli({"bench", "--config", (dir / "missing.yaml").string()}) == cli::kExitConfig);
  CHECK(run_cli({"bench", "--opt", "gd"}) == cli::kExitConfig);

  spit(dir / "bad.yaml", "fn: sphere2d\nstarts: 5\n");
  CHECK(run_cli({"bench", "--config", (dir / "bad.yaml").string()}) == cli::kExitConfig);
  spit(dir / "bad2.yaml", "fn: sphere2d\nn_starts: many\nout: x\n");
  CHECK(run_cli({"bench", "--config", (dir / "bad2.yaml").string()}) == cli::kExitConfig);

  CHECK(run_cli({"bench", "--fn", "sphere2d", "--opt", "meta:" + (dir / "none.json").string(),
                 "--n-starts", "3", "--out", out}) == cli::kExitCheckpoint);
  spit(dir / "broken.json", "{\"format\": \"fracgrad-metanet\", \"version\": 1, \"net\": {}}");
  CHECK(run_cli({"bench", "--fn", "sphere2d", "--opt", "meta:" + (dir / "broken.json").string(),
                 "--n-starts", "3", "--out", out}) == cli::kExitCheckpoint);
  spit(dir / "future.json", "{\"format\": \"fracgrad-metanet\", \"version\": 99}");
  CHECK(run_cli({"bench", "--fn", "sphere2d", "--opt", "meta:" + (dir / "future.json").string(),
                 "--n-starts", "3", "--out", out}) == cli::kExitCheckpoint);
  std::filesystem::remove_all(dir);
}

TEST_CASE("bench from a config file") {
  const auto dir = fresh_dir("fracgrad_cli_config");
  spit(dir / "cfg.yaml",
       "fn: booth\n"
       "n_starts: 20\n"
       "horizon: 100\n"
       "eps: 1.0e-3\n"
       "lr_grid: [0.1, 0.01]\n"
       "optimizers: [gd, adam, rmsprop]\n"
       "seed: 5\n"
       "out: " + (dir / "out").string() + "\n");
  REQUIRE(run_cli({"bench", "--config", (dir / "cfg.yaml").string()}) == cli::kExitOk);
  const std::string summary = slurp(dir / "out" / "summary.csv");
  CHECK(summary.rfind("optimizer,best_lr,convergence_rate,mean_truncated_length\ngd,", 0) == 0);
  CHECK(count_lines(summary) == 4);
  CHECK(count_lines(slurp(dir / "out" / "trajectories.csv")) == 1 + 3 * 20);
  std::filesystem::remove_all(dir);
}

TEST_CASE("meta-train writes a loadable checkpoint") {
  const auto dir = fresh_dir("fracgrad_cli_train");
  const auto ckpt = (dir / "net.json").string();
  REQUIRE(run_cli({"meta-train", "--regime", "without", "--target", "rosenbrock2d", "--seed", "1",
                   "--outer-steps", "2", "--inner-steps", "2", "--batch", "2", "--out", ckpt}) ==
          cli::kExitOk);
  const MetaNet net = load_checkpoint(ckpt);
  CHECK(net.config.hidden == std::vector<std::size_t>{64, 64});
  CHECK(net.fourier_B.rows() == 32);
  CHECK(std::filesystem::exists(ckpt + ".curve.csv"));
  CHECK(run_cli({"bench", "--fn", "rosenbrock2d", "--opt", "gd,meta:" + ckpt, "--n-starts", "4",
                 "--horizon", "10", "--out", (dir / "b").string()}) == cli::kExitOk);
  std::filesystem::remove_all(dir);
}
