#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "fracgrad/bench.hpp"

namespace fracgrad::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitCheckpoint = 3;

/// Runs the command line `args` (args[0] is the program name) and returns the exit code.
int run(const std::vector<std::string>& args);

/// YAML bench config; keys mirror BenchConfig plus `out`.
BenchConfig load_bench_config(const std::filesystem::path& path, std::filesystem::path* out_dir);

}  // namespace fracgrad::cli
