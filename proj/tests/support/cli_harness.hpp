#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"

namespace fracgrad::testing {

inline int run_cli(std::initializer_list<std::string> args) {
  std::vector<std::string> argv{"fracgrad"};
  argv.insert(argv.end(), args.begin(), args.end());
  return cli::run(argv);
}

inline std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void spit(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

inline std::filesystem::path fresh_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

/// Sets FRACGRAD_THREADS for the lifetime of the object.
class ThreadCap {
 public:
  explicit ThreadCap(int n) {
    if (const char* old = std::getenv("FRACGRAD_THREADS")) saved_ = old;
    setenv("FRACGRAD_THREADS", std::to_string(n).c_str(), 1);
  }
  ~ThreadCap() {
    if (saved_.empty()) {
      unsetenv("FRACGRAD_THREADS");
    } else {
      setenv("FRACGRAD_THREADS", saved_.c_str(), 1);
    }
  }
  ThreadCap(const ThreadCap&) = delete;
  ThreadCap& operator=(const ThreadCap&) = delete;

 private:
  std::string saved_;
};

inline std::size_t count_lines(const std::string& text) {
  std::size_t n = 0;
  for (char c : text) n += c == '\n';
  return n;
}

}  // namespace fracgrad::testing
