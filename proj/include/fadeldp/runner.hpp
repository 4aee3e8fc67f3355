#ifndef FADELDP_RUNNER_HPP
#define FADELDP_RUNNER_HPP

#include <string>

#include "fadeldp/config.hpp"

namespace fadeldp {

struct RunOptions {
  std::string subcommand;  // experiment kind; must match the config block
  std::string config_path;
  std::string out_dir = "out";
  std::optional<uint64_t> seed_override;
  bool no_cache = false;
  int threads = 0;  // 0: library default
};

// Executes one experiment: writes result JSON, CSV curves, and a manifest
// listing every artifact with a content hash. Returns 0 on success; failures
// raise Error whose kind carries the exit code.
int run_experiment(const RunOptions& opts);

}  // namespace fadeldp

#endif
