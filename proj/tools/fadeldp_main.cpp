#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "fadeldp/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"fadeldp: stochastic functional differential equations with fading memory -- "
               "simulation, pull-back stationary solutions, rate functions, rare-event Monte "
               "Carlo"};
  app.require_subcommand(1);

  const std::vector<std::string> kinds = {"simulate",       "pullback",       "stationarity",
                                          "rate",           "quasipotential", "ldp-slope",
                                          "variational-check", "check-model"};

  fadeldp::RunOptions opts;
  uint64_t seed_val = 0;
  bool seed_set = false;

  for (const auto& kind : kinds) {
    auto* sub = app.add_subcommand(kind, "run a '" + kind + "' experiment");
    sub->add_option("--config", opts.config_path, "run configuration (JSON)")->required();
    sub->add_option("--out", opts.out_dir, "output directory (default: out)");
    auto* seed_opt = sub->add_option("--seed", seed_val, "override the config seed");
    sub->add_flag("--no-cache", opts.no_cache, "disable the result cache");
    sub->add_option("--threads", opts.threads, "OpenMP thread count (0 = default)");
    sub->callback([&, kind, seed_opt]() {
      opts.subcommand = kind;
      seed_set = seed_opt->count() > 0;
    });
  }

  CLI11_PARSE(app, argc, argv);
  if (seed_set) opts.seed_override = seed_val;

  try {
    return fadeldp::run_experiment(opts);
  } catch (const fadeldp::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return e.exit_code();
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
