#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "config.hpp"
#include "mfac/errors.hpp"
#include "runners.hpp"

using namespace mfac::cli;

namespace {

struct Options {
  std::string config;
  std::string out;
  std::optional<long> steps;
  std::optional<double> lambda;
};

ExperimentConfig resolve(const Options& o) {
  ExperimentConfig cfg = o.config.empty() ? default_config() : load_config(o.config);
  if (!o.out.empty()) cfg.output_root = o.out;
  if (o.steps) {
    if (*o.steps < 3) throw ConfigError("--steps must be >= 3");
    cfg.example1.steps = *o.steps;
    cfg.sweep.steps = *o.steps;
    cfg.stability.steps = *o.steps;
  }
  if (o.lambda) {
    if (!(*o.lambda >= 0.0)) throw ConfigError("--lambda must be >= 0");
    cfg.example1.lambda = *o.lambda;
    for (auto* loop : {&cfg.sweep, &cfg.stability}) {
      loop->lambda_min = loop->lambda_max = *o.lambda;
      loop->points = 1;
    }
  }
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Model-free adaptive control experiments"};
  app.require_subcommand(1);
  app.footer("Exit codes: 0 success, 2 divergence, 3 config error.\n"
             "MFAC_OUT sets the default output root (otherwise ./mfac-out).");

  Options opts;
  struct Verb {
    const char* name;
    const char* help;
    bool steps;
    bool lambda;
    int (*run)(const ExperimentConfig&, std::ostream&);
  };
  const Verb verbs[] = {
      {"example1", "Benchmark plant under the three controllers", true, true, run_example1},
      {"example2", "Straight-line traverse with the IK controller", false, false, run_example2},
      {"sweep", "Ramp static error over a lambda grid", true, true, run_sweep},
      {"stability", "Closed-loop roots over a lambda grid, checked by simulation", true, true,
       run_stability},
  };
  for (const auto& v : verbs) {
    CLI::App* sub = app.add_subcommand(v.name, v.help);
    sub->add_option("--config", opts.config, "INI file overriding the defaults")
        ->check(CLI::ExistingFile);
    sub->add_option("--out", opts.out, "Output root directory");
    if (v.steps) sub->add_option("--steps", opts.steps, "Simulation steps");
    if (v.lambda) sub->add_option("--lambda", opts.lambda, "Uniform weighting lambda");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kSuccess : kConfigError;
  }

  for (const auto& v : verbs) {
    if (!app.got_subcommand(v.name)) continue;
    try {
      return v.run(resolve(opts), std::cout);
    } catch (const ConfigError& e) {
      std::cerr << "config error: " << e.what() << '\n';
      return kConfigError;
    } catch (const std::exception& e) {
      std::cerr << v.name << " failed: " << e.what() << '\n';
      return kFailure;
    }
  }
  return kFailure;
}
