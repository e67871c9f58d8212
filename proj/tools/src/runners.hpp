#pragma once

#include <iosfwd>

#include "config.hpp"

namespace mfac::cli {

enum ExitCode : int { kSuccess = 0, kFailure = 1, kDivergence = 2, kConfigError = 3 };

/// Three controllers on the benchmark plant; per-variant logs, plots and a summary.
int run_example1(const ExperimentConfig& cfg, std::ostream& report);

/// A→C straight-line traverse solved by the damped IK loop.
int run_example2(const ExperimentConfig& cfg, std::ostream& report);

/// Ramp static error against λ: simulated and analytic.
int run_sweep(const ExperimentConfig& cfg, std::ostream& report);

/// Characteristic roots against λ, checked by bounded/divergent simulation.
int run_stability(const ExperimentConfig& cfg, std::ostream& report);

}  // namespace mfac::cli
