#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mfac/edlm.hpp"
#include "mfac/plant.hpp"

namespace mfac::cli {

/// Bad config file, unknown key, or out-of-range override. Maps to exit code 3.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Example1Config {
  double lambda = 0.2;
  long steps = 800;
  long transient_cutoff = 100;
  long smooth_end = 400;
  std::vector<ControllerVariant> variants{ControllerVariant::quartic,
                                          ControllerVariant::constrained,
                                          ControllerVariant::first_order};
};

struct Example2Config {
  double tf = 10.0;
  double T0 = 1e-3;
  int cap = 30;
  std::optional<std::filesystem::path> chain;  ///< Table I when absent
  Vector start_q;                              ///< rad
  Vector goal_q;                               ///< rad
  double cond_threshold = 20000.0;
};

/// Frozen-PJM loop used by the sweep and stability verbs.
struct LoopConfig {
  Matrix phi_y;  ///< empty for Ly = 0
  Matrix phi_u;
  double lambda_min = 0.0;
  double lambda_max = 1.0;
  int points = 11;
  long steps = 5000;
  double sample_period = 0.01;
  double divergence_limit = 1e6;
};

struct ExperimentConfig {
  std::filesystem::path output_root;
  Example1Config example1;
  Example2Config example2;
  LoopConfig sweep;
  LoopConfig stability;
};

/// Default settings; the output root comes from MFAC_OUT or "mfac-out".
ExperimentConfig default_config();

/**
 * @brief Overlays an INI file ([section] + key = value) on the defaults.
 *
 * Sections: output, example1, example2, sweep, stability. Any other section
 * or key is rejected.
 */
ExperimentConfig load_config(const std::filesystem::path& path);
ExperimentConfig load_config(std::istream& in);

/// "a b; c d" → 2x2. Empty text gives a 0x0 matrix.
Matrix parse_matrix(const std::string& text);

/// Lines of `key = value` describing every setting, with a header comment.
std::string describe(const ExperimentConfig& cfg);

}  // namespace mfac::cli
