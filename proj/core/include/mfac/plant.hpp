#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mfac/controller.hpp"
#include "mfac/edlm.hpp"

namespace mfac {

/// The 2x2 nonlinear benchmark plant (ny = 0, nu = 1).
class Example1Plant final : public DifferentiableModel {
 public:
  Example1Plant();
  const Dimensions& dims() const override { return dims_; }
  Vector evaluate(const Vector& arguments) const override;

 private:
  Dimensions dims_;
};

/**
 * @brief y(k+1) = Σ A_i y(k-i) + Σ B_j u(k-j).
 *
 * The first-order PJM of this model is exactly (A_0 … A_ny, B_0 … B_nu).
 */
class LinearModel final : public DifferentiableModel {
 public:
  LinearModel(std::vector<Matrix> output_coefficients, std::vector<Matrix> input_coefficients);

  /// Plant whose increments obey Δy(k+1) = φ_Lᵀ ΔH(k) for a frozen PJM.
  static LinearModel incremental(const PseudoJacobian& pjm);

  const Dimensions& dims() const override { return dims_; }
  Vector evaluate(const Vector& arguments) const override;

  const std::vector<Matrix>& output_coefficients() const noexcept { return a_; }
  const std::vector<Matrix>& input_coefficients() const noexcept { return b_; }

 private:
  std::vector<Matrix> a_;
  std::vector<Matrix> b_;
  Dimensions dims_;
};

class ReferenceSignal {
 public:
  virtual ~ReferenceSignal() = default;
  virtual int dim() const = 0;
  /// y*(k); deterministic in k.
  virtual Vector sample(long k) const = 0;
  /// Last valid step, if the signal has one. Later steps hold the last value.
  virtual std::optional<long> last_step() const { return std::nullopt; }
};

/// Sinusoids for k <= 400, square wave for 401..800. Throws RangeError outside [1, 800].
Vector example1_reference(long k);

class Example1Reference final : public ReferenceSignal {
 public:
  int dim() const override { return 2; }
  Vector sample(long k) const override { return example1_reference(k); }
  std::optional<long> last_step() const override { return 800; }
};

/// y*(k) = value for k >= 1, zero before.
class StepReference final : public ReferenceSignal {
 public:
  explicit StepReference(Vector value) : value_(std::move(value)) {}
  int dim() const override { return static_cast<int>(value_.size()); }
  Vector sample(long k) const override;

 private:
  Vector value_;
};

/// y*(k) = slope · k · Ts for every component.
class RampReference final : public ReferenceSignal {
 public:
  RampReference(int dim, double sample_period, double slope = 1.0)
      : dim_(dim), period_(sample_period), slope_(slope) {}
  int dim() const override { return dim_; }
  Vector sample(long k) const override;

 private:
  int dim_;
  double period_;
  double slope_;
};

/// y*(k) = (k · Ts)^n for every component.
class PowerReference final : public ReferenceSignal {
 public:
  PowerReference(int dim, int power, double sample_period)
      : dim_(dim), power_(power), period_(sample_period) {}
  int dim() const override { return dim_; }
  Vector sample(long k) const override;

 private:
  int dim_;
  int power_;
  double period_;
};

enum class ControllerVariant { first_order, quartic, constrained };

const char* to_string(ControllerVariant v);
/// Accepts "first_order", "quartic", "constrained". Throws RangeError otherwise.
ControllerVariant parse_variant(const std::string& name);

struct SimRecord {
  long k = 0;
  Vector y;
  Vector reference;
  Vector u;
  Vector delta_u;
  std::vector<double> pjm;
  double cost = 0.0;
  int iterations = 0;
  double condition_number = 1.0;
};

struct SimLog {
  int output_dim = 0;
  int input_dim = 0;
  std::vector<std::string> pjm_columns;
  std::vector<SimRecord> records;
  bool diverged = false;
  long divergence_step = -1;

  std::vector<std::string> header() const;
  void write_csv(std::ostream& out) const;
};

struct SimulationOptions {
  /// Required by the constrained variant.
  std::optional<BoxConstraints> box;
  /// PJM logged for the warm-up rows held in the initial window.
  double seed_pjm_value = 0.01;
  double divergence_limit = 1e6;
};

/// Box used by the constrained Example-1 runs: u1 in [-0.3, 0.1], u2 in [-0.5, 0.5].
BoxConstraints example1_box();

/// Example-1 initial window at k = 2 with zero history.
RegressorWindow example1_initial_window();

/**
 * @brief Closed-loop run from init.timestamp() + 1 through `steps`.
 *
 * At each k the plant output y(k) is computed from the history, the variant
 * picks u(k) against y*(k+1), and a record is appended. Rows already held in
 * `init` are logged first with the seed PJM. Divergence stops the run and
 * marks the log.
 */
SimLog simulate(const DifferentiableModel& plant, ControllerVariant variant,
                const ReferenceSignal& reference, long steps, const RegressorWindow& init,
                const Weighting& weighting, const SimulationOptions& options = {});

struct TrackingMetrics {
  Vector rmse;
  Vector max_abs_error;
  long constraint_violations = 0;
  long samples = 0;
};

/**
 * Errors over transient_cutoff < k <= last (end of log when absent).
 * Violations are counted only when a box is given. Throws RangeError on an
 * empty window.
 */
TrackingMetrics metrics(const SimLog& log, long transient_cutoff,
                        const std::optional<BoxConstraints>& box = std::nullopt,
                        std::optional<long> last = std::nullopt);

}  // namespace mfac
