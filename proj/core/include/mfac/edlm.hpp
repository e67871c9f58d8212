#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace mfac {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/**
 * @brief Signal sizes and pseudo orders of a dynamic linearization.
 *
 * output_order (Ly) may be zero; input_order (Lu) must be at least one.
 * The lags are the true model orders minus one (ny, nu) and are optional:
 * they are only known when a model of the plant is available.
 */
class Dimensions {
 public:
  Dimensions(int output_dim, int input_dim, int output_order, int input_order,
             std::optional<int> output_lag = std::nullopt,
             std::optional<int> input_lag = std::nullopt);

  /// Ly = ny + 1, Lu = nu + 1.
  static Dimensions preferred(int output_dim, int input_dim, int output_lag, int input_lag);

  int output_dim() const noexcept { return output_dim_; }
  int input_dim() const noexcept { return input_dim_; }
  int output_order() const noexcept { return output_order_; }
  int input_order() const noexcept { return input_order_; }
  std::optional<int> output_lag() const noexcept { return output_lag_; }
  std::optional<int> input_lag() const noexcept { return input_lag_; }

  /// Length of H(k) and of its increment: Ly*My + Lu*Mu.
  int regressor_size() const noexcept {
    return output_order_ * output_dim_ + input_order_ * input_dim_;
  }

  /// True when sizes and pseudo orders agree (lags are not compared).
  bool same_layout(const Dimensions& other) const noexcept;

  bool operator==(const Dimensions&) const = default;

 private:
  int output_dim_;
  int input_dim_;
  int output_order_;
  int input_order_;
  std::optional<int> output_lag_;
  std::optional<int> input_lag_;
};

/**
 * @brief Rolling output/input history at step `timestamp`, newest first.
 *
 * output(i) is y(t - i) and input(j) is u(t - j). The window always holds at
 * least Ly + 1 outputs and Lu + 1 inputs, which is what the one-window
 * increment delta() needs.
 */
class RegressorWindow {
 public:
  RegressorWindow(Dimensions dims, std::vector<Vector> outputs, std::vector<Vector> inputs,
                  long timestamp = 0);

  /// All-zero history deep enough for both the pseudo orders and the model lags.
  static RegressorWindow zeros(const Dimensions& dims, long timestamp = 0);

  const Dimensions& dims() const noexcept { return dims_; }
  long timestamp() const noexcept { return timestamp_; }

  const Vector& output(int lag) const;
  const Vector& input(int lag) const;
  int output_depth() const noexcept { return static_cast<int>(outputs_.size()); }
  int input_depth() const noexcept { return static_cast<int>(inputs_.size()); }
  const std::vector<Vector>& outputs() const noexcept { return outputs_; }
  const std::vector<Vector>& inputs() const noexcept { return inputs_; }

  /// H(t) = [y(t); ...; y(t-Ly+1); u(t); ...; u(t-Lu+1)].
  Vector stacked() const;

  /// H(t) - H(t-1) computed from this window alone.
  Vector delta() const;

  /// Window at t + 1 with y(t+1), u(t+1) pushed in front; depth is preserved.
  RegressorWindow advanced(const Vector& next_output, const Vector& next_input) const;

 private:
  Dimensions dims_;
  std::vector<Vector> outputs_;
  std::vector<Vector> inputs_;
  long timestamp_;
};

/// ΔH(k) = H(now) - H(prev). Throws ShapeError on layout mismatch.
Vector build_delta_regressor(const RegressorWindow& now, const RegressorWindow& prev);

/**
 * @brief Block-row coefficient matrix [Φ1 … Φ_Ly, Φ_Ly+1 … Φ_Ly+Lu].
 *
 * Output blocks are My x My, input blocks are My x Mu. Blocks are numbered
 * from 1 in serialized names ("Phi1[0,0]") to match the usual notation.
 */
class PseudoJacobian {
 public:
  PseudoJacobian(std::vector<Matrix> output_blocks, std::vector<Matrix> input_blocks);

  static PseudoJacobian constant(const Dimensions& dims, double value);
  static PseudoJacobian from_flattened(const Dimensions& dims, const Matrix& flat);

  int output_dim() const noexcept { return output_dim_; }
  int input_dim() const noexcept { return input_dim_; }
  int output_order() const noexcept { return static_cast<int>(output_blocks_.size()); }
  int input_order() const noexcept { return static_cast<int>(input_blocks_.size()); }
  Dimensions dims() const;

  const std::vector<Matrix>& output_blocks() const noexcept { return output_blocks_; }
  const std::vector<Matrix>& input_blocks() const noexcept { return input_blocks_; }
  /// Φ_{Ly+1}: the coefficient of the current input increment.
  const Matrix& leading_input_block() const noexcept { return input_blocks_.front(); }

  /// My x (Ly*My + Lu*Mu).
  Matrix flattened() const;
  /// Row-major entries of flattened(), aligned with column_names().
  std::vector<double> row_major() const;
  std::vector<std::string> column_names() const;

 private:
  int output_dim_;
  int input_dim_;
  std::vector<Matrix> output_blocks_;
  std::vector<Matrix> input_blocks_;
};

/// Δy(k+1) = φ_Lᵀ(k) ΔH(k).
Vector predict_delta_output(const PseudoJacobian& pjm, const Vector& delta_regressor);

/**
 * @brief A plant y(k+1) = f(y(k), …, y(k-ny), u(k), …, u(k-nu)).
 *
 * evaluate() receives the arguments stacked as
 * [y(k); …; y(k-ny); u(k); …; u(k-nu)] and must be deterministic.
 */
class DifferentiableModel {
 public:
  virtual ~DifferentiableModel() = default;

  /// Must carry both lags.
  virtual const Dimensions& dims() const = 0;
  virtual Vector evaluate(const Vector& arguments) const = 0;

  int argument_size() const;
};

/// Stacks the newest ny+1 outputs and nu+1 inputs of `window` as model arguments.
Vector model_arguments(const Dimensions& model_dims, const RegressorWindow& window);

/// Increments feeding the second-order correction: outputs[i] = Δy(k-i), inputs[j] = Δu(k-j).
struct Increments {
  std::vector<Vector> outputs;
  std::vector<Vector> inputs;
};

/**
 * Increments between the operating point φ(k-1) held in `history` (timestamp k-1)
 * and φ(k), given the measured y(k) and a candidate Δu(k).
 */
Increments increments_from(const Dimensions& model_dims, const RegressorWindow& history,
                           const Vector& current_output, const Vector& current_delta_input);

/// Central-difference Jacobian of the model at `arguments`.
Matrix model_jacobian(const DifferentiableModel& model, const Vector& arguments);

/**
 * @brief First-order PJM: partial derivatives of f at the operating point.
 *
 * The operating point is the window at step k-1, so the derivatives are
 * evaluated at φ(k-1). Returns Ly = ny+1, Lu = nu+1 blocks.
 */
PseudoJacobian pjm_first_order(const DifferentiableModel& model,
                               const RegressorWindow& operating_point);

/// As above but padded with zero blocks up to the larger pseudo orders of `target`.
PseudoJacobian pjm_first_order(const DifferentiableModel& model,
                               const RegressorWindow& operating_point, const Dimensions& target);

/**
 * @brief First-order PJM plus the Hessian correction blocks.
 *
 * Row r of the correction for argument block b is ½ Δbᵀ ∂²f_r/∂b∂bᵀ, with the
 * Hessian taken by nested central differences. Higher-order terms are dropped.
 */
PseudoJacobian pjm_second_order(const DifferentiableModel& model,
                                const RegressorWindow& operating_point,
                                const Increments& deltas);

}  // namespace mfac
