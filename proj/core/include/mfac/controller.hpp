#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "mfac/edlm.hpp"

namespace mfac {

/// Diagonal input weighting λ = diag(λ1, …, λMu), all entries >= 0.
class Weighting {
 public:
  explicit Weighting(Vector diagonal);
  static Weighting uniform(int size, double value);

  const Vector& diagonal() const noexcept { return diagonal_; }
  int size() const noexcept { return static_cast<int>(diagonal_.size()); }
  bool is_zero() const noexcept { return (diagonal_.array() == 0.0).all(); }
  /// True when every entry equals the first.
  bool is_uniform() const noexcept;
  Matrix matrix() const { return diagonal_.asDiagonal(); }

 private:
  Vector diagonal_;
};

/// Absolute bounds lower <= u(k) <= upper.
struct BoxConstraints {
  Vector lower;
  Vector upper;

  bool contains(const Vector& u) const;
};

struct ControlDecision {
  Vector delta_u;
  Vector u;
  double cost = 0.0;
  int iterations = 0;
  /// Of the leading input block (or the model input Jacobian for model-based variants).
  double condition_number = 1.0;
  bool converged = true;
  /// λ used at every inner iteration (iterative variant only).
  std::vector<double> lambda_trace;
  /// The coefficient matrix the final increment was computed with, when one exists.
  std::optional<PseudoJacobian> pjm;
};

using LambdaSchedule = std::function<Weighting(double condition_number, int size)>;

/// σmax/σmin; infinity when σmin < 1e-300 or the matrix is empty.
double condition_number(const Matrix& m);

/**
 * @brief Minimizes ‖rhs − J Δ‖² + Δᵀ diag(λ) Δ.
 *
 * Uses the normal equations when they are nonsingular. With λ = 0 and a
 * singular normal matrix the minimum-norm least-squares solution is returned
 * if J has full row rank; otherwise RankDeficiencyError is thrown.
 */
Vector solve_damped(const Matrix& jacobian, const Vector& lambda, const Vector& rhs);

/**
 * @brief Unconstrained MFAC increment.
 *
 * `history` is the window at step k-1 (newest entries y(k-1), u(k-1)) and
 * `current_output` is the freshly measured y(k); `reference` is y*(k+1).
 */
ControlDecision mfac_step(const PseudoJacobian& pjm, const RegressorWindow& history,
                          const Vector& current_output, const Vector& reference,
                          const Weighting& weighting);

/// mfac_step subject to lower <= u(k-1) + Δu(k) <= upper (projected coordinate descent).
ControlDecision mfac_constrained_step(const PseudoJacobian& pjm, const RegressorWindow& history,
                                      const Vector& current_output, const Vector& reference,
                                      const Weighting& weighting, const BoxConstraints& box);

/**
 * @brief Minimizes the one-step cost with the second-order PJM by re-linearization.
 *
 * Starts from the first-order solution and rebuilds the Hessian-corrected PJM
 * around the current Δu estimate until the increment moves by less than 1e-9
 * (max norm) or 50 passes elapse. The reported cost is evaluated on the model.
 * On non-convergence the lowest-cost iterate is returned with converged = false.
 */
ControlDecision mfac_quartic_step(const DifferentiableModel& model, const RegressorWindow& history,
                                  const Vector& current_output, const Vector& reference,
                                  const Weighting& weighting);

/**
 * @brief Inner-iteration MFAC: damped Gauss-Newton on the candidate u(k).
 *
 * Each iteration re-linearizes the model at the current virtual input, picks
 * λ from `schedule` using the conditioning of ∂f/∂u(k), and advances the
 * virtual plant. Stops when ‖y* − y_(i)‖∞ < 1e-10 or after `max_iterations`.
 */
ControlDecision iterative_mfac_step(const DifferentiableModel& model,
                                    const RegressorWindow& history, const Vector& current_output,
                                    const Vector& reference, const LambdaSchedule& schedule,
                                    int max_iterations);

/// 0 below 5000, 0.05 on [5000, 20000), 0.1 at 20000 and above (non-finite counts as above).
Weighting lambda_schedule(double condition_number, int size);

}  // namespace mfac
