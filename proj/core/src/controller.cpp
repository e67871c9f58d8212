#include "mfac/controller.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "mfac/errors.hpp"

namespace mfac {
namespace {

constexpr double kQuarticTolerance = 1e-9;
constexpr int kQuarticPasses = 50;
constexpr double kIterativeTolerance = 1e-10;
constexpr double kSweepTolerance = 1e-10;
constexpr int kMaxSweeps = 500;

void check_problem(const PseudoJacobian& pjm, const RegressorWindow& history,
                   const Vector& current_output, const Vector& reference,
                   const Weighting& weighting) {
  const Dimensions& hd = history.dims();
  if (pjm.output_dim() != hd.output_dim() || pjm.input_dim() != hd.input_dim()) {
    throw ShapeError("pseudo Jacobian and window signal sizes differ");
  }
  if (history.output_depth() < pjm.output_order() || history.input_depth() < pjm.input_order()) {
    throw ShapeError("window too shallow for the pseudo orders");
  }
  if (current_output.size() != pjm.output_dim() || reference.size() != pjm.output_dim()) {
    throw ShapeError("output or reference vector has the wrong length");
  }
  if (weighting.size() != pjm.input_dim()) {
    throw ShapeError("weighting size differs from the input dimension");
  }
}

// (y* − y(k)) − Σ Φ_i Δy(k−i+1) − Σ_{j>=2} Φ_{Ly+j} Δu(k−j+1).
Vector tracking_residual(const PseudoJacobian& pjm, const RegressorWindow& history,
                         const Vector& current_output, const Vector& reference) {
  Vector rhs = reference - current_output;
  const auto& out_blocks = pjm.output_blocks();
  for (std::size_t i = 0; i < out_blocks.size(); ++i) {
    const int lag = static_cast<int>(i);
    const Vector dy = lag == 0 ? Vector(current_output - history.output(0))
                               : Vector(history.output(lag - 1) - history.output(lag));
    rhs -= out_blocks[i] * dy;
  }
  const auto& in_blocks = pjm.input_blocks();
  for (std::size_t j = 1; j < in_blocks.size(); ++j) {
    const int lag = static_cast<int>(j);
    rhs -= in_blocks[j] * (history.input(lag - 1) - history.input(lag));
  }
  return rhs;
}

double quadratic_cost(const Matrix& jac, const Vector& rhs, const Vector& lambda,
                      const Vector& delta) {
  const Vector miss = rhs - jac * delta;
  return miss.squaredNorm() + delta.dot(lambda.cwiseProduct(delta));
}

// u = u_prev + Δu; the stored increment is re-derived so that u − u_prev == Δu exactly.
void settle(ControlDecision& decision, const Vector& previous_input, const Vector& delta) {
  decision.u = previous_input + delta;
  decision.delta_u = decision.u - previous_input;
}

Vector model_arguments_at(const Dimensions& d, const RegressorWindow& history,
                          const Vector& current_output, const Vector& candidate_input) {
  const int ny = *d.output_lag();
  const int nu = *d.input_lag();
  const int my = d.output_dim();
  const int mu = d.input_dim();
  Vector args((ny + 1) * my + (nu + 1) * mu);
  int offset = 0;
  args.segment(offset, my) = current_output;
  offset += my;
  for (int i = 0; i < ny; ++i, offset += my) args.segment(offset, my) = history.output(i);
  args.segment(offset, mu) = candidate_input;
  offset += mu;
  for (int j = 0; j < nu; ++j, offset += mu) args.segment(offset, mu) = history.input(j);
  return args;
}

const Dimensions& checked_model_dims(const DifferentiableModel& model,
                                     const RegressorWindow& history, const Vector& current_output,
                                     const Vector& reference) {
  const Dimensions& d = model.dims();
  if (!d.output_lag() || !d.input_lag()) {
    throw ShapeError("model dimensions must carry both output and input lags");
  }
  if (history.dims().output_dim() != d.output_dim() ||
      history.dims().input_dim() != d.input_dim()) {
    throw ShapeError("window signal sizes differ from the model");
  }
  if (history.output_depth() < *d.output_lag() + 1 || history.input_depth() < *d.input_lag() + 1) {
    throw ShapeError("window too shallow for the model lags");
  }
  if (current_output.size() != d.output_dim() || reference.size() != d.output_dim()) {
    throw ShapeError("output or reference vector has the wrong length");
  }
  return d;
}

Vector evaluate_finite(const DifferentiableModel& model, const Vector& args) {
  Vector y = model.evaluate(args);
  if (!y.allFinite()) throw NumericError("model evaluation is not finite");
  return y;
}

}  // namespace

// --- types ----------------------------------------------------------------

Weighting::Weighting(Vector diagonal) : diagonal_(std::move(diagonal)) {
  if (diagonal_.size() == 0) throw ShapeError("weighting must not be empty");
  if (!diagonal_.allFinite() || (diagonal_.array() < 0.0).any()) {
    throw RangeError("weighting entries must be finite and non-negative");
  }
}

Weighting Weighting::uniform(int size, double value) {
  return Weighting(Vector::Constant(size, value));
}

bool Weighting::is_uniform() const noexcept {
  return (diagonal_.array() == diagonal_(0)).all();
}

bool BoxConstraints::contains(const Vector& u) const {
  return u.size() == lower.size() && (u.array() >= lower.array()).all() &&
         (u.array() <= upper.array()).all();
}

// --- numerics -------------------------------------------------------------

double condition_number(const Matrix& m) {
  if (m.size() == 0) return std::numeric_limits<double>::infinity();
  Eigen::JacobiSVD<Matrix> svd(m);
  const auto& s = svd.singularValues();
  const double smallest = s(s.size() - 1);
  if (!(smallest >= 1e-300)) return std::numeric_limits<double>::infinity();
  return s(0) / smallest;
}

Vector solve_damped(const Matrix& jacobian, const Vector& lambda, const Vector& rhs) {
  const Eigen::Index n = jacobian.cols();
  if (lambda.size() != n || rhs.size() != jacobian.rows()) {
    throw ShapeError("damped solve dimensions disagree");
  }
  Matrix augmented(jacobian.rows() + n, n);
  augmented << jacobian, Matrix(lambda.cwiseSqrt().asDiagonal());
  Eigen::ColPivHouseholderQR<Matrix> qr(augmented);

  Vector delta;
  if (qr.rank() == n) {
    const Matrix normal = jacobian.transpose() * jacobian + Matrix(lambda.asDiagonal());
    delta = normal.ldlt().solve(jacobian.transpose() * rhs);
  } else {
    if ((lambda.array() == 0.0).all()) {
      Eigen::ColPivHouseholderQR<Matrix> jqr(jacobian);
      if (jqr.rank() < jacobian.rows()) {
        throw RankDeficiencyError(jqr.rank(), jacobian.rows());
      }
    }
    Vector padded = Vector::Zero(augmented.rows());
    padded.head(rhs.size()) = rhs;
    delta = augmented.completeOrthogonalDecomposition().solve(padded);
  }
  if (!delta.allFinite()) throw NumericError("damped solve produced non-finite values");
  return delta;
}

Weighting lambda_schedule(double cond, int size) {
  double value = 0.1;
  if (std::isfinite(cond)) {
    if (cond < 5000.0) {
      value = 0.0;
    } else if (cond < 20000.0) {
      value = 0.05;
    }
  }
  return Weighting::uniform(size, value);
}

// --- control laws ---------------------------------------------------------

ControlDecision mfac_step(const PseudoJacobian& pjm, const RegressorWindow& history,
                          const Vector& current_output, const Vector& reference,
                          const Weighting& weighting) {
  check_problem(pjm, history, current_output, reference, weighting);
  const Matrix& lead = pjm.leading_input_block();
  const Vector rhs = tracking_residual(pjm, history, current_output, reference);
  const Vector delta = solve_damped(lead, weighting.diagonal(), rhs);

  ControlDecision decision;
  settle(decision, history.input(0), delta);
  decision.cost = quadratic_cost(lead, rhs, weighting.diagonal(), decision.delta_u);
  decision.condition_number = condition_number(lead);
  decision.pjm = pjm;
  return decision;
}

ControlDecision mfac_constrained_step(const PseudoJacobian& pjm, const RegressorWindow& history,
                                      const Vector& current_output, const Vector& reference,
                                      const Weighting& weighting, const BoxConstraints& box) {
  check_problem(pjm, history, current_output, reference, weighting);
  const int n = pjm.input_dim();
  if (box.lower.size() != n || box.upper.size() != n) {
    throw ShapeError("box bounds have the wrong length");
  }
  if (!(box.lower.array() <= box.upper.array()).all()) {
    throw ConstraintError("box is infeasible: some lower bound exceeds its upper bound");
  }

  const Vector& previous = history.input(0);
  const Matrix& lead = pjm.leading_input_block();
  const Vector rhs = tracking_residual(pjm, history, current_output, reference);
  const Vector& lambda = weighting.diagonal();

  Vector start = Vector::Zero(n);
  try {
    start = solve_damped(lead, lambda, rhs);
    if (box.contains(previous + start)) {
      ControlDecision decision;
      settle(decision, previous, start);
      decision.cost = quadratic_cost(lead, rhs, lambda, decision.delta_u);
      decision.condition_number = condition_number(lead);
      decision.pjm = pjm;
      return decision;
    }
  } catch (const RankDeficiencyError&) {
    // Unconstrained minimizer not unique; descend from the origin instead.
  }

  const Vector lo = box.lower - previous;
  const Vector hi = box.upper - previous;
  const Matrix hessian = lead.transpose() * lead + Matrix(lambda.asDiagonal());
  const Vector gradient_offset = lead.transpose() * rhs;
  Vector x = start.cwiseMax(lo).cwiseMin(hi);

  int sweeps = 0;
  bool settled = false;
  while (sweeps < kMaxSweeps && !settled) {
    ++sweeps;
    double change = 0.0;
    for (int i = 0; i < n; ++i) {
      const double diag = hessian(i, i);
      if (diag <= 0.0) continue;
      const double coupling = hessian.row(i).dot(x) - diag * x(i);
      const double next = std::clamp((gradient_offset(i) - coupling) / diag, lo(i), hi(i));
      change = std::max(change, std::abs(next - x(i)));
      x(i) = next;
    }
    settled = change < kSweepTolerance;
  }

  ControlDecision decision;
  decision.u = (previous + x).cwiseMax(box.lower).cwiseMin(box.upper);
  decision.delta_u = decision.u - previous;
  decision.cost = quadratic_cost(lead, rhs, lambda, decision.delta_u);
  decision.iterations = sweeps;
  decision.converged = settled;
  decision.condition_number = condition_number(lead);
  decision.pjm = pjm;
  return decision;
}

ControlDecision mfac_quartic_step(const DifferentiableModel& model, const RegressorWindow& history,
                                  const Vector& current_output, const Vector& reference,
                                  const Weighting& weighting) {
  const Dimensions& d = checked_model_dims(model, history, current_output, reference);
  const Vector& previous = history.input(0);
  const Vector& lambda = weighting.diagonal();

  auto model_cost = [&](const Vector& delta) {
    const Vector predicted =
        evaluate_finite(model, model_arguments_at(d, history, current_output, previous + delta));
    return (reference - predicted).squaredNorm() + delta.dot(lambda.cwiseProduct(delta));
  };

  ControlDecision current =
      mfac_step(pjm_first_order(model, history), history, current_output, reference, weighting);
  ControlDecision best = current;
  best.cost = model_cost(best.delta_u);

  for (int pass = 1; pass <= kQuarticPasses; ++pass) {
    const Increments inc = increments_from(d, history, current_output, current.delta_u);
    ControlDecision next = mfac_step(pjm_second_order(model, history, inc), history,
                                     current_output, reference, weighting);
    next.cost = model_cost(next.delta_u);
    const double change = (next.delta_u - current.delta_u).lpNorm<Eigen::Infinity>();
    next.iterations = pass;
    current = std::move(next);
    if (current.cost < best.cost) best = current;
    if (change < kQuarticTolerance) {
      current.converged = true;
      return current;
    }
  }
  best.iterations = kQuarticPasses;
  best.converged = false;
  return best;
}

ControlDecision iterative_mfac_step(const DifferentiableModel& model,
                                    const RegressorWindow& history, const Vector& current_output,
                                    const Vector& reference, const LambdaSchedule& schedule,
                                    int max_iterations) {
  if (max_iterations < 1) throw RangeError("iteration cap must be at least 1");
  const Dimensions& d = checked_model_dims(model, history, current_output, reference);
  const int input_offset = (*d.output_lag() + 1) * d.output_dim();
  const Vector& previous = history.input(0);

  Vector candidate = previous;
  Vector args = model_arguments_at(d, history, current_output, candidate);
  Vector error = reference - evaluate_finite(model, args);

  ControlDecision decision;
  Vector last_lambda = Vector::Zero(d.input_dim());
  decision.converged = error.lpNorm<Eigen::Infinity>() < kIterativeTolerance;
  int iteration = 0;
  while (!decision.converged && iteration < max_iterations) {
    ++iteration;
    const Matrix input_jacobian =
        model_jacobian(model, args).middleCols(input_offset, d.input_dim());
    decision.condition_number = condition_number(input_jacobian);
    const Weighting w = schedule(decision.condition_number, d.input_dim());
    if (w.size() != d.input_dim()) throw ShapeError("schedule returned the wrong size");
    last_lambda = w.diagonal();
    decision.lambda_trace.push_back(last_lambda(0));

    candidate += solve_damped(input_jacobian, last_lambda, error);
    args.segment(input_offset, d.input_dim()) = candidate;
    error = reference - evaluate_finite(model, args);
    decision.converged = error.lpNorm<Eigen::Infinity>() < kIterativeTolerance;
  }

  settle(decision, previous, candidate - previous);
  decision.iterations = iteration;
  decision.cost = error.squaredNorm() + decision.delta_u.dot(last_lambda.cwiseProduct(decision.delta_u));
  return decision;
}

}  // namespace mfac
