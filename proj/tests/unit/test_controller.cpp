#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "mfac/controller.hpp"
#include "mfac/errors.hpp"
#include "mfac/plant.hpp"
#include "oracles.hpp"

using namespace mfac;

namespace {

Vector scalar(double x) { return Vector::Constant(1, x); }

/// Ly = 0, Lu = 1 scalar loop with gain b.
PseudoJacobian scalar_pjm(double b) { return PseudoJacobian({}, {Matrix::Constant(1, 1, b)}); }

RegressorWindow scalar_history(double u_prev = 0.0) {
  return RegressorWindow(Dimensions(1, 1, 0, 1), {scalar(0.0)}, {scalar(u_prev), scalar(0.0)});
}

PseudoJacobian random_pjm(oracle::Rng& rng, const Dimensions& d) {
  return PseudoJacobian::from_flattened(d, rng.matrix(d.output_dim(), d.regressor_size()));
}

RegressorWindow random_window(oracle::Rng& rng, const Dimensions& d) {
  std::vector<Vector> ys, us;
  for (int i = 0; i <= d.output_order(); ++i) ys.push_back(rng.vector(d.output_dim()));
  for (int j = 0; j <= d.input_order(); ++j) us.push_back(rng.vector(d.input_dim()));
  return RegressorWindow(d, ys, us);
}

/// Independent restatement of the one-step cost for a given Δu.
double cost_of(const PseudoJacobian& p, const RegressorWindow& w, const Vector& y,
               const Vector& ref, const Vector& lambda, const Vector& du) {
  Vector predicted = y;
  for (int i = 0; i < p.output_order(); ++i) {
    const Vector dy = i == 0 ? Vector(y - w.output(0)) : Vector(w.output(i - 1) - w.output(i));
    predicted += p.output_blocks()[i] * dy;
  }
  predicted += p.input_blocks()[0] * du;
  for (int j = 1; j < p.input_order(); ++j) {
    predicted += p.input_blocks()[j] * (w.input(j - 1) - w.input(j));
  }
  return (ref - predicted).squaredNorm() + du.dot(lambda.cwiseProduct(du));
}

}  // namespace

TEST(Weighting, RejectsNegativeOrNonFinite) {
  EXPECT_THROW(Weighting(scalar(-0.1)), RangeError);
  EXPECT_THROW(Weighting(scalar(std::nan(""))), RangeError);
  EXPECT_TRUE(Weighting::uniform(3, 0.0).is_zero());
}

TEST(ConditionNumber, KnownValues) {
  EXPECT_DOUBLE_EQ(condition_number(Matrix::Identity(3, 3)), 1.0);
  Matrix d = Matrix::Zero(2, 2);
  d(0, 0) = 10.0;
  d(1, 1) = 1.0;
  EXPECT_NEAR(condition_number(d), 10.0, 1e-12);
  Matrix singular(2, 2);
  singular << 1, 2, 2, 4;
  EXPECT_TRUE(std::isinf(condition_number(singular)) || condition_number(singular) > 1e15);
  EXPECT_TRUE(std::isinf(condition_number(Matrix::Zero(2, 2))));
}

TEST(LambdaSchedule, Branches) {
  EXPECT_EQ(lambda_schedule(100.0, 2).diagonal()[0], 0.0);
  EXPECT_EQ(lambda_schedule(4999.999, 2).diagonal()[0], 0.0);
  EXPECT_EQ(lambda_schedule(5000.0, 2).diagonal()[0], 0.05);
  EXPECT_EQ(lambda_schedule(19999.0, 2).diagonal()[0], 0.05);
  EXPECT_EQ(lambda_schedule(20000.0, 2).diagonal()[0], 0.1);
  EXPECT_EQ(lambda_schedule(std::numeric_limits<double>::infinity(), 2).diagonal()[0], 0.1);
  EXPECT_EQ(lambda_schedule(std::nan(""), 2).diagonal()[0], 0.1);
  EXPECT_EQ(lambda_schedule(1.0, 6).size(), 6);
}

TEST(LambdaSchedule, MonotoneInCondition) {
  oracle::Rng rng(17);
  std::vector<double> conds;
  for (int i = 0; i < 500; ++i) conds.push_back(std::pow(10.0, rng.uniform(0.0, 6.0)));
  std::sort(conds.begin(), conds.end());
  double last = 0.0;
  for (double c : conds) {
    const double v = lambda_schedule(c, 1).diagonal()[0];
    EXPECT_GE(v, last);
    last = v;
  }
}

TEST(MfacStep, ZeroResidualGivesZeroIncrement) {
  oracle::Rng rng(1);
  const Dimensions d(2, 2, 1, 2);
  const PseudoJacobian p = random_pjm(rng, d);
  const Vector y = rng.vector(2);
  const RegressorWindow w(d, {y, y}, {Vector::Ones(2), Vector::Ones(2), Vector::Ones(2)});
  const ControlDecision c = mfac_step(p, w, y, y, Weighting::uniform(2, 0.3));
  EXPECT_TRUE(c.delta_u.isZero(0.0));
  EXPECT_EQ(c.u, Vector::Ones(2));
}

TEST(MfacStep, ScalarDeadbeat) {
  const ControlDecision c =
      mfac_step(scalar_pjm(1.0), scalar_history(), scalar(0.0), scalar(0.37), Weighting(scalar(0.0)));
  EXPECT_NEAR(c.delta_u[0], 0.37, 1e-15);
}

TEST(MfacStep, ScalarDamped) {
  const ControlDecision c =
      mfac_step(scalar_pjm(2.0), scalar_history(), scalar(0.0), scalar(1.0), Weighting(scalar(0.2)));
  EXPECT_NEAR(c.delta_u[0], 2.0 / 4.2, 1e-15);
}

TEST(MfacStep, InputEqualsPreviousPlusIncrementExactly) {
  oracle::Rng rng(2);
  const Dimensions d(3, 2, 2, 3);
  for (int trial = 0; trial < 50; ++trial) {
    const PseudoJacobian p = random_pjm(rng, d);
    const RegressorWindow w = random_window(rng, d);
    const ControlDecision c =
        mfac_step(p, w, rng.vector(3), rng.vector(3), Weighting::uniform(2, 0.1));
    EXPECT_TRUE(((c.u - w.input(0)).array() == c.delta_u.array()).all());
  }
}

TEST(MfacStep, RankDeficientWithoutDampingThrows) {
  Matrix lead(2, 2);
  lead << 1, 2, 2, 4;
  const PseudoJacobian p({}, {lead});
  const RegressorWindow w = RegressorWindow::zeros(Dimensions(2, 2, 0, 1));
  try {
    mfac_step(p, w, Vector::Zero(2), Vector::Ones(2), Weighting::uniform(2, 0.0));
    FAIL() << "expected RankDeficiencyError";
  } catch (const RankDeficiencyError& e) {
    EXPECT_EQ(e.rank(), 1);
    EXPECT_EQ(e.required(), 2);
  }
  EXPECT_NO_THROW(mfac_step(p, w, Vector::Zero(2), Vector::Ones(2), Weighting::uniform(2, 0.1)));
}

TEST(MfacStep, WideLeadingBlockFallsBackToMinimumNorm) {
  Matrix lead(1, 2);
  lead << 1.0, 2.0;
  const PseudoJacobian p({}, {lead});
  const RegressorWindow w = RegressorWindow::zeros(Dimensions(1, 2, 0, 1));
  const ControlDecision c = mfac_step(p, w, scalar(0.0), scalar(1.0), Weighting::uniform(2, 0.0));
  // Φᵀ(ΦΦᵀ)⁻¹ e
  EXPECT_NEAR(c.delta_u[0], 1.0 / 5.0, 1e-12);
  EXPECT_NEAR(c.delta_u[1], 2.0 / 5.0, 1e-12);
}

TEST(MfacStep, UndampedStepIsExactForLtiPlant) {
  oracle::Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const auto coeffs = oracle::random_stable_lti(rng, 2, 2, 1, 1);
    const LinearModel plant(coeffs.a, coeffs.b);
    std::vector<Vector> ys{rng.vector(2), rng.vector(2), rng.vector(2)};
    std::vector<Vector> us{rng.vector(2), rng.vector(2), rng.vector(2)};
    const RegressorWindow history(plant.dims(), ys, us);
    const Vector y_now = plant.evaluate(model_arguments(plant.dims(), history));
    const Vector ref = rng.vector(2);
    const ControlDecision c = mfac_step(pjm_first_order(plant, history), history, y_now, ref,
                                        Weighting::uniform(2, 0.0));
    const Vector y_next =
        plant.evaluate(model_arguments(plant.dims(), history.advanced(y_now, c.u)));
    EXPECT_LE((y_next - ref).cwiseAbs().maxCoeff(), 1e-7);
  }
}

TEST(MfacStep, IncrementIsUniqueMinimizer) {
  oracle::Rng rng(4);
  const Dimensions d(2, 3, 1, 2);
  for (int trial = 0; trial < 30; ++trial) {
    const PseudoJacobian p = random_pjm(rng, d);
    const RegressorWindow w = random_window(rng, d);
    const Vector y = rng.vector(2), ref = rng.vector(2);
    Vector lambda(3);
    lambda << rng.uniform(0.01, 1), rng.uniform(0.01, 1), rng.uniform(0.01, 1);
    const ControlDecision c = mfac_step(p, w, y, ref, Weighting(lambda));
    const double best = cost_of(p, w, y, ref, lambda, c.delta_u);
    EXPECT_NEAR(c.cost, best, 1e-12);
    for (int k = 0; k < 20; ++k) {
      const Vector perturbed = c.delta_u + rng.vector(3, 1e-3);
      EXPECT_GT(cost_of(p, w, y, ref, lambda, perturbed), best);
    }
  }
}

TEST(MfacStep, MoreDampingGivesSmallerIncrement) {
  oracle::Rng rng(5);
  const Dimensions d(2, 2, 0, 1);
  for (int trial = 0; trial < 30; ++trial) {
    const PseudoJacobian p = random_pjm(rng, d);
    const RegressorWindow w = RegressorWindow::zeros(d);
    const Vector ref = rng.vector(2);
    double last = std::numeric_limits<double>::infinity();
    for (double lam : {0.01, 0.05, 0.2, 1.0, 5.0}) {
      const double n =
          mfac_step(p, w, Vector::Zero(2), ref, Weighting::uniform(2, lam)).delta_u.norm();
      EXPECT_LT(n, last);
      last = n;
    }
  }
}

TEST(MfacStep, RejectsShapeMismatch) {
  const RegressorWindow w = RegressorWindow::zeros(Dimensions(2, 2, 0, 1));
  EXPECT_THROW(mfac_step(scalar_pjm(1.0), w, Vector::Zero(2), Vector::Zero(2),
                         Weighting::uniform(2, 0.1)),
               ShapeError);
}

TEST(MfacConstrainedStep, InteriorOptimumMatchesUnconstrained) {
  oracle::Rng rng(6);
  const Dimensions d(2, 2, 1, 2);
  for (int trial = 0; trial < 20; ++trial) {
    const PseudoJacobian p = random_pjm(rng, d);
    const RegressorWindow w = random_window(rng, d);
    const Vector y = rng.vector(2), ref = rng.vector(2);
    const Weighting lam = Weighting::uniform(2, 0.2);
    const ControlDecision free = mfac_step(p, w, y, ref, lam);
    const BoxConstraints box{free.u.array() - 10.0, free.u.array() + 10.0};
    const ControlDecision boxed = mfac_constrained_step(p, w, y, ref, lam, box);
    EXPECT_LE((boxed.delta_u - free.delta_u).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(MfacConstrainedStep, ScalarClipsAtUpperBound) {
  const BoxConstraints box{scalar(-0.3), scalar(0.1)};
  const ControlDecision c = mfac_constrained_step(scalar_pjm(1.0), scalar_history(), scalar(0.0),
                                                  scalar(1.0), Weighting(scalar(0.0)), box);
  EXPECT_DOUBLE_EQ(c.u[0], 0.1);
}

TEST(MfacConstrainedStep, MatchesGridSearchWithOneActiveBound) {
  Matrix lead(2, 2);
  lead << 1.0, 0.3, -0.2, 0.8;
  const PseudoJacobian p({}, {lead});
  const RegressorWindow w = RegressorWindow::zeros(Dimensions(2, 2, 0, 1));
  Vector ref(2);
  ref << 0.6, 0.1;
  const Vector lambda = Vector::Constant(2, 0.2);
  const BoxConstraints box{Vector::Constant(2, -0.5), (Vector(2) << 0.1, 0.5).finished()};
  const ControlDecision c =
      mfac_constrained_step(p, w, Vector::Zero(2), ref, Weighting(lambda), box);

  double best = std::numeric_limits<double>::infinity();
  Vector arg(2);
  const int n = 1201;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      Vector du(2);
      du << box.lower[0] + (box.upper[0] - box.lower[0]) * i / (n - 1),
          box.lower[1] + (box.upper[1] - box.lower[1]) * j / (n - 1);
      const double v = cost_of(p, w, Vector::Zero(2), ref, lambda, du);
      if (v < best) {
        best = v;
        arg = du;
      }
    }
  }
  EXPECT_DOUBLE_EQ(c.u[0], 0.1);
  EXPECT_LE((c.delta_u - arg).cwiseAbs().maxCoeff(), 1e-3);
}

TEST(MfacConstrainedStep, NeverLeavesTheBox) {
  oracle::Rng rng(7);
  const Dimensions d(2, 3, 1, 2);
  for (int trial = 0; trial < 200; ++trial) {
    const PseudoJacobian p = random_pjm(rng, d);
    const RegressorWindow w = random_window(rng, d);
    Vector lo = rng.vector(3), hi = lo;
    for (int i = 0; i < 3; ++i) hi[i] += rng.uniform(0.0, 0.5);
    const BoxConstraints box{lo, hi};
    const ControlDecision c = mfac_constrained_step(p, w, rng.vector(2, 3.0), rng.vector(2, 3.0),
                                                    Weighting::uniform(3, rng.uniform(0, 0.5)),
                                                    box);
    EXPECT_TRUE(box.contains(c.u));
    EXPECT_TRUE(((c.u - w.input(0)).array() == c.delta_u.array()).all());
  }
}

TEST(MfacConstrainedStep, InfeasibleBoxThrows) {
  const BoxConstraints box{scalar(0.5), scalar(0.1)};
  EXPECT_THROW(mfac_constrained_step(scalar_pjm(1.0), scalar_history(), scalar(0.0), scalar(1.0),
                                     Weighting(scalar(0.1)), box),
               ConstraintError);
}

TEST(MfacQuarticStep, LtiConvergesInOnePassAndMatchesFirstOrder) {
  oracle::Rng rng(8);
  for (int trial = 0; trial < 10; ++trial) {
    const auto coeffs = oracle::random_stable_lti(rng, 2, 2, 0, 1);
    const LinearModel plant(coeffs.a, coeffs.b);
    const RegressorWindow history = RegressorWindow::zeros(plant.dims(), 3);
    const Vector y = rng.vector(2), ref = rng.vector(2);
    const Weighting lam = Weighting::uniform(2, 0.2);
    const ControlDecision q = mfac_quartic_step(plant, history, y, ref, lam);
    const ControlDecision f = mfac_step(pjm_first_order(plant, history), history, y, ref, lam);
    EXPECT_TRUE(q.converged);
    EXPECT_EQ(q.iterations, 1);
    EXPECT_LE((q.delta_u - f.delta_u).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(MfacQuarticStep, ZeroErrorAtRestGivesZero) {
  const Example1Plant plant;
  const ControlDecision q = mfac_quartic_step(plant, example1_initial_window(), Vector::Zero(2),
                                              Vector::Zero(2), Weighting::uniform(2, 0.2));
  EXPECT_LE(q.delta_u.cwiseAbs().maxCoeff(), 1e-12);
}

TEST(MfacQuarticStep, Example1CostNotWorseThanFirstOrder) {
  const Example1Plant plant;
  const RegressorWindow history = example1_initial_window();
  const Vector ref = Vector::Constant(2, 0.1);
  const Vector lambda = Vector::Constant(2, 0.2);
  const ControlDecision q =
      mfac_quartic_step(plant, history, Vector::Zero(2), ref, Weighting(lambda));
  const ControlDecision f = mfac_step(pjm_first_order(plant, history), history, Vector::Zero(2),
                                      ref, Weighting(lambda));
  auto true_cost = [&](const Vector& du) {
    Vector args(6);
    args << 0, 0, du, 0, 0;
    return (ref - plant.evaluate(args)).squaredNorm() + du.dot(lambda.cwiseProduct(du));
  };
  EXPECT_LE(true_cost(q.delta_u), true_cost(f.delta_u) + 1e-15);
  EXPECT_NEAR(q.cost, true_cost(q.delta_u), 1e-14);
}

TEST(IterativeMfacStep, AlreadyOnReferenceTakesNoIterations) {
  const Example1Plant plant;
  oracle::Rng rng(9);
  const RegressorWindow history(plant.dims(), {rng.vector(2, 0.3), rng.vector(2, 0.3)},
                                {rng.vector(2, 0.3), rng.vector(2, 0.3), rng.vector(2, 0.3)});
  const Vector y = rng.vector(2, 0.3);
  Vector args(6);
  args << y, history.input(0), history.input(0);
  const Vector ref = plant.evaluate(args);
  const ControlDecision c = iterative_mfac_step(plant, history, y, ref, lambda_schedule, 30);
  EXPECT_EQ(c.iterations, 0);
  EXPECT_TRUE(c.delta_u.isZero(0.0));
  EXPECT_TRUE(c.converged);
}

TEST(IterativeMfacStep, ScalarLtiConvergesInOneIteration) {
  const LinearModel plant({Matrix::Constant(1, 1, 0.5)}, {Matrix::Constant(1, 1, 1.0)});
  const RegressorWindow history = RegressorWindow::zeros(plant.dims(), 1);
  const ControlDecision c =
      iterative_mfac_step(plant, history, scalar(0.4), scalar(1.3), lambda_schedule, 30);
  EXPECT_EQ(c.iterations, 1);
  EXPECT_TRUE(c.converged);
  ASSERT_EQ(c.lambda_trace.size(), 1u);
  EXPECT_EQ(c.lambda_trace[0], 0.0);
  EXPECT_NEAR(0.5 * 0.4 + c.u[0], 1.3, 1e-10);
}

TEST(IterativeMfacStep, RespectsCapAndScheduleValues) {
  const Example1Plant plant;
  oracle::Rng rng(10);
  for (int trial = 0; trial < 30; ++trial) {
    const RegressorWindow history(plant.dims(), {rng.vector(2, 0.3), rng.vector(2, 0.3)},
                                  {rng.vector(2, 0.3), rng.vector(2, 0.3), rng.vector(2, 0.3)});
    const int cap = rng.integer(1, 6);
    const ControlDecision c =
        iterative_mfac_step(plant, history, rng.vector(2, 0.3), rng.vector(2, 0.3),
                            lambda_schedule, cap);
    EXPECT_LE(c.iterations, cap);
    EXPECT_EQ(c.lambda_trace.size(), static_cast<std::size_t>(c.iterations));
    for (double l : c.lambda_trace) EXPECT_TRUE(l == 0.0 || l == 0.05 || l == 0.1);
  }
}

TEST(IterativeMfacStep, RejectsZeroCap) {
  const Example1Plant plant;
  EXPECT_THROW(iterative_mfac_step(plant, example1_initial_window(), Vector::Zero(2),
                                   Vector::Zero(2), lambda_schedule, 0),
               RangeError);
}
