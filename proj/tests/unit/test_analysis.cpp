#include <gtest/gtest.h>

#include <cmath>
#include <complex>

#include "mfac/analysis.hpp"
#include "mfac/errors.hpp"
#include "oracles.hpp"

using namespace mfac;
using cplx = std::complex<double>;

namespace {

PseudoJacobian scalar_loop(double b) { return PseudoJacobian({}, {Matrix::Constant(1, 1, b)}); }

PseudoJacobian scalar_loop(double a, double b) {
  return PseudoJacobian({Matrix::Constant(1, 1, a)}, {Matrix::Constant(1, 1, b)});
}

void expect_coeffs(const Poly& p, std::vector<double> expected, double tol = 1e-14) {
  ASSERT_EQ(p.coefficients().size(), expected.size());
  for (std::size_t i = 0; i < expected.size(); ++i) EXPECT_NEAR(p[i], expected[i], tol) << i;
}

PolyMatrix random_poly_matrix(oracle::Rng& rng, int n, int degree) {
  PolyMatrix m(n, n);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      std::vector<double> coeffs;
      for (int i = 0; i <= degree; ++i) coeffs.push_back(rng.uniform(-1, 1));
      m(r, c) = Poly(coeffs);
    }
  }
  return m;
}

double max_root(const StabilityReport& r) {
  double m = 0.0;
  for (const auto& z : r.characteristic_roots) m = std::max(m, std::abs(z));
  return m;
}

}  // namespace

TEST(Poly, TrimsAndMultiplies) {
  const Poly p({1.0, 2.0, 0.0, 0.0});
  EXPECT_EQ(p.degree(), 1);
  expect_coeffs(p * Poly({1.0, -1.0}), {1.0, 1.0, -2.0});
  EXPECT_TRUE(Poly({0.0}).is_zero());
  EXPECT_EQ(Poly().degree(), -1);
  EXPECT_THROW(Poly({std::nan("")}), NumericError);
}

TEST(Poly, EvaluateIsHorner) {
  const Poly p({1.0, -3.0, 2.0});
  EXPECT_DOUBLE_EQ(p.evaluate(0.5), 1.0 - 1.5 + 0.5);
  const cplx z(0.3, -0.7);
  EXPECT_LE(std::abs(p.evaluate(z) - (1.0 - 3.0 * z + 2.0 * z * z)), 1e-15);
}

TEST(ClosedLoopMatrix, ScalarUndamped) {
  const PolyMatrix t = closed_loop_matrix(scalar_loop(1.7), Weighting::uniform(1, 0.0));
  expect_coeffs(t(0, 0), {1.7 * 1.7});
}

TEST(ClosedLoopMatrix, ScalarDamped) {
  const PolyMatrix t = closed_loop_matrix(scalar_loop(1.5), Weighting::uniform(1, 0.3));
  expect_coeffs(t(0, 0), {0.3 + 2.25, -0.3});
}

TEST(ClosedLoopMatrix, ScalarWithOutputBlock) {
  const double a = 0.4, b = 1.2, lam = 0.7;
  const PolyMatrix t = closed_loop_matrix(scalar_loop(a, b), Weighting::uniform(1, lam));
  // λ(1 − z⁻¹)(1 − a z⁻¹) + b²
  expect_coeffs(t(0, 0), {lam + b * b, -lam * (1.0 + a), lam * a});
}

TEST(ClosedLoopMatrix, RejectsNonSquareLoop) {
  const PseudoJacobian p({}, {Matrix::Ones(2, 3)});
  EXPECT_THROW(closed_loop_matrix(p, Weighting::uniform(3, 0.1)), ShapeError);
}

TEST(Determinant, SmallCases) {
  PolyMatrix one(1, 1);
  one(0, 0) = Poly({2.0, 3.0});
  expect_coeffs(determinant(one), {2.0, 3.0});
  expect_coeffs(determinant(PolyMatrix::identity(2)), {1.0});
  EXPECT_THROW(determinant(PolyMatrix(2, 3)), ShapeError);
}

TEST(Determinant, MatchesPointwiseNumericDeterminant) {
  oracle::Rng rng(31);
  for (int n : {2, 3, 4, 9}) {
    for (int trial = 0; trial < 5; ++trial) {
      const PolyMatrix m = random_poly_matrix(rng, n, 2);
      const Poly det = determinant(m);
      EXPECT_LE(det.degree(), 2 * n);
      for (int s = 0; s < 7; ++s) {
        const cplx z(rng.uniform(-1.2, 1.2), rng.uniform(-1.2, 1.2));
        const cplx expected = m.evaluate(z).determinant();
        EXPECT_LE(std::abs(det.evaluate(z) - expected), 1e-8 * std::max(1.0, std::abs(expected)))
            << "n=" << n;
      }
    }
  }
}

TEST(Determinant, InterpolationAgreesWithCofactors) {
  oracle::Rng rng(32);
  for (int trial = 0; trial < 10; ++trial) {
    const PolyMatrix m = random_poly_matrix(rng, 3, 2);
    const Poly a = determinant(m);
    const Poly b = determinant_by_interpolation(m);
    const int deg = std::max(a.degree(), b.degree());
    for (int i = 0; i <= deg; ++i) EXPECT_NEAR(a[i], b[i], 1e-10);
  }
}

TEST(RootsInZ, KnownRoots) {
  // z² − 0.5 z + 0.06 = (z − 0.2)(z − 0.3)
  auto roots = roots_in_z(Poly({1.0, -0.5, 0.06}));
  ASSERT_EQ(roots.size(), 2u);
  std::sort(roots.begin(), roots.end(), [](cplx a, cplx b) { return a.real() < b.real(); });
  EXPECT_NEAR(roots[0].real(), 0.2, 1e-12);
  EXPECT_NEAR(roots[1].real(), 0.3, 1e-12);
  EXPECT_TRUE(roots_in_z(Poly({4.0})).empty());
}

TEST(RootsInZ, VanishingLeadingCoefficientGivesInfiniteRoot) {
  const auto roots = roots_in_z(Poly({0.0, 1.0, -0.5}));
  bool infinite = false;
  for (const auto& z : roots) infinite = infinite || std::isinf(std::abs(z));
  EXPECT_TRUE(infinite);
}

TEST(StabilityCheck, DeadbeatHasNoRoots) {
  const StabilityReport r =
      stability_check(closed_loop_matrix(scalar_loop(1.0), Weighting::uniform(1, 0.0)));
  EXPECT_TRUE(r.characteristic_roots.empty());
  EXPECT_TRUE(r.stable);
  EXPECT_EQ(r.margin, 1.0);
}

TEST(StabilityCheck, ScalarDampedRoot) {
  const StabilityReport r =
      stability_check(closed_loop_matrix(scalar_loop(1.0), Weighting::uniform(1, 0.2)));
  ASSERT_EQ(r.characteristic_roots.size(), 1u);
  EXPECT_NEAR(r.characteristic_roots[0].real(), 0.2 / 1.2, 1e-14);
  EXPECT_TRUE(r.stable);
}

TEST(StabilityCheck, RootOutsideUnitCircle) {
  PolyMatrix t(1, 1);
  t(0, 0) = Poly({1.0, -2.0});
  const StabilityReport r = stability_check(t);
  ASSERT_EQ(r.characteristic_roots.size(), 1u);
  EXPECT_NEAR(r.characteristic_roots[0].real(), 2.0, 1e-14);
  EXPECT_FALSE(r.stable);
}

TEST(StabilityCheck, UnitCircleIsUnstable) {
  PolyMatrix t(1, 1);
  t(0, 0) = Poly::difference();
  EXPECT_FALSE(stability_check(t).stable);
}

TEST(StabilityCheck, ZeroDeterminantIsDegenerate) {
  EXPECT_THROW(stability_check(PolyMatrix(2, 2)), DegenerateLoopError);
}

TEST(StabilityCheck, AgreesWithScalarSimulation) {
  // T = λ(1 − z⁻¹)(1 − a z⁻¹) + b² with a = 2, b = 1 loses stability at λ = 1.
  for (int i = 0; i < 30; ++i) {
    const double lam = 0.01 + (3.0 - 0.01) * i / 29.0;
    const PseudoJacobian p = scalar_loop(2.0, 1.0);
    const StabilityReport r = stability_check(closed_loop_matrix(p, Weighting::uniform(1, lam)));
    ASSERT_GT(std::abs(1.0 - max_root(r)), 0.005) << "grid point too close to the boundary";
    const auto sim = oracle::frozen_loop(p.output_blocks(), p.input_blocks(), lam,
                                         [](long) { return Vector::Zero(1); }, 5000,
                                         Vector::Ones(1));
    EXPECT_EQ(r.stable, !sim.diverged) << "lambda " << lam;
  }
}

TEST(RampStaticError, UndampedLoopHasNoError) {
  oracle::Rng rng(40);
  for (int trial = 0; trial < 10; ++trial) {
    const PseudoJacobian p({}, {Matrix::Identity(2, 2) + rng.matrix(2, 2, 0.3)});
    EXPECT_LE(ramp_static_error(p, Weighting::uniform(2, 0.0), 1.0).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(RampStaticError, ScalarLoopMatchesSimulation) {
  for (double lam : {0.05, 0.2, 0.5, 1.0}) {
    const PseudoJacobian p = scalar_loop(1.0);
    const double analytic = ramp_static_error(p, Weighting::uniform(1, lam), 1.0)[0];
    EXPECT_NEAR(analytic, lam, 1e-14);
    const auto sim = oracle::frozen_loop(
        p.output_blocks(), p.input_blocks(), lam,
        [](long k) { return Vector::Constant(1, static_cast<double>(k)); }, 5000,
        Vector::Zero(1));
    EXPECT_NEAR(sim.final_error[0], analytic, 0.01 * analytic);
  }
}

TEST(RampStaticError, LinearInSamplePeriodAndIncreasingInLambda) {
  const PseudoJacobian p = scalar_loop(0.3, 1.4);
  double last = -1.0;
  for (double lam : {0.05, 0.1, 0.2, 0.4}) {
    const Weighting w = Weighting::uniform(1, lam);
    const double e1 = ramp_static_error(p, w, 1.0)[0];
    EXPECT_NEAR(ramp_static_error(p, w, 0.01)[0], 0.01 * e1, 1e-15);
    EXPECT_GT(e1, last);
    last = e1;
  }
}

TEST(RampStaticError, UnstableLoopIsRefused) {
  EXPECT_THROW(ramp_static_error(scalar_loop(2.0, 1.0), Weighting::uniform(1, 2.0), 1.0),
               StabilityError);
}

TEST(StepStaticError, ScalarCases) {
  EXPECT_LE(std::abs(step_static_error(scalar_loop(1.0), Weighting::uniform(1, 0.2))[0]), 1e-15);
  EXPECT_LE(std::abs(step_static_error(scalar_loop(1.0), Weighting::uniform(1, 0.0))[0]), 1e-15);
}

TEST(StepStaticError, RandomStableLoopsMatchSimulation) {
  oracle::Rng rng(41);
  int checked = 0;
  while (checked < 10) {
    const PseudoJacobian p({rng.matrix(2, 2, 0.5)}, {rng.matrix(2, 2, 1.5)});
    const Weighting w = Weighting::uniform(2, rng.uniform(0.01, 1.0));
    const StabilityReport r = stability_check(closed_loop_matrix(p, w));
    if (!r.stable || r.margin < 0.01) continue;
    ++checked;
    EXPECT_LE(step_static_error(p, w).cwiseAbs().maxCoeff(), 1e-10);
    const auto sim =
        oracle::frozen_loop(p.output_blocks(), p.input_blocks(), w.diagonal()[0],
                            [](long k) { return k >= 1 ? Vector::Ones(2) : Vector::Zero(2); },
                            10000, Vector::Zero(2));
    ASSERT_FALSE(sim.diverged);
    EXPECT_LE(sim.final_error.cwiseAbs().maxCoeff(), 1e-6);
  }
}
