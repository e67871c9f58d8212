#include "mfac/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "mfac/errors.hpp"

namespace mfac {
namespace {

constexpr int kCofactorLimit = 8;

Poly cofactor_determinant(const PolyMatrix& pm, std::vector<int>& rows_left, int col) {
  const int n = pm.cols();
  if (col == n) return Poly::constant(1.0);
  Poly acc;
  double sign = 1.0;
  for (std::size_t i = 0; i < rows_left.size(); ++i) {
    const int row = rows_left[i];
    const Poly& entry = pm(row, col);
    if (!entry.is_zero()) {
      std::vector<int> minor_rows;
      minor_rows.reserve(rows_left.size() - 1);
      for (std::size_t j = 0; j < rows_left.size(); ++j) {
        if (j != i) minor_rows.push_back(rows_left[j]);
      }
      const Poly minor = cofactor_determinant(pm, minor_rows, col + 1);
      if (sign > 0) {
        acc += entry * minor;
      } else {
        acc -= entry * minor;
      }
    }
    sign = -sign;
  }
  return acc;
}

int degree_bound(const PolyMatrix& pm) {
  int bound = 0;
  for (int r = 0; r < pm.rows(); ++r) {
    int row_max = 0;
    for (int c = 0; c < pm.cols(); ++c) row_max = std::max(row_max, pm(r, c).degree());
    bound += row_max;
  }
  return bound;
}

void require_square_loop(const PseudoJacobian& pjm) {
  if (pjm.output_dim() != pjm.input_dim()) {
    throw ShapeError("closed-loop analysis needs as many inputs as outputs");
  }
}

// T(1) together with the λ [I − φ_Ly(1)] and φ_Lu(1) Φᵀ factors of the limits.
struct UnitPointFactors {
  Matrix loop;
  Matrix ramp_numerator;
  Matrix feedthrough;
};

UnitPointFactors factors_at_one(const PseudoJacobian& pjm, const Weighting& weighting) {
  const PolyMatrix t = closed_loop_matrix(pjm, weighting);
  const StabilityReport report = stability_check(t);
  if (!report.stable) {
    throw StabilityError("closed loop is not strictly stable (margin " +
                         std::to_string(report.margin) + ")");
  }
  const int n = pjm.output_dim();
  UnitPointFactors f;
  f.loop = t.evaluate(1.0);
  f.ramp_numerator = weighting.matrix() *
                     (Matrix::Identity(n, n) - output_polynomial(pjm).evaluate(1.0));
  f.feedthrough = input_polynomial(pjm).evaluate(1.0) * pjm.leading_input_block().transpose();
  Eigen::FullPivLU<Matrix> lu(f.loop);
  if (!lu.isInvertible()) throw SingularityError("T(1) is singular");
  return f;
}

}  // namespace

PolyMatrix output_polynomial(const PseudoJacobian& pjm) {
  const int n = pjm.output_dim();
  PolyMatrix out(n, n);
  const auto& blocks = pjm.output_blocks();
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const Poly shift = Poly::shift(static_cast<int>(i));
    out += shift * PolyMatrix::constant(blocks[i]);
  }
  return out;
}

PolyMatrix input_polynomial(const PseudoJacobian& pjm) {
  PolyMatrix out(pjm.output_dim(), pjm.input_dim());
  const auto& blocks = pjm.input_blocks();
  for (std::size_t j = 0; j < blocks.size(); ++j) {
    const Poly shift = Poly::shift(static_cast<int>(j));
    out += shift * PolyMatrix::constant(blocks[j]);
  }
  return out;
}

PolyMatrix closed_loop_matrix(const PseudoJacobian& pjm, const Weighting& weighting) {
  require_square_loop(pjm);
  if (weighting.size() != pjm.input_dim()) throw ShapeError("weighting size mismatch");
  const int n = pjm.output_dim();

  PolyMatrix bracket = PolyMatrix::identity(n);
  bracket += Poly({0.0, -1.0}) * output_polynomial(pjm);
  PolyMatrix t = Poly::difference() * (PolyMatrix::constant(weighting.matrix()) * bracket);
  t += input_polynomial(pjm) * PolyMatrix::constant(pjm.leading_input_block().transpose());
  return t;
}

Poly determinant(const PolyMatrix& pm) {
  if (!pm.is_square()) throw ShapeError("determinant of a non-square matrix");
  if (pm.rows() == 0) return Poly::constant(1.0);
  if (pm.rows() > kCofactorLimit) return determinant_by_interpolation(pm);
  std::vector<int> rows(static_cast<std::size_t>(pm.rows()));
  for (int i = 0; i < pm.rows(); ++i) rows[static_cast<std::size_t>(i)] = i;
  return cofactor_determinant(pm, rows, 0);
}

Poly determinant_by_interpolation(const PolyMatrix& pm) {
  if (!pm.is_square()) throw ShapeError("determinant of a non-square matrix");
  const int points = degree_bound(pm) + 1;
  std::vector<std::complex<double>> values(static_cast<std::size_t>(points));
  for (int k = 0; k < points; ++k) {
    const std::complex<double> w = std::polar(1.0, 2.0 * std::numbers::pi * k / points);
    values[static_cast<std::size_t>(k)] = pm.evaluate(w).partialPivLu().determinant();
  }
  // Inverse DFT: c_i = (1/N) Σ_k p(w_k) w_k^{-i}.
  std::vector<double> coefficients(static_cast<std::size_t>(points), 0.0);
  double scale = 0.0;
  for (int i = 0; i < points; ++i) {
    std::complex<double> acc = 0.0;
    for (int k = 0; k < points; ++k) {
      acc += values[static_cast<std::size_t>(k)] *
             std::polar(1.0, -2.0 * std::numbers::pi * i * k / points);
    }
    coefficients[static_cast<std::size_t>(i)] = acc.real() / points;
    scale = std::max(scale, std::abs(coefficients[static_cast<std::size_t>(i)]));
  }
  // Interpolation noise would otherwise survive as spurious high-degree terms.
  for (double& c : coefficients) {
    if (std::abs(c) <= 1e-13 * scale) c = 0.0;
  }
  return Poly(std::move(coefficients));
}

std::vector<std::complex<double>> roots_in_z(const Poly& p) {
  std::vector<double> c = p.coefficients();
  std::vector<std::complex<double>> roots;
  if (c.empty()) return roots;
  double scale = 0.0;
  for (double v : c) scale = std::max(scale, std::abs(v));
  // A vanishing z^d coefficient sends roots to infinity.
  std::size_t lead = 0;
  while (lead < c.size() && std::abs(c[lead]) <= 1e-14 * scale) ++lead;
  for (std::size_t i = 0; i < lead; ++i) {
    roots.emplace_back(std::numeric_limits<double>::infinity(), 0.0);
  }
  c.erase(c.begin(), c.begin() + static_cast<long>(lead));
  const int d = static_cast<int>(c.size()) - 1;
  if (d <= 0) return roots;

  Matrix companion = Matrix::Zero(d, d);
  for (int j = 0; j < d; ++j) companion(0, j) = -c[static_cast<std::size_t>(j) + 1] / c[0];
  for (int i = 1; i < d; ++i) companion(i, i - 1) = 1.0;
  Eigen::EigenSolver<Matrix> solver(companion, false);
  const auto eig = solver.eigenvalues();
  for (int i = 0; i < d; ++i) roots.push_back(eig(i));
  return roots;
}

StabilityReport stability_check(const PolyMatrix& pm) {
  const Poly det = determinant(pm);
  if (det.is_zero()) throw DegenerateLoopError("closed-loop determinant is identically zero");
  StabilityReport report;
  report.characteristic_roots = roots_in_z(det);
  double radius = 0.0;
  for (const auto& r : report.characteristic_roots) radius = std::max(radius, std::abs(r));
  report.margin = 1.0 - radius;
  report.stable = radius < 1.0 - kStabilityTolerance;
  return report;
}

Vector ramp_static_error(const PseudoJacobian& pjm, const Weighting& weighting,
                         double sample_period) {
  const UnitPointFactors f = factors_at_one(pjm, weighting);
  const Vector ones = Vector::Ones(pjm.output_dim());
  return f.loop.fullPivLu().solve(f.ramp_numerator * ones) * sample_period;
}

Vector step_static_error(const PseudoJacobian& pjm, const Weighting& weighting) {
  const UnitPointFactors f = factors_at_one(pjm, weighting);
  const int n = pjm.output_dim();
  const Vector ones = Vector::Ones(n);
  return (Matrix::Identity(n, n) - f.loop.fullPivLu().solve(f.feedthrough)) * ones;
}

}  // namespace mfac
