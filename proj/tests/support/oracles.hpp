#pragma once

// Reference computations used by the tests. Nothing here calls into the
// library's numerical code paths; each routine is a direct, slow restatement.

#include <array>
#include <cmath>
#include <cstdint>
#include <deque>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Seeded generator shared by the property tests.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
  }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(engine_); }

  Matrix matrix(int rows, int cols, double scale = 1.0) {
    Matrix m(rows, cols);
    for (int r = 0; r < rows; ++r) {
      for (int c = 0; c < cols; ++c) m(r, c) = uniform(-scale, scale);
    }
    return m;
  }
  Vector vector(int n, double scale = 1.0) { return matrix(n, 1, scale); }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

/// Random LTI coefficients y(k+1) = Σ A_i y(k-i) + Σ B_j u(k-j) with Σ‖A_i‖₂ < 0.9.
struct LtiCoefficients {
  std::vector<Matrix> a;
  std::vector<Matrix> b;
};

inline LtiCoefficients random_stable_lti(Rng& rng, int my, int mu, int ny, int nu) {
  LtiCoefficients c;
  double total = 0.0;
  for (int i = 0; i <= ny; ++i) {
    c.a.push_back(rng.matrix(my, my));
    total += Eigen::JacobiSVD<Matrix>(c.a.back()).singularValues()(0);
  }
  const double shrink = total > 0.0 ? 0.9 / (total * 1.05) : 1.0;
  for (auto& m : c.a) m *= shrink;
  for (int j = 0; j <= nu; ++j) c.b.push_back(rng.matrix(my, mu, 2.0));
  return c;
}

/// Plain one-sided difference quotient, used to cross-check central differences.
template <typename F>
Matrix forward_difference(const F& f, const Vector& x, double h) {
  const Vector f0 = f(x);
  Matrix j(f0.size(), x.size());
  for (Eigen::Index c = 0; c < x.size(); ++c) {
    Vector xp = x;
    xp[c] += h;
    j.col(c) = (f(xp) - f0) / h;
  }
  return j;
}

/// Five-point stencil derivative with an independent step.
template <typename F>
Matrix five_point_jacobian(const F& f, const Vector& x, double h) {
  const Vector f0 = f(x);
  Matrix j(f0.size(), x.size());
  for (Eigen::Index c = 0; c < x.size(); ++c) {
    auto at = [&](double s) {
      Vector xs = x;
      xs[c] += s;
      return Vector(f(xs));
    };
    j.col(c) = (-at(2 * h) + 8.0 * at(h) - 8.0 * at(-h) + at(-2 * h)) / (12.0 * h);
  }
  return j;
}

/**
 * @brief Closed loop of a frozen-PJM plant under the one-step MFAC law.
 *
 * Plant: Δy(k+1) = Σ Φ_i Δy(k-i+1) + Σ Φ_{Ly+j} Δu(k-j+1).
 * Law: (ΦᵀΦ + λ) Δu(k) = Φᵀ[(r(k+1) − y(k)) − Σ Φ_i Δy(k-i+1) − Σ_{j>=2} Φ_{Ly+j} Δu(k-j+1)].
 * Returns the tracking error r(k) − y(k) at the final step and the peak |y|.
 */
struct LoopResult {
  Vector final_error;
  double peak = 0.0;
  bool diverged = false;
};

template <typename Ref>
LoopResult frozen_loop(const std::vector<Matrix>& phi_y, const std::vector<Matrix>& phi_u,
                       double lambda, const Ref& reference, long steps, const Vector& y0,
                       double limit = 1e6) {
  const auto my = phi_u.front().rows();
  const auto mu = phi_u.front().cols();
  const Matrix& lead = phi_u.front();
  const Matrix gain = lead.transpose() * lead + lambda * Matrix::Identity(mu, mu);
  const Eigen::LDLT<Matrix> solver(gain);

  std::deque<Vector> dy(phi_y.size() + 1, Vector::Zero(my));  // dy[0] = Δy(k)
  std::deque<Vector> du(phi_u.size() + 1, Vector::Zero(mu));  // du[0] = Δu(k-1)
  Vector y = y0;
  LoopResult res;
  for (long k = 0; k < steps; ++k) {
    Vector rhs = reference(k + 1) - y;
    for (std::size_t i = 0; i < phi_y.size(); ++i) rhs -= phi_y[i] * dy[i];
    for (std::size_t j = 1; j < phi_u.size(); ++j) rhs -= phi_u[j] * du[j - 1];
    const Vector delta = solver.solve(lead.transpose() * rhs);
    du.push_front(delta);
    du.pop_back();

    Vector next_dy = Vector::Zero(my);
    for (std::size_t i = 0; i < phi_y.size(); ++i) next_dy += phi_y[i] * dy[i];
    for (std::size_t j = 0; j < phi_u.size(); ++j) next_dy += phi_u[j] * du[j];
    y += next_dy;
    dy.push_front(next_dy);
    dy.pop_back();

    res.peak = std::max(res.peak, y.cwiseAbs().maxCoeff());
    if (!y.allFinite() || res.peak > limit) {
      res.diverged = true;
      break;
    }
    res.final_error = reference(k + 1) - y;
  }
  return res;
}

/// Rotation about a unit axis by Rodrigues' formula.
inline Eigen::Matrix3d rodrigues(const Eigen::Vector3d& axis, double angle) {
  const Eigen::Vector3d k = axis.normalized();
  Eigen::Matrix3d kx;
  kx << 0, -k.z(), k.y(), k.z(), 0, -k.x(), -k.y(), k.x(), 0;
  return Eigen::Matrix3d::Identity() + std::sin(angle) * kx + (1.0 - std::cos(angle)) * kx * kx;
}

inline Eigen::Matrix3d elementary(int axis, double angle) {
  return rodrigues(Eigen::Vector3d::Unit(axis), angle);
}

/// Returns Σ c_i t^i and its derivatives at t.
inline std::array<double, 3> poly_eval(const std::array<double, 6>& c, double t) {
  std::array<double, 3> out{0.0, 0.0, 0.0};
  for (int i = 0; i < 6; ++i) {
    out[0] += c[i] * std::pow(t, i);
    if (i >= 1) out[1] += i * c[i] * std::pow(t, i - 1);
    if (i >= 2) out[2] += i * (i - 1) * c[i] * std::pow(t, i - 2);
  }
  return out;
}

}  // namespace oracle
