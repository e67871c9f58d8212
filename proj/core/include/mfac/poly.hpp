#pragma once

#include <complex>
#include <initializer_list>
#include <vector>

#include <Eigen/Dense>

namespace mfac {

/// Polynomial in the backward shift z⁻¹: coefficient i multiplies z⁻ⁱ.
class Poly {
 public:
  Poly() = default;
  Poly(std::initializer_list<double> coefficients);
  explicit Poly(std::vector<double> coefficients);
  static Poly constant(double value) { return Poly({value}); }
  /// 1 − z⁻¹.
  static Poly difference() { return Poly({1.0, -1.0}); }
  /// z⁻ⁿ.
  static Poly shift(int n);

  const std::vector<double>& coefficients() const noexcept { return coefficients_; }
  /// −1 for the zero polynomial.
  int degree() const noexcept { return static_cast<int>(coefficients_.size()) - 1; }
  bool is_zero() const noexcept { return coefficients_.empty(); }
  double operator[](int i) const;

  /// Value at a point given in the z⁻¹ variable.
  std::complex<double> evaluate(std::complex<double> z_inverse) const;
  double evaluate(double z_inverse) const;

  Poly& operator+=(const Poly& rhs);
  Poly& operator-=(const Poly& rhs);
  Poly& operator*=(double scale);
  friend Poly operator+(Poly a, const Poly& b) { return a += b; }
  friend Poly operator-(Poly a, const Poly& b) { return a -= b; }
  friend Poly operator*(Poly a, double s) { return a *= s; }
  friend Poly operator*(double s, Poly a) { return a *= s; }
  friend Poly operator*(const Poly& a, const Poly& b);
  bool operator==(const Poly&) const = default;

 private:
  void trim();
  std::vector<double> coefficients_;
};

class PolyMatrix {
 public:
  PolyMatrix(int rows, int cols);
  /// Constant matrix lifted to degree-zero entries.
  static PolyMatrix constant(const Eigen::MatrixXd& m);
  static PolyMatrix identity(int n);

  int rows() const noexcept { return rows_; }
  int cols() const noexcept { return cols_; }
  bool is_square() const noexcept { return rows_ == cols_; }

  Poly& operator()(int r, int c);
  const Poly& operator()(int r, int c) const;

  Eigen::MatrixXcd evaluate(std::complex<double> z_inverse) const;
  Eigen::MatrixXd evaluate(double z_inverse) const;

  PolyMatrix& operator+=(const PolyMatrix& rhs);
  friend PolyMatrix operator+(PolyMatrix a, const PolyMatrix& b) { return a += b; }
  friend PolyMatrix operator*(const PolyMatrix& a, const PolyMatrix& b);
  friend PolyMatrix operator*(const Poly& p, const PolyMatrix& m);

 private:
  int rows_;
  int cols_;
  std::vector<Poly> entries_;
};

}  // namespace mfac
