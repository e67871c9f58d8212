#include "mfac/poly.hpp"

#include <algorithm>
#include <cmath>

#include "mfac/errors.hpp"

namespace mfac {

Poly::Poly(std::initializer_list<double> coefficients) : coefficients_(coefficients) { trim(); }

Poly::Poly(std::vector<double> coefficients) : coefficients_(std::move(coefficients)) { trim(); }

Poly Poly::shift(int n) {
  if (n < 0) throw RangeError("shift order must be non-negative");
  std::vector<double> c(static_cast<std::size_t>(n) + 1, 0.0);
  c.back() = 1.0;
  return Poly(std::move(c));
}

void Poly::trim() {
  while (!coefficients_.empty() && coefficients_.back() == 0.0) coefficients_.pop_back();
  for (double c : coefficients_) {
    if (!std::isfinite(c)) throw NumericError("polynomial coefficient is not finite");
  }
}

double Poly::operator[](int i) const {
  return i >= 0 && i < static_cast<int>(coefficients_.size())
             ? coefficients_[static_cast<std::size_t>(i)]
             : 0.0;
}

std::complex<double> Poly::evaluate(std::complex<double> z_inverse) const {
  std::complex<double> acc = 0.0;
  for (auto it = coefficients_.rbegin(); it != coefficients_.rend(); ++it) {
    acc = acc * z_inverse + *it;
  }
  return acc;
}

double Poly::evaluate(double z_inverse) const {
  double acc = 0.0;
  for (auto it = coefficients_.rbegin(); it != coefficients_.rend(); ++it) {
    acc = acc * z_inverse + *it;
  }
  return acc;
}

Poly& Poly::operator+=(const Poly& rhs) {
  if (rhs.coefficients_.size() > coefficients_.size()) {
    coefficients_.resize(rhs.coefficients_.size(), 0.0);
  }
  for (std::size_t i = 0; i < rhs.coefficients_.size(); ++i) {
    coefficients_[i] += rhs.coefficients_[i];
  }
  trim();
  return *this;
}

Poly& Poly::operator-=(const Poly& rhs) {
  if (rhs.coefficients_.size() > coefficients_.size()) {
    coefficients_.resize(rhs.coefficients_.size(), 0.0);
  }
  for (std::size_t i = 0; i < rhs.coefficients_.size(); ++i) {
    coefficients_[i] -= rhs.coefficients_[i];
  }
  trim();
  return *this;
}

Poly& Poly::operator*=(double scale) {
  for (double& c : coefficients_) c *= scale;
  trim();
  return *this;
}

Poly operator*(const Poly& a, const Poly& b) {
  if (a.is_zero() || b.is_zero()) return Poly();
  std::vector<double> c(a.coefficients_.size() + b.coefficients_.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.coefficients_.size(); ++i) {
    for (std::size_t j = 0; j < b.coefficients_.size(); ++j) {
      c[i + j] += a.coefficients_[i] * b.coefficients_[j];
    }
  }
  return Poly(std::move(c));
}

// --- PolyMatrix -----------------------------------------------------------

PolyMatrix::PolyMatrix(int rows, int cols)
    : rows_(rows), cols_(cols), entries_(static_cast<std::size_t>(rows * cols)) {
  if (rows < 0 || cols < 0) throw ShapeError("negative polynomial matrix size");
}

PolyMatrix PolyMatrix::constant(const Eigen::MatrixXd& m) {
  PolyMatrix pm(static_cast<int>(m.rows()), static_cast<int>(m.cols()));
  for (int r = 0; r < pm.rows_; ++r) {
    for (int c = 0; c < pm.cols_; ++c) pm(r, c) = Poly::constant(m(r, c));
  }
  return pm;
}

PolyMatrix PolyMatrix::identity(int n) {
  return constant(Eigen::MatrixXd::Identity(n, n));
}

Poly& PolyMatrix::operator()(int r, int c) {
  if (r < 0 || r >= rows_ || c < 0 || c >= cols_) throw RangeError("entry outside matrix");
  return entries_[static_cast<std::size_t>(r * cols_ + c)];
}

const Poly& PolyMatrix::operator()(int r, int c) const {
  if (r < 0 || r >= rows_ || c < 0 || c >= cols_) throw RangeError("entry outside matrix");
  return entries_[static_cast<std::size_t>(r * cols_ + c)];
}

Eigen::MatrixXcd PolyMatrix::evaluate(std::complex<double> z_inverse) const {
  Eigen::MatrixXcd m(rows_, cols_);
  for (int r = 0; r < rows_; ++r) {
    for (int c = 0; c < cols_; ++c) m(r, c) = (*this)(r, c).evaluate(z_inverse);
  }
  return m;
}

Eigen::MatrixXd PolyMatrix::evaluate(double z_inverse) const {
  Eigen::MatrixXd m(rows_, cols_);
  for (int r = 0; r < rows_; ++r) {
    for (int c = 0; c < cols_; ++c) m(r, c) = (*this)(r, c).evaluate(z_inverse);
  }
  return m;
}

PolyMatrix& PolyMatrix::operator+=(const PolyMatrix& rhs) {
  if (rows_ != rhs.rows_ || cols_ != rhs.cols_) throw ShapeError("polynomial matrix sum shape");
  for (std::size_t i = 0; i < entries_.size(); ++i) entries_[i] += rhs.entries_[i];
  return *this;
}

PolyMatrix operator*(const PolyMatrix& a, const PolyMatrix& b) {
  if (a.cols_ != b.rows_) throw ShapeError("polynomial matrix product shape");
  PolyMatrix out(a.rows_, b.cols_);
  for (int r = 0; r < a.rows_; ++r) {
    for (int c = 0; c < b.cols_; ++c) {
      Poly acc;
      for (int k = 0; k < a.cols_; ++k) acc += a(r, k) * b(k, c);
      out(r, c) = acc;
    }
  }
  return out;
}

PolyMatrix operator*(const Poly& p, const PolyMatrix& m) {
  PolyMatrix out = m;
  for (auto& e : out.entries_) e = p * e;
  return out;
}

}  // namespace mfac
