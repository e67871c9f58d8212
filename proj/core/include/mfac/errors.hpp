#pragma once

#include <stdexcept>
#include <string>

namespace mfac {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Vector or matrix dimensions do not agree with the declared layout.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// A model evaluation or linear solve produced a non-finite value.
class NumericError : public Error {
 public:
  NumericError(const std::string& what, long argument_index = -1);

  /// Index of the model argument being perturbed when the failure happened, or -1.
  long argument_index() const noexcept { return argument_index_; }

 private:
  long argument_index_;
};

/// The leading input block cannot reach every output (lambda = 0 case).
class RankDeficiencyError : public Error {
 public:
  RankDeficiencyError(long rank, long required);

  long rank() const noexcept { return rank_; }
  long required() const noexcept { return required_; }

 private:
  long rank_;
  long required_;
};

class ConstraintError : public Error {
 public:
  using Error::Error;
};

class RangeError : public Error {
 public:
  using Error::Error;
};

/// Closed loop is not strictly stable, so a static-error limit does not exist.
class StabilityError : public Error {
 public:
  using Error::Error;
};

class SingularityError : public Error {
 public:
  using Error::Error;
};

/// det T(z^-1) vanished identically.
class DegenerateLoopError : public Error {
 public:
  using Error::Error;
};

/// A rotation matrix failed the orthonormality / determinant check.
class ValidityError : public Error {
 public:
  using Error::Error;
};

class DegenerateDirectionError : public Error {
 public:
  using Error::Error;
};

}  // namespace mfac
