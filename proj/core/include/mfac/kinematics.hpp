#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mfac/edlm.hpp"

namespace mfac {

using Matrix3 = Eigen::Matrix3d;
using Vector3 = Eigen::Vector3d;
using Vector6 = Eigen::Matrix<double, 6, 1>;

enum class JointKind { revolute, fixed };

/// One modified-DH row: link twist and length of the previous link, offset, joint angle offset.
struct DHRow {
  double alpha_prev = 0.0;  ///< rad
  double a_prev = 0.0;      ///< mm
  double d = 0.0;           ///< mm
  double theta_offset = 0.0;
  JointKind kind = JointKind::revolute;
  std::string label;
};

struct Pose {
  Matrix3 rotation = Matrix3::Identity();
  Vector3 position = Vector3::Zero();

  Eigen::Matrix4d homogeneous() const;
  Pose operator*(const Pose& rhs) const;
  /// RᵀR = I and det R = 1 within `tol`.
  bool valid(double tol = 1e-10) const;
};

/// Position (mm) and X-Y-Z Euler angles (rad).
struct TaskVector {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;

  Vector6 as_vector() const;
  static TaskVector from_pose(const Pose& pose);
  Pose to_pose() const;
};

class KinematicChain {
 public:
  explicit KinematicChain(std::vector<DHRow> rows);

  /// The six-axis arm: base offset 342 mm, tool offset 73 mm.
  static KinematicChain table_one();

  /**
   * Whitespace-separated rows "label alpha_deg a_mm d_mm q". The q column is
   * either a number (fixed row, degrees) or "q", optionally followed by a
   * signed offset in degrees ("q+90"). '#' starts a comment.
   */
  static KinematicChain parse(std::istream& in);
  static KinematicChain load(const std::filesystem::path& path);
  /// Writes the table in the format read by parse (degrees and mm).
  void write(std::ostream& out) const;

  const std::vector<DHRow>& rows() const noexcept { return rows_; }
  int joint_count() const noexcept { return joints_; }

 private:
  std::vector<DHRow> rows_;
  int joints_ = 0;
};

/// RotX(α) · TransX(a) · RotZ(q + offset) · TransZ(d); fixed rows ignore q.
Pose dh_transform(const DHRow& row, double q);

Pose forward_kinematics(const KinematicChain& chain, const Vector& q);

/// R = Rz(γ) Ry(β) Rx(α), entry by entry.
Matrix3 rotation_from_euler(double alpha, double beta, double gamma);

/**
 * @brief Inverse of rotation_from_euler on β ∈ [−π/2, π/2].
 *
 * At gimbal lock (|t31| >= 1 − 1e-9) γ is set to 0 and α carries the free angle.
 * Throws ValidityError when R is not a rotation (1e-6 tolerance).
 */
Vector3 euler_from_rotation(const Matrix3& r);

/**
 * @brief K̂θ of D = A_desired · A_currentᵀ.
 *
 * Zero for θ < 1e-8. Above 3π/4 the axis comes from the symmetric part of D
 * and the sign from its skew part.
 */
Vector3 angle_axis_error(const Matrix3& desired, const Matrix3& current);

/// Central differences (1e-6 rad) of [position; orientation] with respect to q.
Matrix task_jacobian(const KinematicChain& chain, const Vector& q);

/// [p* − p(q); angle_axis_error(A*, A(q))].
Vector6 task_error(const KinematicChain& chain, const Vector& q, const Pose& target);

struct IKStep {
  Vector delta_q;
  double condition_number = 1.0;
  double lambda = 0.0;
};

/// One damped least-squares correction with λ picked from cond(Φ).
IKStep ik_step(const KinematicChain& chain, const Vector& q, const Pose& target);

struct IKResult {
  Vector q;
  int iterations = 0;
  bool converged = false;
  double max_condition = 0.0;
  std::vector<double> lambda_trace;
  std::vector<double> condition_trace;
  double position_error = 0.0;     ///< mm
  double orientation_error = 0.0;  ///< rad
};

inline constexpr double kIkPositionTolerance = 1e-3;
inline constexpr double kIkOrientationTolerance = 1e-6;

/// Iterates ik_step until both error norms are under tolerance or `cap` steps elapse.
IKResult ik_solve(const KinematicChain& chain, const Vector& q_seed, const Pose& target,
                  int cap = 30);

}  // namespace mfac
