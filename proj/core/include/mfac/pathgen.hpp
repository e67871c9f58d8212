#pragma once

#include <array>
#include <iosfwd>
#include <vector>

#include <Eigen/Geometry>

#include "mfac/kinematics.hpp"

namespace mfac {

/// s(t) = Σ a_i tⁱ on [0, tf].
struct QuinticCoeffs {
  std::array<double, 6> a{};
  double tf = 1.0;
};

struct QuinticSample {
  double s = 0.0;
  double s_dot = 0.0;
  double s_ddot = 0.0;
};

/**
 * @brief Rest-style quintic from s(0) = 0 to s(tf) = s_goal.
 *
 * v0, acc0, vf, accf are the boundary speed and acceleration magnitudes.
 * Throws RangeError when tf <= 0.
 */
QuinticCoeffs quintic_solve(double s_goal, double v0, double acc0, double vf, double accf,
                            double tf);

/// Horner evaluation; t is clamped to [0, tf].
QuinticSample quintic_eval(const QuinticCoeffs& c, double t);

/// p0 + unit(pf − p0) · s. Throws DegenerateDirectionError for pf = p0 with s > 0.
Vector3 line_position(const Vector3& p0, const Vector3& pf, double s);

/// (e1, e2, e3) vector part, e4 scalar part; canonical sign e4 >= 0.
class UnitQuaternion {
 public:
  UnitQuaternion() = default;
  /// Normalizes and canonicalizes. Throws NumericError on a zero or non-finite input.
  UnitQuaternion(double e1, double e2, double e3, double e4);
  explicit UnitQuaternion(const Eigen::Quaterniond& q);

  double e1() const noexcept { return q_.x(); }
  double e2() const noexcept { return q_.y(); }
  double e3() const noexcept { return q_.z(); }
  double e4() const noexcept { return q_.w(); }
  const Eigen::Quaterniond& eigen() const noexcept { return q_; }
  Matrix3 rotation() const { return q_.toRotationMatrix(); }

 private:
  Eigen::Quaterniond q_ = Eigen::Quaterniond::Identity();
};

/// Half-angle products of the X-Y-Z Euler angles (same rotation as rotation_from_euler).
UnitQuaternion euler_to_quat(double alpha, double beta, double gamma);

/// atan2/asin extraction; the asin argument is clamped to [−1, 1].
Vector3 quat_to_euler(const UnitQuaternion& q);

/// q0 · (q0⁻¹ qf)^τ along the short arc. Returns q0 when the frames coincide.
UnitQuaternion quat_geodesic(const UnitQuaternion& q0, const UnitQuaternion& qf, double tau);

/// Rotation angle between the two frames, in [0, π].
double orientation_arc_length(const UnitQuaternion& q0, const UnitQuaternion& qf);

struct BoundaryRates {
  double initial_speed = 0.0;
  double initial_acceleration = 0.0;
  double final_speed = 0.0;
  double final_acceleration = 0.0;
};

struct PathSpec {
  TaskVector start;
  TaskVector goal;
  double tf = 10.0;
  double T0 = 1e-3;
  BoundaryRates position;
  BoundaryRates orientation;
};

struct CartesianPath {
  std::vector<double> t;
  std::vector<TaskVector> samples;
  /// Arc length along the line (mm) and the orientation arc (rad) at each sample.
  std::vector<double> s1;
  std::vector<double> s2;

  std::size_t size() const noexcept { return samples.size(); }
  /// Columns t, x, y, z, alpha, beta, gamma.
  void write_csv(std::ostream& out) const;
};

/**
 * @brief Straight line with quintic timing and geodesic orientation.
 *
 * Samples k = 0 … ⌈tf/T0⌉ at t = min(k T0, tf); the first and last samples
 * equal spec.start and spec.goal exactly.
 */
CartesianPath generate_path(const PathSpec& spec);

}  // namespace mfac
