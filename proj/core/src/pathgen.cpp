#include "mfac/pathgen.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "mfac/csv.hpp"
#include "mfac/errors.hpp"

namespace mfac {

QuinticCoeffs quintic_solve(double s_goal, double v0, double acc0, double vf, double accf,
                            double tf) {
  if (!(tf > 0.0) || !std::isfinite(tf)) throw RangeError("quintic duration must be positive");
  const double t2 = tf * tf;
  const double t3 = t2 * tf;
  QuinticCoeffs c;
  c.tf = tf;
  c.a[0] = 0.0;
  c.a[1] = v0;
  c.a[2] = acc0 / 2.0;
  c.a[3] = (20.0 * s_goal - (8.0 * vf + 12.0 * v0) * tf - (3.0 * acc0 - accf) * t2) / (2.0 * t3);
  c.a[4] = (-30.0 * s_goal + (14.0 * vf + 16.0 * v0) * tf + (3.0 * acc0 - 2.0 * accf) * t2) /
           (2.0 * t3 * tf);
  c.a[5] = (12.0 * s_goal - 6.0 * (vf + v0) * tf - (acc0 - accf) * t2) / (2.0 * t3 * t2);
  return c;
}

QuinticSample quintic_eval(const QuinticCoeffs& c, double t) {
  t = std::clamp(t, 0.0, c.tf);
  const auto& a = c.a;
  QuinticSample out;
  out.s = a[0] + t * (a[1] + t * (a[2] + t * (a[3] + t * (a[4] + t * a[5]))));
  out.s_dot = a[1] + t * (2.0 * a[2] + t * (3.0 * a[3] + t * (4.0 * a[4] + t * 5.0 * a[5])));
  out.s_ddot = 2.0 * a[2] + t * (6.0 * a[3] + t * (12.0 * a[4] + t * 20.0 * a[5]));
  return out;
}

Vector3 line_position(const Vector3& p0, const Vector3& pf, double s) {
  const Vector3 d = pf - p0;
  const double length = d.norm();
  if (s < 0.0 || s > length * (1.0 + 1e-12) + 1e-12) {
    if (length == 0.0 && s > 0.0) {
      throw DegenerateDirectionError("line has no direction but arc length is nonzero");
    }
    throw RangeError("arc length outside [0, |pf - p0|]");
  }
  if (s == 0.0) return p0;
  return p0 + d / length * s;
}

UnitQuaternion::UnitQuaternion(double e1, double e2, double e3, double e4)
    : UnitQuaternion(Eigen::Quaterniond(e4, e1, e2, e3)) {}

UnitQuaternion::UnitQuaternion(const Eigen::Quaterniond& q) : q_(q) {
  const double n = q_.norm();
  if (!(n > 0.0) || !std::isfinite(n)) throw NumericError("quaternion cannot be normalized");
  q_.coeffs() /= n;
  if (q_.w() < 0.0) q_.coeffs() = -q_.coeffs();
}

UnitQuaternion euler_to_quat(double alpha, double beta, double gamma) {
  const double ca = std::cos(alpha / 2), sa = std::sin(alpha / 2);
  const double cb = std::cos(beta / 2), sb = std::sin(beta / 2);
  const double cg = std::cos(gamma / 2), sg = std::sin(gamma / 2);
  return UnitQuaternion(sa * cb * cg - ca * sb * sg, ca * sb * cg + sa * cb * sg,
                        ca * cb * sg - sa * sb * cg, ca * cb * cg + sa * sb * sg);
}

Vector3 quat_to_euler(const UnitQuaternion& q) {
  const double e1 = q.e1(), e2 = q.e2(), e3 = q.e3(), e4 = q.e4();
  const double alpha = std::atan2(2.0 * (e4 * e1 + e2 * e3), 1.0 - 2.0 * (e1 * e1 + e2 * e2));
  const double beta = std::asin(std::clamp(2.0 * (e4 * e2 - e3 * e1), -1.0, 1.0));
  const double gamma = std::atan2(2.0 * (e4 * e3 + e1 * e2), 1.0 - 2.0 * (e2 * e2 + e3 * e3));
  return Vector3(alpha, beta, gamma);
}

namespace {

/// q0⁻¹ qf on the short arc, and its half angle.
std::pair<Eigen::Quaterniond, double> relative(const UnitQuaternion& q0,
                                               const UnitQuaternion& qf) {
  Eigen::Quaterniond r = q0.eigen().conjugate() * qf.eigen();
  if (r.w() < 0.0) r.coeffs() = -r.coeffs();
  return {r, std::atan2(r.vec().norm(), r.w())};
}

}  // namespace

UnitQuaternion quat_geodesic(const UnitQuaternion& q0, const UnitQuaternion& qf, double tau) {
  const auto [r, a] = relative(q0, qf);
  if (a < 1e-8) return q0;
  Eigen::Quaterniond p;
  p.vec() = r.vec() * (std::sin(a * tau) / std::sin(a));
  p.w() = std::cos(a * tau);
  return UnitQuaternion(q0.eigen() * p);
}

double orientation_arc_length(const UnitQuaternion& q0, const UnitQuaternion& qf) {
  return 2.0 * relative(q0, qf).second;
}

void CartesianPath::write_csv(std::ostream& out) const {
  CsvWriter writer(out, "path", {"t", "x", "y", "z", "alpha", "beta", "gamma"});
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    writer.row({t[i], s.x, s.y, s.z, s.alpha, s.beta, s.gamma});
  }
}

CartesianPath generate_path(const PathSpec& spec) {
  if (!(spec.T0 > 0.0) || !(spec.T0 <= spec.tf)) throw RangeError("need 0 < T0 <= tf");
  const Vector3 p0(spec.start.x, spec.start.y, spec.start.z);
  const Vector3 pf(spec.goal.x, spec.goal.y, spec.goal.z);
  const UnitQuaternion q0 = euler_to_quat(spec.start.alpha, spec.start.beta, spec.start.gamma);
  const UnitQuaternion qf = euler_to_quat(spec.goal.alpha, spec.goal.beta, spec.goal.gamma);
  const double length = (pf - p0).norm();
  const double arc = orientation_arc_length(q0, qf);
  if (length == 0.0 && arc < 1e-8) throw DegenerateDirectionError("start and goal coincide");

  const auto& bp = spec.position;
  const auto& bo = spec.orientation;
  const QuinticCoeffs s1 = quintic_solve(length, bp.initial_speed, bp.initial_acceleration,
                                         bp.final_speed, bp.final_acceleration, spec.tf);
  const QuinticCoeffs s2 = quintic_solve(arc, bo.initial_speed, bo.initial_acceleration,
                                         bo.final_speed, bo.final_acceleration, spec.tf);

  const auto n = static_cast<long>(std::ceil(spec.tf / spec.T0 - 1e-9));
  CartesianPath path;
  path.t.reserve(static_cast<std::size_t>(n + 1));
  path.samples.reserve(static_cast<std::size_t>(n + 1));
  for (long k = 0; k <= n; ++k) {
    const double t = k == n ? spec.tf : std::min(static_cast<double>(k) * spec.T0, spec.tf);
    const double a = quintic_eval(s1, t).s;
    const double b = quintic_eval(s2, t).s;
    TaskVector v;
    if (k == 0) {
      v = spec.start;
    } else if (k == n) {
      v = spec.goal;
    } else {
      const Vector3 p = line_position(p0, pf, a);
      const double tau = arc < 1e-8 ? 0.0 : b / arc;
      const Vector3 e = quat_to_euler(quat_geodesic(q0, qf, tau));
      v = TaskVector{p.x(), p.y(), p.z(), e[0], e[1], e[2]};
    }
    path.t.push_back(t);
    path.samples.push_back(v);
    path.s1.push_back(a);
    path.s2.push_back(b);
  }
  return path;
}

}  // namespace mfac
