#include "mfac/kinematics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>

#include "mfac/controller.hpp"
#include "mfac/csv.hpp"
#include "mfac/errors.hpp"

namespace mfac {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

Matrix3 rot_x(double a) {
  return Eigen::AngleAxisd(a, Vector3::UnitX()).toRotationMatrix();
}

Matrix3 rot_z(double a) {
  return Eigen::AngleAxisd(a, Vector3::UnitZ()).toRotationMatrix();
}

bool is_rotation(const Matrix3& r, double tol) {
  return r.allFinite() && (r.transpose() * r - Matrix3::Identity()).cwiseAbs().maxCoeff() <= tol &&
         std::abs(r.determinant() - 1.0) <= tol;
}

}  // namespace

Eigen::Matrix4d Pose::homogeneous() const {
  Eigen::Matrix4d t = Eigen::Matrix4d::Identity();
  t.topLeftCorner<3, 3>() = rotation;
  t.topRightCorner<3, 1>() = position;
  return t;
}

Pose Pose::operator*(const Pose& rhs) const {
  return Pose{rotation * rhs.rotation, rotation * rhs.position + position};
}

bool Pose::valid(double tol) const { return position.allFinite() && is_rotation(rotation, tol); }

Vector6 TaskVector::as_vector() const {
  Vector6 v;
  v << x, y, z, alpha, beta, gamma;
  return v;
}

TaskVector TaskVector::from_pose(const Pose& pose) {
  const Vector3 e = euler_from_rotation(pose.rotation);
  return TaskVector{pose.position.x(), pose.position.y(), pose.position.z(), e[0], e[1], e[2]};
}

Pose TaskVector::to_pose() const {
  return Pose{rotation_from_euler(alpha, beta, gamma), Vector3(x, y, z)};
}

KinematicChain::KinematicChain(std::vector<DHRow> rows) : rows_(std::move(rows)) {
  for (const auto& r : rows_) {
    if (!std::isfinite(r.alpha_prev) || !std::isfinite(r.a_prev) || !std::isfinite(r.d) ||
        !std::isfinite(r.theta_offset)) {
      throw NumericError("non-finite DH parameter in row '" + r.label + "'");
    }
    if (r.kind == JointKind::revolute) ++joints_;
  }
}

KinematicChain KinematicChain::table_one() {
  const auto rev = JointKind::revolute;
  const auto fix = JointKind::fixed;
  return KinematicChain({
      {0.0, 0.0, 342.0, 0.0, fix, "Base"},
      {0.0, 0.0, 0.0, 0.0, rev, "1"},
      {-90.0 * kDeg, 40.0, 0.0, 0.0, rev, "2"},
      {0.0, 275.0, 0.0, 0.0, rev, "3"},
      {-90.0 * kDeg, 25.0, 280.0, 0.0, rev, "4"},
      {90.0 * kDeg, 0.0, 0.0, 0.0, rev, "5"},
      {-90.0 * kDeg, 0.0, 0.0, 0.0, rev, "6"},
      {0.0, 0.0, 73.0, 0.0, fix, "Tool"},
  });
}

namespace {

double parse_double(const std::string& s, int line) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || !std::isfinite(v)) {
    throw ShapeError("chain table line " + std::to_string(line) + ": bad number '" + s + "'");
  }
  return v;
}

}  // namespace

KinematicChain KinematicChain::parse(std::istream& in) {
  std::vector<DHRow> rows;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ss(line);
    std::vector<std::string> fields;
    for (std::string f; ss >> f;) fields.push_back(f);
    if (fields.empty()) continue;
    if (fields.size() != 5) {
      throw ShapeError("chain table line " + std::to_string(number) + ": expected 5 columns");
    }
    DHRow row;
    row.label = fields[0];
    row.alpha_prev = parse_double(fields[1], number) * kDeg;
    row.a_prev = parse_double(fields[2], number);
    row.d = parse_double(fields[3], number);
    const std::string& q = fields[4];
    if (!q.empty() && q[0] == 'q') {
      row.kind = JointKind::revolute;
      const auto sign = q.find_first_of("+-");
      if (sign != std::string::npos) row.theta_offset = parse_double(q.substr(sign), number) * kDeg;
    } else {
      row.kind = JointKind::fixed;
      row.theta_offset = parse_double(q, number) * kDeg;
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ShapeError("chain table has no rows");
  return KinematicChain(std::move(rows));
}

KinematicChain KinematicChain::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open chain table " + path.string());
  return parse(in);
}

void KinematicChain::write(std::ostream& out) const {
  auto deg = [](double rad) {
    const double d = rad / kDeg;
    return std::abs(d - std::round(d)) < 1e-9 ? std::round(d) + 0.0 : d;
  };
  out << "# label alpha_prev/deg a_prev/mm d/mm q\n";
  for (const auto& r : rows_) {
    out << r.label << ' ' << format_number(deg(r.alpha_prev)) << ' ' << format_number(r.a_prev)
        << ' ' << format_number(r.d) << ' ';
    if (r.kind == JointKind::fixed) {
      out << format_number(deg(r.theta_offset));
    } else if (r.theta_offset == 0.0) {
      out << 'q';
    } else {
      const double off = deg(r.theta_offset);
      out << 'q' << (off > 0 ? "+" : "") << format_number(off);
    }
    out << '\n';
  }
}

Pose dh_transform(const DHRow& row, double q) {
  const double theta = row.kind == JointKind::revolute ? q + row.theta_offset : row.theta_offset;
  const Matrix3 rx = rot_x(row.alpha_prev);
  const Matrix3 rz = rot_z(theta);
  Pose p;
  p.rotation = rx * rz;
  p.position = rx * (Vector3(row.a_prev, 0.0, 0.0) + rz * Vector3(0.0, 0.0, row.d));
  return p;
}

Pose forward_kinematics(const KinematicChain& chain, const Vector& q) {
  if (q.size() != chain.joint_count()) {
    throw ShapeError("joint vector has " + std::to_string(q.size()) + " entries, chain has " +
                     std::to_string(chain.joint_count()) + " joints");
  }
  Pose pose;
  int j = 0;
  for (const auto& row : chain.rows()) {
    const double angle = row.kind == JointKind::revolute ? q[j++] : 0.0;
    pose = pose * dh_transform(row, angle);
  }
  return pose;
}

Matrix3 rotation_from_euler(double alpha, double beta, double gamma) {
  const double ca = std::cos(alpha), sa = std::sin(alpha);
  const double cb = std::cos(beta), sb = std::sin(beta);
  const double cg = std::cos(gamma), sg = std::sin(gamma);
  Matrix3 t;
  t(0, 0) = cb * cg;
  t(0, 1) = cg * sa * sb - ca * sg;
  t(0, 2) = sa * sg + ca * cg * sb;
  t(1, 0) = cb * sg;
  t(1, 1) = ca * cg + sa * sg * sb;
  t(1, 2) = ca * sb * sg - cg * sa;
  t(2, 0) = -sb;
  t(2, 1) = cb * sa;
  t(2, 2) = ca * cb;
  return t;
}

Vector3 euler_from_rotation(const Matrix3& r) {
  if (!is_rotation(r, 1e-6)) throw ValidityError("matrix is not a rotation");
  const double t31 = std::clamp(r(2, 0), -1.0, 1.0);
  const double beta = -std::asin(t31);
  if (std::abs(t31) >= 1.0 - 1e-9) {
    const double alpha = t31 < 0.0 ? std::atan2(r(0, 1), r(0, 2)) : std::atan2(-r(0, 1), -r(0, 2));
    return Vector3(alpha, t31 < 0.0 ? std::numbers::pi / 2 : -std::numbers::pi / 2, 0.0);
  }
  return Vector3(std::atan2(r(2, 1), r(2, 2)), beta, std::atan2(r(1, 0), r(0, 0)));
}

Vector3 angle_axis_error(const Matrix3& desired, const Matrix3& current) {
  if (!is_rotation(desired, 1e-6) || !is_rotation(current, 1e-6)) {
    throw ValidityError("angle-axis error needs two rotations");
  }
  const Matrix3 d = desired * current.transpose();
  const Vector3 skew(d(2, 1) - d(1, 2), d(0, 2) - d(2, 0), d(1, 0) - d(0, 1));
  const double c = std::clamp((d.trace() - 1.0) / 2.0, -1.0, 1.0);
  // Same angle as acos(c), without the loss of precision near 0 and π.
  const double theta = std::atan2(0.5 * skew.norm(), c);
  if (theta < 1e-8) return Vector3::Zero();
  if (theta > 0.75 * std::numbers::pi) {
    // Symmetric part: (1 - cos θ) K Kᵀ.
    const Matrix3 s = 0.5 * (d + d.transpose()) - c * Matrix3::Identity();
    Eigen::Index col = 0;
    s.diagonal().maxCoeff(&col);
    Vector3 axis = s.col(col).normalized();
    if (axis.dot(skew) < 0.0) axis = -axis;
    return axis * theta;
  }
  return skew * (theta / (2.0 * std::sin(theta)));
}

Matrix task_jacobian(const KinematicChain& chain, const Vector& q) {
  constexpr double h = 1e-6;
  const int n = chain.joint_count();
  Matrix j(6, n);
  for (int c = 0; c < n; ++c) {
    Vector qp = q;
    Vector qm = q;
    qp[c] += h;
    qm[c] -= h;
    const Pose pp = forward_kinematics(chain, qp);
    const Pose pm = forward_kinematics(chain, qm);
    j.col(c).head<3>() = (pp.position - pm.position) / (2.0 * h);
    j.col(c).tail<3>() = angle_axis_error(pp.rotation, pm.rotation) / (2.0 * h);
  }
  return j;
}

Vector6 task_error(const KinematicChain& chain, const Vector& q, const Pose& target) {
  const Pose now = forward_kinematics(chain, q);
  Vector6 e;
  e.head<3>() = target.position - now.position;
  e.tail<3>() = angle_axis_error(target.rotation, now.rotation);
  return e;
}

IKStep ik_step(const KinematicChain& chain, const Vector& q, const Pose& target) {
  const Matrix j = task_jacobian(chain, q);
  const Vector6 e = task_error(chain, q, target);
  IKStep step;
  step.condition_number = condition_number(j);
  const Weighting lambda = lambda_schedule(step.condition_number, chain.joint_count());
  step.lambda = lambda.diagonal()[0];
  step.delta_q = solve_damped(j, lambda.diagonal(), e);
  if (!step.delta_q.allFinite()) throw NumericError("non-finite joint increment");
  return step;
}

IKResult ik_solve(const KinematicChain& chain, const Vector& q_seed, const Pose& target, int cap) {
  if (cap < 1) throw RangeError("iteration cap must be positive");
  IKResult result;
  result.q = q_seed;
  auto measure = [&] {
    const Vector6 e = task_error(chain, result.q, target);
    result.position_error = e.head<3>().norm();
    result.orientation_error = e.tail<3>().norm();
    result.converged = result.position_error < kIkPositionTolerance &&
                       result.orientation_error < kIkOrientationTolerance;
  };
  measure();
  while (!result.converged && result.iterations < cap) {
    const IKStep step = ik_step(chain, result.q, target);
    result.q += step.delta_q;
    ++result.iterations;
    result.lambda_trace.push_back(step.lambda);
    result.condition_trace.push_back(step.condition_number);
    result.max_condition = std::max(result.max_condition, step.condition_number);
    measure();
  }
  return result;
}

}  // namespace mfac
