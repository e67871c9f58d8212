#include "mfac/tracking.hpp"

#include <algorithm>
#include <ostream>
#include <string>

#include "mfac/controller.hpp"
#include "mfac/csv.hpp"

namespace mfac {

double TrackingLog::max_position_error() const {
  double m = 0.0;
  for (const auto& s : samples) m = std::max(m, s.position_error);
  return m;
}

double TrackingLog::max_orientation_error() const {
  double m = 0.0;
  for (const auto& s : samples) m = std::max(m, s.orientation_error);
  return m;
}

int TrackingLog::max_iterations() const {
  int m = 0;
  for (const auto& s : samples) m = std::max(m, s.iterations);
  return m;
}

void TrackingLog::write_csv(std::ostream& out) const {
  const Eigen::Index joints = samples.empty() ? 0 : samples.front().q.size();
  std::vector<std::string> header{"t"};
  for (const char* prefix : {"ref_", ""}) {
    for (const char* n : {"x", "y", "z", "alpha", "beta", "gamma"}) {
      header.push_back(std::string(prefix) + n);
    }
  }
  header.insert(header.end(), {"pos_err", "ori_err"});
  for (Eigen::Index j = 0; j < joints; ++j) header.push_back("q" + std::to_string(j + 1));
  for (int r = 0; r < 6; ++r) {
    for (Eigen::Index c = 0; c < joints; ++c) {
      header.push_back("J" + std::to_string(r + 1) + "_" + std::to_string(c + 1));
    }
  }
  header.insert(header.end(), {"cond", "lambda", "iters", "converged"});

  CsvWriter writer(out, "tracking", header);
  std::vector<double> row;
  for (const auto& s : samples) {
    row.assign({s.t});
    const Vector6 d = s.desired.as_vector();
    const Vector6 a = s.achieved.as_vector();
    row.insert(row.end(), d.data(), d.data() + 6);
    row.insert(row.end(), a.data(), a.data() + 6);
    row.push_back(s.position_error);
    row.push_back(s.orientation_error);
    row.insert(row.end(), s.q.data(), s.q.data() + s.q.size());
    for (int r = 0; r < 6; ++r) {
      for (Eigen::Index c = 0; c < joints; ++c) row.push_back(s.jacobian(r, c));
    }
    row.push_back(s.condition_number);
    row.push_back(s.lambda);
    row.push_back(s.iterations);
    row.push_back(s.converged ? 1.0 : 0.0);
    writer.row(row);
  }
}

namespace {

TrackingSample at_rest(const KinematicChain& chain, double t, const TaskVector& desired,
                       const Vector& q) {
  TrackingSample s;
  s.t = t;
  s.desired = desired;
  s.q = q;
  const Pose pose = forward_kinematics(chain, q);
  s.achieved = TaskVector::from_pose(pose);
  const Vector6 e = task_error(chain, q, desired.to_pose());
  s.position_error = e.head<3>().norm();
  s.orientation_error = e.tail<3>().norm();
  s.jacobian = task_jacobian(chain, q);
  s.condition_number = condition_number(s.jacobian);
  s.lambda = lambda_schedule(s.condition_number, 6).diagonal()[0];
  s.max_condition = s.condition_number;
  s.converged = s.position_error < kIkPositionTolerance &&
                s.orientation_error < kIkOrientationTolerance;
  return s;
}

}  // namespace

TrackingLog track_path(const KinematicChain& chain, const CartesianPath& path,
                       const Vector& q_start, int cap) {
  TrackingLog log;
  if (path.size() == 0) return log;
  log.samples.reserve(path.size());
  log.samples.push_back(at_rest(chain, path.t[0], path.samples[0], q_start));

  Vector q = q_start;
  for (std::size_t k = 1; k < path.size(); ++k) {
    const IKResult r = ik_solve(chain, q, path.samples[k].to_pose(), cap);
    q = r.q;
    TrackingSample s = at_rest(chain, path.t[k], path.samples[k], q);
    s.iterations = r.iterations;
    s.converged = r.converged;
    s.position_error = r.position_error;
    s.orientation_error = r.orientation_error;
    if (r.iterations > 0) {
      s.condition_number = r.condition_trace.back();
      s.lambda = r.lambda_trace.back();
      s.max_condition = r.max_condition;
    }
    s.lambda_trace = r.lambda_trace;
    log.samples.push_back(std::move(s));
  }
  return log;
}

std::vector<std::pair<double, double>> ill_conditioned_intervals(const TrackingLog& log,
                                                                 double threshold) {
  std::vector<std::pair<double, double>> out;
  bool open = false;
  for (const auto& s : log.samples) {
    const bool high = s.max_condition > threshold;
    if (high && !open) out.emplace_back(s.t, s.t);
    if (high) out.back().second = s.t;
    open = high;
  }
  return out;
}

}  // namespace mfac
