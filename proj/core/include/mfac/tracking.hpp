#pragma once

#include <iosfwd>
#include <vector>

#include "mfac/kinematics.hpp"
#include "mfac/pathgen.hpp"

namespace mfac {

/// Per-sample outcome of following a Cartesian path with ik_solve.
struct TrackingSample {
  double t = 0.0;
  TaskVector desired;
  TaskVector achieved;
  Vector q;
  Matrix jacobian;
  double position_error = 0.0;
  double orientation_error = 0.0;
  /// Values of the last iteration; the final pose's when no iteration ran.
  double condition_number = 0.0;
  double lambda = 0.0;
  double max_condition = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> lambda_trace;
};

struct TrackingLog {
  std::vector<TrackingSample> samples;

  double max_position_error() const;
  double max_orientation_error() const;
  int max_iterations() const;
  /// Columns: t, desired and achieved task vectors, errors, q, Jacobian, cond, lambda, iters.
  void write_csv(std::ostream& out) const;
};

/**
 * @brief Solves IK at every path sample after the first, seeding with the previous solution.
 *
 * Sample 0 holds q_start unchanged.
 */
TrackingLog track_path(const KinematicChain& chain, const CartesianPath& path,
                       const Vector& q_start, int cap = 30);

/// Time intervals during which max_condition exceeds `threshold`.
std::vector<std::pair<double, double>> ill_conditioned_intervals(const TrackingLog& log,
                                                                 double threshold);

}  // namespace mfac
