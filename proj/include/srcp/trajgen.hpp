// Random joint-space reference trajectories: clamped cubic splines through
// uniformly sampled waypoints, resampled at the outer-loop period, checked
// against joint/velocity/acceleration limits.
#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "srcp/arm_sim.hpp"

namespace srcp {

struct TrajectoryPoint {
  Vec q, qd;
};

struct ReferenceTrajectory {
  std::vector<TrajectoryPoint> points;  // uniform dt spacing, >= 4 points
  double dt = 0.05;
  std::uint64_t id = 0;

  int n_joints() const { return points.empty() ? 0 : static_cast<int>(points.front().q.size()); }
  double duration() const { return dt * static_cast<double>(points.size() - 1); }
};

// One-dimensional clamped cubic spline (first derivatives pinned at both
// ends). C2 on [t.front(), t.back()].
class CubicSpline {
 public:
  static CubicSpline clamped(const Vec& t, const Vec& y, double v_start,
                             double v_end);
  double eval(double t) const;
  double deriv(double t) const;

 private:
  Vec t_, y_, m_;  // knot times, values, second derivatives
  int segment(double t) const;
};

struct TrajgenParams {
  double dt = 0.05;
  double duration_min = 3.0;
  double duration_max = 8.0;
  int intermediate_min = 1;
  int intermediate_max = 3;
  double waypoint_margin = 0.1;  // inset per side, fraction of joint range
  int max_retries = 200;
};

struct LimitCheck {
  bool ok = true;
  int index = -1;
  int joint = -1;
  enum class Quantity { Position, Velocity, Acceleration } quantity = Quantity::Position;
  double value = 0.0;

  std::string describe() const;
};

LimitCheck check_limits(const ReferenceTrajectory& traj, const JointLimits& limits);

// Spline through the given per-joint waypoints (n_joints x n_waypoints) at
// the given knot times, zero boundary velocity, resampled at dt.
ReferenceTrajectory trajectory_from_waypoints(const Mat& waypoints,
                                              const Vec& knot_times, double dt,
                                              std::uint64_t id);

// Samples waypoints until the resampled trajectory passes check_limits;
// throws after params.max_retries failures.
ReferenceTrajectory generate_random_trajectory(std::mt19937_64& rng,
                                               const JointLimits& limits,
                                               const TrajgenParams& params,
                                               std::uint64_t id);

std::vector<ReferenceTrajectory> build_corpus(std::mt19937_64& rng, int n,
                                              const JointLimits& limits,
                                              const TrajgenParams& params,
                                              std::uint64_t id_base);

void write_corpus_csv(const std::string& path,
                      const std::vector<ReferenceTrajectory>& corpus);
std::vector<ReferenceTrajectory> read_corpus_csv(const std::string& path,
                                                 double dt);

}  // namespace srcp
