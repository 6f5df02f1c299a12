#include "srcp/trajgen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "srcp/csv.hpp"

namespace srcp {

CubicSpline CubicSpline::clamped(const Vec& t, const Vec& y, double v_start,
                                 double v_end) {
  const Eigen::Index n = t.size();
  if (n < 2 || y.size() != n) throw std::invalid_argument("spline: need >= 2 knots");
  for (Eigen::Index i = 0; i + 1 < n; ++i)
    if (!(t(i + 1) > t(i))) throw std::invalid_argument("spline: knots not increasing");

  // Solve for second derivatives with clamped boundary conditions.
  Mat A = Mat::Zero(n, n);
  Vec rhs = Vec::Zero(n);
  const double h0 = t(1) - t(0);
  A(0, 0) = 2.0 * h0;
  A(0, 1) = h0;
  rhs(0) = 6.0 * ((y(1) - y(0)) / h0 - v_start);
  for (Eigen::Index i = 1; i + 1 < n; ++i) {
    const double hl = t(i) - t(i - 1);
    const double hr = t(i + 1) - t(i);
    A(i, i - 1) = hl;
    A(i, i) = 2.0 * (hl + hr);
    A(i, i + 1) = hr;
    rhs(i) = 6.0 * ((y(i + 1) - y(i)) / hr - (y(i) - y(i - 1)) / hl);
  }
  const double hn = t(n - 1) - t(n - 2);
  A(n - 1, n - 2) = hn;
  A(n - 1, n - 1) = 2.0 * hn;
  rhs(n - 1) = 6.0 * (v_end - (y(n - 1) - y(n - 2)) / hn);

  CubicSpline s;
  s.t_ = t;
  s.y_ = y;
  s.m_ = A.partialPivLu().solve(rhs);
  return s;
}

int CubicSpline::segment(double t) const {
  const Eigen::Index n = t_.size();
  if (t <= t_(0)) return 0;
  if (t >= t_(n - 1)) return static_cast<int>(n) - 2;
  int lo = 0, hi = static_cast<int>(n) - 1;
  while (hi - lo > 1) {
    const int mid = (lo + hi) / 2;
    (t_(mid) <= t ? lo : hi) = mid;
  }
  return lo;
}

double CubicSpline::eval(double t) const {
  const int i = segment(t);
  const double h = t_(i + 1) - t_(i);
  const double a = (t_(i + 1) - t) / h;
  const double b = (t - t_(i)) / h;
  return a * y_(i) + b * y_(i + 1) +
         ((a * a * a - a) * m_(i) + (b * b * b - b) * m_(i + 1)) * h * h / 6.0;
}

double CubicSpline::deriv(double t) const {
  const int i = segment(t);
  const double h = t_(i + 1) - t_(i);
  const double a = (t_(i + 1) - t) / h;
  const double b = (t - t_(i)) / h;
  return (y_(i + 1) - y_(i)) / h +
         ((3.0 * b * b - 1.0) * m_(i + 1) - (3.0 * a * a - 1.0) * m_(i)) * h / 6.0;
}

std::string LimitCheck::describe() const {
  if (ok) return "ok";
  const char* what = quantity == Quantity::Position   ? "position"
                     : quantity == Quantity::Velocity ? "velocity"
                                                      : "acceleration";
  return std::string(what) + " limit violated at index " + std::to_string(index) +
         ", joint " + std::to_string(joint) + ", value " + g17(value);
}

LimitCheck check_limits(const ReferenceTrajectory& traj, const JointLimits& limits) {
  LimitCheck res;
  const int n = traj.n_joints();
  const auto& pts = traj.points;
  const double dt = traj.dt;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (int j = 0; j < n; ++j) {
      const double q = pts[i].q(j);
      if (q < limits.q_min(j) || q > limits.q_max(j)) {
        res.ok = false;
        res.index = static_cast<int>(i);
        res.joint = j;
        res.quantity = LimitCheck::Quantity::Position;
        res.value = q;
        return res;
      }
    }
  }
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    for (int j = 0; j < n; ++j) {
      const double v = (pts[i + 1].q(j) - pts[i].q(j)) / dt;
      if (std::abs(v) > limits.qd_lim(j)) {
        res.ok = false;
        res.index = static_cast<int>(i);
        res.joint = j;
        res.quantity = LimitCheck::Quantity::Velocity;
        res.value = v;
        return res;
      }
    }
  }
  for (std::size_t i = 0; i + 2 < pts.size(); ++i) {
    for (int j = 0; j < n; ++j) {
      const double a =
          (pts[i + 2].q(j) - 2.0 * pts[i + 1].q(j) + pts[i].q(j)) / (dt * dt);
      if (std::abs(a) > limits.qdd_lim(j)) {
        res.ok = false;
        res.index = static_cast<int>(i);
        res.joint = j;
        res.quantity = LimitCheck::Quantity::Acceleration;
        res.value = a;
        return res;
      }
    }
  }
  return res;
}

ReferenceTrajectory trajectory_from_waypoints(const Mat& waypoints,
                                              const Vec& knot_times, double dt,
                                              std::uint64_t id) {
  const int n = static_cast<int>(waypoints.rows());
  if (waypoints.cols() != knot_times.size())
    throw std::invalid_argument("trajectory: waypoint/knot count mismatch");
  std::vector<CubicSpline> splines;
  splines.reserve(n);
  for (int j = 0; j < n; ++j)
    splines.push_back(
        CubicSpline::clamped(knot_times, waypoints.row(j).transpose(), 0.0, 0.0));

  const double duration = knot_times(knot_times.size() - 1) - knot_times(0);
  const int steps = static_cast<int>(std::lround(duration / dt));
  ReferenceTrajectory traj;
  traj.dt = dt;
  traj.id = id;
  traj.points.resize(static_cast<std::size_t>(steps) + 1);
  for (int i = 0; i <= steps; ++i) {
    const double t = knot_times(0) + i * dt;
    TrajectoryPoint& pt = traj.points[static_cast<std::size_t>(i)];
    pt.q.resize(n);
    pt.qd.resize(n);
    for (int j = 0; j < n; ++j) {
      pt.q(j) = splines[static_cast<std::size_t>(j)].eval(t);
      pt.qd(j) = splines[static_cast<std::size_t>(j)].deriv(t);
    }
  }
  // The clamped boundary pins these to zero analytically; remove the solver's
  // last-bit residue so the boundary contract is exact.
  traj.points.front().qd.setZero();
  traj.points.back().qd.setZero();
  return traj;
}

ReferenceTrajectory generate_random_trajectory(std::mt19937_64& rng,
                                               const JointLimits& limits,
                                               const TrajgenParams& params,
                                               std::uint64_t id) {
  const int n = static_cast<int>(limits.q_min.size());
  std::uniform_real_distribution<double> dur(params.duration_min, params.duration_max);
  std::uniform_int_distribution<int> n_mid(params.intermediate_min, params.intermediate_max);

  for (int attempt = 0; attempt < params.max_retries; ++attempt) {
    const double duration = dur(rng);
    const int k = 2 + n_mid(rng);
    Vec knot_times(k);
    for (int i = 0; i < k; ++i)
      knot_times(i) = duration * static_cast<double>(i) / (k - 1);
    Mat waypoints(n, k);
    for (int j = 0; j < n; ++j) {
      const double range = limits.q_max(j) - limits.q_min(j);
      const double lo = limits.q_min(j) + params.waypoint_margin * range;
      const double hi = limits.q_max(j) - params.waypoint_margin * range;
      std::uniform_real_distribution<double> box(lo, hi);
      for (int i = 0; i < k; ++i) waypoints(j, i) = box(rng);
    }
    ReferenceTrajectory traj = trajectory_from_waypoints(waypoints, knot_times,
                                                         params.dt, id);
    if (traj.points.size() >= 4 && check_limits(traj, limits).ok) return traj;
  }
  throw std::runtime_error(
      "trajectory generation exhausted retries (limits too tight for the "
      "waypoint box)");
}

std::vector<ReferenceTrajectory> build_corpus(std::mt19937_64& rng, int n,
                                              const JointLimits& limits,
                                              const TrajgenParams& params,
                                              std::uint64_t id_base) {
  if (n < 1) throw std::invalid_argument("corpus: n must be >= 1");
  std::vector<ReferenceTrajectory> corpus;
  corpus.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    corpus.push_back(generate_random_trajectory(
        rng, limits, params, id_base + static_cast<std::uint64_t>(i)));
  return corpus;
}

void write_corpus_csv(const std::string& path,
                      const std::vector<ReferenceTrajectory>& corpus) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  const int n = corpus.empty() ? 0 : corpus.front().n_joints();
  out << "trajectory_id,index";
  for (int j = 0; j < n; ++j) out << ",q_" << j;
  for (int j = 0; j < n; ++j) out << ",qd_" << j;
  out << "\n";
  for (const auto& traj : corpus) {
    for (std::size_t i = 0; i < traj.points.size(); ++i) {
      out << traj.id << "," << i;
      for (int j = 0; j < n; ++j) out << "," << g17(traj.points[i].q(j));
      for (int j = 0; j < n; ++j) out << "," << g17(traj.points[i].qd(j));
      out << "\n";
    }
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::vector<ReferenceTrajectory> read_corpus_csv(const std::string& path,
                                                 double dt) {
  const auto lines = read_lines(path);
  if (lines.empty()) throw std::runtime_error("empty corpus file " + path);
  const auto header = csv_split(lines[0]);
  if (header.size() < 4 || header[0] != "trajectory_id" || header[1] != "index")
    throw std::runtime_error("bad corpus header in " + path);
  const int n = static_cast<int>((header.size() - 2) / 2);

  std::vector<ReferenceTrajectory> corpus;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    if (lines[li].empty()) continue;
    const auto f = csv_split(lines[li]);
    if (f.size() != header.size())
      throw std::runtime_error("ragged corpus row " + std::to_string(li));
    const auto id = static_cast<std::uint64_t>(parse_int(f[0]));
    const auto index = parse_int(f[1]);
    if (corpus.empty() || corpus.back().id != id) {
      if (index != 0)
        throw std::runtime_error("corpus rows for id " + std::to_string(id) +
                                 " do not start at index 0");
      corpus.emplace_back();
      corpus.back().id = id;
      corpus.back().dt = dt;
    }
    auto& traj = corpus.back();
    if (static_cast<std::size_t>(index) != traj.points.size())
      throw std::runtime_error("non-contiguous index in corpus id " +
                               std::to_string(id));
    TrajectoryPoint pt;
    pt.q.resize(n);
    pt.qd.resize(n);
    for (int j = 0; j < n; ++j) pt.q(j) = parse_double(f[static_cast<std::size_t>(2 + j)]);
    for (int j = 0; j < n; ++j)
      pt.qd(j) = parse_double(f[static_cast<std::size_t>(2 + n + j)]);
    traj.points.push_back(std::move(pt));
  }
  return corpus;
}

}  // namespace srcp
