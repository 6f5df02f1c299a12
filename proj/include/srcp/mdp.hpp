// The RL-facing layer over the plant: action bounds and low-pass filtering,
// reference correction with limit clipping, the tracking reward, error
// scaling statistics, and assembly of the policy's state vector.
#pragma once

#include <vector>

#include "srcp/trajgen.hpp"

namespace srcp {

struct Action {
  Vec a_q;  // position correction, rad
  Vec a_v;  // velocity correction, rad/s

  static Action zero(int n) { return {Vec::Zero(n), Vec::Zero(n)}; }
};

struct ActionBounds {
  Vec a_max_q, a_max_v;  // per joint, strictly positive

  int n_joints() const { return static_cast<int>(a_max_q.size()); }
};

// a_max = 0.95 * rate_limit * dt / 2: two consecutive extreme corrections
// stay inside the corresponding rate limit.
ActionBounds compute_action_bounds(const JointLimits& limits, double dt);

// First-order exponential IIR, one state per action dimension, DC gain 1.
struct FilterState {
  Vec prev_q, prev_v;
  double alpha = 1.0;

  static double alpha_for_cutoff(double cutoff_hz, double dt);
  static FilterState make(int n, double cutoff_hz, double dt);
  void reset();
};

struct CorrectedPoint {
  Vec q_f, qd_f;
  Vec a_filt_q, a_filt_v;  // post-filter corrections, for logging
};

// Filters the raw correction, adds it to the next reference point, then
// clips: implied velocity against prev_qf, then the joint box (last, so the
// commanded position always lands inside it), and qd_f against rate limits.
CorrectedPoint apply_action(const Action& a_raw, FilterState& filter,
                            const TrajectoryPoint& ref_next, const Vec& prev_qf,
                            const JointLimits& limits, const ActionBounds& bounds,
                            double dt);

struct RewardParams {
  double omega = 0.75;      // position-vs-velocity weight
  double l_q = 32.0;        // position kernel sensitivity
  double l_v = 7.0;         // velocity kernel sensitivity
  double reward_scale = 10.0;  // multiplier on the stored training reward
};

// K(x, l) = 2 / (e^{xl} + e^{-xl}); K(0) = 1, symmetric, strictly
// decreasing in |x|.
double logistic_kernel(double x, double l);

struct RewardResult {
  double r;         // unscaled, in [0, 1]
  double r_q, r_v;  // kernel components
  double e_q, e_v;  // summed L1 errors
  double scaled;    // reward_scale * r, the value stored for training
};

RewardResult compute_reward(const Vec& q_o, const Vec& qd_o, const Vec& q_r,
                            const Vec& qd_r, const RewardParams& params);

struct ErrorRecord {
  Vec dq, dqd;  // signed per-joint tracking errors at one point
};

struct ScalingStats {
  Vec mu_q, sigma_q;  // mean/std of |dq| per joint
  Vec mu_v, sigma_v;

  // Half-width of the symmetric scaling interval, floored at 1e-6.
  Vec range_q() const;
  Vec range_v() const;
};

// Population statistics of absolute errors over baseline-only rollouts.
ScalingStats compute_scaling_stats(const std::vector<ErrorRecord>& records);

// Builds the policy state: [p_o(t-2), a(t-2), p_o(t-1), a(t-1), p_o(t),
// dp_o(t), p_r(t+1), p_r(t+2)], every block scaled and clamped to [-1,1].
// p = [q, qd]; dimension 12N + 2m with m = 2N.
class StateAssembler {
 public:
  StateAssembler(const JointLimits& limits, const ActionBounds& bounds,
                 const ScalingStats& stats);

  int state_dim() const { return 16 * n_; }

  // Seeds the history slots for t-1 and t-2 with the initial observation
  // and zero actions.
  void reset(const ObservedPoint& initial);

  // Records the observation the agent acted on and the (raw, physical)
  // action it took.
  void push(const ObservedPoint& obs, const Action& action);

  Vec assemble(const ObservedPoint& current, const TrajectoryPoint& ref_t,
               const TrajectoryPoint& ref_t1, const TrajectoryPoint& ref_t2) const;

 private:
  int n_;
  JointLimits limits_;
  ActionBounds bounds_;
  Vec range_q_, range_v_;
  ObservedPoint obs_m1_, obs_m2_;  // t-1, t-2
  Action act_m1_, act_m2_;
};

}  // namespace srcp
