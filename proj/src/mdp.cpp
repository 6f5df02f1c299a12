#include "srcp/mdp.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace srcp {

ActionBounds compute_action_bounds(const JointLimits& limits, double dt) {
  if (dt <= 0) throw std::invalid_argument("action bounds: dt must be positive");
  ActionBounds b;
  b.a_max_q = 0.95 * limits.qd_lim * dt / 2.0;
  b.a_max_v = 0.95 * limits.qdd_lim * dt / 2.0;
  return b;
}

double FilterState::alpha_for_cutoff(double cutoff_hz, double dt) {
  const double w = 2.0 * std::numbers::pi * cutoff_hz * dt;
  return w / (w + 1.0);
}

FilterState FilterState::make(int n, double cutoff_hz, double dt) {
  FilterState f;
  f.prev_q = Vec::Zero(n);
  f.prev_v = Vec::Zero(n);
  f.alpha = cutoff_hz > 0 ? alpha_for_cutoff(cutoff_hz, dt) : 1.0;
  return f;
}

void FilterState::reset() {
  prev_q.setZero();
  prev_v.setZero();
}

CorrectedPoint apply_action(const Action& a_raw, FilterState& filter,
                            const TrajectoryPoint& ref_next, const Vec& prev_qf,
                            const JointLimits& limits, const ActionBounds& bounds,
                            double dt) {
  // Defensive clamp; the policy's rescaled samples already satisfy this.
  const Vec aq = a_raw.a_q.cwiseMax(-bounds.a_max_q).cwiseMin(bounds.a_max_q);
  const Vec av = a_raw.a_v.cwiseMax(-bounds.a_max_v).cwiseMin(bounds.a_max_v);

  filter.prev_q = filter.alpha * aq + (1.0 - filter.alpha) * filter.prev_q;
  filter.prev_v = filter.alpha * av + (1.0 - filter.alpha) * filter.prev_v;

  CorrectedPoint out;
  out.a_filt_q = filter.prev_q;
  out.a_filt_v = filter.prev_v;
  out.q_f = ref_next.q + filter.prev_q;
  out.qd_f = ref_next.qd + filter.prev_v;

  // Implied command velocity, then the joint box last: the commanded
  // position must always land inside it.
  const Vec max_step = limits.qd_lim * dt;
  out.q_f = prev_qf + (out.q_f - prev_qf).cwiseMax(-max_step).cwiseMin(max_step);
  out.q_f = out.q_f.cwiseMax(limits.q_min).cwiseMin(limits.q_max);
  out.qd_f = out.qd_f.cwiseMax(-limits.qd_lim).cwiseMin(limits.qd_lim);
  return out;
}

double logistic_kernel(double x, double l) {
  const double y = x * l;
  return 2.0 / (std::exp(y) + std::exp(-y));
}

RewardResult compute_reward(const Vec& q_o, const Vec& qd_o, const Vec& q_r,
                            const Vec& qd_r, const RewardParams& params) {
  if (q_o.size() != q_r.size() || qd_o.size() != qd_r.size())
    throw std::invalid_argument("reward: dimension mismatch");
  RewardResult res;
  res.e_q = (q_o - q_r).cwiseAbs().sum();
  res.e_v = (qd_o - qd_r).cwiseAbs().sum();
  res.r_q = logistic_kernel(res.e_q, params.l_q);
  res.r_v = logistic_kernel(res.e_v, params.l_v);
  res.r = params.omega * res.r_q + (1.0 - params.omega) * res.r_v;
  res.scaled = params.reward_scale * res.r;
  return res;
}

namespace {
Vec floored(const Vec& v) { return v.cwiseMax(1e-6); }
}  // namespace

Vec ScalingStats::range_q() const { return floored(mu_q + 3.0 * sigma_q); }
Vec ScalingStats::range_v() const { return floored(mu_v + 3.0 * sigma_v); }

ScalingStats compute_scaling_stats(const std::vector<ErrorRecord>& records) {
  if (records.empty())
    throw std::invalid_argument("scaling stats: empty dataset");
  const auto n = records.front().dq.size();
  const double count = static_cast<double>(records.size());
  ScalingStats s;
  s.mu_q = Vec::Zero(n);
  s.mu_v = Vec::Zero(n);
  for (const auto& rec : records) {
    if (rec.dq.size() != n || rec.dqd.size() != n)
      throw std::invalid_argument("scaling stats: ragged record");
    s.mu_q += rec.dq.cwiseAbs();
    s.mu_v += rec.dqd.cwiseAbs();
  }
  s.mu_q /= count;
  s.mu_v /= count;
  Vec var_q = Vec::Zero(n), var_v = Vec::Zero(n);
  for (const auto& rec : records) {
    var_q += (rec.dq.cwiseAbs() - s.mu_q).cwiseAbs2();
    var_v += (rec.dqd.cwiseAbs() - s.mu_v).cwiseAbs2();
  }
  s.sigma_q = (var_q / count).cwiseSqrt();
  s.sigma_v = (var_v / count).cwiseSqrt();
  return s;
}

namespace {

// x in [lo, hi] -> [-1, 1], then clamped.
double box_scale(double x, double lo, double hi) {
  const double y = 2.0 * (x - lo) / (hi - lo) - 1.0;
  return std::clamp(y, -1.0, 1.0);
}

// x in [-half, half] -> [-1, 1], then clamped.
double sym_scale(double x, double half) {
  return std::clamp(x / half, -1.0, 1.0);
}

}  // namespace

StateAssembler::StateAssembler(const JointLimits& limits,
                               const ActionBounds& bounds,
                               const ScalingStats& stats)
    : n_(static_cast<int>(limits.q_min.size())),
      limits_(limits),
      bounds_(bounds),
      range_q_(stats.range_q()),
      range_v_(stats.range_v()) {
  if (bounds.n_joints() != n_ || range_q_.size() != n_ || range_v_.size() != n_)
    throw std::invalid_argument("state assembler: dimension mismatch");
  obs_m1_.q = obs_m2_.q = Vec::Zero(n_);
  obs_m1_.qd = obs_m2_.qd = Vec::Zero(n_);
  act_m1_ = act_m2_ = Action::zero(n_);
}

void StateAssembler::reset(const ObservedPoint& initial) {
  obs_m1_ = obs_m2_ = initial;
  act_m1_ = act_m2_ = Action::zero(n_);
}

void StateAssembler::push(const ObservedPoint& obs, const Action& action) {
  obs_m2_ = obs_m1_;
  act_m2_ = act_m1_;
  obs_m1_ = obs;
  act_m1_ = action;
}

Vec StateAssembler::assemble(const ObservedPoint& current,
                             const TrajectoryPoint& ref_t,
                             const TrajectoryPoint& ref_t1,
                             const TrajectoryPoint& ref_t2) const {
  if (current.q.size() != n_ || ref_t.q.size() != n_ || ref_t1.q.size() != n_ ||
      ref_t2.q.size() != n_)
    throw std::invalid_argument("state assembler: input dimension mismatch");

  Vec s(state_dim());
  Eigen::Index k = 0;
  auto put_obs = [&](const ObservedPoint& o) {
    for (int j = 0; j < n_; ++j)
      s(k++) = box_scale(o.q(j), limits_.q_min(j), limits_.q_max(j));
    for (int j = 0; j < n_; ++j) s(k++) = sym_scale(o.qd(j), limits_.qd_lim(j));
  };
  auto put_act = [&](const Action& a) {
    for (int j = 0; j < n_; ++j) s(k++) = sym_scale(a.a_q(j), bounds_.a_max_q(j));
    for (int j = 0; j < n_; ++j) s(k++) = sym_scale(a.a_v(j), bounds_.a_max_v(j));
  };
  auto put_ref = [&](const TrajectoryPoint& p) {
    for (int j = 0; j < n_; ++j)
      s(k++) = box_scale(p.q(j), limits_.q_min(j), limits_.q_max(j));
    for (int j = 0; j < n_; ++j) s(k++) = sym_scale(p.qd(j), limits_.qd_lim(j));
  };

  put_obs(obs_m2_);
  put_act(act_m2_);
  put_obs(obs_m1_);
  put_act(act_m1_);
  put_obs(current);
  for (int j = 0; j < n_; ++j)
    s(k++) = sym_scale(current.q(j) - ref_t.q(j), range_q_(j));
  for (int j = 0; j < n_; ++j)
    s(k++) = sym_scale(current.qd(j) - ref_t.qd(j), range_v_(j));
  put_ref(ref_t1);
  put_ref(ref_t2);
  return s;
}

}  // namespace srcp
