#include "srcp/rollout.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace srcp {

PlantBackend::PlantBackend(const PlantParams& params, const BaselineGains& gains,
                           double outer_dt, double settle_time)
    : params_(params), gains_(gains), outer_dt_(outer_dt) {
  params_.validate();
  gains_.validate(params_.n_joints);
  double ratio = outer_dt / params_.inner_dt;
  inner_per_outer_ = static_cast<int>(std::lround(ratio));
  if (inner_per_outer_ < 1 || std::abs(ratio - inner_per_outer_) > 1e-9)
    throw std::invalid_argument("outer dt must be an integer multiple of inner dt");
  settle_steps_ = static_cast<int>(std::lround(settle_time / params_.inner_dt));
}

ObservedPoint PlantBackend::reset(const ReferenceTrajectory& traj,
                                  std::mt19937_64& rng) {
  const Vec q0 = traj.points.front().q;
  state_ = make_initial_state(q0, params_);
  cmd_q_ = q0;
  const Vec qd0 = Vec::Zero(params_.n_joints);
  // Hold the start point until inner-loop transients die out; the plant
  // settles at the baseline's (imperfect) equilibrium for this pose.
  for (int k = 0; k < settle_steps_; ++k) {
    Vec u = baseline_controller(q0, qd0, state_.qm, state_.qmd, state_.q, gains_,
                                params_);
    plant_step(state_, u, params_);
  }
  return observe(state_, params_, rng);
}

ObservedPoint PlantBackend::step(const Vec& q_f, const Vec& qd_f,
                                 std::mt19937_64& rng) {
  const Vec from = cmd_q_;
  for (int k = 1; k <= inner_per_outer_; ++k) {
    double frac = static_cast<double>(k) / inner_per_outer_;
    Vec q_des = from + frac * (q_f - from);
    Vec u = baseline_controller(q_des, qd_f, state_.qm, state_.qmd, state_.q,
                                gains_, params_);
    plant_step(state_, u, params_);
  }
  cmd_q_ = q_f;
  return observe(state_, params_, rng);
}

namespace {

Vec select_unit_action(const SacAgent& agent, const Vec& state,
                       EpisodeOptions::ActionSource source, std::mt19937_64& rng) {
  BetaHead head = actor_forward(agent.actor, state);
  if (source == EpisodeOptions::ActionSource::Sample)
    return sample_action(head, rng).u;
  return action_mode(head);
}

}  // namespace

EpisodeResult run_episode(EnvBackend& env, const ReferenceTrajectory& traj,
                          const RolloutContext& ctx, const EpisodeOptions& opts,
                          std::mt19937_64& rng) {
  if (!ctx.limits || !ctx.bounds || !ctx.reward)
    throw std::invalid_argument("rollout context missing limits/bounds/reward");
  const bool uses_policy = opts.source != EpisodeOptions::ActionSource::None;
  if (uses_policy && !ctx.agent)
    throw std::invalid_argument("policy action source requires an agent");
  if (opts.record_dyn_samples && uses_policy)
    throw std::invalid_argument("dynamics samples must be collected under baseline control");
  const bool build_states = uses_policy || opts.record_transitions;
  if (build_states && !ctx.stats)
    throw std::invalid_argument("state assembly requires scaling stats");

  const int T = static_cast<int>(traj.points.size());
  if (T < 2) throw std::invalid_argument("trajectory must have at least 2 points");
  const int n = traj.n_joints();
  const int n_steps = T - 1;

  EpisodeResult res;
  res.n_points = T;
  res.errors.reserve(static_cast<std::size_t>(n_steps));

  ObservedPoint obs = env.reset(traj, rng);

  StateAssembler assembler(*ctx.limits,  *ctx.bounds,
                           ctx.stats ? *ctx.stats : ScalingStats{Vec::Zero(n), Vec::Zero(n),
                                                                 Vec::Zero(n), Vec::Zero(n)});
  assembler.reset(obs);
  FilterState filter = FilterState::make(2 * n, ctx.filter_cutoff_hz, ctx.dt);
  Vec prev_qf = traj.points.front().q;

  auto ref_at = [&](int i) -> const TrajectoryPoint& {
    return traj.points[static_cast<std::size_t>(std::min(i, T - 1))];
  };

  Vec state;
  if (build_states)
    state = assembler.assemble(obs, ref_at(0), ref_at(1), ref_at(2));

  double sum_r = 0, sum_eq = 0, sum_ev = 0, sum_ee = 0;

  for (int t = 0; t < n_steps; ++t) {
    Vec u_unit;
    Action a_raw = Action::zero(n);
    if (uses_policy) {
      u_unit = select_unit_action(*ctx.agent, state, opts.source, rng);
      a_raw = rescale_action(u_unit, *ctx.bounds).action;
    }

    CorrectedPoint cp = apply_action(a_raw, filter, ref_at(t + 1), prev_qf,
                                     *ctx.limits, *ctx.bounds, ctx.dt);

    // Always-on safety contract: the filtered correction must respect the
    // action bound before the box clip, and the commanded position must sit
    // inside the joint limits after it.
    res.safety.steps_checked++;
    bool bad = false;
    for (int j = 0; j < n; ++j) {
      double pre = std::abs(cp.a_filt_q[j]);
      res.safety.max_preclip = std::max(res.safety.max_preclip, pre);
      if (pre > ctx.bounds->a_max_q[j] + 1e-12) {
        res.safety.preclip_violations++;
        bad = true;
      }
      if (cp.q_f[j] < ctx.limits->q_min[j] - 1e-12 ||
          cp.q_f[j] > ctx.limits->q_max[j] + 1e-12) {
        res.safety.postclip_violations++;
        bad = true;
      }
    }
    if (bad) {
      std::ostringstream msg;
      msg << "action safety violation at step " << t;
      throw std::logic_error(msg.str());
    }

    ObservedPoint obs_next = env.step(cp.q_f, cp.qd_f, rng);
    const TrajectoryPoint& target = ref_at(t + 1);
    RewardResult rr = compute_reward(obs_next.q, obs_next.qd, target.q, target.qd,
                                     *ctx.reward);

    res.errors.push_back({obs_next.q - target.q, obs_next.qd - target.qd});
    sum_r += rr.r;
    sum_eq += rr.e_q;
    sum_ev += rr.e_v;
    if (ctx.fk)
      sum_ee += (forward_kinematics(obs_next.q, *ctx.fk) -
                 forward_kinematics(target.q, *ctx.fk))
                    .norm();

    if (opts.record_dyn_samples) {
      DynSample ds;
      ds.input.resize(4 * n);
      ds.input << obs.q, obs.qd, target.q, target.qd;
      ds.target.resize(2 * n);
      ds.target << obs_next.q, obs_next.qd;
      res.dyn_samples.push_back(std::move(ds));
    }

    Vec state_next;
    if (build_states) {
      assembler.push(obs, a_raw);
      state_next = assembler.assemble(obs_next, ref_at(t + 1), ref_at(t + 2),
                                      ref_at(t + 3));
    }

    if (opts.record_transitions) {
      Transition tr;
      tr.s = state;
      tr.u = u_unit.size() ? u_unit : Vec::Constant(2 * n, 0.5);
      tr.r = rr.scaled;
      tr.s_next = state_next;
      tr.done = (t == n_steps - 1);
      res.transitions.push_back(std::move(tr));
    }

    if (opts.record_traces) {
      StepTrace st;
      st.t = (t + 1) * ctx.dt;
      st.q_r = target.q;
      st.qd_r = target.qd;
      st.q_f = cp.q_f;
      st.qd_f = cp.qd_f;
      st.q_o = obs_next.q;
      st.qd_o = obs_next.qd;
      st.r = rr.r;
      res.traces.push_back(std::move(st));
    }

    obs = obs_next;
    prev_qf = cp.q_f;
    if (build_states) state = std::move(state_next);
  }

  res.mean_reward = sum_r / n_steps;
  res.mean_e_q = sum_eq / n_steps;
  res.mean_e_v = sum_ev / n_steps;
  res.mean_ee_err = ctx.fk ? sum_ee / n_steps : 0.0;
  return res;
}

}  // namespace srcp
