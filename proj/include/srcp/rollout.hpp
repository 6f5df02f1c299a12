// Episode execution shared by data collection, training, pretraining, and
// evaluation: one loop over reference points that assembles states, applies
// (optional) policy corrections through the filter/clip chain, steps an
// environment backend, and scores tracking rewards. The backend is either
// the simulated plant or a learned forward-dynamics stand-in, so every mode
// exercises identical reward, state, bound, and filter code.
#pragma once

#include <memory>

#include "srcp/arm_sim.hpp"
#include "srcp/mdp.hpp"
#include "srcp/sac.hpp"

namespace srcp {

class EnvBackend {
 public:
  virtual ~EnvBackend() = default;

  // Seats the environment at the trajectory start and returns the initial
  // observation.
  virtual ObservedPoint reset(const ReferenceTrajectory& traj,
                              std::mt19937_64& rng) = 0;

  // Advances one outer step toward the corrected point (q_f, qd_f).
  virtual ObservedPoint step(const Vec& q_f, const Vec& qd_f,
                             std::mt19937_64& rng) = 0;
};

// Spong plant under the detuned inner-loop controller. Each outer step runs
// inner_dt-rate control toward a linear interpolation from the previously
// commanded position to the new one, with the commanded velocity held. The
// inner loop consumes true plant state (its own encoders); measurement noise
// enters only the outer observations returned to the caller.
class PlantBackend : public EnvBackend {
 public:
  PlantBackend(const PlantParams& params, const BaselineGains& gains,
               double outer_dt, double settle_time = 1.0);

  ObservedPoint reset(const ReferenceTrajectory& traj, std::mt19937_64& rng) override;
  ObservedPoint step(const Vec& q_f, const Vec& qd_f, std::mt19937_64& rng) override;

  const PlantState& plant_state() const { return state_; }
  const PlantParams& params() const { return params_; }

 private:
  PlantParams params_;
  BaselineGains gains_;
  double outer_dt_;
  int inner_per_outer_;
  int settle_steps_;
  PlantState state_;
  Vec cmd_q_;  // position the previous outer step steered toward
};

// One supervised sample for the forward-dynamics model: what the plant did
// across one outer step under baseline control.
struct DynSample {
  Vec input;   // [q_o(t), qd_o(t), q_r(t+1), qd_r(t+1)], 4N
  Vec target;  // [q_o(t+1), qd_o(t+1)], 2N
};

struct SafetyCounters {
  long steps_checked = 0;
  long preclip_violations = 0;   // |q_f - q_r| beyond a_max_q before the box clip
  long postclip_violations = 0;  // q_f outside joint limits after it
  double max_preclip = 0.0;      // largest |a_filt_q| seen, for reporting
};

struct StepTrace {
  double t;
  Vec q_r, qd_r;  // reference at t+1 (what this step tracked)
  Vec q_f, qd_f;  // corrected command
  Vec q_o, qd_o;  // resulting observation
  double r;       // unscaled reward
};

struct EpisodeOptions {
  enum class ActionSource { None, Sample, Mode };
  ActionSource source = ActionSource::None;
  bool record_transitions = false;
  bool record_dyn_samples = false;  // baseline-only collection
  bool record_traces = false;
};

struct EpisodeResult {
  int n_points = 0;
  double mean_reward = 0.0;  // unscaled, averaged over the episode
  double mean_e_q = 0.0;
  double mean_e_v = 0.0;
  double mean_ee_err = 0.0;  // Cartesian end-effector distance, m
  std::vector<Transition> transitions;
  std::vector<DynSample> dyn_samples;
  std::vector<ErrorRecord> errors;  // always recorded; feeds ScalingStats
  std::vector<StepTrace> traces;
  SafetyCounters safety;
};

struct RolloutContext {
  const JointLimits* limits = nullptr;
  const ActionBounds* bounds = nullptr;
  const ScalingStats* stats = nullptr;  // required only when states are built
  const RewardParams* reward = nullptr;
  const PlantParams* fk = nullptr;  // link geometry for the EE metric
  const SacAgent* agent = nullptr;  // required for Sample/Mode sources
  double dt = 0.05;
  double filter_cutoff_hz = 4.0;
};

// Runs one trajectory start to finish: T points produce T-1 steps, with the
// reference lookahead index-clamped at the end and done set only on the last
// step. Bound violations (which the filter/clip chain is built to make
// impossible) throw after updating the safety counters.
EpisodeResult run_episode(EnvBackend& env, const ReferenceTrajectory& traj,
                          const RolloutContext& ctx, const EpisodeOptions& opts,
                          std::mt19937_64& rng);

}  // namespace srcp
