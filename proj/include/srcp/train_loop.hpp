// Episode-level SAC training loop shared by learned-sim pretraining and
// real-plant training: roll out one trajectory with sampled actions, push
// the transitions, then run replay_ratio updates per environment step.
#pragma once

#include <functional>

#include "srcp/rollout.hpp"

namespace srcp {

struct TrainEpisodeStats {
  int episode = 0;
  std::uint64_t trajectory_id = 0;
  double lr = 0.0;
  double alpha_temp = 0.0;   // after this episode's updates
  double mean_reward = 0.0;  // unscaled
  double mean_e_q = 0.0;
  double mean_e_v = 0.0;
  double mean_ee_err = 0.0;
  int updates_run = 0;
  long total_updates = 0;  // agent.update_count after this episode
};

struct TrainLoopConfig {
  int episodes = 1000;     // total for the run; the loop covers [first_episode, episodes)
  int first_episode = 0;   // nonzero when resuming
  LrSchedule lr;
  bool sample_trajectories = false;  // true: uniform rng draw; false: cycle in corpus order
};

// Trains `agent` in-place against `env`. The context's agent pointer is
// overridden to `agent`; everything else (limits, bounds, stats, reward,
// fk, dt, filter) is taken as given. Updates start once the buffer holds a
// full minibatch. `on_episode`, when set, fires after each episode's
// updates. Exceptions from sac_update propagate; the agent keeps the last
// successfully updated parameters.
void run_training_loop(
    SacAgent& agent, ReplayBuffer& buffer, EnvBackend& env,
    const std::vector<ReferenceTrajectory>& corpus, const RolloutContext& ctx,
    const TrainLoopConfig& cfg, std::mt19937_64& rng,
    const std::function<void(const TrainEpisodeStats&)>& on_episode = {});

}  // namespace srcp
