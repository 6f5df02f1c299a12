#include "srcp/train_loop.hpp"

#include <cmath>
#include <stdexcept>

namespace srcp {

void run_training_loop(
    SacAgent& agent, ReplayBuffer& buffer, EnvBackend& env,
    const std::vector<ReferenceTrajectory>& corpus, const RolloutContext& ctx,
    const TrainLoopConfig& cfg, std::mt19937_64& rng,
    const std::function<void(const TrainEpisodeStats&)>& on_episode) {
  if (corpus.empty()) throw std::invalid_argument("training corpus is empty");
  if (cfg.episodes < 0) throw std::invalid_argument("negative episode count");
  if (cfg.first_episode < 0 || cfg.first_episode > cfg.episodes)
    throw std::invalid_argument("first episode outside the run");

  RolloutContext run_ctx = ctx;
  run_ctx.agent = &agent;

  EpisodeOptions opts;
  opts.source = EpisodeOptions::ActionSource::Sample;
  opts.record_transitions = true;

  for (int episode = cfg.first_episode; episode < cfg.episodes; ++episode) {
    std::size_t pick = static_cast<std::size_t>(episode) % corpus.size();
    if (cfg.sample_trajectories) {
      std::uniform_int_distribution<std::size_t> d(0, corpus.size() - 1);
      pick = d(rng);
    }
    const ReferenceTrajectory& traj = corpus[pick];

    EpisodeResult result = run_episode(env, traj, run_ctx, opts, rng);
    for (Transition& tr : result.transitions) buffer.push(std::move(tr));

    const double lr = lr_at(cfg.lr, episode);
    const int steps = result.n_points - 1;
    const int want = static_cast<int>(std::llround(agent.config.replay_ratio * steps));
    int ran = 0;
    for (; ran < want; ++ran) {
      if (buffer.size() < static_cast<std::size_t>(agent.config.minibatch)) break;
      std::vector<Transition> batch =
          replay_sample(buffer, agent.config.minibatch, rng);
      sac_update(agent, batch, lr, rng);
    }

    if (on_episode) {
      TrainEpisodeStats stats;
      stats.episode = episode;
      stats.trajectory_id = traj.id;
      stats.lr = lr;
      stats.alpha_temp = agent.alpha_temp();
      stats.mean_reward = result.mean_reward;
      stats.mean_e_q = result.mean_e_q;
      stats.mean_e_v = result.mean_e_v;
      stats.mean_ee_err = result.mean_ee_err;
      stats.updates_run = ran;
      stats.total_updates = agent.update_count;
      on_episode(stats);
    }
  }
}

}  // namespace srcp
