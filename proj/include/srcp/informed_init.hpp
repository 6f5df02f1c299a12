// Informed initialization: collect baseline rollouts, fit a coarse neural
// forward-dynamics model of the controlled plant, and pretrain the policy
// inside that model before it ever touches the plant. The learned model
// slots in as an EnvBackend, so pretraining runs the exact reward, state,
// bound, and filter code used on the plant.
#pragma once

#include "srcp/train_loop.hpp"
#include "srcp/trajgen.hpp"

namespace srcp {

// One-step forward-dynamics predictor, [q_o, qd_o, q_f, qd_f] -> next
// [q_o, qd_o], trained on normalized data. 4N -> 64 -> 32 -> 2N with tanh
// hidden layers and a linear output.
struct DynModel {
  Mlp net;
  Vec in_mean, in_std;  // per-dimension dataset statistics
  Vec out_mean, out_std;
  int n_joints = 0;

  // Unit normalization, zero output layer: the untrained model predicts the
  // dataset mean, which makes the initial loss the normalized target variance.
  static DynModel make(int n_joints, std::mt19937_64& rng);
};

struct CollectConfig {
  PlantParams plant = PlantParams::two_link_default();
  BaselineGains gains = BaselineGains::detuned_default();
  JointLimits limits = JointLimits::uniform(2, -2.0, 2.0, 2.0, 4.0);
  TrajgenParams traj;
  RewardParams reward;
  double dt = 0.05;
  std::uint64_t traj_id_base = 0;
};

struct CollectResult {
  std::vector<DynSample> samples;
  std::vector<std::uint64_t> sample_traj;  // source trajectory per sample
  std::vector<int> sample_step;            // outer-step index per sample
  std::vector<ErrorRecord> errors;         // feeds compute_scaling_stats
  std::vector<std::uint64_t> traj_ids;
};

// Runs the baseline controller on n_traj random trajectories and records one
// DynSample per outer step. No policy is involved. Throws if the plant
// diverges (non-finite sample), naming the trajectory and step.
CollectResult collect_dataset(const CollectConfig& cfg, int n_traj,
                              std::mt19937_64& rng);

struct DynTrainConfig {
  double lr = 1e-4;
  int minibatch = 128;
  int max_epochs = 2000;
  int stop_window = 20;    // epochs
  double stop_rel = 1e-4;  // relative improvement under this over the window stops
};

struct DynTrainResult {
  DynModel model;
  // loss_history[0] is the full-dataset loss before any update; entry e >= 1
  // is the mean minibatch loss of epoch e. Normalized-target MSE throughout.
  std::vector<double> loss_history;
  int epochs_run = 0;
};

// Fits the forward model by minibatch Adam on normalized inputs/targets.
// Normalization constants are the dataset's per-dimension mean/std.
DynTrainResult train_dynamics(const std::vector<DynSample>& dataset,
                              const DynTrainConfig& cfg, std::mt19937_64& rng);

// Mean squared error of the model on `samples`: in normalized target space
// (the training loss metric) or in raw target units.
double dyn_model_mse(const DynModel& model, const std::vector<DynSample>& samples,
                     bool normalized = true);

// One-step prediction: p_obs = [q_o, qd_o] (2N), the corrected command
// (q_f, qd_f) takes the reference slot. Deterministic.
Vec learned_sim_step(const DynModel& model, const Vec& p_obs, const Vec& q_f,
                     const Vec& qd_f);

// The learned model driven closed loop: each prediction becomes the next
// observation. reset seats it at the trajectory start, at rest.
class LearnedSimBackend final : public EnvBackend {
 public:
  explicit LearnedSimBackend(const DynModel& model);

  ObservedPoint reset(const ReferenceTrajectory& traj, std::mt19937_64& rng) override;
  ObservedPoint step(const Vec& q_f, const Vec& qd_f, std::mt19937_64& rng) override;

 private:
  const DynModel* model_;
  Vec p_;  // current predicted [q_o, qd_o]
};

struct PretrainConfig {
  int episodes = 300;
  LrSchedule lr;
  bool sample_trajectories = false;
};

struct PretrainResult {
  std::vector<double> episode_rewards;  // unscaled mean reward per episode
  long updates = 0;
};

// Runs the full SAC loop against the learned model. The replay buffer is
// local and discarded on return, so plant training starts from an empty
// buffer. With episodes = 0 the agent is untouched.
PretrainResult pretrain_policy(SacAgent& agent, const DynModel& model,
                               const std::vector<ReferenceTrajectory>& corpus,
                               const RolloutContext& ctx,
                               const PretrainConfig& cfg, std::mt19937_64& rng);

}  // namespace srcp
