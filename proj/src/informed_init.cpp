#include "srcp/informed_init.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace srcp {

namespace {

constexpr double kStdFloor = 1e-8;

void check_model_dims(const DynModel& m) {
  const int n = m.n_joints;
  if (n < 1) throw std::invalid_argument("dynamics model has no joints");
  if (m.net.in_dim() != 4 * n || m.net.out_dim() != 2 * n)
    throw std::invalid_argument("dynamics net shape inconsistent with joint count");
  if (m.in_mean.size() != 4 * n || m.in_std.size() != 4 * n ||
      m.out_mean.size() != 2 * n || m.out_std.size() != 2 * n)
    throw std::invalid_argument("dynamics normalization constants misshaped");
}

}  // namespace

DynModel DynModel::make(int n_joints, std::mt19937_64& rng) {
  if (n_joints < 1) throw std::invalid_argument("joint count must be positive");
  DynModel m;
  m.n_joints = n_joints;
  m.net = Mlp::make({4 * n_joints, 64, 32, 2 * n_joints},
                    {Activation::Tanh, Activation::Tanh, Activation::Linear}, rng);
  m.net.layers.back().W.setZero();
  m.net.layers.back().b.setZero();
  m.in_mean = Vec::Zero(4 * n_joints);
  m.in_std = Vec::Ones(4 * n_joints);
  m.out_mean = Vec::Zero(2 * n_joints);
  m.out_std = Vec::Ones(2 * n_joints);
  return m;
}

CollectResult collect_dataset(const CollectConfig& cfg, int n_traj,
                              std::mt19937_64& rng) {
  if (n_traj < 1) throw std::invalid_argument("need at least one trajectory");
  if (std::abs(cfg.traj.dt - cfg.dt) > 1e-12)
    throw std::invalid_argument("trajectory dt differs from control dt");

  ActionBounds bounds = compute_action_bounds(cfg.limits, cfg.dt);
  RolloutContext ctx;
  ctx.limits = &cfg.limits;
  ctx.bounds = &bounds;
  ctx.reward = &cfg.reward;
  ctx.fk = &cfg.plant;
  ctx.dt = cfg.dt;

  EpisodeOptions opts;
  opts.record_dyn_samples = true;

  auto corpus = build_corpus(rng, n_traj, cfg.limits, cfg.traj, cfg.traj_id_base);

  CollectResult out;
  for (const ReferenceTrajectory& traj : corpus) {
    PlantBackend env(cfg.plant, cfg.gains, cfg.dt);
    EpisodeResult r = run_episode(env, traj, ctx, opts, rng);
    for (std::size_t k = 0; k < r.dyn_samples.size(); ++k) {
      const DynSample& s = r.dyn_samples[k];
      if (!s.input.allFinite() || !s.target.allFinite()) {
        std::ostringstream msg;
        msg << "plant diverged on trajectory " << traj.id << " at step " << k;
        throw std::runtime_error(msg.str());
      }
      out.samples.push_back(s);
      out.sample_traj.push_back(traj.id);
      out.sample_step.push_back(static_cast<int>(k));
    }
    out.errors.insert(out.errors.end(), r.errors.begin(), r.errors.end());
    out.traj_ids.push_back(traj.id);
  }
  return out;
}

DynTrainResult train_dynamics(const std::vector<DynSample>& dataset,
                              const DynTrainConfig& cfg, std::mt19937_64& rng) {
  const std::size_t S = dataset.size();
  if (cfg.minibatch < 1) throw std::invalid_argument("minibatch must be positive");
  if (S < static_cast<std::size_t>(cfg.minibatch))
    throw std::invalid_argument("dataset smaller than one minibatch");
  const int in_dim = static_cast<int>(dataset.front().input.size());
  const int out_dim = static_cast<int>(dataset.front().target.size());
  if (in_dim != 2 * out_dim || out_dim % 2 != 0)
    throw std::invalid_argument("dataset does not look like [p, ref] -> p samples");
  const int n = out_dim / 2;

  Mat X(in_dim, S), T(out_dim, S);
  for (std::size_t i = 0; i < S; ++i) {
    if (dataset[i].input.size() != in_dim || dataset[i].target.size() != out_dim)
      throw std::invalid_argument("ragged dataset");
    X.col(i) = dataset[i].input;
    T.col(i) = dataset[i].target;
  }

  DynTrainResult out;
  out.model = DynModel::make(n, rng);
  DynModel& m = out.model;
  m.in_mean = X.rowwise().mean();
  m.out_mean = T.rowwise().mean();
  m.in_std = ((X.colwise() - m.in_mean).array().square().rowwise().mean())
                 .sqrt()
                 .max(kStdFloor)
                 .matrix();
  m.out_std = ((T.colwise() - m.out_mean).array().square().rowwise().mean())
                  .sqrt()
                  .max(kStdFloor)
                  .matrix();

  Mat Xn = ((X.colwise() - m.in_mean).array().colwise() / m.in_std.array()).matrix();
  Mat Tn = ((T.colwise() - m.out_mean).array().colwise() / m.out_std.array()).matrix();

  const double denom0 = static_cast<double>(S) * out_dim;
  out.loss_history.push_back((mlp_forward(m.net, Xn) - Tn).squaredNorm() / denom0);

  AdamState adam = AdamState::zeros_like(m.net);
  const int B = cfg.minibatch;
  const int batches = static_cast<int>(S) / B;
  std::vector<std::size_t> perm(S);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Mat Xb(in_dim, B), Tb(out_dim, B);

  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    std::shuffle(perm.begin(), perm.end(), rng);
    double epoch_loss = 0.0;
    for (int b = 0; b < batches; ++b) {
      for (int j = 0; j < B; ++j) {
        const std::size_t i = perm[static_cast<std::size_t>(b) * B + j];
        Xb.col(j) = Xn.col(i);
        Tb.col(j) = Tn.col(i);
      }
      ForwardCache cache;
      Mat Y = mlp_forward(m.net, Xb, &cache);
      Mat dY = 2.0 * (Y - Tb) / (static_cast<double>(B) * out_dim);
      const double loss = (Y - Tb).squaredNorm() / (static_cast<double>(B) * out_dim);
      if (!std::isfinite(loss))
        throw std::runtime_error("dynamics training loss is not finite");
      MlpGrads grads = MlpGrads::zeros_like(m.net);
      mlp_backward(m.net, cache, dY, grads);
      adam_step(m.net, grads, adam, cfg.lr);
      epoch_loss += loss;
    }
    out.loss_history.push_back(epoch_loss / batches);
    out.epochs_run = epoch;

    if (epoch >= cfg.stop_window) {
      const double before = out.loss_history[epoch - cfg.stop_window];
      const double now = out.loss_history[epoch];
      if (before > 0.0 && (before - now) / before < cfg.stop_rel) break;
    }
  }
  return out;
}

double dyn_model_mse(const DynModel& model, const std::vector<DynSample>& samples,
                     bool normalized) {
  check_model_dims(model);
  if (samples.empty()) throw std::invalid_argument("no samples to evaluate");
  const int in_dim = model.net.in_dim();
  const int out_dim = model.net.out_dim();
  Mat X(in_dim, samples.size()), T(out_dim, samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    X.col(i) = samples[i].input;
    T.col(i) = samples[i].target;
  }
  Mat Xn =
      ((X.colwise() - model.in_mean).array().colwise() / model.in_std.array()).matrix();
  Mat Tn =
      ((T.colwise() - model.out_mean).array().colwise() / model.out_std.array()).matrix();
  Mat E = mlp_forward(model.net, Xn) - Tn;
  if (!normalized) E = (E.array().colwise() * model.out_std.array()).matrix();
  return E.squaredNorm() / (static_cast<double>(samples.size()) * out_dim);
}

Vec learned_sim_step(const DynModel& model, const Vec& p_obs, const Vec& q_f,
                     const Vec& qd_f) {
  check_model_dims(model);
  const int n = model.n_joints;
  if (p_obs.size() != 2 * n || q_f.size() != n || qd_f.size() != n)
    throw std::invalid_argument("learned_sim_step dimension mismatch");
  Vec x(4 * n);
  x << p_obs, q_f, qd_f;
  Vec xn = ((x - model.in_mean).array() / model.in_std.array()).matrix();
  Vec yn = mlp_forward(model.net, xn).col(0);
  return (yn.array() * model.out_std.array() + model.out_mean.array()).matrix();
}

LearnedSimBackend::LearnedSimBackend(const DynModel& model) : model_(&model) {
  check_model_dims(model);
}

ObservedPoint LearnedSimBackend::reset(const ReferenceTrajectory& traj,
                                       std::mt19937_64&) {
  const int n = model_->n_joints;
  if (traj.n_joints() != n)
    throw std::invalid_argument("trajectory joint count differs from the model");
  p_ = Vec::Zero(2 * n);
  p_.head(n) = traj.points.front().q;
  return ObservedPoint{p_.head(n), p_.tail(n)};
}

ObservedPoint LearnedSimBackend::step(const Vec& q_f, const Vec& qd_f,
                                      std::mt19937_64&) {
  p_ = learned_sim_step(*model_, p_, q_f, qd_f);
  const int n = model_->n_joints;
  return ObservedPoint{p_.head(n), p_.tail(n)};
}

PretrainResult pretrain_policy(SacAgent& agent, const DynModel& model,
                               const std::vector<ReferenceTrajectory>& corpus,
                               const RolloutContext& ctx,
                               const PretrainConfig& cfg, std::mt19937_64& rng) {
  PretrainResult out;
  if (cfg.episodes == 0) return out;

  LearnedSimBackend env(model);
  ReplayBuffer buffer(agent.config.replay_capacity);
  const long updates_before = agent.update_count;

  TrainLoopConfig loop;
  loop.episodes = cfg.episodes;
  loop.lr = cfg.lr;
  loop.sample_trajectories = cfg.sample_trajectories;

  run_training_loop(agent, buffer, env, corpus, ctx, loop, rng,
                    [&](const TrainEpisodeStats& stats) {
                      out.episode_rewards.push_back(stats.mean_reward);
                    });
  out.updates = agent.update_count - updates_before;
  return out;
}

}  // namespace srcp
