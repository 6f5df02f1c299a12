#include "srcp/sac.hpp"

#include <cmath>
#include <stdexcept>

#include <unsupported/Eigen/SpecialFunctions>

namespace srcp {
namespace {

constexpr double kHeadFloor = 1e-5;  // sigmoid output clip before the x10 gain
constexpr double kHeadGain = 10.0;
constexpr double kSampleClip = 1e-12;  // keeps log u / log(1-u) finite

double digamma(double x) { return Eigen::numext::digamma(x); }

double log_beta_norm(double a, double b) {
  return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

// Head parameters from raw sigmoid outputs y in (0,1): 10 * clip(y, 1e-5, 1).
double head_param(double y) {
  double c = std::min(std::max(y, kHeadFloor), 1.0);
  return kHeadGain * c;
}

// d head_param / d y; zero where the clip is active.
double head_param_grad(double y) {
  return (y > kHeadFloor && y < 1.0) ? kHeadGain : 0.0;
}

BetaHead head_from_outputs(const Vec& y, int m) {
  BetaHead h;
  h.alpha.resize(m);
  h.beta.resize(m);
  for (int i = 0; i < m; ++i) {
    h.alpha[i] = head_param(y[i]);
    h.beta[i] = head_param(y[m + i]);
  }
  return h;
}

double sample_beta(double a, double b, std::mt19937_64& rng) {
  std::gamma_distribution<double> ga(a, 1.0), gb(b, 1.0);
  double x = ga(rng);
  double y = gb(rng);
  double s = x + y;
  double u = s > 0.0 ? x / s : 0.5;
  return std::min(std::max(u, kSampleClip), 1.0 - kSampleClip);
}

Mat critic_input(const Mat& S, const Mat& U) {
  Mat X(S.rows() + U.rows(), S.cols());
  X.topRows(S.rows()) = S;
  X.bottomRows(U.rows()) = U;
  return X;
}

void copy_weights(const Mlp& src, Mlp& dst) {
  for (std::size_t i = 0; i < src.layers.size(); ++i) {
    dst.layers[i].W = src.layers[i].W;
    dst.layers[i].b = src.layers[i].b;
  }
}

}  // namespace

ReplayBuffer::ReplayBuffer(int capacity) : capacity_(capacity) {
  if (capacity <= 0) throw std::invalid_argument("replay capacity must be positive");
  storage_.reserve(static_cast<std::size_t>(capacity));
}

void ReplayBuffer::push(Transition t) {
  if (storage_.size() < static_cast<std::size_t>(capacity_)) {
    storage_.push_back(std::move(t));
  } else {
    storage_[next_] = std::move(t);
    next_ = (next_ + 1) % storage_.size();
  }
  ++total_pushed_;
}

std::vector<std::size_t> ReplayBuffer::sample_indices(int k, std::mt19937_64& rng) const {
  if (storage_.size() < static_cast<std::size_t>(k))
    throw std::runtime_error("replay buffer smaller than requested sample");
  std::uniform_int_distribution<std::size_t> dist(0, storage_.size() - 1);
  std::vector<std::size_t> out(static_cast<std::size_t>(k));
  for (auto& i : out) i = dist(rng);
  return out;
}

void ReplayBuffer::clear() {
  storage_.clear();
  next_ = 0;
  total_pushed_ = 0;
}

ReplayBuffer ReplayBuffer::restore(int capacity, std::vector<Transition> storage,
                                   std::size_t next, std::int64_t total_pushed) {
  ReplayBuffer out(capacity);
  if (storage.size() > static_cast<std::size_t>(capacity))
    throw std::invalid_argument("restored buffer exceeds its capacity");
  const bool full = storage.size() == static_cast<std::size_t>(capacity);
  if ((!full && next != 0) || (full && next >= storage.size() && !storage.empty()))
    throw std::invalid_argument("restored ring position out of range");
  if (total_pushed < static_cast<std::int64_t>(storage.size()))
    throw std::invalid_argument("restored push count below stored size");
  out.storage_ = std::move(storage);
  out.next_ = next;
  out.total_pushed_ = total_pushed;
  return out;
}

std::vector<Transition> replay_sample(const ReplayBuffer& buffer, int k,
                                      std::mt19937_64& rng) {
  auto idx = buffer.sample_indices(k, rng);
  std::vector<Transition> batch;
  batch.reserve(idx.size());
  for (std::size_t i : idx) batch.push_back(buffer.at(i));
  return batch;
}

SacAgent SacAgent::make(int state_dim, int action_dim, const SacConfig& config,
                        std::mt19937_64& rng) {
  SacAgent a;
  a.config = config;
  a.config.target_entropy = -static_cast<double>(action_dim);
  a.state_dim = state_dim;
  a.action_dim = action_dim;

  std::vector<int> actor_sizes = {state_dim};
  std::vector<int> critic_sizes = {state_dim + action_dim};
  std::vector<Activation> acts;
  for (int h : config.hidden) {
    actor_sizes.push_back(h);
    critic_sizes.push_back(h);
    acts.push_back(Activation::Tanh);
  }
  actor_sizes.push_back(2 * action_dim);
  critic_sizes.push_back(1);

  std::vector<Activation> actor_acts = acts;
  actor_acts.push_back(Activation::Sigmoid);
  std::vector<Activation> critic_acts = acts;
  critic_acts.push_back(Activation::Linear);

  a.actor = Mlp::make(actor_sizes, actor_acts, rng);
  a.critic1 = Mlp::make(critic_sizes, critic_acts, rng);
  a.critic2 = Mlp::make(critic_sizes, critic_acts, rng);
  a.target1 = a.critic1;
  a.target2 = a.critic2;
  a.actor_adam = AdamState::zeros_like(a.actor);
  a.critic1_adam = AdamState::zeros_like(a.critic1);
  a.critic2_adam = AdamState::zeros_like(a.critic2);
  a.log_alpha_temp = std::log(config.alpha_temp_init);
  a.temp_adam = ScalarAdam{};
  return a;
}

BetaHead actor_forward(const Mlp& actor, const Vec& s) {
  Mat y = mlp_forward(actor, s);
  return head_from_outputs(y.col(0), static_cast<int>(y.rows()) / 2);
}

double log_beta_pdf(double u, double a, double b) {
  return (a - 1.0) * std::log(u) + (b - 1.0) * std::log1p(-u) - log_beta_norm(a, b);
}

SampledAction sample_action(const BetaHead& head, std::mt19937_64& rng) {
  int m = static_cast<int>(head.alpha.size());
  SampledAction out;
  out.u.resize(m);
  for (int i = 0; i < m; ++i) out.u[i] = sample_beta(head.alpha[i], head.beta[i], rng);
  out.log_prob = log_prob_of(head, out.u);
  return out;
}

double log_prob_of(const BetaHead& head, const Vec& u) {
  double lp = 0.0;
  for (int i = 0; i < head.alpha.size(); ++i)
    lp += log_beta_pdf(u[i], head.alpha[i], head.beta[i]);
  return lp;
}

Vec action_mode(const BetaHead& head) {
  int m = static_cast<int>(head.alpha.size());
  Vec mode(m);
  for (int i = 0; i < m; ++i) {
    double a = head.alpha[i], b = head.beta[i];
    if (a > 1.0 && b > 1.0)
      mode[i] = (a - 1.0) / (a + b - 2.0);
    else if (a <= 1.0 && b > 1.0)
      mode[i] = 0.0;
    else if (a > 1.0 && b <= 1.0)
      mode[i] = 1.0;
    else
      mode[i] = 0.5;  // bimodal; the center is the conventional tie-break
  }
  return mode;
}

RescaledAction rescale_action(const Vec& u, const ActionBounds& bounds) {
  int n = bounds.n_joints();
  if (u.size() != 2 * n) throw std::invalid_argument("action/bounds dimension mismatch");
  RescaledAction out;
  out.action.a_q.resize(n);
  out.action.a_v.resize(n);
  out.log_density_correction = 0.0;
  for (int i = 0; i < n; ++i) {
    out.action.a_q[i] = (2.0 * u[i] - 1.0) * bounds.a_max_q[i];
    out.action.a_v[i] = (2.0 * u[n + i] - 1.0) * bounds.a_max_v[i];
    out.log_density_correction -=
        std::log(2.0 * bounds.a_max_q[i]) + std::log(2.0 * bounds.a_max_v[i]);
  }
  return out;
}

double critic_forward(const Mlp& critic, const Vec& s, const Vec& u) {
  Vec x(s.size() + u.size());
  x << s, u;
  return mlp_forward(critic, x)(0, 0);
}

void target_hard_update(SacAgent& agent) {
  copy_weights(agent.critic1, agent.target1);
  copy_weights(agent.critic2, agent.target2);
}

SacLosses sac_update(SacAgent& agent, const std::vector<Transition>& batch,
                     double lr, std::mt19937_64& rng) {
  if (static_cast<int>(batch.size()) != agent.config.minibatch)
    throw std::invalid_argument("batch size must equal config.minibatch");
  const int B = agent.config.minibatch;
  const int m = agent.action_dim;
  const int d = agent.state_dim;
  const double gamma = agent.config.gamma;
  const double alpha_temp = agent.alpha_temp();

  Mat S(d, B), S2(d, B), U(m, B);
  Vec R(B), notdone(B);
  for (int j = 0; j < B; ++j) {
    const Transition& t = batch[static_cast<std::size_t>(j)];
    S.col(j) = t.s;
    S2.col(j) = t.s_next;
    U.col(j) = t.u;
    R[j] = t.r;
    notdone[j] = t.done ? 0.0 : 1.0;
  }

  // Bootstrap target: fresh next-state samples through the target critics.
  Mat Y2 = mlp_forward(agent.actor, S2);
  Mat U2(m, B);
  Vec logp2(B);
  for (int j = 0; j < B; ++j) {
    BetaHead h = head_from_outputs(Y2.col(j), m);
    SampledAction sa = sample_action(h, rng);
    U2.col(j) = sa.u;
    logp2[j] = sa.log_prob;
  }
  Mat X2 = critic_input(S2, U2);
  Vec q1t = mlp_forward(agent.target1, X2).row(0).transpose();
  Vec q2t = mlp_forward(agent.target2, X2).row(0).transpose();
  Vec qmin_t = q1t.cwiseMin(q2t);
  Vec y = R.array() +
          gamma * notdone.array() * (qmin_t.array() - alpha_temp * logp2.array());

  // Critic regression toward y.
  Mat X = critic_input(S, U);
  ForwardCache c1, c2;
  Vec q1 = mlp_forward(agent.critic1, X, &c1).row(0).transpose();
  Vec q2 = mlp_forward(agent.critic2, X, &c2).row(0).transpose();
  Vec e1 = q1 - y, e2 = q2 - y;
  double loss1 = e1.squaredNorm() / B;
  double loss2 = e2.squaredNorm() / B;
  MlpGrads g1 = MlpGrads::zeros_like(agent.critic1);
  MlpGrads g2 = MlpGrads::zeros_like(agent.critic2);
  mlp_backward(agent.critic1, c1, (2.0 / B) * e1.transpose(), g1);
  mlp_backward(agent.critic2, c2, (2.0 / B) * e2.transpose(), g2);

  // Score-function actor gradient with a batch-mean baseline, evaluated on
  // fresh on-policy samples at the stored states.
  ForwardCache ca;
  Mat Ya = mlp_forward(agent.actor, S, &ca);
  Mat Ua(m, B);
  Vec logpa(B);
  std::vector<BetaHead> heads(static_cast<std::size_t>(B));
  for (int j = 0; j < B; ++j) {
    BetaHead& h = heads[static_cast<std::size_t>(j)];
    h = head_from_outputs(Ya.col(j), m);
    SampledAction sa = sample_action(h, rng);
    Ua.col(j) = sa.u;
    logpa[j] = sa.log_prob;
  }
  Mat Xa = critic_input(S, Ua);
  Vec qa1 = mlp_forward(agent.critic1, Xa).row(0).transpose();
  Vec qa2 = mlp_forward(agent.critic2, Xa).row(0).transpose();
  Vec adv = qa1.cwiseMin(qa2) - alpha_temp * logpa;
  double baseline = adv.mean();
  double actor_objective = baseline;

  Mat dYa = Mat::Zero(2 * m, B);
  for (int j = 0; j < B; ++j) {
    const BetaHead& h = heads[static_cast<std::size_t>(j)];
    double w = -(adv[j] - baseline) / B;  // descend the negated objective
    for (int i = 0; i < m; ++i) {
      double a = h.alpha[i], b = h.beta[i];
      double psi_ab = digamma(a + b);
      double dlp_da = std::log(Ua(i, j)) - digamma(a) + psi_ab;
      double dlp_db = std::log1p(-Ua(i, j)) - digamma(b) + psi_ab;
      dYa(i, j) = w * dlp_da * head_param_grad(Ya(i, j));
      dYa(m + i, j) = w * dlp_db * head_param_grad(Ya(m + i, j));
    }
  }
  MlpGrads ga = MlpGrads::zeros_like(agent.actor);
  mlp_backward(agent.actor, ca, dYa, ga);

  // Temperature: minimize alpha_temp * (-log pi - target entropy).
  double ent_gap = (-logpa.array() - agent.config.target_entropy).mean();
  double temp_loss = alpha_temp * ent_gap;
  double dlog_alpha = alpha_temp * ent_gap;

  SacLosses losses;
  losses.critic1 = loss1;
  losses.critic2 = loss2;
  losses.actor_objective = actor_objective;
  losses.temperature = temp_loss;
  losses.mean_entropy = -logpa.mean();

  bool ok = std::isfinite(loss1) && std::isfinite(loss2) &&
            std::isfinite(actor_objective) && std::isfinite(dlog_alpha) &&
            g1.finite() && g2.finite() && ga.finite();
  if (!ok) throw std::runtime_error("sac_update produced a non-finite loss or gradient");

  adam_step(agent.critic1, g1, agent.critic1_adam, lr);
  adam_step(agent.critic2, g2, agent.critic2_adam, lr);
  adam_step(agent.actor, ga, agent.actor_adam, lr);
  agent.temp_adam.update(agent.log_alpha_temp, dlog_alpha, agent.config.alpha_temp_lr);

  ++agent.update_count;
  if (agent.update_count % agent.config.target_update_every == 0) target_hard_update(agent);
  return losses;
}

}  // namespace srcp
