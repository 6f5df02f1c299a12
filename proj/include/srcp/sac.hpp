// Soft Actor-Critic with a per-dimension Beta policy: twin critics with
// periodic hard target updates, automatic entropy-temperature tuning, and a
// score-function actor gradient (Beta sampling has no convenient
// reparameterization).
//
// All densities and the entropy target live in the unit action space
// [0,1]^m; the affine rescale to physical corrections has a constant
// Jacobian reported by rescale_action for anyone needing physical-space
// densities.
#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "srcp/mdp.hpp"

namespace srcp {

struct BetaHead {
  Vec alpha, beta;  // per action dimension, each in [1e-4, 10]
};

struct SacConfig {
  double gamma = 0.85;
  double tau = 1.0;  // 1 = hard target update
  int target_update_every = 1000;
  int minibatch = 128;
  int replay_capacity = 200000;
  double replay_ratio = 1.0;  // updates per stored transition
  double target_entropy = -4.0;  // -m; overwritten by SacAgent::make
  double alpha_temp_init = 0.2;
  double alpha_temp_lr = 3e-4;
  std::vector<int> hidden = {80, 80};
};

struct Transition {
  Vec s;
  Vec u;  // unit-interval action, in [0,1]^m
  double r;  // scaled reward
  Vec s_next;
  bool done;  // true only at episode end
};

class ReplayBuffer {
 public:
  explicit ReplayBuffer(int capacity);

  void push(Transition t);
  std::size_t size() const { return storage_.size(); }
  int capacity() const { return capacity_; }
  std::int64_t total_pushed() const { return total_pushed_; }
  const Transition& at(std::size_t i) const { return storage_[i]; }

  // Uniform with replacement; requires size() >= k.
  std::vector<std::size_t> sample_indices(int k, std::mt19937_64& rng) const;

  void clear();

  // Checkpoint plumbing: raw storage order plus the ring insertion point,
  // so a restored buffer yields identical samples for identical rng draws.
  std::size_t ring_next() const { return next_; }
  static ReplayBuffer restore(int capacity, std::vector<Transition> storage,
                              std::size_t next, std::int64_t total_pushed);

 private:
  int capacity_;
  std::vector<Transition> storage_;
  std::size_t next_ = 0;  // ring insertion point once full
  std::int64_t total_pushed_ = 0;
};

std::vector<Transition> replay_sample(const ReplayBuffer& buffer, int k,
                                      std::mt19937_64& rng);

struct SacAgent {
  Mlp actor;  // state_dim -> hidden -> 2m, tanh hidden, sigmoid output
  Mlp critic1, critic2;   // state_dim + m -> hidden -> 1, linear output
  Mlp target1, target2;
  AdamState actor_adam, critic1_adam, critic2_adam;
  double log_alpha_temp = 0.0;
  ScalarAdam temp_adam;
  SacConfig config;
  std::int64_t update_count = 0;
  int state_dim = 0;
  int action_dim = 0;

  double alpha_temp() const { return std::exp(log_alpha_temp); }

  // Init order: actor, critic1, critic2; targets start as copies of the
  // critics.
  static SacAgent make(int state_dim, int action_dim, const SacConfig& config,
                       std::mt19937_64& rng);
};

// Actor output layout: first m entries alpha, last m entries beta, each
// sigmoid -> clip to [1e-5, 1] -> x10.
BetaHead actor_forward(const Mlp& actor, const Vec& s);

double log_beta_pdf(double u, double a, double b);

// Independent Beta draws per dimension (two gamma draws each; per-dimension
// order alpha-gamma then beta-gamma). Samples are clamped into
// [1e-12, 1-1e-12] so the log-density stays finite.
struct SampledAction {
  Vec u;
  double log_prob;
};
SampledAction sample_action(const BetaHead& head, std::mt19937_64& rng);

double log_prob_of(const BetaHead& head, const Vec& u);

// Per-dimension mode; 0.5 for the bimodal both-parameters-below-one case.
Vec action_mode(const BetaHead& head);

// u in [0,1]^m -> physical correction; bounds order [a_max_q; a_max_v].
// log_density_correction = -sum log(2 a_max_i), the constant Jacobian term.
struct RescaledAction {
  Action action;
  double log_density_correction;
};
RescaledAction rescale_action(const Vec& u, const ActionBounds& bounds);

double critic_forward(const Mlp& critic, const Vec& s, const Vec& u);

void target_hard_update(SacAgent& agent);

struct SacLosses {
  double critic1, critic2;
  double actor_objective;  // mean(min Q - alpha_temp * log pi), maximized
  double temperature;
  double mean_entropy;  // -mean log pi of the fresh actor samples
};

// One gradient step on critics, actor, and temperature from the given batch
// (size must equal config.minibatch). Deterministic given the rng state,
// which feeds the fresh policy samples. Hard-updates the targets every
// config.target_update_every calls. A non-finite loss or gradient throws
// before any parameter is touched.
SacLosses sac_update(SacAgent& agent, const std::vector<Transition>& batch,
                     double lr, std::mt19937_64& rng);

}  // namespace srcp
