#include "srcp/checkpoint.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace srcp {

namespace {

void write_u64(std::ostream& os, std::uint64_t v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

std::uint64_t read_u64(std::istream& is) {
  std::uint64_t v = 0;
  is.read(reinterpret_cast<char*>(&v), sizeof(v));
  if (!is) throw std::runtime_error("checkpoint: truncated integer field");
  return v;
}

void write_f64(std::ostream& os, double v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

double read_f64(std::istream& is) {
  double v = 0;
  is.read(reinterpret_cast<char*>(&v), sizeof(v));
  if (!is) throw std::runtime_error("checkpoint: truncated value field");
  return v;
}

void write_string(std::ostream& os, const std::string& s) {
  write_u64(os, s.size());
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string read_string(std::istream& is) {
  const std::uint64_t n = read_u64(is);
  if (n > (1u << 20)) throw std::runtime_error("checkpoint: implausible string");
  std::string s(n, '\0');
  is.read(s.data(), static_cast<std::streamsize>(n));
  if (!is) throw std::runtime_error("checkpoint: truncated string field");
  return s;
}

void write_vec(std::ostream& os, const Vec& v) {
  write_u64(os, static_cast<std::uint64_t>(v.size()));
  os.write(reinterpret_cast<const char*>(v.data()),
           static_cast<std::streamsize>(v.size() * sizeof(double)));
}

Vec read_vec(std::istream& is) {
  const std::uint64_t n = read_u64(is);
  if (n > (1u << 24)) throw std::runtime_error("checkpoint: implausible vector");
  Vec v(static_cast<Eigen::Index>(n));
  is.read(reinterpret_cast<char*>(v.data()),
          static_cast<std::streamsize>(n * sizeof(double)));
  if (!is) throw std::runtime_error("checkpoint: truncated vector field");
  return v;
}

void write_scalar_adam(std::ostream& os, const ScalarAdam& a) {
  write_f64(os, a.m);
  write_f64(os, a.v);
  write_u64(os, static_cast<std::uint64_t>(a.step));
  write_f64(os, a.beta1);
  write_f64(os, a.beta2);
  write_f64(os, a.eps);
}

ScalarAdam read_scalar_adam(std::istream& is) {
  ScalarAdam a;
  a.m = read_f64(is);
  a.v = read_f64(is);
  a.step = static_cast<long>(read_u64(is));
  a.beta1 = read_f64(is);
  a.beta2 = read_f64(is);
  a.eps = read_f64(is);
  return a;
}

void write_header(std::ostream& os, const char* kind) {
  os.write(kCheckpointMagic, 6);
  write_string(os, kind);
}

std::string read_header(std::istream& is) {
  char magic[6] = {};
  is.read(magic, 6);
  if (!is || std::string(magic, 6) != kCheckpointMagic)
    throw std::runtime_error("checkpoint: bad magic");
  return read_string(is);
}

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot write checkpoint file: " + path);
  return os;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot read checkpoint file: " + path);
  return is;
}

void expect_kind(const std::string& got, const char* want, const std::string& path) {
  if (got != want)
    throw std::runtime_error("checkpoint " + path + " holds '" + got +
                             "', expected '" + want + "'");
}

void write_transition(std::ostream& os, const Transition& t) {
  write_vec(os, t.s);
  write_vec(os, t.u);
  write_f64(os, t.r);
  write_vec(os, t.s_next);
  write_u64(os, t.done ? 1 : 0);
}

Transition read_transition(std::istream& is) {
  Transition t;
  t.s = read_vec(is);
  t.u = read_vec(is);
  t.r = read_f64(is);
  t.s_next = read_vec(is);
  t.done = read_u64(is) != 0;
  return t;
}

}  // namespace

std::string checkpoint_kind(const std::string& path) {
  std::ifstream is = open_in(path);
  return read_header(is);
}

void write_agent_payload(std::ostream& os, const SacAgent& agent) {
  write_u64(os, static_cast<std::uint64_t>(agent.state_dim));
  write_u64(os, static_cast<std::uint64_t>(agent.action_dim));
  write_u64(os, static_cast<std::uint64_t>(agent.update_count));
  const SacConfig& c = agent.config;
  write_f64(os, c.gamma);
  write_f64(os, c.tau);
  write_u64(os, static_cast<std::uint64_t>(c.target_update_every));
  write_u64(os, static_cast<std::uint64_t>(c.minibatch));
  write_u64(os, static_cast<std::uint64_t>(c.replay_capacity));
  write_f64(os, c.replay_ratio);
  write_f64(os, c.target_entropy);
  write_f64(os, c.alpha_temp_init);
  write_f64(os, c.alpha_temp_lr);
  write_u64(os, c.hidden.size());
  for (int h : c.hidden) write_u64(os, static_cast<std::uint64_t>(h));
  write_mlp(os, agent.actor);
  write_mlp(os, agent.critic1);
  write_mlp(os, agent.critic2);
  write_mlp(os, agent.target1);
  write_mlp(os, agent.target2);
  write_adam(os, agent.actor_adam);
  write_adam(os, agent.critic1_adam);
  write_adam(os, agent.critic2_adam);
  write_f64(os, agent.log_alpha_temp);
  write_scalar_adam(os, agent.temp_adam);
}

SacAgent read_agent_payload(std::istream& is) {
  SacAgent agent;
  agent.state_dim = static_cast<int>(read_u64(is));
  agent.action_dim = static_cast<int>(read_u64(is));
  agent.update_count = static_cast<long>(read_u64(is));
  SacConfig& c = agent.config;
  c.gamma = read_f64(is);
  c.tau = read_f64(is);
  c.target_update_every = static_cast<int>(read_u64(is));
  c.minibatch = static_cast<int>(read_u64(is));
  c.replay_capacity = static_cast<int>(read_u64(is));
  c.replay_ratio = read_f64(is);
  c.target_entropy = read_f64(is);
  c.alpha_temp_init = read_f64(is);
  c.alpha_temp_lr = read_f64(is);
  const std::uint64_t nh = read_u64(is);
  if (nh > 16) throw std::runtime_error("checkpoint: implausible hidden spec");
  c.hidden.clear();
  for (std::uint64_t i = 0; i < nh; ++i)
    c.hidden.push_back(static_cast<int>(read_u64(is)));
  agent.actor = read_mlp(is);
  agent.critic1 = read_mlp(is);
  agent.critic2 = read_mlp(is);
  agent.target1 = read_mlp(is);
  agent.target2 = read_mlp(is);
  agent.actor_adam = read_adam(is);
  agent.critic1_adam = read_adam(is);
  agent.critic2_adam = read_adam(is);
  agent.log_alpha_temp = read_f64(is);
  agent.temp_adam = read_scalar_adam(is);
  if (agent.actor.in_dim() != agent.state_dim ||
      agent.actor.out_dim() != 2 * agent.action_dim ||
      agent.critic1.in_dim() != agent.state_dim + agent.action_dim)
    throw std::runtime_error("checkpoint: agent network shapes inconsistent");
  return agent;
}

void save_agent(const std::string& path, const SacAgent& agent) {
  std::ofstream os = open_out(path);
  write_header(os, kKindAgent);
  write_agent_payload(os, agent);
  if (!os) throw std::runtime_error("checkpoint write failed: " + path);
}

SacAgent load_agent(const std::string& path) {
  std::ifstream is = open_in(path);
  expect_kind(read_header(is), kKindAgent, path);
  return read_agent_payload(is);
}

void save_dyn_model(const std::string& path, const DynModel& model) {
  std::ofstream os = open_out(path);
  write_header(os, kKindDynModel);
  write_u64(os, static_cast<std::uint64_t>(model.n_joints));
  write_mlp(os, model.net);
  write_vec(os, model.in_mean);
  write_vec(os, model.in_std);
  write_vec(os, model.out_mean);
  write_vec(os, model.out_std);
  if (!os) throw std::runtime_error("checkpoint write failed: " + path);
}

DynModel load_dyn_model(const std::string& path) {
  std::ifstream is = open_in(path);
  expect_kind(read_header(is), kKindDynModel, path);
  DynModel m;
  m.n_joints = static_cast<int>(read_u64(is));
  m.net = read_mlp(is);
  m.in_mean = read_vec(is);
  m.in_std = read_vec(is);
  m.out_mean = read_vec(is);
  m.out_std = read_vec(is);
  if (m.net.in_dim() != 4 * m.n_joints || m.net.out_dim() != 2 * m.n_joints)
    throw std::runtime_error("checkpoint: dynamics model shapes inconsistent");
  return m;
}

void save_resume(const std::string& path, const ResumeState& state) {
  std::ofstream os = open_out(path);
  write_header(os, kKindResume);
  write_u64(os, state.seed);
  write_u64(os, static_cast<std::uint64_t>(state.episode_next));
  write_agent_payload(os, state.agent);
  write_u64(os, static_cast<std::uint64_t>(state.buffer.capacity()));
  write_u64(os, state.buffer.size());
  write_u64(os, state.buffer.ring_next());
  write_u64(os, static_cast<std::uint64_t>(state.buffer.total_pushed()));
  for (std::size_t i = 0; i < state.buffer.size(); ++i)
    write_transition(os, state.buffer.at(i));
  write_string(os, state.rng_state);
  write_f64(os, state.best_eval);
  write_u64(os, static_cast<std::uint64_t>(state.best_episode));
  if (!os) throw std::runtime_error("checkpoint write failed: " + path);
}

ResumeState load_resume(const std::string& path) {
  std::ifstream is = open_in(path);
  expect_kind(read_header(is), kKindResume, path);
  ResumeState state;
  state.seed = read_u64(is);
  state.episode_next = static_cast<std::int64_t>(read_u64(is));
  state.agent = read_agent_payload(is);
  const int capacity = static_cast<int>(read_u64(is));
  const std::uint64_t n = read_u64(is);
  const std::size_t next = read_u64(is);
  const std::int64_t pushed = static_cast<std::int64_t>(read_u64(is));
  std::vector<Transition> storage;
  storage.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) storage.push_back(read_transition(is));
  state.buffer = ReplayBuffer::restore(capacity, std::move(storage), next, pushed);
  state.rng_state = read_string(is);
  state.best_eval = read_f64(is);
  state.best_episode = static_cast<std::int64_t>(read_u64(is));
  return state;
}

}  // namespace srcp
