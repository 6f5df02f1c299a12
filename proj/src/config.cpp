#include "srcp/config.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>

#include "srcp/csv.hpp"

namespace srcp {

namespace {

std::string fmt_vec(const Vec& v) {
  std::string out;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) out += ' ';
    out += g17(v[i]);
  }
  return out;
}

Vec parse_vec(const std::string& s) {
  std::istringstream is(s);
  std::vector<double> vals;
  std::string tok;
  while (is >> tok) vals.push_back(parse_double(tok));
  if (vals.empty()) throw std::runtime_error("expected at least one number");
  Vec v(static_cast<Eigen::Index>(vals.size()));
  for (std::size_t i = 0; i < vals.size(); ++i) v[static_cast<Eigen::Index>(i)] = vals[i];
  return v;
}

std::string fmt_ivec(const std::vector<int>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ' ';
    out += std::to_string(v[i]);
  }
  return out;
}

std::vector<int> parse_ivec(const std::string& s) {
  std::istringstream is(s);
  std::vector<int> vals;
  std::string tok;
  while (is >> tok) vals.push_back(static_cast<int>(parse_int(tok)));
  if (vals.empty()) throw std::runtime_error("expected at least one integer");
  return vals;
}

bool parse_bool(const std::string& s) {
  if (s == "true") return true;
  if (s == "false") return false;
  throw std::runtime_error("expected true or false, got '" + s + "'");
}

int parse_posint(const std::string& s) { return static_cast<int>(parse_int(s)); }

struct Field {
  const char* section;
  const char* key;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

#define SCALAR_FIELD(sec, name, expr, parser, fmt)                          \
  Field{sec, name, [=](RunConfig& c, const std::string& v) { expr = parser(v); }, \
        [=](const RunConfig& c) { return std::string(fmt(expr)); }}

const std::vector<Field>& registry() {
  auto d = [](const std::string& s) { return parse_double(s); };
  auto u = [](const std::string& s) {
    long long v = parse_int(s);
    if (v < 0) throw std::runtime_error("expected a nonnegative integer");
    return static_cast<std::uint64_t>(v);
  };
  auto fd = [](double v) { return g17(v); };
  auto fi = [](auto v) { return std::to_string(v); };
  auto id = [](const std::string& s) {
    if (s.empty()) throw std::runtime_error("expected a value");
    return s;
  };
  static const std::vector<Field> fields = {
      SCALAR_FIELD("run", "seed", c.seed, u, fi),
      SCALAR_FIELD("run", "out_dir", c.out_dir, id, id),
      SCALAR_FIELD("run", "dt", c.dt, d, fd),
      SCALAR_FIELD("run", "train_episodes", c.train_episodes, parse_posint, fi),
      SCALAR_FIELD("run", "collect_trajectories", c.collect_trajectories, parse_posint, fi),
      SCALAR_FIELD("run", "pretrain_episodes", c.pretrain_episodes, parse_posint, fi),
      SCALAR_FIELD("run", "eval_trajectories", c.eval_trajectories, parse_posint, fi),
      SCALAR_FIELD("run", "checkpoint_every", c.checkpoint_every, parse_posint, fi),
      SCALAR_FIELD("run", "smalleval_trajectories", c.smalleval_trajectories, parse_posint, fi),
      SCALAR_FIELD("run", "eval_payload_kg", c.eval_payload_kg, d, fd),
      SCALAR_FIELD("plant", "n_joints", c.plant.n_joints, parse_posint, fi),
      SCALAR_FIELD("plant", "link_mass", c.plant.link_mass, parse_vec, fmt_vec),
      SCALAR_FIELD("plant", "link_length", c.plant.link_length, parse_vec, fmt_vec),
      SCALAR_FIELD("plant", "link_com", c.plant.link_com, parse_vec, fmt_vec),
      SCALAR_FIELD("plant", "link_inertia", c.plant.link_inertia, parse_vec, fmt_vec),
      SCALAR_FIELD("plant", "joint_stiffness", c.plant.joint_stiffness, parse_vec, fmt_vec),
      SCALAR_FIELD("plant", "joint_damping", c.plant.joint_damping, parse_vec, fmt_vec),
      SCALAR_FIELD("plant", "motor_inertia", c.plant.motor_inertia, parse_vec, fmt_vec),
      SCALAR_FIELD("plant", "motor_damping", c.plant.motor_damping, parse_vec, fmt_vec),
      SCALAR_FIELD("plant", "torque_limit", c.plant.torque_limit, parse_vec, fmt_vec),
      SCALAR_FIELD("plant", "encoder_noise_q", c.plant.encoder_noise_q, parse_vec, fmt_vec),
      SCALAR_FIELD("plant", "encoder_noise_qd", c.plant.encoder_noise_qd, parse_vec, fmt_vec),
      SCALAR_FIELD("plant", "gravity", c.plant.gravity, d, fd),
      SCALAR_FIELD("plant", "latency_steps", c.plant.latency_steps, parse_posint, fi),
      SCALAR_FIELD("plant", "inner_dt", c.plant.inner_dt, d, fd),
      SCALAR_FIELD("gains", "kp", c.gains.kp, parse_vec, fmt_vec),
      SCALAR_FIELD("gains", "kd", c.gains.kd, parse_vec, fmt_vec),
      SCALAR_FIELD("gains", "gravity_scale", c.gains.gravity_scale, d, fd),
      SCALAR_FIELD("limits", "q_min", c.limits.q_min, parse_vec, fmt_vec),
      SCALAR_FIELD("limits", "q_max", c.limits.q_max, parse_vec, fmt_vec),
      SCALAR_FIELD("limits", "qd_lim", c.limits.qd_lim, parse_vec, fmt_vec),
      SCALAR_FIELD("limits", "qdd_lim", c.limits.qdd_lim, parse_vec, fmt_vec),
      SCALAR_FIELD("trajectory", "duration_min", c.traj.duration_min, d, fd),
      SCALAR_FIELD("trajectory", "duration_max", c.traj.duration_max, d, fd),
      SCALAR_FIELD("trajectory", "intermediate_min", c.traj.intermediate_min, parse_posint, fi),
      SCALAR_FIELD("trajectory", "intermediate_max", c.traj.intermediate_max, parse_posint, fi),
      SCALAR_FIELD("trajectory", "waypoint_margin", c.traj.waypoint_margin, d, fd),
      SCALAR_FIELD("trajectory", "max_retries", c.traj.max_retries, parse_posint, fi),
      SCALAR_FIELD("reward", "omega", c.reward.omega, d, fd),
      SCALAR_FIELD("reward", "l_q", c.reward.l_q, d, fd),
      SCALAR_FIELD("reward", "l_v", c.reward.l_v, d, fd),
      SCALAR_FIELD("reward", "reward_scale", c.reward.reward_scale, d, fd),
      SCALAR_FIELD("sac", "gamma", c.sac.gamma, d, fd),
      SCALAR_FIELD("sac", "tau", c.sac.tau, d, fd),
      SCALAR_FIELD("sac", "target_update_every", c.sac.target_update_every, parse_posint, fi),
      SCALAR_FIELD("sac", "minibatch", c.sac.minibatch, parse_posint, fi),
      SCALAR_FIELD("sac", "replay_capacity", c.sac.replay_capacity, parse_posint, fi),
      SCALAR_FIELD("sac", "replay_ratio", c.sac.replay_ratio, d, fd),
      SCALAR_FIELD("sac", "alpha_temp_init", c.sac.alpha_temp_init, d, fd),
      SCALAR_FIELD("sac", "alpha_temp_lr", c.sac.alpha_temp_lr, d, fd),
      SCALAR_FIELD("sac", "hidden", c.sac.hidden, parse_ivec, fmt_ivec),
      SCALAR_FIELD("lr", "lr_min", c.lr.lr_min, d, fd),
      SCALAR_FIELD("lr", "lr_max", c.lr.lr_max, d, fd),
      SCALAR_FIELD("lr", "period", c.lr.period, parse_int, fi),
      Field{"lr", "mode",
            [](RunConfig& c, const std::string& v) {
              if (v == "triangular") c.lr.mode = LrSchedule::Mode::Triangular;
              else if (v == "constant") c.lr.mode = LrSchedule::Mode::Constant;
              else throw std::runtime_error("expected triangular or constant");
            },
            [](const RunConfig& c) -> std::string {
              return c.lr.mode == LrSchedule::Mode::Triangular ? "triangular"
                                                               : "constant";
            }},
      SCALAR_FIELD("dynamics", "lr", c.dyn.lr, d, fd),
      SCALAR_FIELD("dynamics", "minibatch", c.dyn.minibatch, parse_posint, fi),
      SCALAR_FIELD("dynamics", "max_epochs", c.dyn.max_epochs, parse_posint, fi),
      SCALAR_FIELD("dynamics", "stop_window", c.dyn.stop_window, parse_posint, fi),
      SCALAR_FIELD("dynamics", "stop_rel", c.dyn.stop_rel, d, fd),
      Field{"bounds", "override",
            [](RunConfig& c, const std::string& v) { c.bounds_override = parse_bool(v); },
            [](const RunConfig& c) -> std::string {
              return c.bounds_override ? "true" : "false";
            }},
      Field{"bounds", "a_max_q",
            [](RunConfig& c, const std::string& v) { c.bounds.a_max_q = parse_vec(v); },
            [](const RunConfig& c) {
              return c.bounds.a_max_q.size() ? fmt_vec(c.bounds.a_max_q)
                                             : std::string("0");
            }},
      Field{"bounds", "a_max_v",
            [](RunConfig& c, const std::string& v) { c.bounds.a_max_v = parse_vec(v); },
            [](const RunConfig& c) {
              return c.bounds.a_max_v.size() ? fmt_vec(c.bounds.a_max_v)
                                             : std::string("0");
            }},
  };
  return fields;
}

#undef SCALAR_FIELD

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

}  // namespace

double RunConfig::resolved_payload() const {
  if (eval_payload_kg >= 0.0) return eval_payload_kg;
  return 0.5 * plant.link_mass[plant.link_mass.size() - 1];
}

ActionBounds RunConfig::resolved_bounds() const {
  if (bounds_override) return bounds;
  return compute_action_bounds(limits, dt);
}

void RunConfig::validate() const {
  auto bad = [](const std::string& msg) { throw std::runtime_error("config: " + msg); };
  if (out_dir.empty()) bad("out_dir must not be empty");
  if (!(dt > 0)) bad("dt must be positive");
  if (std::abs(traj.dt - dt) > 1e-12) bad("trajectory dt must equal run dt");
  if (eval_trajectories < 1) bad("eval_trajectories must be positive");
  if (checkpoint_every < 1) bad("checkpoint_every must be positive");
  if (smalleval_trajectories < 1) bad("smalleval_trajectories must be positive");
  plant.validate();
  gains.validate(plant.n_joints);
  limits.validate();
  if (limits.q_min.size() != static_cast<Eigen::Index>(plant.n_joints))
    bad("joint limits sized unlike the plant");
  if (traj.duration_min < 0.2 || traj.duration_max < traj.duration_min)
    bad("trajectory durations out of order");
  if (traj.intermediate_min < 0 || traj.intermediate_max < traj.intermediate_min)
    bad("intermediate waypoint counts out of order");
  if (traj.waypoint_margin < 0 || traj.waypoint_margin >= 0.5)
    bad("waypoint margin must be in [0, 0.5)");
  if (traj.max_retries < 1) bad("max_retries must be positive");
  if (!(reward.omega >= 0 && reward.omega <= 1)) bad("reward omega must be in [0,1]");
  if (!(reward.l_q > 0) || !(reward.l_v > 0)) bad("kernel sensitivities must be positive");
  if (!(reward.reward_scale > 0)) bad("reward scale must be positive");
  if (!(sac.gamma > 0 && sac.gamma < 1)) bad("gamma must be in (0,1)");
  if (!(sac.tau > 0 && sac.tau <= 1)) bad("tau must be in (0,1]");
  if (sac.target_update_every < 1) bad("target_update_every must be positive");
  if (sac.minibatch < 1) bad("minibatch must be positive");
  if (sac.replay_capacity < sac.minibatch) bad("replay capacity below minibatch");
  if (!(sac.replay_ratio >= 0)) bad("replay ratio must be nonnegative");
  if (!(sac.alpha_temp_init > 0)) bad("alpha_temp_init must be positive");
  if (!(sac.alpha_temp_lr >= 0)) bad("alpha_temp_lr must be nonnegative");
  if (sac.hidden.empty()) bad("sac hidden layers must be nonempty");
  for (int h : sac.hidden)
    if (h < 1) bad("sac hidden layer sizes must be positive");
  if (!(lr.lr_min > 0) || lr.lr_max < lr.lr_min) bad("lr schedule out of order");
  if (lr.period < 2) bad("lr period must be at least 2");
  if (!(dyn.lr > 0)) bad("dynamics lr must be positive");
  if (dyn.minibatch < 1) bad("dynamics minibatch must be positive");
  if (dyn.max_epochs < 1) bad("dynamics epoch cap must be positive");
  if (dyn.stop_window < 1) bad("dynamics stop window must be positive");
  if (!(dyn.stop_rel >= 0)) bad("dynamics stop threshold must be nonnegative");
  if (bounds_override) {
    const auto n = static_cast<Eigen::Index>(plant.n_joints);
    if (bounds.a_max_q.size() != n || bounds.a_max_v.size() != n)
      bad("bounds override sized unlike the plant");
    if (bounds.a_max_q.minCoeff() <= 0 || bounds.a_max_v.minCoeff() <= 0)
      bad("bounds override must be strictly positive");
  }
}

RunConfig parse_run_config(const std::string& text) {
  RunConfig cfg;
  std::istringstream is(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    if (t.front() == '[') {
      if (t.back() != ']')
        throw std::runtime_error("config line " + std::to_string(lineno) +
                                 ": unterminated section header");
      section = t.substr(1, t.size() - 2);
      bool known = false;
      for (const Field& f : registry()) known = known || section == f.section;
      if (!known)
        throw std::runtime_error("config line " + std::to_string(lineno) +
                                 ": unknown section [" + section + "]");
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("config line " + std::to_string(lineno) +
                               ": expected key = value");
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    const Field* found = nullptr;
    for (const Field& f : registry())
      if (section == f.section && key == f.key) found = &f;
    if (!found)
      throw std::runtime_error("config line " + std::to_string(lineno) +
                               ": unknown key '" + key + "' in section [" +
                               section + "]");
    try {
      found->set(cfg, value);
    } catch (const std::exception& e) {
      throw std::runtime_error("config line " + std::to_string(lineno) +
                               ": bad value for " + key + ": " + e.what());
    }
  }
  cfg.traj.dt = cfg.dt;
  cfg.validate();
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open config file: " + path);
  std::ostringstream buf;
  buf << is.rdbuf();
  return parse_run_config(buf.str());
}

std::string run_config_to_text(const RunConfig& cfg) {
  std::string out;
  std::string section;
  for (const Field& f : registry()) {
    if (section != f.section) {
      if (!out.empty()) out += '\n';
      section = f.section;
      out += '[' + section + "]\n";
    }
    out += std::string(f.key) + " = " + f.get(cfg) + '\n';
  }
  return out;
}

}  // namespace srcp
