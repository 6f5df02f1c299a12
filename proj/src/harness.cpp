#include "srcp/harness.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <deque>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "srcp/csv.hpp"
#include "srcp/train_loop.hpp"

namespace srcp {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Fixed stream salts; every rng an operator-facing command touches derives
// from (master seed, salt) so the arms never share draws.
constexpr std::uint64_t kSaltCorpusTrain = 1;
constexpr std::uint64_t kSaltCorpusTest = 2;
constexpr std::uint64_t kSaltCollect = 3;
constexpr std::uint64_t kSaltDynFit = 4;
constexpr std::uint64_t kSaltAgentInit = 5;
constexpr std::uint64_t kSaltPretrain = 6;
constexpr std::uint64_t kSaltTrain = 7;
constexpr std::uint64_t kSaltEval = 8;
constexpr std::uint64_t kSaltSmallEval = 9;
constexpr std::uint64_t kSaltCorpusPretrain = 10;
constexpr std::uint64_t kSaltCorpusSmallEval = 11;

constexpr char kEpisodeLogHeader[] =
    "episode,trajectory_id,mean_reward,mean_e_q,mean_e_v,mean_ee_err,lr,alpha_temp";
constexpr char kTimingHeader[] = "episode,wall_s";

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::string join(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  os << text;
  os.flush();
  if (!os) throw std::runtime_error("write failed on " + path);
}

void require_file(const std::string& path, const std::string& hint) {
  if (!fs::exists(path))
    throw std::runtime_error(path + " is missing; " + hint);
}

void write_config_used(const RunConfig& cfg) {
  fs::create_directories(cfg.out_dir);
  fs::remove(join(cfg.out_dir, "error.json"));  // stale failure record
  write_text_file(join(cfg.out_dir, "config_used.ini"), run_config_to_text(cfg));
}

void write_json_file(const std::string& path, const json& j) {
  write_text_file(path, j.dump(2) + "\n");
}

int joint_count(const RunConfig& cfg) { return cfg.plant.n_joints; }

std::mt19937_64 stream_rng(std::uint64_t seed, std::uint64_t salt) {
  return std::mt19937_64(mix_seed(seed, salt));
}

struct MeanStd {
  double mean = 0.0, std = 0.0;
};

MeanStd mean_std(const std::vector<double>& xs) {
  MeanStd r;
  if (xs.empty()) return r;
  for (double x : xs) r.mean += x;
  r.mean /= static_cast<double>(xs.size());
  for (double x : xs) r.std += (x - r.mean) * (x - r.mean);
  r.std = std::sqrt(r.std / static_cast<double>(xs.size()));
  return r;
}

// Half-width of the 95% interval on the mean of xs.
double ci95_halfwidth(const MeanStd& ms, std::size_t k) {
  if (k < 2) return 0.0;
  return 1.96 * ms.std / std::sqrt(static_cast<double>(k));
}

std::string payload_tag(double kg) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", kg);
  std::string s(buf);
  for (char& c : s)
    if (c == '.') c = 'p';
  return s;
}

RolloutContext make_context(const RunConfig& cfg, const JointLimits& limits,
                            const ActionBounds& bounds, const ScalingStats* stats,
                            const PlantParams* fk) {
  RolloutContext ctx;
  ctx.limits = &limits;
  ctx.bounds = &bounds;
  ctx.stats = stats;
  ctx.reward = &cfg.reward;
  ctx.fk = fk;
  ctx.dt = cfg.dt;
  return ctx;
}

}  // namespace

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  return splitmix64(seed ^ splitmix64(salt));
}

void write_scaling_stats_csv(const std::string& path, const ScalingStats& stats) {
  std::ostringstream os;
  os << "joint,mu_q,sigma_q,mu_v,sigma_v\n";
  for (Eigen::Index j = 0; j < stats.mu_q.size(); ++j)
    os << j << ',' << g17(stats.mu_q[j]) << ',' << g17(stats.sigma_q[j]) << ','
       << g17(stats.mu_v[j]) << ',' << g17(stats.sigma_v[j]) << '\n';
  write_text_file(path, os.str());
}

ScalingStats read_scaling_stats_csv(const std::string& path) {
  require_file(path, "run collect into this directory first");
  const auto lines = read_lines(path);
  if (lines.empty() || lines[0] != "joint,mu_q,sigma_q,mu_v,sigma_v")
    throw std::runtime_error(path + ": not a scaling-stats file");
  std::vector<std::array<double, 4>> rows;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto f = csv_split(lines[i]);
    if (f.size() != 5)
      throw std::runtime_error(path + ": bad row " + std::to_string(i + 1));
    if (parse_int(f[0]) != static_cast<long long>(rows.size()))
      throw std::runtime_error(path + ": joints out of order");
    rows.push_back({parse_double(f[1]), parse_double(f[2]), parse_double(f[3]),
                    parse_double(f[4])});
  }
  if (rows.empty()) throw std::runtime_error(path + ": no joints");
  ScalingStats s;
  const auto n = static_cast<Eigen::Index>(rows.size());
  s.mu_q = Vec(n);
  s.sigma_q = Vec(n);
  s.mu_v = Vec(n);
  s.sigma_v = Vec(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    s.mu_q[j] = rows[j][0];
    s.sigma_q[j] = rows[j][1];
    s.mu_v[j] = rows[j][2];
    s.sigma_v[j] = rows[j][3];
  }
  return s;
}

void write_dyn_dataset_csv(const std::string& path, const CollectResult& data) {
  if (data.samples.empty()) throw std::runtime_error("empty dynamics dataset");
  const int n = static_cast<int>(data.samples[0].input.size()) / 4;
  std::ostringstream os;
  os << "traj_id,step";
  const char* in_names[] = {"q_o", "qd_o", "q_r", "qd_r"};
  for (const char* name : in_names)
    for (int j = 0; j < n; ++j) os << ',' << name << '_' << j;
  const char* out_names[] = {"next_q_o", "next_qd_o"};
  for (const char* name : out_names)
    for (int j = 0; j < n; ++j) os << ',' << name << '_' << j;
  os << '\n';
  for (std::size_t i = 0; i < data.samples.size(); ++i) {
    const DynSample& s = data.samples[i];
    os << data.sample_traj[i] << ',' << data.sample_step[i];
    for (Eigen::Index k = 0; k < s.input.size(); ++k) os << ',' << g17(s.input[k]);
    for (Eigen::Index k = 0; k < s.target.size(); ++k) os << ',' << g17(s.target[k]);
    os << '\n';
  }
  write_text_file(path, os.str());
}

std::vector<DynSample> read_dyn_dataset_csv(const std::string& path) {
  require_file(path, "run collect into this directory first");
  const auto lines = read_lines(path);
  if (lines.empty()) throw std::runtime_error(path + ": empty file");
  const auto header = csv_split(lines[0]);
  if (header.size() < 8 || header[0] != "traj_id" || (header.size() - 2) % 6 != 0)
    throw std::runtime_error(path + ": not a dynamics dataset");
  const int n = static_cast<int>(header.size() - 2) / 6;
  std::vector<DynSample> out;
  out.reserve(lines.size() - 1);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto f = csv_split(lines[i]);
    if (f.size() != header.size())
      throw std::runtime_error(path + ": ragged row " + std::to_string(i + 1));
    DynSample s;
    s.input = Vec(4 * n);
    s.target = Vec(2 * n);
    for (int k = 0; k < 4 * n; ++k) s.input[k] = parse_double(f[2 + k]);
    for (int k = 0; k < 2 * n; ++k) s.target[k] = parse_double(f[2 + 4 * n + k]);
    out.push_back(std::move(s));
  }
  if (out.empty()) throw std::runtime_error(path + ": no samples");
  return out;
}

std::vector<TrajEval> run_eval_condition(
    const std::vector<ReferenceTrajectory>& corpus, const PlantParams& plant,
    const BaselineGains& gains, const JointLimits& limits,
    const ActionBounds& bounds, const ScalingStats* stats,
    const RewardParams& reward, const SacAgent* agent, double payload_kg,
    double dt, std::uint64_t rng_base) {
  if (payload_kg < 0) throw std::invalid_argument("payload must be nonnegative");
  if (agent && !stats)
    throw std::invalid_argument("policy evaluation needs scaling stats");
  const PlantParams loaded =
      payload_kg > 0 ? set_payload(plant, payload_kg) : plant;

  RolloutContext ctx;
  ctx.limits = &limits;
  ctx.bounds = &bounds;
  ctx.stats = stats;
  ctx.reward = &reward;
  ctx.fk = &loaded;
  ctx.agent = agent;
  ctx.dt = dt;

  EpisodeOptions opts;
  opts.source = agent ? EpisodeOptions::ActionSource::Mode
                      : EpisodeOptions::ActionSource::None;

  std::vector<TrajEval> out;
  out.reserve(corpus.size());
  for (const ReferenceTrajectory& traj : corpus) {
    // One stream per trajectory id: results do not depend on corpus order,
    // and both conditions see the same noise realization.
    std::mt19937_64 rng(mix_seed(rng_base, traj.id));
    PlantBackend env(loaded, gains, dt);
    const EpisodeResult r = run_episode(env, traj, ctx, opts, rng);

    TrajEval ev;
    ev.id = traj.id;
    const int n = static_cast<int>(limits.q_min.size());
    ev.mean_abs_dq = Vec::Zero(n);
    for (const ErrorRecord& rec : r.errors)
      ev.mean_abs_dq += rec.dq.cwiseAbs();
    if (!r.errors.empty())
      ev.mean_abs_dq /= static_cast<double>(r.errors.size());
    ev.summed = ev.mean_abs_dq.sum();
    ev.ee = r.mean_ee_err;
    ev.mean_e_v = r.mean_e_v;
    ev.mean_reward = r.mean_reward;
    out.push_back(std::move(ev));
  }
  return out;
}

void write_error_record(const std::string& dir, const std::string& command,
                        const std::string& what) {
  try {
    fs::create_directories(dir);
    json j{{"command", command}, {"error", what}};
    write_json_file(join(dir, "error.json"), j);
  } catch (...) {
    // Best effort: the original failure is what the caller reports.
  }
}

void cmd_collect(const RunConfig& cfg) {
  cfg.validate();
  write_config_used(cfg);

  CollectConfig cc;
  cc.plant = cfg.plant;
  cc.gains = cfg.gains;
  cc.limits = cfg.limits;
  cc.traj = cfg.traj;
  cc.reward = cfg.reward;
  cc.dt = cfg.dt;
  cc.traj_id_base = kCollectIdBase;

  auto rng = stream_rng(cfg.seed, kSaltCollect);
  const CollectResult data = collect_dataset(cc, cfg.collect_trajectories, rng);
  const ScalingStats stats = compute_scaling_stats(data.errors);

  write_dyn_dataset_csv(join(cfg.out_dir, "dyn_dataset.csv"), data);
  write_scaling_stats_csv(join(cfg.out_dir, "scaling_stats.csv"), stats);

  {
    std::ostringstream os;
    const int n = joint_count(cfg);
    for (int j = 0; j < n; ++j) os << (j ? "," : "") << "dq_" << j;
    for (int j = 0; j < n; ++j) os << ",dqd_" << j;
    os << '\n';
    for (const ErrorRecord& rec : data.errors) {
      for (Eigen::Index j = 0; j < rec.dq.size(); ++j)
        os << (j ? "," : "") << g17(rec.dq[j]);
      for (Eigen::Index j = 0; j < rec.dqd.size(); ++j)
        os << ',' << g17(rec.dqd[j]);
      os << '\n';
    }
    write_text_file(join(cfg.out_dir, "baseline_errors.csv"), os.str());
  }

  json meta{{"command", "collect"},
            {"seed", cfg.seed},
            {"trajectories", cfg.collect_trajectories},
            {"samples", data.samples.size()},
            {"error_records", data.errors.size()},
            {"traj_id_base", kCollectIdBase},
            {"traj_id_count", data.traj_ids.size()}};
  write_json_file(join(cfg.out_dir, "collect_meta.json"), meta);

  std::cout << "collect: " << cfg.collect_trajectories << " trajectories, "
            << data.samples.size() << " dynamics samples -> " << cfg.out_dir
            << "\n";
}

void cmd_pretrain(const RunConfig& cfg) {
  cfg.validate();
  write_config_used(cfg);
  const std::string out = cfg.out_dir;

  const auto dataset = read_dyn_dataset_csv(join(out, "dyn_dataset.csv"));
  const ScalingStats stats = read_scaling_stats_csv(join(out, "scaling_stats.csv"));
  const int n = joint_count(cfg);
  if (static_cast<int>(dataset[0].input.size()) != 4 * n)
    throw std::runtime_error("dynamics dataset joint count disagrees with config");

  auto dyn_rng = stream_rng(cfg.seed, kSaltDynFit);
  const DynTrainResult fit = train_dynamics(dataset, cfg.dyn, dyn_rng);
  save_dyn_model(join(out, "dyn_model.ckpt"), fit.model);
  {
    std::ostringstream os;
    os << "epoch,loss\n";
    for (std::size_t e = 0; e < fit.loss_history.size(); ++e)
      os << e << ',' << g17(fit.loss_history[e]) << '\n';
    write_text_file(join(out, "dyn_loss.csv"), os.str());
  }

  auto agent_rng = stream_rng(cfg.seed, kSaltAgentInit);
  const ActionBounds bounds = cfg.resolved_bounds();
  const StateAssembler assembler(cfg.limits, bounds, stats);
  SacAgent agent =
      SacAgent::make(assembler.state_dim(), 2 * n, cfg.sac, agent_rng);

  auto corpus_rng = stream_rng(cfg.seed, kSaltCorpusPretrain);
  const auto corpus = build_corpus(corpus_rng, cfg.pretrain_episodes, cfg.limits,
                                   cfg.traj, kPretrainIdBase);

  RolloutContext ctx = make_context(cfg, cfg.limits, bounds, &stats, &cfg.plant);
  PretrainConfig pc;
  pc.episodes = cfg.pretrain_episodes;
  pc.lr = cfg.lr;
  auto pre_rng = stream_rng(cfg.seed, kSaltPretrain);
  const PretrainResult pre =
      pretrain_policy(agent, fit.model, corpus, ctx, pc, pre_rng);

  save_agent(join(out, "agent_pretrained.ckpt"), agent);
  {
    std::ostringstream os;
    os << "episode,mean_reward\n";
    for (std::size_t e = 0; e < pre.episode_rewards.size(); ++e)
      os << e << ',' << g17(pre.episode_rewards[e]) << '\n';
    write_text_file(join(out, "pretrain_log.csv"), os.str());
  }

  json meta{{"command", "pretrain"},
            {"seed", cfg.seed},
            {"dyn_epochs", fit.epochs_run},
            {"dyn_loss_first", fit.loss_history.front()},
            {"dyn_loss_final", fit.loss_history.back()},
            {"dyn_mse_raw", dyn_model_mse(fit.model, dataset, false)},
            {"episodes", cfg.pretrain_episodes},
            {"updates", pre.updates},
            {"traj_id_base", kPretrainIdBase},
            {"traj_id_count", corpus.size()}};
  write_json_file(join(out, "pretrain_meta.json"), meta);

  std::cout << "pretrain: dynamics fit " << fit.epochs_run << " epochs (loss "
            << fit.loss_history.front() << " -> " << fit.loss_history.back()
            << "), " << cfg.pretrain_episodes << " sim episodes, "
            << pre.updates << " updates -> " << out << "\n";
}

namespace {

// Keeps the first `first_episode` data rows of a per-episode log so a resumed
// run appends exactly where the interrupted one left off.
void truncate_episode_rows(const std::string& path, const char* header,
                           long first_episode) {
  std::string text = std::string(header) + "\n";
  if (fs::exists(path)) {
    for (const std::string& line : read_lines(path)) {
      if (line.empty() || line == header) continue;
      const auto f = csv_split(line);
      if (f.empty()) continue;
      long ep = -1;
      try {
        ep = static_cast<long>(parse_int(f[0]));
      } catch (const std::exception&) {
        continue;
      }
      if (ep < first_episode) text += line + "\n";
    }
  }
  write_text_file(path, text);
}

std::string ep_ckpt_name(long done) {
  return "agent_ep" + std::to_string(done) + ".ckpt";
}

std::deque<long> existing_ep_ckpts(const std::string& dir) {
  std::deque<long> eps;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (name.rfind("agent_ep", 0) != 0) continue;
    const auto dot = name.find(".ckpt");
    if (dot == std::string::npos) continue;
    try {
      eps.push_back(std::stol(name.substr(8, dot - 8)));
    } catch (const std::exception&) {
    }
  }
  std::sort(eps.begin(), eps.end());
  return eps;
}

}  // namespace

void cmd_train(const RunConfig& cfg, const TrainOptions& opts) {
  cfg.validate();
  write_config_used(cfg);
  const std::string out = cfg.out_dir;
  const int n = joint_count(cfg);

  const ScalingStats stats = read_scaling_stats_csv(join(out, "scaling_stats.csv"));
  const ActionBounds bounds = cfg.resolved_bounds();
  const StateAssembler assembler(cfg.limits, bounds, stats);

  auto corpus_rng = stream_rng(cfg.seed, kSaltCorpusTrain);
  const auto corpus = build_corpus(corpus_rng, cfg.train_episodes, cfg.limits,
                                   cfg.traj, kTrainIdBase);
  auto small_rng = stream_rng(cfg.seed, kSaltCorpusSmallEval);
  const auto small_corpus =
      build_corpus(small_rng, cfg.smalleval_trajectories, cfg.limits, cfg.traj,
                   kSmallEvalIdBase);

  SacAgent agent;
  ReplayBuffer buffer(cfg.sac.replay_capacity);
  auto train_rng = stream_rng(cfg.seed, kSaltTrain);
  long first_episode = 0;
  double best_eval = std::numeric_limits<double>::infinity();
  long best_episode = -1;

  const std::string kind =
      opts.init_checkpoint.empty() ? "" : checkpoint_kind(opts.init_checkpoint);
  if (kind == kKindResume) {
    ResumeState rs = load_resume(opts.init_checkpoint);
    if (rs.seed != cfg.seed)
      throw std::runtime_error("resume checkpoint was written under seed " +
                               std::to_string(rs.seed) + ", config has " +
                               std::to_string(cfg.seed));
    agent = std::move(rs.agent);
    buffer = std::move(rs.buffer);
    std::istringstream is(rs.rng_state);
    is >> train_rng;
    if (!is) throw std::runtime_error("resume checkpoint rng state unreadable");
    first_episode = rs.episode_next;
    if (rs.best_episode >= 0) {
      best_eval = rs.best_eval;
      best_episode = rs.best_episode;
    }
    if (first_episode > cfg.train_episodes)
      throw std::runtime_error("resume checkpoint is past train_episodes");
  } else if (kind == kKindAgent) {
    agent = load_agent(opts.init_checkpoint);
  } else if (!kind.empty()) {
    throw std::runtime_error("cannot start training from a '" + kind +
                             "' checkpoint");
  } else {
    auto agent_rng = stream_rng(cfg.seed, kSaltAgentInit);
    agent = SacAgent::make(assembler.state_dim(), 2 * n, cfg.sac, agent_rng);
  }
  if (agent.state_dim != assembler.state_dim() || agent.action_dim != 2 * n)
    throw std::runtime_error("agent checkpoint dimensions disagree with config");

  const std::string log_path = join(out, "episode_log.csv");
  const std::string timing_path = join(out, "timing.csv");
  std::deque<long> saved;
  if (first_episode > 0) {
    truncate_episode_rows(log_path, kEpisodeLogHeader, first_episode);
    truncate_episode_rows(timing_path, kTimingHeader, first_episode);
    saved = existing_ep_ckpts(out);
  } else {
    // Fresh run: clear anything a previous run left in this directory.
    write_text_file(log_path, std::string(kEpisodeLogHeader) + "\n");
    write_text_file(timing_path, std::string(kTimingHeader) + "\n");
    for (long ep : existing_ep_ckpts(out)) fs::remove(join(out, ep_ckpt_name(ep)));
    for (const char* name :
         {"agent_best.ckpt", "resume.ckpt", "agent_final.ckpt", "train_meta.json",
          "error.json"})
      fs::remove(join(out, name));
  }
  std::ofstream log(log_path, std::ios::binary | std::ios::app);
  std::ofstream timing(timing_path, std::ios::binary | std::ios::app);
  if (!log || !timing) throw std::runtime_error("cannot open logs in " + out);

  PlantBackend env(cfg.plant, cfg.gains, cfg.dt);
  RolloutContext ctx = make_context(cfg, cfg.limits, bounds, &stats, &cfg.plant);

  const std::uint64_t small_eval_base = mix_seed(cfg.seed, kSaltSmallEval);
  auto small_eval_score = [&]() {
    const auto evals =
        run_eval_condition(small_corpus, cfg.plant, cfg.gains, cfg.limits,
                           bounds, &stats, cfg.reward, &agent, 0.0, cfg.dt,
                           small_eval_base);
    double sum = 0.0;
    for (const TrajEval& ev : evals) sum += ev.summed;
    return sum / static_cast<double>(evals.size());
  };

  using clock = std::chrono::steady_clock;
  auto t_prev = clock::now();

  TrainLoopConfig tl;
  tl.episodes = cfg.train_episodes;
  tl.first_episode = static_cast<int>(first_episode);
  tl.lr = cfg.lr;

  auto on_episode = [&](const TrainEpisodeStats& st) {
    log << st.episode << ',' << st.trajectory_id << ',' << g17(st.mean_reward)
        << ',' << g17(st.mean_e_q) << ',' << g17(st.mean_e_v) << ','
        << g17(st.mean_ee_err) << ',' << g17(st.lr) << ',' << g17(st.alpha_temp)
        << '\n';
    log.flush();
    const auto now = clock::now();
    const double wall = std::chrono::duration<double>(now - t_prev).count();
    t_prev = now;
    timing << st.episode << ',' << g17(wall) << '\n';
    timing.flush();

    const long done = st.episode + 1;
    if (done % cfg.checkpoint_every != 0 && done != cfg.train_episodes) return;

    save_agent(join(out, ep_ckpt_name(done)), agent);
    saved.push_back(done);
    while (saved.size() > 3) {
      fs::remove(join(out, ep_ckpt_name(saved.front())));
      saved.pop_front();
    }

    const double score = small_eval_score();
    if (score < best_eval) {
      best_eval = score;
      best_episode = done;
      save_agent(join(out, "agent_best.ckpt"), agent);
    }

    ResumeState rs;
    rs.seed = cfg.seed;
    rs.episode_next = done;
    rs.agent = agent;
    rs.buffer = buffer;
    std::ostringstream oss;
    oss << train_rng;
    rs.rng_state = oss.str();
    rs.best_eval = best_eval;
    rs.best_episode = best_episode;
    save_resume(join(out, "resume.ckpt"), rs);
  };

  run_training_loop(agent, buffer, env, corpus, ctx, tl, train_rng, on_episode);

  save_agent(join(out, "agent_final.ckpt"), agent);
  json meta{{"command", "train"},
            {"seed", cfg.seed},
            {"episodes", cfg.train_episodes},
            {"first_episode", first_episode},
            {"init", opts.init_checkpoint},
            {"traj_id_base", kTrainIdBase},
            {"traj_id_count", corpus.size()},
            {"smalleval_id_base", kSmallEvalIdBase},
            {"smalleval_id_count", small_corpus.size()},
            {"best_episode", best_episode},
            {"best_eval", best_eval},
            {"total_updates", agent.update_count}};
  write_json_file(join(out, "train_meta.json"), meta);

  std::cout << "train: episodes " << first_episode << ".." << cfg.train_episodes
            << ", " << agent.update_count << " updates, best checkpoint at episode "
            << best_episode << " (summed |dq| " << best_eval << ") -> " << out
            << "\n";
}

void cmd_eval(const RunConfig& cfg, const EvalOptions& opts) {
  cfg.validate();
  write_config_used(cfg);
  const std::string out = cfg.out_dir;
  const int n = joint_count(cfg);
  if (opts.payload_kg < 0)
    throw std::invalid_argument("payload must be nonnegative");

  const bool with_policy = opts.policy != "baseline";
  const ActionBounds bounds = cfg.resolved_bounds();

  ScalingStats stats;
  SacAgent agent;
  if (with_policy) {
    stats = read_scaling_stats_csv(join(out, "scaling_stats.csv"));
    require_file(opts.policy, "pass --policy baseline or an agent checkpoint");
    const std::string kind = checkpoint_kind(opts.policy);
    if (kind != kKindAgent)
      throw std::runtime_error("cannot evaluate a '" + kind + "' checkpoint");
    agent = load_agent(opts.policy);
    const StateAssembler assembler(cfg.limits, bounds, stats);
    if (agent.state_dim != assembler.state_dim() || agent.action_dim != 2 * n)
      throw std::runtime_error("agent checkpoint dimensions disagree with config");
  }

  auto corpus_rng = stream_rng(cfg.seed, kSaltCorpusTest);
  const auto corpus = build_corpus(corpus_rng, cfg.eval_trajectories, cfg.limits,
                                   cfg.traj, kTestIdBase);

  const std::uint64_t eval_base = mix_seed(cfg.seed, kSaltEval);
  const auto baseline = run_eval_condition(
      corpus, cfg.plant, cfg.gains, cfg.limits, bounds,
      with_policy ? &stats : nullptr, cfg.reward, nullptr, opts.payload_kg,
      cfg.dt, eval_base);
  std::vector<TrajEval> policy;
  if (with_policy)
    policy = run_eval_condition(corpus, cfg.plant, cfg.gains, cfg.limits, bounds,
                                &stats, cfg.reward, &agent, opts.payload_kg,
                                cfg.dt, eval_base);

  const std::string tag = (with_policy ? std::string("policy") : std::string("baseline")) +
                          "_pl" + payload_tag(opts.payload_kg);

  {
    std::ostringstream os;
    os << "condition,trajectory_id";
    for (int j = 0; j < n; ++j) os << ",mean_abs_dq_" << j;
    os << ",summed_abs_dq,mean_e_v,mean_ee_err,mean_reward\n";
    auto emit = [&](const char* cond, const std::vector<TrajEval>& evals) {
      for (const TrajEval& ev : evals) {
        os << cond << ',' << ev.id;
        for (int j = 0; j < n; ++j) os << ',' << g17(ev.mean_abs_dq[j]);
        os << ',' << g17(ev.summed) << ',' << g17(ev.mean_e_v) << ','
           << g17(ev.ee) << ',' << g17(ev.mean_reward) << '\n';
      }
    };
    emit("baseline", baseline);
    if (with_policy) emit("policy", policy);
    write_text_file(join(out, "eval_traj_" + tag + ".csv"), os.str());
  }

  auto column = [&](const std::vector<TrajEval>& evals, auto&& get) {
    std::vector<double> xs;
    xs.reserve(evals.size());
    for (const TrajEval& ev : evals) xs.push_back(get(ev));
    return xs;
  };
  {
    std::ostringstream os;
    os << "condition,payload_kg,metric,joint,mean,std\n";
    auto emit_metric = [&](const char* cond, const std::string& metric, int joint,
                           const std::vector<double>& xs) {
      const MeanStd ms = mean_std(xs);
      os << cond << ',' << g17(opts.payload_kg) << ',' << metric << ',' << joint
         << ',' << g17(ms.mean) << ',' << g17(ms.std) << '\n';
    };
    auto emit_condition = [&](const char* cond, const std::vector<TrajEval>& evals) {
      for (int j = 0; j < n; ++j)
        emit_metric(cond, "joint_abs_dq", j,
                    column(evals, [&](const TrajEval& ev) { return ev.mean_abs_dq[j]; }));
      emit_metric(cond, "summed_abs_dq", -1,
                  column(evals, [](const TrajEval& ev) { return ev.summed; }));
      emit_metric(cond, "ee_err", -1,
                  column(evals, [](const TrajEval& ev) { return ev.ee; }));
      emit_metric(cond, "e_v", -1,
                  column(evals, [](const TrajEval& ev) { return ev.mean_e_v; }));
      emit_metric(cond, "reward", -1,
                  column(evals, [](const TrajEval& ev) { return ev.mean_reward; }));
    };
    emit_condition("baseline", baseline);
    if (with_policy) {
      emit_condition("policy", policy);
      const double b = mean_std(column(baseline, [](const TrajEval& ev) {
                         return ev.summed;
                       })).mean;
      const double p = mean_std(column(policy, [](const TrajEval& ev) {
                         return ev.summed;
                       })).mean;
      const double be = mean_std(column(baseline, [](const TrajEval& ev) {
                          return ev.ee;
                        })).mean;
      const double pe = mean_std(column(policy, [](const TrajEval& ev) {
                          return ev.ee;
                        })).mean;
      os << "improvement," << g17(opts.payload_kg) << ",reduction_summed_abs_dq,-1,"
         << g17((b - p) / b) << ",0\n";
      os << "improvement," << g17(opts.payload_kg) << ",reduction_ee_err,-1,"
         << g17((be - pe) / be) << ",0\n";
    }
    write_text_file(join(out, "eval_report_" + tag + ".csv"), os.str());
  }

  json meta{{"command", "eval"},
            {"seed", cfg.seed},
            {"tag", tag},
            {"policy", opts.policy},
            {"payload_kg", opts.payload_kg},
            {"trajectories", cfg.eval_trajectories},
            {"traj_id_base", kTestIdBase},
            {"traj_id_count", corpus.size()}};
  const double b_sum =
      mean_std(column(baseline, [](const TrajEval& ev) { return ev.summed; })).mean;
  meta["baseline_summed_abs_dq"] = b_sum;
  if (with_policy) {
    const double p_sum =
        mean_std(column(policy, [](const TrajEval& ev) { return ev.summed; })).mean;
    meta["policy_summed_abs_dq"] = p_sum;
    meta["reduction_summed_abs_dq"] = (b_sum - p_sum) / b_sum;
  }
  write_json_file(join(out, "eval_meta_" + tag + ".json"), meta);

  std::cout << "eval[" << tag << "]: baseline summed |dq| " << b_sum;
  if (with_policy) {
    const double p_sum =
        mean_std(column(policy, [](const TrajEval& ev) { return ev.summed; })).mean;
    std::cout << ", policy " << p_sum << " (" << 100.0 * (b_sum - p_sum) / b_sum
              << "% reduction)";
  }
  std::cout << " over " << corpus.size() << " trajectories -> " << out << "\n";
}

namespace {

struct RunLogs {
  std::string name;  // directory basename, "." for a single-run report
  std::string dir;
  std::vector<long> episodes;
  // column-major: [metric][row]; metrics reward, e_q, e_v, ee
  std::array<std::vector<double>, 4> metrics;
};

RunLogs read_episode_log(const std::string& dir, const std::string& name) {
  RunLogs run;
  run.name = name;
  run.dir = dir;
  const std::string path = join(dir, "episode_log.csv");
  const auto lines = read_lines(path);
  if (lines.empty() || lines[0] != kEpisodeLogHeader)
    throw std::runtime_error(path + ": not an episode log");
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto f = csv_split(lines[i]);
    if (f.size() != 8)
      throw std::runtime_error(path + ": ragged row " + std::to_string(i + 1));
    run.episodes.push_back(static_cast<long>(parse_int(f[0])));
    run.metrics[0].push_back(parse_double(f[2]));  // mean_reward
    run.metrics[1].push_back(parse_double(f[3]));  // mean_e_q
    run.metrics[2].push_back(parse_double(f[4]));  // mean_e_v
    run.metrics[3].push_back(parse_double(f[5]));  // mean_ee_err
  }
  if (run.episodes.empty()) throw std::runtime_error(path + ": no rows");
  return run;
}

// Per-trajectory eval rows of one eval_traj_<tag>.csv, keyed by condition.
struct EvalFile {
  std::string tag;
  double payload = 0.0;
  // condition -> metric name -> per-trajectory values
  std::map<std::string, std::map<std::string, std::vector<double>>> columns;
};

EvalFile read_eval_traj_csv(const std::string& path, const std::string& tag) {
  EvalFile ef;
  ef.tag = tag;
  const auto lines = read_lines(path);
  if (lines.empty()) throw std::runtime_error(path + ": empty file");
  const auto header = csv_split(lines[0]);
  if (header.size() < 6 || header[0] != "condition")
    throw std::runtime_error(path + ": not an eval trajectory file");
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto f = csv_split(lines[i]);
    if (f.size() != header.size())
      throw std::runtime_error(path + ": ragged row " + std::to_string(i + 1));
    auto& cols = ef.columns[f[0]];
    for (std::size_t c = 2; c < f.size(); ++c)
      cols[header[c]].push_back(parse_double(f[c]));
  }
  return ef;
}

struct IdRange {
  std::string what;
  std::uint64_t base = 0;
  std::uint64_t count = 0;
};

void gather_id_range(const std::string& path, const std::string& what,
                     std::vector<IdRange>& out) {
  if (!fs::exists(path)) return;
  std::ifstream is(path);
  json j = json::parse(is, nullptr, true, true);
  if (!j.contains("traj_id_base") || !j.contains("traj_id_count")) return;
  out.push_back({what, j["traj_id_base"].get<std::uint64_t>(),
                 j["traj_id_count"].get<std::uint64_t>()});
}

}  // namespace

void cmd_report(const std::string& dir) {
  if (!fs::is_directory(dir))
    throw std::runtime_error(dir + " is not a directory");
  fs::remove(join(dir, "error.json"));  // stale failure record

  // A run directory directly, or a parent holding several run directories.
  std::vector<RunLogs> runs;
  if (fs::exists(join(dir, "episode_log.csv"))) {
    runs.push_back(read_episode_log(dir, "."));
  } else {
    std::vector<std::string> names;
    for (const auto& entry : fs::directory_iterator(dir))
      if (entry.is_directory() &&
          fs::exists(entry.path() / "episode_log.csv"))
        names.push_back(entry.path().filename().string());
    std::sort(names.begin(), names.end());
    for (const std::string& name : names)
      runs.push_back(read_episode_log(join(dir, name), name));
  }
  if (runs.empty())
    throw std::runtime_error("no episode_log.csv under " + dir +
                             "; train before reporting");

  for (const RunLogs& run : runs)
    if (run.episodes != runs[0].episodes)
      throw std::runtime_error("episode logs disagree across runs (" +
                               runs[0].name + " vs " + run.name + ")");

  // Learning curves: cross-run mean with a 95% band on the mean.
  {
    const char* metric_names[] = {"mean_reward", "mean_e_q", "mean_e_v",
                                  "mean_ee_err"};
    std::ostringstream os;
    os << "episode,n_runs";
    for (const char* m : metric_names)
      os << ',' << m << "_mean," << m << "_lo," << m << "_hi";
    os << '\n';
    const std::size_t k = runs.size();
    for (std::size_t row = 0; row < runs[0].episodes.size(); ++row) {
      os << runs[0].episodes[row] << ',' << k;
      for (int m = 0; m < 4; ++m) {
        std::vector<double> xs;
        xs.reserve(k);
        for (const RunLogs& run : runs) xs.push_back(run.metrics[m][row]);
        const MeanStd ms = mean_std(xs);
        const double hw = ci95_halfwidth(ms, k);
        os << ',' << g17(ms.mean) << ',' << g17(ms.mean - hw) << ','
           << g17(ms.mean + hw);
      }
      os << '\n';
    }
    write_text_file(join(dir, "report_learning.csv"), os.str());
  }

  // Evaluation table: per-run rows from each eval_traj file, then cross-run
  // aggregates over the per-run means.
  {
    std::ostringstream os;
    os << "scope,tag,condition,payload_kg,metric,mean,lo,hi\n";
    // (tag, condition, metric) -> per-run means
    std::map<std::string, std::map<std::string, std::map<std::string, std::vector<double>>>>
        agg;
    for (const RunLogs& run : runs) {
      for (const auto& entry : fs::directory_iterator(run.dir)) {
        const std::string name = entry.path().filename().string();
        if (name.rfind("eval_traj_", 0) != 0 || name.find(".csv") == std::string::npos)
          continue;
        const std::string tag = name.substr(10, name.size() - 10 - 4);
        EvalFile ef = read_eval_traj_csv(entry.path().string(), tag);
        const std::string meta_path = join(run.dir, "eval_meta_" + tag + ".json");
        double payload = 0.0;
        if (fs::exists(meta_path)) {
          std::ifstream is(meta_path);
          json j = json::parse(is, nullptr, true, true);
          payload = j.value("payload_kg", 0.0);
        }
        for (const auto& [cond, cols] : ef.columns) {
          for (const auto& [metric, xs] : cols) {
            const MeanStd ms = mean_std(xs);
            const double hw = ci95_halfwidth(ms, xs.size());
            os << run.name << ',' << tag << ',' << cond << ',' << g17(payload)
               << ',' << metric << ',' << g17(ms.mean) << ','
               << g17(ms.mean - hw) << ',' << g17(ms.mean + hw) << '\n';
            agg[tag][cond][metric].push_back(ms.mean);
          }
        }
        // Paired files also aggregate the improvement itself.
        auto base_it = ef.columns.find("baseline");
        auto pol_it = ef.columns.find("policy");
        if (base_it != ef.columns.end() && pol_it != ef.columns.end()) {
          for (const char* m : {"summed_abs_dq", "mean_ee_err"}) {
            const double b = mean_std(base_it->second.at(m)).mean;
            const double p = mean_std(pol_it->second.at(m)).mean;
            const double red = (b - p) / b;
            os << run.name << ',' << tag << ",improvement," << g17(payload)
               << ",reduction_" << m << ',' << g17(red) << ',' << g17(red)
               << ',' << g17(red) << '\n';
            agg[tag]["improvement"][std::string("reduction_") + m].push_back(red);
          }
        }
      }
    }
    for (const auto& [tag, conds] : agg)
      for (const auto& [cond, metrics] : conds)
        for (const auto& [metric, xs] : metrics) {
          const MeanStd ms = mean_std(xs);
          const double hw = ci95_halfwidth(ms, xs.size());
          os << "aggregate," << tag << ',' << cond << ",," << metric << ','
             << g17(ms.mean) << ',' << g17(ms.mean - hw) << ','
             << g17(ms.mean + hw) << '\n';
        }
    write_text_file(join(dir, "report_eval.csv"), os.str());
  }

  // Corpus disjointness: every recorded id range must be disjoint within a run.
  json disjoint = json::array();
  for (const RunLogs& run : runs) {
    std::vector<IdRange> ranges;
    gather_id_range(join(run.dir, "collect_meta.json"), "collect", ranges);
    gather_id_range(join(run.dir, "pretrain_meta.json"), "pretrain", ranges);
    gather_id_range(join(run.dir, "train_meta.json"), "train", ranges);
    for (const auto& entry : fs::directory_iterator(run.dir)) {
      const std::string name = entry.path().filename().string();
      if (name.rfind("eval_meta_", 0) == 0 && name.find(".json") != std::string::npos)
        gather_id_range(entry.path().string(), name, ranges);
    }
    // Small-eval ids live in train_meta under their own keys.
    if (fs::exists(join(run.dir, "train_meta.json"))) {
      std::ifstream is(join(run.dir, "train_meta.json"));
      json j = json::parse(is, nullptr, true, true);
      if (j.contains("smalleval_id_base"))
        ranges.push_back({"smalleval", j["smalleval_id_base"].get<std::uint64_t>(),
                          j["smalleval_id_count"].get<std::uint64_t>()});
    }
    // Ranges sharing a base are the same corpus reused (several evals roll
    // the one test corpus); merge them before checking cross-corpus overlap.
    std::map<std::uint64_t, IdRange> merged;
    for (const IdRange& r : ranges) {
      auto [it, fresh] = merged.emplace(r.base, r);
      if (!fresh && r.count > it->second.count) it->second = r;
    }
    for (auto a = merged.begin(); a != merged.end(); ++a)
      for (auto b = std::next(a); b != merged.end(); ++b) {
        const IdRange& ra = a->second;
        const IdRange& rb = b->second;
        const bool overlap = ra.base < rb.base + rb.count &&
                             rb.base < ra.base + ra.count;
        if (overlap && ra.count && rb.count)
          throw std::runtime_error("trajectory id ranges overlap in " + run.dir +
                                   ": " + ra.what + " vs " + rb.what);
      }
    json jr = json::array();
    for (const IdRange& r : ranges)
      jr.push_back({{"what", r.what}, {"base", r.base}, {"count", r.count}});
    disjoint.push_back({{"run", run.name}, {"ranges", jr}, {"disjoint", true}});
  }

  // Overlays: two held-out trajectories re-rolled under both conditions with
  // the first run's final agent.
  json overlay_ids = json::array();
  std::string overlay_run;
  for (const RunLogs& run : runs) {
    const std::string agent_path = join(run.dir, "agent_final.ckpt");
    const std::string cfg_path = join(run.dir, "config_used.ini");
    const std::string stats_path = join(run.dir, "scaling_stats.csv");
    if (!fs::exists(agent_path) || !fs::exists(cfg_path) || !fs::exists(stats_path))
      continue;
    const RunConfig rc = load_run_config(cfg_path);
    const ScalingStats stats = read_scaling_stats_csv(stats_path);
    const SacAgent agent = load_agent(agent_path);
    const ActionBounds bounds = rc.resolved_bounds();
    auto corpus_rng = stream_rng(rc.seed, kSaltCorpusTest);
    const auto corpus = build_corpus(corpus_rng, rc.eval_trajectories, rc.limits,
                                     rc.traj, kTestIdBase);
    const std::uint64_t eval_base = mix_seed(rc.seed, kSaltEval);
    const int n = rc.plant.n_joints;

    const std::size_t n_overlay = std::min<std::size_t>(2, corpus.size());
    for (std::size_t i = 0; i < n_overlay; ++i) {
      const ReferenceTrajectory& traj = corpus[i];
      for (const bool with_policy : {false, true}) {
        RolloutContext ctx;
        ctx.limits = &rc.limits;
        ctx.bounds = &bounds;
        ctx.stats = &stats;
        ctx.reward = &rc.reward;
        ctx.fk = &rc.plant;
        ctx.agent = with_policy ? &agent : nullptr;
        ctx.dt = rc.dt;
        EpisodeOptions eo;
        eo.source = with_policy ? EpisodeOptions::ActionSource::Mode
                                : EpisodeOptions::ActionSource::None;
        eo.record_traces = true;
        std::mt19937_64 rng(mix_seed(eval_base, traj.id));
        PlantBackend env(rc.plant, rc.gains, rc.dt);
        const EpisodeResult r = run_episode(env, traj, ctx, eo, rng);

        std::ostringstream os;
        os << "t";
        for (int j = 0; j < n; ++j)
          os << ",q_r_" << j << ",q_f_" << j << ",q_o_" << j;
        os << '\n';
        for (const StepTrace& tr : r.traces) {
          os << g17(tr.t);
          for (int j = 0; j < n; ++j)
            os << ',' << g17(tr.q_r[j]) << ',' << g17(tr.q_f[j]) << ','
               << g17(tr.q_o[j]);
          os << '\n';
        }
        const std::string cond = with_policy ? "policy" : "baseline";
        write_text_file(join(dir, "overlay_" + cond + "_" +
                                      std::to_string(traj.id) + ".csv"),
                        os.str());
      }
      overlay_ids.push_back(traj.id);
    }
    overlay_run = run.name;
    break;
  }

  json meta{{"command", "report"},
            {"n_runs", runs.size()},
            {"ci", "mean +/- 1.96 * std / sqrt(k), population std"},
            {"id_ranges", disjoint},
            {"overlay_run", overlay_run},
            {"overlay_ids", overlay_ids}};
  json names = json::array();
  for (const RunLogs& run : runs) names.push_back(run.name);
  meta["runs"] = names;
  write_json_file(join(dir, "report_meta.json"), meta);

  std::cout << "report: " << runs.size() << " run(s), "
            << runs[0].episodes.size() << " episodes, overlays "
            << overlay_ids.size() << " -> " << dir << "\n";
}

}  // namespace srcp
