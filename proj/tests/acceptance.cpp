// Acceptance campaign for the reference-correction training stack. Each
// criterion prints one [PASS]/[FAIL] line plus indented evidence; the exit
// code is the number of failed criteria.
//
// The learning criteria (1, 2, 3, 7) consume full pipeline runs cached under
// acceptance_cache/ relative to the working directory. A cached run counts
// only when its config_used.ini matches the expected bytes and its metadata
// shows a completed 1000-episode run; anything else is rebuilt from scratch.
// Cold cache costs on the order of two hours on one core; warm reruns take
// minutes. --only=1,4 restricts the criteria run; --cache=DIR relocates the
// cache.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unsupported/Eigen/SpecialFunctions>

#include "json.hpp"
#include "oracles.hpp"
#include "srcp/checkpoint.hpp"
#include "srcp/csv.hpp"
#include "srcp/harness.hpp"
#include "srcp/rollout.hpp"
#include "srcp/train_loop.hpp"

using namespace srcp;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string g_cache = "acceptance_cache";
std::vector<std::string> g_notes;

void note(const std::string& s) { g_notes.push_back(s); }

std::string fmt(double v, int prec = 6) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
  return buf;
}

struct Outcome {
  bool ok = false;
  std::string headline;
};

// ---------------------------------------------------------------------------
// Small file plumbing.

std::string slurp(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

json slurp_json(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path);
  json j;
  is >> j;
  return j;
}

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int col(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return static_cast<int>(i);
    throw std::runtime_error("missing column " + name);
  }
};

Table read_table(const std::string& path) {
  Table t;
  auto lines = read_lines(path);
  if (lines.empty()) throw std::runtime_error("empty table " + path);
  t.header = csv_split(lines[0]);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    t.rows.push_back(csv_split(lines[i]));
  }
  return t;
}

std::string payload_tag(double kg) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", kg);
  std::string s = buf;
  for (auto& c : s)
    if (c == '.') c = 'p';
  return s;
}

// ---------------------------------------------------------------------------
// Production runs backing the learning criteria: three seeds, each trained
// once from the pretrained initialization and once from scratch, then
// evaluated on the held-out corpus with and without payload.

struct ArmSpec {
  std::string name;
  std::uint64_t seed;
  bool pretrained;
};

const std::vector<ArmSpec> kArms = {
    {"s1_pre", 1, true},  {"s1_rand", 1, false}, {"s2_pre", 2, true},
    {"s2_rand", 2, false}, {"s3_pre", 3, true},  {"s3_rand", 3, false},
};

std::string arm_dir(const std::string& name) { return g_cache + "/" + name; }

RunConfig arm_config(const ArmSpec& arm) {
  RunConfig cfg;
  cfg.seed = arm.seed;
  cfg.out_dir = arm_dir(arm.name);
  return cfg;
}

// A cached run is reusable only when it was produced by exactly this config
// and ran to completion with both evaluations present.
bool arm_cache_valid(const ArmSpec& arm, std::string* why) {
  const std::string dir = arm_dir(arm.name);
  const RunConfig cfg = arm_config(arm);
  auto missing = [&](const std::string& f) {
    if (fs::exists(dir + "/" + f)) return false;
    *why = "missing " + f;
    return true;
  };
  if (!fs::exists(dir + "/config_used.ini")) {
    *why = "missing config_used.ini";
    return false;
  }
  if (slurp(dir + "/config_used.ini") != run_config_to_text(cfg)) {
    *why = "config_used.ini does not match the expected configuration";
    return false;
  }
  if (fs::exists(dir + "/error.json")) {
    *why = "error.json present";
    return false;
  }
  if (missing("scaling_stats.csv") || missing("agent_final.ckpt") ||
      missing("train_meta.json") || missing("episode_log.csv"))
    return false;
  if (arm.pretrained &&
      (missing("agent_pretrained.ckpt") || missing("pretrain_meta.json")))
    return false;
  const std::string tag = payload_tag(cfg.resolved_payload());
  if (missing("eval_traj_policy_pl0.csv") ||
      missing("eval_meta_policy_pl0.json") ||
      missing("eval_traj_policy_pl" + tag + ".csv") ||
      missing("eval_meta_policy_pl" + tag + ".json"))
    return false;

  json meta = slurp_json(dir + "/train_meta.json");
  if (meta.value("episodes", -1) != cfg.train_episodes ||
      meta.value("first_episode", -1) != 0) {
    *why = "train_meta.json shows an incomplete run";
    return false;
  }
  const std::string init = meta.value("init", std::string("?"));
  const bool init_pre = init.find("agent_pretrained.ckpt") != std::string::npos;
  if (init_pre != arm.pretrained) {
    *why = "train_meta.json init does not match the arm (" + init + ")";
    return false;
  }
  Table log = read_table(dir + "/episode_log.csv");
  if (static_cast<int>(log.rows.size()) != cfg.train_episodes) {
    *why = "episode_log.csv has " + std::to_string(log.rows.size()) + " rows";
    return false;
  }
  return true;
}

void run_arm(const ArmSpec& arm) {
  const RunConfig cfg = arm_config(arm);
  const std::string dir = arm_dir(arm.name);
  fs::remove_all(dir);
  cmd_collect(cfg);
  TrainOptions topt;
  if (arm.pretrained) {
    cmd_pretrain(cfg);
    topt.init_checkpoint = dir + "/agent_pretrained.ckpt";
  }
  cmd_train(cfg, topt);
  EvalOptions nominal;
  nominal.policy = dir + "/agent_final.ckpt";
  nominal.payload_kg = 0.0;
  cmd_eval(cfg, nominal);
  EvalOptions payload = nominal;
  payload.payload_kg = cfg.resolved_payload();
  cmd_eval(cfg, payload);
}

// Memoized: a run executes at most once per process; a failed build is
// reported identically on every later request instead of retried.
std::map<std::string, std::string> g_arm_state;

const ArmSpec& find_arm(const std::string& name) {
  for (const auto& a : kArms)
    if (a.name == name) return a;
  throw std::logic_error("unknown arm " + name);
}

void ensure_arm(const std::string& name) {
  auto it = g_arm_state.find(name);
  if (it != g_arm_state.end()) {
    if (!it->second.empty()) throw std::runtime_error(it->second);
    return;
  }
  const ArmSpec& arm = find_arm(name);
  std::string why;
  if (arm_cache_valid(arm, &why)) {
    std::cout << "[setup] reusing cached run " << arm_dir(name) << "\n"
              << std::flush;
    g_arm_state[name] = "";
    return;
  }
  std::cout << "[setup] building run " << arm_dir(name) << " (seed " << arm.seed
            << ", " << (arm.pretrained ? "pretrained" : "from scratch")
            << "; cache said: " << why << ")\n"
            << std::flush;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    run_arm(arm);
  } catch (const std::exception& e) {
    g_arm_state[name] = "run " + name + " failed: " + e.what();
    throw std::runtime_error(g_arm_state[name]);
  }
  if (!arm_cache_valid(arm, &why)) {
    g_arm_state[name] = "run " + name + " finished but failed validation: " + why;
    throw std::runtime_error(g_arm_state[name]);
  }
  const double secs = std::chrono::duration<double>(
                          std::chrono::steady_clock::now() - t0)
                          .count();
  std::cout << "[setup] " << name << " done in " << fmt(secs, 4) << " s\n"
            << std::flush;
  g_arm_state[name] = "";
}

// Mean of one numeric column over rows matching a condition value.
double condition_mean(const Table& t, const std::string& condition,
                      const std::string& column, int* count = nullptr) {
  const int cc = t.col("condition");
  const int vc = t.col(column);
  double sum = 0.0;
  int n = 0;
  for (const auto& row : t.rows)
    if (row[cc] == condition) {
      sum += parse_double(row[vc]);
      ++n;
    }
  if (count) *count = n;
  if (n == 0) throw std::runtime_error("no rows for condition " + condition);
  return sum / n;
}

double train_wall_seconds(const std::string& dir) {
  Table t = read_table(dir + "/timing.csv");
  const int wc = t.col("wall_s");
  double sum = 0.0;
  for (const auto& row : t.rows) sum += parse_double(row[wc]);
  return sum;
}

// Tracking-error reduction of the final policy on the held-out corpus for
// one payload, recomputed from the per-trajectory rows and cross-checked
// against the evaluation's own summary.
struct EvalOutcome {
  double baseline = 0.0;
  double policy = 0.0;
  double reduction = 0.0;
  bool consistent = false;
  int n_baseline = 0;
  int n_policy = 0;
};

EvalOutcome eval_outcome(const std::string& dir, const std::string& tag) {
  EvalOutcome out;
  Table t = read_table(dir + "/eval_traj_policy_pl" + tag + ".csv");
  out.baseline = condition_mean(t, "baseline", "summed_abs_dq", &out.n_baseline);
  out.policy = condition_mean(t, "policy", "summed_abs_dq", &out.n_policy);
  out.reduction = 1.0 - out.policy / out.baseline;
  json meta = slurp_json(dir + "/eval_meta_policy_pl" + tag + ".json");
  const double reported = meta.value("reduction_summed_abs_dq", -1.0);
  out.consistent = std::abs(reported - out.reduction) <= 1e-9;
  return out;
}

// ---------------------------------------------------------------------------
// Criterion 1: trained policy under mode-action inference cuts the held-out
// mean per-point summed-L1 position error by at least half against the
// baseline controller, in at least 2 of 3 seeds, within 30 min of training
// per run.

Outcome crit1() {
  int passed = 0;
  for (const std::uint64_t seed : {1, 2, 3}) {
    const std::string name = "s" + std::to_string(seed) + "_pre";
    ensure_arm(name);
    const std::string dir = arm_dir(name);
    EvalOutcome ev = eval_outcome(dir, "0");
    const double wall = train_wall_seconds(dir);
    const bool ok = ev.reduction >= 0.50 && wall <= 1800.0 &&
                    ev.consistent && ev.n_baseline == 100 && ev.n_policy == 100;
    if (ok) ++passed;
    note("seed " + std::to_string(seed) + ": summed |dq| " + fmt(ev.baseline) +
         " -> " + fmt(ev.policy) + ", reduction " + fmt(100 * ev.reduction, 4) +
         "% (need >= 50%), train wall " + fmt(wall, 4) + " s (limit 1800)" +
         (ev.consistent ? "" : ", MISMATCH vs eval_meta") +
         (ok ? "" : "  <- miss"));
  }
  return {passed >= 2, "held-out tracking error halved in " +
                           std::to_string(passed) + "/3 seeds"};
}

// ---------------------------------------------------------------------------
// Criterion 2: with an unseen payload of half the last link's mass, the same
// policies still cut the error by at least 30% in at least 2 of 3 seeds.

Outcome crit2() {
  const RunConfig defaults;
  const double payload = defaults.resolved_payload();
  const std::string tag = payload_tag(payload);
  int passed = 0;
  for (const std::uint64_t seed : {1, 2, 3}) {
    const std::string name = "s" + std::to_string(seed) + "_pre";
    ensure_arm(name);
    EvalOutcome ev = eval_outcome(arm_dir(name), tag);
    const bool ok = ev.reduction >= 0.30 && ev.consistent &&
                    ev.n_baseline == 100 && ev.n_policy == 100;
    if (ok) ++passed;
    note("seed " + std::to_string(seed) + ", payload " + fmt(payload) +
         " kg: summed |dq| " + fmt(ev.baseline) + " -> " + fmt(ev.policy) +
         ", reduction " + fmt(100 * ev.reduction, 4) + "% (need >= 30%)" +
         (ev.consistent ? "" : ", MISMATCH vs eval_meta") +
         (ok ? "" : "  <- miss"));
  }
  return {passed >= 2, "payload tracking error cut >= 30% in " +
                           std::to_string(passed) + "/3 seeds"};
}

// ---------------------------------------------------------------------------
// Criterion 3: the pretrained agent starts above the from-scratch agent
// (mean unscaled reward over the first 50 plant episodes) in at least 2 of 3
// seed pairs, and both variants converge to final-100-episode rewards that
// agree within 10% (same 2-of-3 standard).

Outcome crit3() {
  int higher_start = 0;
  int converged_close = 0;
  for (const std::uint64_t seed : {1, 2, 3}) {
    const std::string pre = "s" + std::to_string(seed) + "_pre";
    const std::string rnd = "s" + std::to_string(seed) + "_rand";
    ensure_arm(pre);
    ensure_arm(rnd);
    auto mean_reward = [](const std::string& dir, int lo, int hi) {
      Table t = read_table(dir + "/episode_log.csv");
      const int ec = t.col("episode");
      const int rc = t.col("mean_reward");
      double sum = 0.0;
      int n = 0;
      for (const auto& row : t.rows) {
        const long ep = parse_int(row[ec]);
        if (ep >= lo && ep < hi) {
          sum += parse_double(row[rc]);
          ++n;
        }
      }
      if (n != hi - lo) throw std::runtime_error("episode rows missing in " + dir);
      return sum / n;
    };
    const double p50 = mean_reward(arm_dir(pre), 0, 50);
    const double r50 = mean_reward(arm_dir(rnd), 0, 50);
    const double pf = mean_reward(arm_dir(pre), 900, 1000);
    const double rf = mean_reward(arm_dir(rnd), 900, 1000);
    const double scale = std::max(std::abs(pf), std::abs(rf));
    const double gap = scale == 0.0 ? 0.0 : std::abs(pf - rf) / scale;
    const bool start_ok = p50 > r50;
    const bool final_ok = gap <= 0.10;
    if (start_ok) ++higher_start;
    if (final_ok) ++converged_close;
    note("seed " + std::to_string(seed) + ": first-50 reward pretrained " +
         fmt(p50) + " vs scratch " + fmt(r50) +
         (start_ok ? " (higher)" : " (NOT higher)") + "; final-100 " + fmt(pf) +
         " vs " + fmt(rf) + ", gap " + fmt(100 * gap, 3) + "% (need <= 10%)");
  }
  return {higher_start >= 2 && converged_close >= 2,
          "pretrained starts higher in " + std::to_string(higher_start) +
              "/3, final rewards agree in " + std::to_string(converged_close) +
              "/3"};
}

// ---------------------------------------------------------------------------
// Criterion 4: reward is exactly 1 at perfect tracking; the kernel value at
// (0.05, 32) matches a high-precision evaluation; the kernel is symmetric
// and strictly decreasing in |x| over 10^4-point sweeps.

Outcome crit4() {
  const RewardParams rp;
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> qd_dist(-2.0, 2.0);
  bool perfect = true;
  for (int i = 0; i < 100; ++i) {
    Vec q(2), qd(2);
    for (int j = 0; j < 2; ++j) {
      q[j] = qd_dist(rng);
      qd[j] = qd_dist(rng);
    }
    RewardResult r = compute_reward(q, qd, q, qd, rp);
    perfect = perfect && r.r == 1.0 && r.r_q == 1.0 && r.r_v == 1.0 &&
              r.e_q == 0.0 && r.e_v == 0.0 && r.scaled == rp.reward_scale;
  }
  note(std::string("perfect tracking: r == 1 exactly on 100 random states: ") +
       (perfect ? "yes" : "NO"));

  // High-precision reference at the same double arguments the library sees.
  const double k_lib = logistic_kernel(0.05, 32.0);
  const long double xl = static_cast<long double>(0.05) * 32.0L;
  const double k_ref =
      static_cast<double>(2.0L / (std::exp(xl) + std::exp(-xl)));
  const bool value_ok = std::abs(k_lib - k_ref) <= 1e-5;
  note("K(0.05, 32) = " + fmt(k_lib, 17) + ", high-precision reference " +
       fmt(k_ref, 17) + ", |diff| = " + fmt(std::abs(k_lib - k_ref), 3) +
       " (tol 1e-5)");
  note("nominal constant 0.38800 is the value above rounded to three "
       "decimals; as printed it sits " +
       fmt(std::abs(k_lib - 0.38800), 3) +
       " from the defining expression, so the binding comparison is the "
       "high-precision evaluation");

  bool sweep_ok = true;
  for (const double l : {32.0, 7.0}) {
    const double span = l > 10.0 ? 0.6 : 2.0;
    double prev = logistic_kernel(0.0, l);
    if (prev != 1.0) sweep_ok = false;
    for (int i = 1; i < 10000; ++i) {
      const double x = span * i / 9999.0;
      const double k = logistic_kernel(x, l);
      if (!(k < prev)) sweep_ok = false;
      if (logistic_kernel(-x, l) != k) sweep_ok = false;
      prev = k;
    }
  }
  note(std::string("symmetry and strict decrease over 10^4-point sweeps "
                   "(l = 32 and 7): ") +
       (sweep_ok ? "yes" : "NO"));
  return {perfect && value_ok && sweep_ok, "reward/kernel contract holds"};
}

// ---------------------------------------------------------------------------
// Criterion 5: central finite differences (h = 1e-6) match the analytic
// gradients to 1e-4 relative error for the production actor, critic, and
// dynamics-model architectures, 100 random points each, under one minute.

void pick_params(Mlp& net, const MlpGrads& grads, int count,
                 std::mt19937_64& rng, std::vector<double*>& params,
                 std::vector<double>& analytic) {
  std::uniform_int_distribution<int> li(0, static_cast<int>(net.layers.size()) - 1);
  std::uniform_int_distribution<int> kind(0, 4);
  for (int k = 0; k < count; ++k) {
    const int l = li(rng);
    Layer& layer = net.layers[l];
    if (kind(rng) == 0) {
      std::uniform_int_distribution<int> bi(0, static_cast<int>(layer.b.size()) - 1);
      const int i = bi(rng);
      params.push_back(&layer.b[i]);
      analytic.push_back(grads.db[l][i]);
    } else {
      std::uniform_int_distribution<int> ri(0, static_cast<int>(layer.W.rows()) - 1);
      std::uniform_int_distribution<int> ci(0, static_cast<int>(layer.W.cols()) - 1);
      const int r = ri(rng), c = ci(rng);
      params.push_back(&layer.W(r, c));
      analytic.push_back(grads.dW[l](r, c));
    }
  }
}

Outcome crit5() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(211);
  std::uniform_real_distribution<double> u_dist(0.05, 0.95);
  std::uniform_real_distribution<double> w_dist(0.5, 2.0);
  std::bernoulli_distribution flip(0.5);
  const int kPoints = 100;
  const int kParamsPerPoint = 8;
  double worst_actor = 0.0, worst_critic = 0.0, worst_dyn = 0.0;
  int n_actor = 0, n_critic = 0, n_dyn = 0;

  // Actor head: loss is the weighted negative log-density of a fixed action,
  // the exact quantity the policy update differentiates. The upstream
  // gradient walks back through the x10 gain and the clipped sigmoid.
  for (int p = 0; p < kPoints; ++p) {
    Mlp actor = Mlp::make({32, 80, 80, 8},
                          {Activation::Tanh, Activation::Tanh, Activation::Sigmoid},
                          rng);
    Vec s = Vec::Random(32);
    Vec u(4);
    for (int i = 0; i < 4; ++i) u[i] = u_dist(rng);
    const double w = (flip(rng) ? 1.0 : -1.0) * w_dist(rng);
    auto loss = [&]() { return -w * log_prob_of(actor_forward(actor, s), u); };

    ForwardCache cache;
    Mat y = mlp_forward(actor, s, &cache);
    BetaHead h = actor_forward(actor, s);
    Mat dY(8, 1);
    for (int i = 0; i < 4; ++i) {
      const double a = h.alpha[i], b = h.beta[i];
      const double psi_ab = Eigen::numext::digamma(a + b);
      const double dlp_da = std::log(u[i]) - Eigen::numext::digamma(a) + psi_ab;
      const double dlp_db = std::log1p(-u[i]) - Eigen::numext::digamma(b) + psi_ab;
      const bool clip_a = y(i, 0) <= 1e-5 || y(i, 0) >= 1.0;
      const bool clip_b = y(4 + i, 0) <= 1e-5 || y(4 + i, 0) >= 1.0;
      dY(i, 0) = -w * dlp_da * (clip_a ? 0.0 : 10.0);
      dY(4 + i, 0) = -w * dlp_db * (clip_b ? 0.0 : 10.0);
    }
    MlpGrads grads = MlpGrads::zeros_like(actor);
    mlp_backward(actor, cache, dY, grads);
    std::vector<double*> params;
    std::vector<double> analytic;
    pick_params(actor, grads, kParamsPerPoint, rng, params, analytic);
    auto rep = oracles::fd_check(loss, params, analytic, 1e-6, 1e-5);
    worst_actor = std::max(worst_actor, rep.max_rel_err);
    n_actor += rep.n_params;
  }

  // Critic: weighted Q-value through the state/action concatenation.
  for (int p = 0; p < kPoints; ++p) {
    Mlp critic = Mlp::make({36, 80, 80, 1},
                           {Activation::Tanh, Activation::Tanh, Activation::Linear},
                           rng);
    Vec s = Vec::Random(32);
    Vec u(4);
    for (int i = 0; i < 4; ++i) u[i] = u_dist(rng);
    const double w = (flip(rng) ? 1.0 : -1.0) * w_dist(rng);
    auto loss = [&]() { return w * critic_forward(critic, s, u); };

    Vec x(36);
    x << s, u;
    ForwardCache cache;
    mlp_forward(critic, x, &cache);
    MlpGrads grads = MlpGrads::zeros_like(critic);
    mlp_backward(critic, cache, Mat::Constant(1, 1, w), grads);
    std::vector<double*> params;
    std::vector<double> analytic;
    pick_params(critic, grads, kParamsPerPoint, rng, params, analytic);
    auto rep = oracles::fd_check(loss, params, analytic, 1e-6, 1e-5);
    worst_critic = std::max(worst_critic, rep.max_rel_err);
    n_critic += rep.n_params;
  }

  // Dynamics model: squared-error regression loss, its training objective.
  for (int p = 0; p < kPoints; ++p) {
    Mlp dyn = Mlp::make({8, 64, 32, 4},
                        {Activation::Tanh, Activation::Tanh, Activation::Linear},
                        rng);
    Vec x = Vec::Random(8);
    Vec target = Vec::Random(4);
    auto loss = [&]() {
      return 0.5 * (mlp_forward(dyn, x) - Mat(target)).squaredNorm();
    };

    ForwardCache cache;
    Mat y = mlp_forward(dyn, x, &cache);
    MlpGrads grads = MlpGrads::zeros_like(dyn);
    mlp_backward(dyn, cache, y - Mat(target), grads);
    std::vector<double*> params;
    std::vector<double> analytic;
    pick_params(dyn, grads, kParamsPerPoint, rng, params, analytic);
    auto rep = oracles::fd_check(loss, params, analytic, 1e-6, 1e-5);
    worst_dyn = std::max(worst_dyn, rep.max_rel_err);
    n_dyn += rep.n_params;
  }

  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  note("actor: " + std::to_string(kPoints) + " points, " +
       std::to_string(n_actor) + " parameters, worst rel err " +
       fmt(worst_actor, 3));
  note("critic: " + std::to_string(kPoints) + " points, " +
       std::to_string(n_critic) + " parameters, worst rel err " +
       fmt(worst_critic, 3));
  note("dynamics: " + std::to_string(kPoints) + " points, " +
       std::to_string(n_dyn) + " parameters, worst rel err " +
       fmt(worst_dyn, 3));
  note("wall " + fmt(secs, 3) + " s (limit 60)");
  const bool ok = worst_actor <= 1e-4 && worst_critic <= 1e-4 &&
                  worst_dyn <= 1e-4 && secs < 60.0;
  return {ok, "finite differences confirm analytic gradients on all three "
              "architectures"};
}

// ---------------------------------------------------------------------------
// Criterion 6: the Beta policy measures exactly what it claims. Density
// normalization is certified against an lgamma-free quadrature; samples stay
// in [0,1]; the affine rescale reports exactly -sum log(2 a_max); the mode
// follows the published case table.

Outcome crit6() {
  std::mt19937_64 rng(307);
  std::uniform_real_distribution<double> log_shape(std::log(1e-4), std::log(10.0));

  // Quadrature normalization over the full legal shape range. pdf(1/2)
  // isolates the normalizer: pdf(1/2) * B = (1/2)^{a+b-2}, so the quadrature
  // mass of the pdf is B_quad / B_lib.
  double worst_mass = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const double a = std::exp(log_shape(rng));
    const double b = std::exp(log_shape(rng));
    const double b_quad = oracles::beta_fn_quad(a, b);
    const double mass = std::exp(log_beta_pdf(0.5, a, b) + std::log(b_quad) -
                                 (a + b - 2.0) * std::log(0.5));
    worst_mass = std::max(worst_mass, std::abs(mass - 1.0));
  }
  const bool norm_ok = worst_mass <= 1e-6;
  note("normalization, 1000 heads over the full shape range [1e-4, 10]: worst "
       "|mass - 1| = " + fmt(worst_mass, 3) + " (tol 1e-6)");

  // Direct integral of the density where the support is representable
  // (shapes >= 1/2): substitute u = e^{-y} and u = 1 - e^{-y}.
  std::uniform_real_distribution<double> log_mid(std::log(0.5), std::log(10.0));
  const double ln2 = std::log(2.0);
  double worst_direct = 0.0;
  for (int t = 0; t < 200; ++t) {
    const double a = std::exp(log_mid(rng));
    const double b = std::exp(log_mid(rng));
    const double lower = oracles::exp_sinh(
        [a, b](double y) { return std::exp(log_beta_pdf(std::exp(-y), a, b) - y); },
        ln2);
    const double upper = oracles::exp_sinh(
        [a, b](double y) {
          return std::exp(log_beta_pdf(-std::expm1(-y), a, b) - y);
        },
        ln2);
    worst_direct = std::max(worst_direct, std::abs(lower + upper - 1.0));
  }
  const bool direct_ok = worst_direct <= 1e-6;
  note("direct pdf integral, 200 heads with shapes >= 0.5: worst |mass - 1| = " +
       fmt(worst_direct, 3) + " (tol 1e-6)");

  // Sampling support over the full shape range, vector heads.
  bool support_ok = true;
  long n_draws = 0;
  for (int t = 0; t < 1000; ++t) {
    BetaHead h;
    h.alpha = Vec(4);
    h.beta = Vec(4);
    for (int i = 0; i < 4; ++i) {
      h.alpha[i] = std::exp(log_shape(rng));
      h.beta[i] = std::exp(log_shape(rng));
    }
    for (int d = 0; d < 10; ++d) {
      SampledAction sa = sample_action(h, rng);
      ++n_draws;
      for (int i = 0; i < 4; ++i)
        support_ok = support_ok && sa.u[i] >= 0.0 && sa.u[i] <= 1.0 &&
                     std::isfinite(sa.u[i]);
      support_ok = support_ok && std::isfinite(sa.log_prob);
    }
  }
  note("sampling: " + std::to_string(n_draws) +
       " draws all inside [0,1] with finite log-density: " +
       (support_ok ? "yes" : "NO"));

  // Rescale correction: bitwise equality with -sum log(2 a_max), summed in
  // the same per-joint order, and the affine map itself.
  std::uniform_real_distribution<double> log_bound(std::log(1e-3), 0.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  bool rescale_ok = true;
  for (int t = 0; t < 200; ++t) {
    ActionBounds b;
    b.a_max_q = Vec(2);
    b.a_max_v = Vec(2);
    for (int i = 0; i < 2; ++i) {
      b.a_max_q[i] = std::exp(log_bound(rng));
      b.a_max_v[i] = std::exp(log_bound(rng));
    }
    Vec u(4);
    for (int i = 0; i < 4; ++i) u[i] = unit(rng);
    RescaledAction r = rescale_action(u, b);
    double expect = 0.0;
    for (int i = 0; i < 2; ++i)
      expect -= std::log(2.0 * b.a_max_q[i]) + std::log(2.0 * b.a_max_v[i]);
    rescale_ok = rescale_ok && r.log_density_correction == expect;
    for (int i = 0; i < 2; ++i) {
      rescale_ok = rescale_ok &&
                   r.action.a_q[i] == (2.0 * u[i] - 1.0) * b.a_max_q[i] &&
                   r.action.a_v[i] == (2.0 * u[2 + i] - 1.0) * b.a_max_v[i];
    }
  }
  note(std::string("rescale: log-density correction equals -sum log(2 a_max) "
                   "bitwise on 200 random bounds: ") +
       (rescale_ok ? "yes" : "NO"));

  // Mode table: interior formula, boundary cases, bimodal fallback.
  auto mode1 = [](double a, double b) {
    BetaHead h;
    h.alpha = Vec::Constant(1, a);
    h.beta = Vec::Constant(1, b);
    return action_mode(h)[0];
  };
  bool mode_ok = mode1(5.0, 5.0) == 0.5 && mode1(2.0, 5.0) == 0.2 &&
                 mode1(0.5, 3.0) == 0.0 && mode1(3.0, 0.5) == 1.0 &&
                 mode1(1.0, 2.0) == 0.0 && mode1(2.0, 1.0) == 1.0 &&
                 mode1(1.0, 1.0) == 0.5 && mode1(0.9, 0.9) == 0.5;
  for (int t = 0; t < 300 && mode_ok; ++t) {
    const double a = std::exp(log_shape(rng));
    const double b = std::exp(log_shape(rng));
    const double m = mode1(a, b);
    if (a > 1.0 && b > 1.0)
      mode_ok = std::abs(m - (a - 1.0) / (a + b - 2.0)) <= 1e-15;
    else if (a <= 1.0 && b > 1.0)
      mode_ok = m == 0.0;
    else if (a > 1.0)
      mode_ok = m == 1.0;
    else
      mode_ok = m == 0.5;
    mode_ok = mode_ok && m >= 0.0 && m <= 1.0;
  }
  note(std::string("mode: fixed table cases and 300 random heads: ") +
       (mode_ok ? "yes" : "NO"));

  return {norm_ok && direct_ok && support_ok && rescale_ok && mode_ok,
          "beta policy contract holds"};
}

// ---------------------------------------------------------------------------
// Criterion 7: the commanded correction respects |q_f - q_r| <= a_max_q
// before the box clip and the joint box after it, enforced by an always-on
// throw inside the rollout. Every production training run completing is
// 6000 episodes of evidence; fresh sampled- and mode-action episodes then
// read the counters directly.

Outcome crit7() {
  int completed = 0;
  for (const auto& arm : kArms) {
    ensure_arm(arm.name);
    ++completed;
  }
  note("all " + std::to_string(completed) +
       " production runs (1000 episodes each) completed under the always-on "
       "bound check");

  const RunConfig cfg = arm_config(find_arm("s1_pre"));
  SacAgent agent = load_agent(arm_dir("s1_pre") + "/agent_final.ckpt");
  ScalingStats stats =
      read_scaling_stats_csv(arm_dir("s1_pre") + "/scaling_stats.csv");
  const ActionBounds bounds = cfg.resolved_bounds();
  RolloutContext ctx;
  ctx.limits = &cfg.limits;
  ctx.bounds = &bounds;
  ctx.stats = &stats;
  ctx.reward = &cfg.reward;
  ctx.fk = &cfg.plant;
  ctx.agent = &agent;
  ctx.dt = cfg.dt;

  std::mt19937_64 corpus_rng(mix_seed(424242, 7));
  const auto corpus =
      build_corpus(corpus_rng, 20, cfg.limits, cfg.traj, 9000000);
  SafetyCounters total;
  for (const auto source : {EpisodeOptions::ActionSource::Sample,
                            EpisodeOptions::ActionSource::Mode}) {
    for (std::size_t i = 0; i < corpus.size(); ++i) {
      PlantBackend env(cfg.plant, cfg.gains, cfg.dt);
      EpisodeOptions opts;
      opts.source = source;
      std::mt19937_64 rng(mix_seed(777, i + (source == EpisodeOptions::ActionSource::Mode ? 1000 : 0)));
      EpisodeResult r = run_episode(env, corpus[i], ctx, opts, rng);
      total.steps_checked += r.safety.steps_checked;
      total.preclip_violations += r.safety.preclip_violations;
      total.postclip_violations += r.safety.postclip_violations;
      total.max_preclip = std::max(total.max_preclip, r.safety.max_preclip);
    }
  }
  note("fresh episodes (20 sampled + 20 mode actions): " +
       std::to_string(total.steps_checked) + " steps checked, " +
       std::to_string(total.preclip_violations) + " pre-clip and " +
       std::to_string(total.postclip_violations) +
       " post-clip violations, largest |correction| " +
       fmt(total.max_preclip, 4) + " vs bound " + fmt(bounds.a_max_q[0], 4));
  const bool ok = completed == 6 && total.steps_checked > 0 &&
                  total.preclip_violations == 0 &&
                  total.postclip_violations == 0;
  return {ok, "zero bound violations across training and fresh rollouts"};
}

// ---------------------------------------------------------------------------
// Criterion 8: plant, filter, and kinematics ground truth. Undamped rigid
// pendulum conserves energy to 1e-4 over 10 s; the action filter has DC gain
// 1 to 1e-12 and attenuates 10 Hz more than 1 Hz; forward kinematics lands
// on hand-computed poses to 1e-12.

Outcome crit8() {
  // Pendulum: springs locked, no damping, zero torque.
  PlantParams p;
  p.n_joints = 1;
  p.link_mass = Vec::Constant(1, 1.0);
  p.link_length = Vec::Constant(1, 0.5);
  p.link_com = Vec::Constant(1, 0.25);
  p.link_inertia = Vec::Constant(1, 1.0 * 0.5 * 0.5 / 12.0);
  p.joint_stiffness = Vec::Constant(1, 300.0);
  p.joint_damping = Vec::Constant(1, 0.0);
  p.motor_inertia = Vec::Constant(1, 0.02);
  p.motor_damping = Vec::Constant(1, 0.0);
  p.torque_limit = Vec::Constant(1, 20.0);
  p.encoder_noise_q = Vec::Constant(1, 0.0);
  p.encoder_noise_qd = Vec::Constant(1, 0.0);
  p.latency_steps = 0;
  p.rigid = true;
  p.validate();
  const double pivot_inertia =
      p.link_inertia(0) + p.link_mass(0) * 0.25 * 0.25 + p.motor_inertia(0);
  PlantState s = make_initial_state(Vec::Constant(1, 1.2), p);
  const double e0 = oracles::pendulum_energy(s.q(0), s.qd(0), pivot_inertia,
                                             p.link_mass(0), p.link_com(0),
                                             p.gravity);
  double drift = 0.0;
  const int steps = static_cast<int>(10.0 / p.inner_dt);
  for (int i = 0; i < steps; ++i) {
    plant_step(s, Vec::Zero(1), p);
    const double e = oracles::pendulum_energy(s.q(0), s.qd(0), pivot_inertia,
                                              p.link_mass(0), p.link_com(0),
                                              p.gravity);
    drift = std::max(drift, std::abs(e - e0));
  }
  const bool energy_ok = drift / std::abs(e0) < 1e-4;
  note("pendulum energy: relative drift " + fmt(drift / std::abs(e0), 3) +
       " over 10 s (tol 1e-4)");

  // Filter DC gain through the full action path at a constant correction.
  const JointLimits lim = JointLimits::uniform(2, -2.0, 2.0, 2.0, 4.0);
  const ActionBounds bounds = compute_action_bounds(lim, 0.05);
  TrajectoryPoint ref;
  ref.q = Vec::Zero(2);
  ref.qd = Vec::Zero(2);
  Action hold = Action::zero(2);
  hold.a_q << 0.04, -0.03;
  hold.a_v << 0.05, -0.02;
  FilterState f = FilterState::make(2, 4.0, 0.05);
  Vec prev_qf = Vec::Zero(2);
  CorrectedPoint c;
  for (int i = 0; i < 3000; ++i) {
    c = apply_action(hold, f, ref, prev_qf, lim, bounds, 0.05);
    prev_qf = c.q_f;
  }
  double dc_err = 0.0;
  for (int j = 0; j < 2; ++j) {
    dc_err = std::max(dc_err, std::abs(c.a_filt_q[j] / hold.a_q[j] - 1.0));
    dc_err = std::max(dc_err, std::abs(c.a_filt_v[j] / hold.a_v[j] - 1.0));
  }
  const bool dc_ok = dc_err <= 1e-12;
  note("filter DC gain: |gain - 1| = " + fmt(dc_err, 3) + " (tol 1e-12)");

  // Sinusoidal attenuation: RMS gain over whole cycles after the transient.
  auto sine_gain = [&](double hz) {
    FilterState fs = FilterState::make(2, 4.0, 0.05);
    Vec prev = Vec::Zero(2);
    double in_sq = 0.0, out_sq = 0.0;
    for (int k = 0; k < 400; ++k) {
      Action a = Action::zero(2);
      a.a_q[0] = 0.01 * std::sin(2.0 * M_PI * hz * k * 0.05 + 0.7);
      CorrectedPoint cp = apply_action(a, fs, ref, prev, lim, bounds, 0.05);
      prev = cp.q_f;
      if (k >= 100) {
        in_sq += a.a_q[0] * a.a_q[0];
        out_sq += cp.a_filt_q[0] * cp.a_filt_q[0];
      }
    }
    return std::sqrt(out_sq / in_sq);
  };
  const double gain1 = sine_gain(1.0);
  const double gain10 = sine_gain(10.0);
  const bool atten_ok = gain10 < gain1;
  note("filter attenuation: gain " + fmt(gain1, 4) + " at 1 Hz vs " +
       fmt(gain10, 4) + " at 10 Hz");

  // Forward kinematics vs hand-computed poses.
  const PlantParams two = PlantParams::two_link_default();
  struct FkCase {
    double q1, q2, x, y;
  };
  const double kPi = 3.14159265358979323846;
  const std::vector<FkCase> cases = {
      {0.0, 0.0, 0.9, 0.0},
      {kPi / 2, 0.0, 0.0, 0.9},
      {kPi / 2, -kPi / 2, 0.4, 0.5},
      {-kPi / 2, kPi / 2, 0.4, -0.5},
      {0.3, 0.7, 0.6937891669100589, 0.48434849725382845},
  };
  double fk_err = 0.0;
  for (const auto& fc : cases) {
    Vec q(2);
    q << fc.q1, fc.q2;
    Eigen::Vector2d ee = forward_kinematics(q, two);
    fk_err = std::max(fk_err, std::abs(ee.x() - fc.x));
    fk_err = std::max(fk_err, std::abs(ee.y() - fc.y));
  }
  const bool fk_ok = fk_err <= 1e-12;
  note("forward kinematics: worst |error| " + fmt(fk_err, 3) +
       " over 5 hand-computed poses (tol 1e-12)");

  return {energy_ok && dc_ok && atten_ok && fk_ok,
          "plant, filter, and kinematics match ground truth"};
}

// ---------------------------------------------------------------------------
// Criterion 9: two sequential training runs with the identical config and
// seed produce byte-identical episode logs.

Outcome crit9() {
  RunConfig cfg;
  cfg.seed = 5;
  cfg.out_dir = g_cache + "/det";
  cfg.collect_trajectories = 30;
  cfg.train_episodes = 50;
  cfg.checkpoint_every = 25;
  cfg.smalleval_trajectories = 2;

  auto one_run = [&]() {
    fs::remove_all(cfg.out_dir);
    cmd_collect(cfg);
    cmd_train(cfg, {});
    return std::make_pair(slurp(cfg.out_dir + "/episode_log.csv"),
                          slurp(cfg.out_dir + "/agent_final.ckpt"));
  };
  std::cout << "[setup] determinism pair: two fresh 50-episode runs\n"
            << std::flush;
  const auto first = one_run();
  const auto second = one_run();
  const bool log_equal = first.first == second.first;
  const bool agent_equal = first.second == second.second;
  note("episode_log.csv: " + std::to_string(first.first.size()) +
       " bytes, byte-identical across runs: " + (log_equal ? "yes" : "NO"));
  note(std::string("agent_final.ckpt byte-identical as well: ") +
       (agent_equal ? "yes" : "no"));
  return {log_equal, "identical config and seed reproduce the episode log "
                     "byte for byte"};
}

// ---------------------------------------------------------------------------
// Criterion 10: SAC mechanics. Hard target update copies exactly; terminal
// transitions carry no bootstrap; the critics reach the brute-force Bellman
// fixed point of a toy 2-state MDP to 1e-2.

SacConfig toy_sac() {
  SacConfig c;
  c.minibatch = 32;
  c.target_update_every = 1000000;  // only explicit hard updates here
  c.alpha_temp_init = 1e-12;
  c.alpha_temp_lr = 0.0;
  c.hidden = {16, 16};
  return c;
}

bool mlp_bits_equal(const Mlp& a, const Mlp& b) {
  if (a.layers.size() != b.layers.size()) return false;
  for (std::size_t i = 0; i < a.layers.size(); ++i) {
    if (!(a.layers[i].W.array() == b.layers[i].W.array()).all()) return false;
    if (!(a.layers[i].b.array() == b.layers[i].b.array()).all()) return false;
  }
  return true;
}

Outcome crit10() {
  std::mt19937_64 rng(401);
  std::uniform_real_distribution<double> unit(0.02, 0.98);
  std::uniform_real_distribution<double> sym(-1.0, 1.0);

  // Hard update: exact equality, independent storage afterwards.
  SacAgent agent = SacAgent::make(2, 1, toy_sac(), rng);
  std::vector<Transition> batch;
  for (int i = 0; i < 32; ++i) {
    Transition t;
    t.s = Vec(2);
    t.s << sym(rng), sym(rng);
    t.u = Vec::Constant(1, unit(rng));
    t.r = sym(rng);
    t.s_next = Vec(2);
    t.s_next << sym(rng), sym(rng);
    t.done = false;
    batch.push_back(t);
  }
  for (int i = 0; i < 50; ++i) sac_update(agent, batch, 1e-3, rng);
  const bool drifted = !mlp_bits_equal(agent.critic1, agent.target1);
  target_hard_update(agent);
  bool hard_ok = drifted && mlp_bits_equal(agent.critic1, agent.target1) &&
                 mlp_bits_equal(agent.critic2, agent.target2);
  const double kept = agent.target1.layers[0].W(0, 0);
  agent.critic1.layers[0].W(0, 0) += 1.0;
  hard_ok = hard_ok && agent.target1.layers[0].W(0, 0) == kept;
  note(std::string("hard target update: exact parameter equality with "
                   "independent storage: ") +
       (hard_ok ? "yes" : "NO"));

  // Terminal transitions: zeroed critics against poisoned targets regress
  // exactly to the rewards, so any bootstrap leak explodes the loss.
  std::mt19937_64 rng2(409);
  SacAgent term = SacAgent::make(2, 1, toy_sac(), rng2);
  for (auto& l : term.critic1.layers) {
    l.W.setZero();
    l.b.setZero();
  }
  for (auto& l : term.critic2.layers) {
    l.W.setZero();
    l.b.setZero();
  }
  for (auto& l : term.target1.layers) l.b.setConstant(1e9);
  for (auto& l : term.target2.layers) l.b.setConstant(1e9);
  std::vector<Transition> done_batch;
  double sum_sq = 0.0;
  for (int i = 0; i < 32; ++i) {
    Transition t;
    t.s = Vec(2);
    t.s << sym(rng2), sym(rng2);
    t.u = Vec::Constant(1, unit(rng2));
    t.r = 0.05 * i;
    t.s_next = Vec(2);
    t.s_next << sym(rng2), sym(rng2);
    t.done = true;
    sum_sq += t.r * t.r;
    done_batch.push_back(t);
  }
  SacLosses losses = sac_update(term, done_batch, 1e-3, rng2);
  const double expect = sum_sq / 32.0;
  const bool done_ok = std::abs(losses.critic1 - expect) <= 1e-12 * expect &&
                       std::abs(losses.critic2 - expect) <= 1e-12 * expect;
  note("terminal transitions: critic loss " + fmt(losses.critic1, 12) +
       " equals mean r^2 " + fmt(expect, 12) + " despite poisoned targets: " +
       (done_ok ? "yes" : "NO"));

  // Toy 2-state MDP: deterministic cycle, reward 1 leaving s0. Brute-force
  // policy evaluation gives the target the critics must reproduce.
  const double gamma = 0.85;
  double q0 = 0.0, q1 = 0.0;
  for (int i = 0; i < 4000; ++i) {
    const double n0 = 1.0 + gamma * q1;
    const double n1 = gamma * q0;
    q0 = n0;
    q1 = n1;
  }
  note("bellman oracle: Q(s0) = " + fmt(q0, 10) + " (closed form " +
       fmt(1.0 / (1.0 - gamma * gamma), 10) + "), Q(s1) = " + fmt(q1, 10));

  std::mt19937_64 rng3(89);
  SacConfig mdp_cfg = toy_sac();
  mdp_cfg.gamma = gamma;
  mdp_cfg.target_update_every = 100;  // bootstrap needs live targets
  SacAgent mdp = SacAgent::make(1, 1, mdp_cfg, rng3);
  ReplayBuffer buf(64);
  std::mt19937_64 fill(97);
  Vec s0 = Vec::Constant(1, -1.0), s1 = Vec::Constant(1, 1.0);
  for (int i = 0; i < 16; ++i) {
    Transition a;
    a.s = s0;
    a.u = Vec::Constant(1, unit(fill));
    a.r = 1.0;
    a.s_next = s1;
    a.done = false;
    buf.push(a);
    Transition b;
    b.s = s1;
    b.u = Vec::Constant(1, unit(fill));
    b.r = 0.0;
    b.s_next = s0;
    b.done = false;
    buf.push(b);
  }
  for (int it = 0; it < 10000; ++it) {
    auto mb = replay_sample(buf, mdp_cfg.minibatch, rng3);
    sac_update(mdp, mb, 1e-3, rng3);
  }
  Vec u_mid = Vec::Constant(1, 0.5);
  double worst_q = 0.0;
  for (const Mlp* critic : {&mdp.critic1, &mdp.critic2}) {
    worst_q = std::max(worst_q, std::abs(critic_forward(*critic, s0, u_mid) - q0));
    worst_q = std::max(worst_q, std::abs(critic_forward(*critic, s1, u_mid) - q1));
  }
  const bool mdp_ok = worst_q <= 1e-2;
  note("toy MDP after 10000 updates: worst |Q - oracle| = " + fmt(worst_q, 3) +
       " (tol 1e-2)");

  return {hard_ok && done_ok && mdp_ok, "target updates, terminal handling, "
                                        "and the Bellman fixed point check out"};
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> only;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a.rfind("--only=", 0) == 0) {
      std::stringstream ss(a.substr(7));
      std::string tok;
      while (std::getline(ss, tok, ',')) only.push_back(std::stoi(tok));
    } else if (a.rfind("--cache=", 0) == 0) {
      g_cache = a.substr(8);
    } else {
      std::cerr << "usage: " << argv[0] << " [--only=1,2,...] [--cache=DIR]\n";
      return 2;
    }
  }

  struct Criterion {
    int id;
    Outcome (*run)();
  };
  const std::vector<Criterion> criteria = {
      {1, crit1}, {2, crit2}, {3, crit3}, {4, crit4},  {5, crit5},
      {6, crit6}, {7, crit7}, {8, crit8}, {9, crit9}, {10, crit10},
  };

  int failures = 0;
  int ran = 0;
  const auto t0 = std::chrono::steady_clock::now();
  for (const auto& c : criteria) {
    if (!only.empty() &&
        std::find(only.begin(), only.end(), c.id) == only.end())
      continue;
    ++ran;
    g_notes.clear();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out.ok = false;
      out.headline = std::string("exception: ") + e.what();
    }
    if (!out.ok) ++failures;
    std::cout << (out.ok ? "[PASS]" : "[FAIL]") << " criterion " << c.id
              << ": " << out.headline << "\n";
    for (const auto& n : g_notes) std::cout << "    " << n << "\n";
    std::cout << std::flush;
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  std::cout << "acceptance: " << (ran - failures) << "/" << ran
            << " criteria passed in " << fmt(secs, 4) << " s\n";
  return failures;
}
