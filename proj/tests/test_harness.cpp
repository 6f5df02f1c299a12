#include "srcp/harness.hpp"

#include <filesystem>
#include <fstream>
#include <set>

#include "doctest.h"
#include "json.hpp"
#include "srcp/csv.hpp"

using namespace srcp;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Desk-scale pipeline config: seconds of compute, every stage exercised.
RunConfig small_config(const std::string& out_dir, std::uint64_t seed = 1) {
  RunConfig cfg;
  cfg.seed = seed;
  cfg.out_dir = out_dir;
  cfg.train_episodes = 6;
  cfg.collect_trajectories = 3;
  cfg.pretrain_episodes = 2;
  cfg.eval_trajectories = 4;
  cfg.checkpoint_every = 2;
  cfg.smalleval_trajectories = 2;
  cfg.traj.duration_min = 2.5;
  cfg.traj.duration_max = 3.5;
  cfg.sac.minibatch = 16;
  cfg.sac.replay_capacity = 5000;
  cfg.sac.hidden = {24, 24};
  cfg.dyn.max_epochs = 40;
  cfg.dyn.minibatch = 16;
  cfg.validate();
  return cfg;
}

std::string slurp(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  REQUIRE_MESSAGE(bool(is), path);
  return std::string((std::istreambuf_iterator<char>(is)), {});
}

json slurp_json(const std::string& path) { return json::parse(slurp(path)); }

std::size_t data_rows(const std::string& path) {
  std::size_t n = 0;
  for (const std::string& line : read_lines(path))
    if (!line.empty()) ++n;
  REQUIRE(n >= 1);  // header
  return n - 1;
}

struct TempTree {
  fs::path base;
  explicit TempTree(const std::string& name) : base(fs::path("harness_tmp") / name) {
    fs::remove_all(base);
    fs::create_directories(base);
  }
  std::string dir(const std::string& child) const {
    return (base / child).string();
  }
};

}  // namespace

TEST_CASE("seed mixing separates streams and stays deterministic") {
  CHECK(mix_seed(1, 2) == mix_seed(1, 2));
  std::set<std::uint64_t> seen;
  for (std::uint64_t salt = 0; salt < 32; ++salt) seen.insert(mix_seed(7, salt));
  CHECK(seen.size() == 32);
  // mix_seed(7, 3) appears in both scans, so one element is shared.
  for (std::uint64_t seed = 0; seed < 32; ++seed) seen.insert(mix_seed(seed, 3));
  CHECK(seen.size() == 63);
  CHECK(mix_seed(0, 0) != 0);
}

TEST_CASE("scaling stats and dynamics dataset CSVs round-trip exactly") {
  TempTree tree("csv");

  ScalingStats stats;
  stats.mu_q = Vec::LinSpaced(2, 0.01234567890123456, 0.07);
  stats.sigma_q = Vec::LinSpaced(2, 0.001, 0.002);
  stats.mu_v = Vec::LinSpaced(2, 0.1, 0.2);
  stats.sigma_v = Vec::LinSpaced(2, 0.01, 0.02);
  const std::string spath = tree.dir("stats.csv");
  write_scaling_stats_csv(spath, stats);
  const ScalingStats back = read_scaling_stats_csv(spath);
  CHECK((back.mu_q.array() == stats.mu_q.array()).all());
  CHECK((back.sigma_q.array() == stats.sigma_q.array()).all());
  CHECK((back.mu_v.array() == stats.mu_v.array()).all());
  CHECK((back.sigma_v.array() == stats.sigma_v.array()).all());

  CollectResult data;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 7; ++i) {
    DynSample s;
    s.input = Vec::NullaryExpr(8, [&](Eigen::Index) { return u(rng); });
    s.target = Vec::NullaryExpr(4, [&](Eigen::Index) { return u(rng); });
    data.samples.push_back(s);
    data.sample_traj.push_back(2000000 + i / 4);
    data.sample_step.push_back(i % 4);
  }
  const std::string dpath = tree.dir("dyn.csv");
  write_dyn_dataset_csv(dpath, data);
  const auto back_samples = read_dyn_dataset_csv(dpath);
  REQUIRE(back_samples.size() == data.samples.size());
  for (std::size_t i = 0; i < back_samples.size(); ++i) {
    CHECK((back_samples[i].input.array() == data.samples[i].input.array()).all());
    CHECK((back_samples[i].target.array() == data.samples[i].target.array()).all());
  }

  CHECK_THROWS_WITH_AS(read_scaling_stats_csv(tree.dir("absent.csv")),
                       doctest::Contains("collect"), std::runtime_error);
  CHECK_THROWS_AS(read_dyn_dataset_csv(spath), std::runtime_error);
}

TEST_CASE("pipeline end to end on one run directory") {
  TempTree tree("pipeline");
  const RunConfig cfg = small_config(tree.dir("runA"));

  // collect
  cmd_collect(cfg);
  for (const char* f : {"dyn_dataset.csv", "baseline_errors.csv",
                        "scaling_stats.csv", "collect_meta.json",
                        "config_used.ini"})
    CHECK(fs::exists(fs::path(cfg.out_dir) / f));
  const json cmeta = slurp_json(cfg.out_dir + "/collect_meta.json");
  CHECK(cmeta["trajectories"] == 3);
  CHECK(cmeta["traj_id_base"] == kCollectIdBase);
  CHECK(data_rows(cfg.out_dir + "/dyn_dataset.csv") ==
        cmeta["samples"].get<std::size_t>());

  // collect again elsewhere: byte-identical dataset and stats
  RunConfig cfg2 = cfg;
  cfg2.out_dir = tree.dir("runA_again");
  cmd_collect(cfg2);
  CHECK(slurp(cfg.out_dir + "/dyn_dataset.csv") ==
        slurp(cfg2.out_dir + "/dyn_dataset.csv"));
  CHECK(slurp(cfg.out_dir + "/scaling_stats.csv") ==
        slurp(cfg2.out_dir + "/scaling_stats.csv"));

  // config_used reparses to the same config
  CHECK(run_config_to_text(load_run_config(cfg.out_dir + "/config_used.ini")) ==
        run_config_to_text(cfg));

  // pretrain
  cmd_pretrain(cfg);
  for (const char* f : {"dyn_model.ckpt", "dyn_loss.csv", "agent_pretrained.ckpt",
                        "pretrain_log.csv", "pretrain_meta.json"})
    CHECK(fs::exists(fs::path(cfg.out_dir) / f));
  const json pmeta = slurp_json(cfg.out_dir + "/pretrain_meta.json");
  CHECK(pmeta["dyn_loss_final"].get<double>() <
        pmeta["dyn_loss_first"].get<double>());
  CHECK(pmeta["updates"].get<long>() > 0);
  CHECK(data_rows(cfg.out_dir + "/pretrain_log.csv") == 2);
  CHECK(checkpoint_kind(cfg.out_dir + "/agent_pretrained.ckpt") == kKindAgent);
  CHECK(checkpoint_kind(cfg.out_dir + "/dyn_model.ckpt") == kKindDynModel);

  // train from the pretrained agent
  TrainOptions topts;
  topts.init_checkpoint = cfg.out_dir + "/agent_pretrained.ckpt";
  cmd_train(cfg, topts);
  CHECK(data_rows(cfg.out_dir + "/episode_log.csv") == 6);
  CHECK(data_rows(cfg.out_dir + "/timing.csv") == 6);
  for (const char* f : {"agent_ep2.ckpt", "agent_ep4.ckpt", "agent_ep6.ckpt",
                        "agent_best.ckpt", "agent_final.ckpt", "resume.ckpt",
                        "train_meta.json"})
    CHECK(fs::exists(fs::path(cfg.out_dir) / f));
  const json tmeta = slurp_json(cfg.out_dir + "/train_meta.json");
  CHECK(tmeta["best_episode"].get<long>() >= 2);
  CHECK(tmeta["total_updates"].get<long>() > 0);
  {
    const auto lines = read_lines(cfg.out_dir + "/episode_log.csv");
    const auto first = csv_split(lines[1]);
    REQUIRE(first.size() == 8);
    CHECK(parse_int(first[0]) == 0);
    CHECK(parse_int(first[1]) == static_cast<long long>(kTrainIdBase));
  }

  // evaluation, baseline arm only
  EvalOptions beval;
  cmd_eval(cfg, beval);
  CHECK(data_rows(cfg.out_dir + "/eval_traj_baseline_pl0.csv") == 4);

  // paired evaluation with the trained policy, nominal and loaded
  EvalOptions peval;
  peval.policy = cfg.out_dir + "/agent_final.ckpt";
  cmd_eval(cfg, peval);
  EvalOptions pl;
  pl.policy = cfg.out_dir + "/agent_final.ckpt";
  pl.payload_kg = cfg.resolved_payload();
  cmd_eval(cfg, pl);
  CHECK(data_rows(cfg.out_dir + "/eval_traj_policy_pl0.csv") == 8);
  CHECK(fs::exists(cfg.out_dir + "/eval_traj_policy_pl0p4.csv"));
  const json emeta = slurp_json(cfg.out_dir + "/eval_meta_policy_pl0.json");
  CHECK(emeta["traj_id_base"] == kTestIdBase);
  CHECK(std::isfinite(emeta["reduction_summed_abs_dq"].get<double>()));

  // baseline rows are noise-paired: identical across both eval invocations
  {
    const auto a = read_lines(cfg.out_dir + "/eval_traj_baseline_pl0.csv");
    const auto b = read_lines(cfg.out_dir + "/eval_traj_policy_pl0.csv");
    for (std::size_t i = 1; i < 5; ++i) CHECK(a[i] == b[i]);
  }

  // deterministic eval rerun
  const std::string eval_bytes = slurp(cfg.out_dir + "/eval_traj_policy_pl0.csv");
  cmd_eval(cfg, peval);
  CHECK(slurp(cfg.out_dir + "/eval_traj_policy_pl0.csv") == eval_bytes);

  // report over the single run directory
  cmd_report(cfg.out_dir);
  CHECK(data_rows(cfg.out_dir + "/report_learning.csv") == 6);
  CHECK(fs::exists(cfg.out_dir + "/report_eval.csv"));
  const std::string rep = slurp(cfg.out_dir + "/report_eval.csv");
  CHECK(rep.find("aggregate,policy_pl0,improvement") != std::string::npos);
  const json rmeta = slurp_json(cfg.out_dir + "/report_meta.json");
  CHECK(rmeta["n_runs"] == 1);
  CHECK(rmeta["overlay_ids"].size() == 2);
  for (const auto& id : rmeta["overlay_ids"]) {
    const std::string bpath =
        cfg.out_dir + "/overlay_baseline_" + std::to_string(id.get<long>()) + ".csv";
    const std::string ppath =
        cfg.out_dir + "/overlay_policy_" + std::to_string(id.get<long>()) + ".csv";
    CHECK(data_rows(bpath) == data_rows(ppath));
    const auto header = csv_split(read_lines(bpath)[0]);
    CHECK(header.size() == 7);  // t + (q_r, q_f, q_o) x 2 joints
  }
  for (const auto& run : rmeta["id_ranges"]) CHECK(run["disjoint"] == true);
}

TEST_CASE("interrupted training resumes to a byte-identical run") {
  TempTree tree("resume");
  const RunConfig full_a = small_config(tree.dir("runA"));
  cmd_collect(full_a);
  cmd_pretrain(full_a);
  TrainOptions from_pre;
  from_pre.init_checkpoint = full_a.out_dir + "/agent_pretrained.ckpt";
  cmd_train(full_a, from_pre);

  // Same run elsewhere, stopped after 4 of 6 episodes, then resumed.
  RunConfig full_b = small_config(tree.dir("runB"));
  cmd_collect(full_b);
  cmd_pretrain(full_b);
  RunConfig half_b = full_b;
  half_b.train_episodes = 4;
  TrainOptions from_pre_b;
  from_pre_b.init_checkpoint = full_b.out_dir + "/agent_pretrained.ckpt";
  cmd_train(half_b, from_pre_b);
  CHECK(data_rows(full_b.out_dir + "/episode_log.csv") == 4);

  TrainOptions from_resume;
  from_resume.init_checkpoint = full_b.out_dir + "/resume.ckpt";
  cmd_train(full_b, from_resume);

  CHECK(slurp(full_a.out_dir + "/episode_log.csv") ==
        slurp(full_b.out_dir + "/episode_log.csv"));
  CHECK(slurp(full_a.out_dir + "/agent_final.ckpt") ==
        slurp(full_b.out_dir + "/agent_final.ckpt"));
  CHECK(slurp(full_a.out_dir + "/agent_best.ckpt") ==
        slurp(full_b.out_dir + "/agent_best.ckpt"));
  const json ta = slurp_json(full_a.out_dir + "/train_meta.json");
  const json tb = slurp_json(full_b.out_dir + "/train_meta.json");
  CHECK(ta["best_episode"] == tb["best_episode"]);
  CHECK(ta["total_updates"] == tb["total_updates"]);
  CHECK(tb["first_episode"] == 4);

  // Resuming under a different master seed is refused.
  RunConfig wrong_seed = full_b;
  wrong_seed.seed = 2;
  CHECK_THROWS_WITH_AS(cmd_train(wrong_seed, from_resume),
                       doctest::Contains("seed"), std::runtime_error);
}

TEST_CASE("evaluation pairing is order-independent per trajectory id") {
  TempTree tree("pairing");
  const RunConfig cfg = small_config(tree.dir("run"));
  auto rng = std::mt19937_64(mix_seed(cfg.seed, 2));
  auto corpus = build_corpus(rng, 3, cfg.limits, cfg.traj, kTestIdBase);
  const ActionBounds bounds = cfg.resolved_bounds();

  const auto forward =
      run_eval_condition(corpus, cfg.plant, cfg.gains, cfg.limits, bounds,
                         nullptr, cfg.reward, nullptr, 0.0, cfg.dt, 42);
  std::reverse(corpus.begin(), corpus.end());
  const auto reversed =
      run_eval_condition(corpus, cfg.plant, cfg.gains, cfg.limits, bounds,
                         nullptr, cfg.reward, nullptr, 0.0, cfg.dt, 42);
  REQUIRE(forward.size() == reversed.size());
  for (const TrajEval& f : forward) {
    bool found = false;
    for (const TrajEval& r : reversed)
      if (r.id == f.id) {
        found = true;
        CHECK(r.summed == f.summed);
        CHECK(r.ee == f.ee);
        CHECK(r.mean_reward == f.mean_reward);
      }
    CHECK(found);
  }

  // A payload changes the plant and therefore the result.
  const auto loaded =
      run_eval_condition(corpus, cfg.plant, cfg.gains, cfg.limits, bounds,
                         nullptr, cfg.reward, nullptr, 0.4, cfg.dt, 42);
  CHECK(loaded[0].summed != reversed[0].summed);
}

TEST_CASE("failures leave a machine-readable error record") {
  TempTree tree("errors");
  const std::string dir = tree.dir("brokendir");
  write_error_record(dir, "train", "plant diverged on trajectory 3 at step 17");
  const json err = slurp_json(dir + "/error.json");
  CHECK(err["command"] == "train");
  CHECK(err["error"] == "plant diverged on trajectory 3 at step 17");

  // Training without collect outputs names the missing prerequisite.
  const RunConfig cfg = small_config(tree.dir("no_collect"));
  CHECK_THROWS_WITH_AS(cmd_train(cfg, {}), doctest::Contains("collect"),
                       std::runtime_error);
  // Evaluating a non-agent checkpoint is refused.
  RunConfig cfg2 = small_config(tree.dir("run2"));
  cmd_collect(cfg2);
  EvalOptions bad;
  bad.policy = cfg2.out_dir + "/scaling_stats.csv";
  CHECK_THROWS_AS(cmd_eval(cfg2, bad), std::runtime_error);
  // A successful command clears a stale record.
  write_error_record(cfg2.out_dir, "train", "stale");
  cmd_collect(cfg2);
  CHECK(!fs::exists(cfg2.out_dir + "/error.json"));
}
