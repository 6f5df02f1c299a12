// Operator-facing pipeline commands. Each writes its outputs under the
// config's out_dir and is a pure function of (config, seed): re-running
// reproduces every file byte for byte except timing.csv, which holds the
// wall-clock sidecar, and error.json, which only appears on failure.
#pragma once

#include <string>
#include <vector>

#include "srcp/checkpoint.hpp"
#include "srcp/config.hpp"

namespace srcp {

// One master seed fans out into fixed named streams (collect, dynamics,
// agent init, pretrain, train, eval, ...) so arms stay independent.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt);

// Trajectory id bases keep every corpus disjoint by construction.
inline constexpr std::uint64_t kTrainIdBase = 0;
inline constexpr std::uint64_t kTestIdBase = 1000000;
inline constexpr std::uint64_t kCollectIdBase = 2000000;
inline constexpr std::uint64_t kPretrainIdBase = 3000000;
inline constexpr std::uint64_t kSmallEvalIdBase = 4000000;

// Baseline rollouts, dynamics dataset, error records, scaling stats.
void cmd_collect(const RunConfig& cfg);

// Dynamics-model fit plus learned-sim policy pretraining.
void cmd_pretrain(const RunConfig& cfg);

struct TrainOptions {
  // Empty: fresh agent. An agent checkpoint: start from those weights. A
  // resume checkpoint: continue that run in place.
  std::string init_checkpoint;
};
void cmd_train(const RunConfig& cfg, const TrainOptions& opts = {});

struct EvalOptions {
  std::string policy = "baseline";  // "baseline" or an agent checkpoint path
  double payload_kg = 0.0;
};
void cmd_eval(const RunConfig& cfg, const EvalOptions& opts);

// Consolidates one run directory, or every child directory holding an
// episode log, into learning curves with confidence bands, an evaluation
// table, and trajectory overlays.
void cmd_report(const std::string& dir);

// Per-trajectory evaluation record shared by eval, report, and tests.
struct TrajEval {
  std::uint64_t id = 0;
  Vec mean_abs_dq;          // per joint, averaged over points
  double summed = 0.0;      // joints summed
  double ee = 0.0;          // mean end-effector distance, m
  double mean_e_v = 0.0;
  double mean_reward = 0.0; // unscaled
};

// Rolls the corpus under one condition: baseline when agent is null, else
// mode-action inference. Payload > 0 is added to the last link. One rng
// stream per trajectory, derived from (rng_base, trajectory id), so results
// are order-independent and noise-paired across conditions.
std::vector<TrajEval> run_eval_condition(
    const std::vector<ReferenceTrajectory>& corpus, const PlantParams& plant,
    const BaselineGains& gains, const JointLimits& limits,
    const ActionBounds& bounds, const ScalingStats* stats,
    const RewardParams& reward, const SacAgent* agent, double payload_kg,
    double dt, std::uint64_t rng_base);

// Best-effort machine-readable failure record at dir/error.json.
void write_error_record(const std::string& dir, const std::string& command,
                        const std::string& what);

// Scaling-stats CSV round trip (written by collect, read by later stages).
void write_scaling_stats_csv(const std::string& path, const ScalingStats& stats);
ScalingStats read_scaling_stats_csv(const std::string& path);

// Dynamics dataset CSV round trip.
void write_dyn_dataset_csv(const std::string& path, const CollectResult& data);
std::vector<DynSample> read_dyn_dataset_csv(const std::string& path);

}  // namespace srcp
