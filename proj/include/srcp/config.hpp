// Run configuration: every tunable of the pipeline in one struct, loadable
// from flat "key = value" text with [sections], emitted back verbatim by
// --print-defaults. Unknown keys and invalid values are rejected with the
// offending line.
#pragma once

#include <string>

#include "srcp/informed_init.hpp"

namespace srcp {

struct RunConfig {
  std::uint64_t seed = 1;
  std::string out_dir = "run";
  double dt = 0.05;
  int train_episodes = 1000;
  int collect_trajectories = 200;
  int pretrain_episodes = 300;
  int eval_trajectories = 100;
  int checkpoint_every = 50;
  int smalleval_trajectories = 5;
  double eval_payload_kg = -1.0;  // negative: use half the last link's mass

  PlantParams plant = PlantParams::two_link_default();
  BaselineGains gains = BaselineGains::detuned_default();
  JointLimits limits = JointLimits::uniform(2, -2.0, 2.0, 2.0, 4.0);
  TrajgenParams traj;
  RewardParams reward;
  SacConfig sac;
  LrSchedule lr;
  DynTrainConfig dyn;

  bool bounds_override = false;
  ActionBounds bounds;  // consulted only when bounds_override is set

  // The payload actually evaluated: explicit kg, or half the last link mass.
  double resolved_payload() const;
  // Bounds in effect: the override, or compute_action_bounds(limits, dt).
  ActionBounds resolved_bounds() const;

  void validate() const;
};

// Parses the file and overlays it onto defaults; throws std::runtime_error
// naming the line for unknown sections/keys, bad values, or failed
// validation.
RunConfig load_run_config(const std::string& path);

// Same, from text already in memory (tests, documentation).
RunConfig parse_run_config(const std::string& text);

// Emits the full key set; parse_run_config(run_config_to_text(c)) == c.
std::string run_config_to_text(const RunConfig& cfg);

}  // namespace srcp
