// "SRCP1" checkpoint files: a magic line, a kind tag, then binary segments
// built from the neural-module primitives. Little-endian throughout; every
// write/read pair round-trips bitwise.
#pragma once

#include <iosfwd>
#include <string>

#include "srcp/informed_init.hpp"

namespace srcp {

inline constexpr char kCheckpointMagic[] = "SRCP1\n";
inline constexpr char kKindAgent[] = "agent";
inline constexpr char kKindDynModel[] = "dynmodel";
inline constexpr char kKindResume[] = "resume";

// Peeks the kind tag of a checkpoint file without loading the payload.
std::string checkpoint_kind(const std::string& path);

void save_agent(const std::string& path, const SacAgent& agent);
SacAgent load_agent(const std::string& path);

void save_dyn_model(const std::string& path, const DynModel& model);
DynModel load_dyn_model(const std::string& path);

// Everything a training run needs to continue as if never stopped: full
// agent, replay buffer with its exact storage layout, the training rng,
// and the loop's bookkeeping.
struct ResumeState {
  std::uint64_t seed = 0;        // guards against resuming a different run
  std::int64_t episode_next = 0; // first episode still to run
  SacAgent agent;
  ReplayBuffer buffer{1};
  std::string rng_state;         // std::mt19937_64 stream serialization
  double best_eval = 0.0;        // summed e_q of the best checkpoint so far
  std::int64_t best_episode = -1;
};

void save_resume(const std::string& path, const ResumeState& state);
ResumeState load_resume(const std::string& path);

// Stream-level primitives, exposed for tests.
void write_agent_payload(std::ostream& os, const SacAgent& agent);
SacAgent read_agent_payload(std::istream& is);

}  // namespace srcp
