#ifndef IRGAIL_DATASETS_H_
#define IRGAIL_DATASETS_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <vector>

#include "irgail/random.h"
#include "irgail/robot_family.h"

namespace irgail {

struct TransitionRecord {
  std::vector<double> observation;
  std::vector<double> action;  // as executed, inside [-1, 1]
  std::vector<double> next_observation;
  double reward = 0.0;  // true environment reward
  bool done = false;

  bool operator==(const TransitionRecord&) const = default;
};

// One episode (possibly cut short by a step budget) on one robot.
struct TrajectoryRecord {
  RobotConfig config;
  std::vector<TransitionRecord> transitions;
  double episode_return = 0.0;
  uint64_t seed = 0;

  size_t length() const { return transitions.size(); }
  // True when next_observation of step t equals observation of step t+1.
  bool IsChained() const;

  bool operator==(const TrajectoryRecord&) const = default;
};

// Expert demonstrations, possibly from several source robots.
struct DemoSet {
  std::vector<TrajectoryRecord> records;

  // Distinct source configurations in order of first appearance.
  std::vector<RobotConfig> SourceConfigs() const;
  size_t num_transitions() const;
};

// Chooses an action for `state` of `env`. Implementations observe the state
// in whatever mode they were trained on, so an actor may drive a robot whose
// recorded observation mode differs from its own.
using Actor = std::function<std::vector<double>(const RobotEnv& env,
                                                const EnvState& state,
                                                Rng& rng)>;

// Uniform random actions in [-1, 1]^k.
Actor RandomActor();

// Runs `episodes` full episodes. Deterministic per seed.
std::vector<TrajectoryRecord> Collect(const RobotEnv& env, const Actor& actor,
                                      int episodes, uint64_t seed);

// Runs episodes back to back until exactly `steps` transitions are recorded;
// the final episode may be cut short.
std::vector<TrajectoryRecord> CollectSteps(const RobotEnv& env,
                                           const Actor& actor, int steps,
                                           uint64_t seed);

// Line-delimited JSON: a header line (schema, version, family, obs_mode,
// shared config or null, record count) followed by one episode per line.
// Doubles are written in shortest round-trip form, so save/load is
// bit-exact. Throws std::runtime_error naming the offending line on
// malformed, truncated or version-mismatched files.
void SaveRecords(const std::vector<TrajectoryRecord>& records,
                 const std::filesystem::path& path);
std::vector<TrajectoryRecord> LoadRecords(const std::filesystem::path& path);

inline constexpr double kStdFloor = 1e-6;

struct DatasetStats {
  std::vector<double> obs_mean;
  std::vector<double> obs_std;
  std::vector<double> action_mean;
  std::vector<double> action_std;
  size_t num_records = 0;
  size_t num_transitions = 0;
};

// Per-dimension mean and (population) standard deviation over every
// transition's observation and action, std floored at kStdFloor.
DatasetStats ComputeDatasetStats(const std::vector<TrajectoryRecord>& records);

}  // namespace irgail

#endif  // IRGAIL_DATASETS_H_
