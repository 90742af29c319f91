#ifndef IRGAIL_EVAL_H_
#define IRGAIL_EVAL_H_

// Evaluation protocol: interpolation/extrapolation target splits, returns
// normalized against per-target expert and random references, the
// algorithm table and dynamics-loss ablation, and latent state coupling.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "irgail/gail.h"
#include "irgail/ppo.h"
#include "irgail/robot_family.h"

namespace irgail {

// (raw - random) / (expert - random). Throws std::invalid_argument when
// expert_ref <= random_ref.
double NormalizedReturn(double raw, double expert_ref, double random_ref);

enum class SplitMode { kInterpolation, kExtrapolation };
std::string ToString(SplitMode mode);

struct Splits {
  std::vector<RobotConfig> interpolation;  // inside the ball
  std::vector<RobotConfig> extrapolation;  // in the space, outside the ball
};

// Requires the ball to lie strictly inside the space. Deterministic per
// seed; throws std::runtime_error when a side cannot be sampled.
Splits MakeSplits(Family family, ObsMode obs_mode, const ConfigSpace& space,
                  const BallRegion& ball, int n_interpolation,
                  int n_extrapolation, uint64_t seed);

struct ReferenceReturns {
  double expert = 0.0;
  double random = 0.0;
};

// Trains a reference expert on `target` (observing in `expert_obs_mode`)
// and measures it and the random policy over `episodes` episodes.
ReferenceReturns MeasureReferences(const RobotConfig& target,
                                   const EnvSettings& settings,
                                   const PpoConfig& ppo,
                                   const ExpertOptions& expert,
                                   ObsMode expert_obs_mode, int episodes,
                                   uint64_t seed);

struct TargetResult {
  RobotConfig config;
  uint64_t seed = 0;
  double raw_return = 0.0;
  double normalized = 0.0;
  bool valid = false;
  std::string error;  // why the run is invalid
};

struct EvalReport {
  Family family = Family::kPendulum;
  ObsMode obs_mode = ObsMode::kKeypoint;
  SplitMode mode = SplitMode::kInterpolation;
  Algorithm algorithm = Algorithm::kIrGail;
  std::vector<TargetResult> results;

  size_t num_valid() const;
  // Over valid results; NaN when there are none.
  double mean() const;
  // Population standard deviation over valid results.
  double std() const;
  // A cell with any failed sub-run is marked invalid.
  bool valid() const { return !results.empty() && num_valid() == results.size(); }
};

// Raw true return of one imitation run on `target`.
using ImitationRunner =
    std::function<double(const RobotConfig& target, uint64_t seed)>;
using ReferenceLookup =
    std::function<ReferenceReturns(const RobotConfig& target)>;

// Runs every (target, seed) pair. Exceptions from a sub-run are recorded in
// its result, which is then marked invalid.
EvalReport EvaluateCell(Family family, ObsMode obs_mode, SplitMode mode,
                        Algorithm algorithm,
                        const std::vector<RobotConfig>& targets,
                        std::span<const uint64_t> seeds,
                        const ImitationRunner& run,
                        const ReferenceLookup& references);

struct TableCell {
  ObsMode obs_mode = ObsMode::kKeypoint;
  SplitMode mode = SplitMode::kInterpolation;
  Algorithm algorithm = Algorithm::kIrGail;
};

using RunnerFactory =
    std::function<ImitationRunner(Algorithm algorithm, ObsMode obs_mode)>;

// One report per requested cell. Targets are taken from `splits` and
// re-tagged with the cell's observation mode.
std::vector<EvalReport> RunTable(Family family,
                                 const std::vector<TableCell>& cells,
                                 const Splits& splits,
                                 std::span<const uint64_t> seeds,
                                 const RunnerFactory& runners,
                                 const ReferenceLookup& references);

// IR-GAIL and IR-GAIL-noDyn on both splits, in that order per split.
std::vector<EvalReport> RunAblation(Family family, ObsMode obs_mode,
                                    const Splits& splits,
                                    std::span<const uint64_t> seeds,
                                    const RunnerFactory& runners,
                                    const ReferenceLookup& references);

// Summary rows (family, obs_mode, mode, algorithm, mean, std, counts).
void WriteReportCsv(const std::vector<EvalReport>& reports,
                    const std::filesystem::path& path);
// One row per (cell, target, seed).
void WriteRunsCsv(const std::vector<EvalReport>& reports,
                  const std::filesystem::path& path);

// States of one robot, one row per state.
struct RobotRollout {
  RobotConfig config;
  Matrix observations;
};

struct CouplingEntry {
  size_t robot = 0;
  size_t state_index = 0;
  double distance = 0.0;  // Euclidean, in the state latent space
};

struct CouplingGroup {
  size_t anchor_robot = 0;
  size_t anchor_state = 0;
  std::vector<double> anchor;  // latent of the anchor state
  std::vector<CouplingEntry> entries;  // one per robot with states
};

// Samples anchors from the pooled encoded states and, per robot, finds the
// state whose latent is nearest to each anchor. Robots without states are
// skipped and reported through `warnings`. Throws std::invalid_argument when
// fewer than two robots have states.
std::vector<CouplingGroup> CoupleStates(const LatentEncoder& encoder,
                                        const std::vector<RobotRollout>& rollouts,
                                        int n_anchors, uint64_t seed,
                                        std::vector<std::string>* warnings = nullptr);

// Mean over groups of the mean pairwise joint-angle distance (wrapped to
// (-pi, pi], Euclidean over joints) between the grouped states.
double GroupAngleDiscrepancy(const std::vector<RobotRollout>& rollouts,
                             const std::vector<CouplingGroup>& groups);

// Same statistic when each robot's state in every group is replaced by a
// uniformly drawn state of that robot.
double RandomGroupingDiscrepancy(const std::vector<RobotRollout>& rollouts,
                                 const std::vector<CouplingGroup>& groups,
                                 uint64_t seed);

// anchor_id, robot, config, state_index, distance, joint angles and the
// observation, one row per group entry.
void WriteCouplingCsv(const std::vector<RobotRollout>& rollouts,
                      const std::vector<CouplingGroup>& groups,
                      const std::filesystem::path& path);

}  // namespace irgail

#endif  // IRGAIL_EVAL_H_
