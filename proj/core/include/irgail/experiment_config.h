#ifndef IRGAIL_EXPERIMENT_CONFIG_H_
#define IRGAIL_EXPERIMENT_CONFIG_H_

// One JSON file drives every pipeline stage. Missing keys take the defaults
// below; unknown keys are rejected so typos do not pass silently.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "irgail/gail.h"
#include "irgail/invariant_repr.h"
#include "irgail/ppo.h"
#include "irgail/robot_family.h"

namespace irgail {

inline constexpr int kConfigSchemaVersion = 1;

struct ExpertSection {
  ObsMode obs_mode = ObsMode::kAngle;  // what experts observe while training
  int max_iterations = 200;
  int eval_every = 5;
  int eval_episodes = 5;
  // Fraction of the family's achievable return an expert must reach.
  double target_fraction = 0.95;
};

struct DemoSection {
  int experts = 4;
  int trajectories = 32;  // in total, split evenly across experts
};

struct ReprSection {
  int random_robots = 16;
  int steps_per_robot = 1000;
  bool include_expert_demos = true;
  int state_latent_dim = 8;
  int action_latent_dim = 4;
  LossWeights weights;
  ReprOptions options;
};

// Coupling rollouts are driven by the stored experts.
struct CouplingSection {
  int robots = 8;
  int steps_per_robot = 400;
  int anchors = 20;
  // Sample the robots in the training region rather than the whole space.
  bool within_region = true;
};

struct EvaluationSection {
  int n_interpolation = 4;
  int n_extrapolation = 4;
  std::vector<Algorithm> algorithms = {Algorithm::kGail, Algorithm::kIrGail};
  // Also run GAIL with angle observations on interpolation targets.
  bool angle_control = true;
  bool ablation = true;
  int reference_episodes = 10;
  CouplingSection coupling;
};

struct ImitationSection {
  int iterations = 100;
  std::vector<int> disc_hidden = {64, 64};
  double disc_learning_rate = 3e-4;
  int disc_batch_size = 256;
  int eval_episodes = 10;
};

struct ExperimentConfig {
  int schema_version = kConfigSchemaVersion;
  Family family = Family::kPendulum;
  ObsMode obs_mode = ObsMode::kKeypoint;
  ConfigSpace config_space;  // family default when omitted
  BallRegion region;         // centered, 0.3 x the narrowest width, if omitted
  EnvSettings env;
  uint64_t seed = 0;
  std::vector<uint64_t> eval_seeds = {0, 1, 2};
  DemoSection demos;
  ReprSection representation;
  PpoConfig ppo;
  ExpertSection expert;
  ImitationSection imitation;
  EvaluationSection evaluation;
  std::string output_dir = "runs/default";

  // Throws std::invalid_argument naming the offending field.
  void Validate() const;

  ImitationOptions MakeImitationOptions() const;
  ExpertOptions MakeExpertOptions() const;
  ReprDims MakeReprDims() const;
};

BallRegion DefaultRegion(const ConfigSpace& space);

nlohmann::json ToJson(const ExperimentConfig& config);
ExperimentConfig ExperimentConfigFromJson(const nlohmann::json& j);
ExperimentConfig LoadExperimentConfig(const std::filesystem::path& path);

// Applies "a.b.c=value" to the JSON tree; the value is parsed as JSON when
// possible and as a string otherwise. Only existing scalar fields may be
// overridden.
void ApplyOverride(nlohmann::json& tree, const std::string& assignment);

// 64-bit FNV-1a.
uint64_t Fnv1a(std::string_view bytes);
std::string HexDigest(uint64_t value);
// Digest of the canonical (fully defaulted) JSON form, output_dir excluded.
std::string ConfigHash(const ExperimentConfig& config);

}  // namespace irgail

#endif  // IRGAIL_EXPERIMENT_CONFIG_H_
