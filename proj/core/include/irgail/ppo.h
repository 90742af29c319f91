#ifndef IRGAIL_PPO_H_
#define IRGAIL_PPO_H_

// Proximal policy optimization with generalized advantage estimation, the
// Gaussian policy it trains, and expert training on the true reward.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "irgail/datasets.h"
#include "irgail/gaussian.h"
#include "irgail/mlp.h"
#include "irgail/optimizer.h"
#include "irgail/random.h"
#include "irgail/robot_family.h"

namespace irgail {

struct PpoConfig {
  double gamma = 0.99;
  double gae_lambda = 0.95;
  double clip_ratio = 0.2;
  int epochs = 10;
  int minibatch_size = 64;
  int steps_per_iteration = 2048;
  double entropy_coef = 0.0;
  double value_coef = 0.5;
  double learning_rate = 3e-4;
  double max_grad_norm = 0.5;
  // Epochs stop once the mean KL(old || new) over the batch exceeds this.
  double target_kl = 0.05;
  double init_log_std = -0.5;
  std::vector<int> hidden = {64, 64};

  void Validate() const;
};

nlohmann::json ToJson(const PpoConfig& c);
// Missing keys keep their defaults.
PpoConfig PpoConfigFromJson(const nlohmann::json& j);

struct GaeResult {
  std::vector<double> advantages;
  std::vector<double> returns;
};

// Backward recursion
//   delta_t = r_t + gamma * V_{t+1} * (1 - done_t) - V_t
//   A_t     = delta_t + gamma * lambda * (1 - done_t) * A_{t+1}
// with V_T = `last_value` after the final step. Throws std::invalid_argument
// on mismatched lengths or out-of-range gamma/lambda.
GaeResult GaeAdvantages(std::span<const double> rewards,
                        std::span<const double> values,
                        std::span<const uint8_t> dones, double gamma,
                        double lambda, double last_value = 0.0);

// Per-feature running mean/variance (parallel Welford merge). Frozen between
// updates so a batch is always normalized consistently.
class RunningNormalizer {
 public:
  RunningNormalizer() = default;
  explicit RunningNormalizer(size_t dim);

  void Update(const Matrix& rows);
  // (x - mean) / std, clipped to +-kClip.
  Matrix Apply(const Matrix& rows) const;
  std::vector<double> Apply(std::span<const double> x) const;

  size_t dim() const { return mean_.size(); }
  double count() const { return count_; }

  nlohmann::json ToJson() const;
  static RunningNormalizer FromJson(const nlohmann::json& j);

  static constexpr double kClip = 10.0;

 private:
  std::vector<double> mean_;
  std::vector<double> m2_;
  double count_ = 0.0;
};

// Gaussian actor with a state-independent log std, plus a value critic.
// Samples are unbounded; the environment receives them clipped to [-1, 1].
class Policy {
 public:
  Policy() = default;
  Policy(size_t obs_dim, size_t action_dim, ObsMode obs_mode,
         const PpoConfig& config, Rng& rng);

  size_t obs_dim() const { return actor_.input_dim(); }
  size_t action_dim() const { return log_std_.size(); }
  ObsMode obs_mode() const { return obs_mode_; }

  DiagGaussian Distribution(std::span<const double> obs) const;
  // Batched action means for raw observations.
  Matrix MeanActions(const Matrix& obs) const;
  double Value(std::span<const double> obs) const;
  Matrix Values(const Matrix& obs) const;
  // Unclipped action: the mean when deterministic, otherwise a sample.
  std::vector<double> Act(std::span<const double> obs, bool deterministic,
                          Rng& rng) const;

  Mlp& actor() { return actor_; }
  Mlp& critic() { return critic_; }
  const Mlp& actor() const { return actor_; }
  const Mlp& critic() const { return critic_; }
  std::vector<double>& log_std() { return log_std_; }
  const std::vector<double>& log_std() const { return log_std_; }
  RunningNormalizer& normalizer() { return normalizer_; }
  const RunningNormalizer& normalizer() const { return normalizer_; }

  bool AllFinite() const;

  nlohmann::json ToJson() const;
  static Policy FromJson(const nlohmann::json& j);
  void Save(const std::filesystem::path& path) const;
  static Policy Load(const std::filesystem::path& path);

 private:
  Mlp actor_;
  Mlp critic_;
  std::vector<double> log_std_;
  RunningNormalizer normalizer_;
  ObsMode obs_mode_ = ObsMode::kAngle;
};

std::vector<double> ClipAction(std::span<const double> action);

// Drives an env with `policy`, observing in the policy's own mode.
Actor MakePolicyActor(const Policy& policy, bool deterministic);

// On-policy samples of one iteration, rows aligned.
struct RolloutBatch {
  Matrix obs;             // in the policy's observation mode
  Matrix actions;         // raw samples
  Matrix executed;        // clipped actions sent to the env
  Matrix old_means;
  std::vector<double> old_log_std;
  std::vector<double> old_log_probs;
  std::vector<double> values;
  std::vector<double> rewards;       // what PPO optimizes; may be relabeled
  std::vector<double> true_rewards;  // environment reward, for logging
  std::vector<uint8_t> terminated;
  // Episode boundary: termination, horizon or the end of the batch.
  std::vector<uint8_t> episode_end;
  // V(s') at non-terminal boundaries, 0 elsewhere.
  std::vector<double> bootstrap_values;
  std::vector<double> episode_returns;  // true returns of finished episodes
  // Observations of the env's own mode (what demos record).
  Matrix env_obs;

  size_t size() const { return rewards.size(); }
};

RolloutBatch CollectRollout(const RobotEnv& env, const Policy& policy,
                            int steps, Rng& rng);

struct PpoStats {
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double kl = 0.0;
  double clip_fraction = 0.0;
  int epochs_run = 0;
  bool early_stopped = false;
  bool restored = false;  // non-finite update rolled back
};

// Optimizer state carried across PPO iterations.
struct PpoOptimizers {
  Adam actor;
  Adam log_std;
  Adam critic;

  PpoOptimizers() = default;
  PpoOptimizers(const Policy& policy, const PpoConfig& config);
};

// Clipped-surrogate update on `batch` (advantages from batch.rewards).
PpoStats PpoUpdate(Policy& policy, const RolloutBatch& batch,
                   const PpoConfig& config, PpoOptimizers& optimizers,
                   Rng& rng);

// Loss pieces of one minibatch, exposed for testing. `advantages` are used
// as given.
struct SurrogateTerms {
  double surrogate = 0.0;  // mean clipped objective (to be maximized)
  double clip_fraction = 0.0;
  std::vector<double> actor_grad;
  std::vector<double> log_std_grad;
};
SurrogateTerms ClippedSurrogate(const Policy& policy, const Matrix& obs,
                                const Matrix& actions,
                                std::span<const double> old_log_probs,
                                std::span<const double> advantages,
                                double clip_ratio);

// Mean exact KL(old || new) between diagonal Gaussians with shared
// per-batch log stds.
double MeanGaussianKl(const Matrix& old_means,
                      std::span<const double> old_log_std,
                      const Matrix& new_means,
                      std::span<const double> new_log_std);

// Mean undiscounted return over `episodes` episodes.
double EvaluateActor(const RobotEnv& env, const Actor& actor, int episodes,
                     uint64_t seed);
double EvaluatePolicy(const RobotEnv& env, const Policy& policy, int episodes,
                      uint64_t seed);
double EvaluateRandom(const RobotEnv& env, int episodes, uint64_t seed);

struct ExpertOptions {
  int max_iterations = 200;
  int eval_every = 5;
  int eval_episodes = 5;
  // Training stops once the deterministic evaluation reaches this return;
  // unset means run the full budget.
  std::optional<double> target_return;
  // Throw when the target is not reached within the budget.
  bool require_target = true;
};

// Return considered achievable for the family, used as the default target:
// the full horizon for pendulum and cart-pole, none for the arm.
std::optional<double> AchievableReturn(Family family,
                                       const EnvSettings& settings);

struct ExpertResult {
  Policy policy;
  double eval_return = 0.0;
  int iterations = 0;
};

// Trains a policy on the true reward. Deterministic per seed. Throws
// std::runtime_error when a required target is not met.
ExpertResult TrainExpert(const RobotConfig& config, const EnvSettings& settings,
                         const PpoConfig& ppo, const ExpertOptions& options,
                         uint64_t seed);

}  // namespace irgail

#endif  // IRGAIL_PPO_H_
