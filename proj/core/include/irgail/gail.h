#ifndef IRGAIL_GAIL_H_
#define IRGAIL_GAIL_H_

// Adversarial imitation in a latent space. The discriminator scores
// (state latent, action latent) pairs; the agent is trained with PPO on
// r = -log(1 - D). Plain GAIL is the same loop with identity encoders.

#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "irgail/datasets.h"
#include "irgail/invariant_repr.h"
#include "irgail/mlp.h"
#include "irgail/optimizer.h"
#include "irgail/ppo.h"

namespace irgail {

inline constexpr double kLogitClamp = 10.0;
inline constexpr double kRewardProbClamp = 1e-6;

// Maps raw observations/actions of a robot with configuration `config`
// (one row per sample) into the discriminator's input space.
class LatentEncoder {
 public:
  virtual ~LatentEncoder() = default;
  virtual int state_dim() const = 0;
  virtual int action_dim() const = 0;
  virtual Matrix EncodeStates(const Matrix& obs, const Matrix& config) const = 0;
  virtual Matrix EncodeActions(const Matrix& actions,
                               const Matrix& config) const = 0;
};

// Raw states and actions, for the GAIL baseline.
class IdentityEncoder : public LatentEncoder {
 public:
  IdentityEncoder(int obs_dim, int action_dim)
      : obs_dim_(obs_dim), action_dim_(action_dim) {}
  int state_dim() const override { return obs_dim_; }
  int action_dim() const override { return action_dim_; }
  Matrix EncodeStates(const Matrix& obs, const Matrix&) const override {
    return obs;
  }
  Matrix EncodeActions(const Matrix& actions, const Matrix&) const override {
    return actions;
  }

 private:
  int obs_dim_;
  int action_dim_;
};

// Encoder means of a trained invariant representation.
class InvariantEncoder : public LatentEncoder {
 public:
  explicit InvariantEncoder(const InvariantRepresentation& repr)
      : repr_(repr) {}
  int state_dim() const override { return repr_.dims().state_latent_dim; }
  int action_dim() const override { return repr_.dims().action_latent_dim; }
  Matrix EncodeStates(const Matrix& obs, const Matrix& config) const override {
    return repr_.EncodeStateMean(obs, config);
  }
  Matrix EncodeActions(const Matrix& actions,
                       const Matrix& config) const override {
    return repr_.EncodeActionMean(actions, config);
  }

 private:
  const InvariantRepresentation& repr_;
};

// Expert/agent discriminator on concatenated (z_s, z_a).
class Discriminator {
 public:
  Discriminator() = default;
  Discriminator(int input_dim, const std::vector<int>& hidden,
                double learning_rate, Rng& rng);

  // Logits clamped to +-kLogitClamp, one per row.
  std::vector<double> Logits(const Matrix& latents) const;
  std::vector<double> Probabilities(const Matrix& latents) const;
  // Loss on the given expert and agent latents.
  double Loss(const Matrix& expert, const Matrix& agent) const;

  // One pass over the agent rows in minibatches of `batch_size`, each paired
  // with as many expert rows drawn with replacement. Returns the mean loss.
  double UpdateEpoch(const Matrix& expert, const Matrix& agent, int batch_size,
                     Rng& rng);

  const Mlp& net() const { return net_; }
  Mlp& net() { return net_; }

  nlohmann::json ToJson() const;
  static Discriminator FromJson(const nlohmann::json& j);

 private:
  Mlp net_;
  Adam optimizer_;
};

// -mean log D(expert) - mean log(1 - D(agent)) from probabilities. Throws
// std::invalid_argument when either side is empty.
double DiscriminatorLoss(std::span<const double> expert_probs,
                         std::span<const double> agent_probs);
// Same objective from logits via softplus, recorded on a tape.
Var DiscriminatorLoss(Tape& tape, Var expert_logits, Var agent_logits);

// -log(1 - D) with D clamped to [kRewardProbClamp, 1 - kRewardProbClamp].
double ImitationReward(double d);

enum class Algorithm { kGail, kIrGail, kIrGailNoDyn };

std::string ToString(Algorithm algorithm);
Algorithm ParseAlgorithm(std::string_view name);

struct ImitationOptions {
  PpoConfig ppo;
  int iterations = 100;
  std::vector<int> disc_hidden = {64, 64};
  double disc_learning_rate = 3e-4;
  int disc_batch_size = 256;
  // Episodes of the deterministic true-return evaluation at the end.
  int eval_episodes = 10;

  void Validate() const;
};

nlohmann::json ToJson(const ImitationOptions& o);
ImitationOptions ImitationOptionsFromJson(const nlohmann::json& j);

struct ImitationMetrics {
  int iteration = 0;
  double disc_loss = 0.0;
  double mean_reward = 0.0;   // mean imitation reward of the batch
  double true_return = 0.0;   // mean env return of finished episodes
};

void WriteMetricsCsv(const std::vector<ImitationMetrics>& metrics,
                     const std::filesystem::path& path);

struct ImitationResult {
  Policy policy;
  Discriminator discriminator;
  std::vector<ImitationMetrics> metrics;
  double final_return = 0.0;  // deterministic evaluation on the target
};

// Expert latents: each demo is encoded with its own source config.
Matrix EncodeDemos(const LatentEncoder& encoder, const DemoSet& demos);
// Agent latents of a rollout, encoded with the target config.
Matrix EncodeAgent(const LatentEncoder& encoder, const RolloutBatch& batch,
                   const RobotConfig& target);

// Imitation on `target`: rollout, encode, one discriminator epoch, reward
// relabel, PPO. The true reward is only logged. Deterministic per seed.
ImitationResult RunImitation(const RobotConfig& target,
                             const EnvSettings& settings, const DemoSet& demos,
                             const LatentEncoder& encoder,
                             const ImitationOptions& options, uint64_t seed);

}  // namespace irgail

#endif  // IRGAIL_GAIL_H_
