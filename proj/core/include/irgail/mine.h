#ifndef IRGAIL_MINE_H_
#define IRGAIL_MINE_H_

// Donsker-Varadhan mutual-information lower bound between a latent variable
// and the robot configuration, estimated by a statistics network T:
//
//   I_T(Z, C) = mean_joint T(z, c) - log mean_marginal exp(T(z, c'))
//
// where marginal pairs take the configs of the same batch in shuffled order.

#include <vector>

#include <nlohmann/json.hpp>

#include "irgail/mlp.h"
#include "irgail/optimizer.h"
#include "irgail/random.h"
#include "irgail/tape.h"

namespace irgail {

inline constexpr Eigen::Index kMinMiBatch = 16;

enum class MineTarget { kStateLatent, kActionLatent };

// Joint pairs (latent.row(i), joint_config.row(i)) and marginal pairs
// (latent.row(i), marginal_config.row(i)), where marginal_config is
// joint_config with rows permuted by `permutation`.
struct MiBatch {
  Matrix latent;
  Matrix joint_config;
  Matrix marginal_config;
  std::vector<size_t> permutation;

  Eigen::Index size() const { return latent.rows(); }
  // Throws std::invalid_argument when the batch is empty, smaller than
  // kMinMiBatch, ragged, or the marginal configs are not a permutation of
  // the joint configs.
  void Validate() const;
};

MiBatch MakeMiBatch(const Matrix& latent, const Matrix& config, Rng& rng);

struct MineOptions {
  std::vector<int> hidden = {64, 64};
  double learning_rate = 1e-4;
  // Decay of the moving average of the partition term used to de-bias the
  // gradient of log mean exp(T).
  double ema_decay = 0.99;
};

// DV bound of `t` on `batch`. Evaluated with max-subtraction; exactly 0 for
// a constant statistics network.
double DvLowerBound(const Mlp& t, const MiBatch& batch);

// Differentiable DV bound with `t` frozen; gradients reach the latent (and
// config) inputs only.
Var DvLowerBound(Tape& tape, const Mlp& t, Var latent, Var joint_config,
                 Var marginal_config);

class MineNetwork {
 public:
  MineNetwork() = default;
  MineNetwork(MineTarget target, int latent_dim, int config_dim,
              const MineOptions& options, Rng& rng);

  double LowerBound(const MiBatch& batch) const {
    return DvLowerBound(net_, batch);
  }

  // One optimizer step ascending the bound, with the moving-average
  // corrected gradient for the partition term.
  void Update(const MiBatch& batch);

  MineTarget target() const { return target_; }
  const Mlp& net() const { return net_; }
  Mlp& net() { return net_; }
  int latent_dim() const { return latent_dim_; }
  int config_dim() const { return config_dim_; }
  void set_learning_rate(double lr) { optimizer_.set_learning_rate(lr); }

  nlohmann::json ToJson() const;
  static MineNetwork FromJson(const nlohmann::json& j);

 private:
  MineTarget target_ = MineTarget::kStateLatent;
  int latent_dim_ = 0;
  int config_dim_ = 0;
  Mlp net_;
  Adam optimizer_;
  double ema_decay_ = 0.99;
  double log_partition_ema_ = 0.0;
  bool ema_ready_ = false;
};

// Trains a fresh statistics network on `train` pairs and returns its bound on
// `held_out` pairs. Used as an MI probe on frozen representations.
double ProbeMutualInformation(const Matrix& train_latent,
                              const Matrix& train_config,
                              const Matrix& held_out_latent,
                              const Matrix& held_out_config, int steps,
                              int batch_size, const MineOptions& options,
                              uint64_t seed);

}  // namespace irgail

#endif  // IRGAIL_MINE_H_
