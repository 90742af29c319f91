#ifndef IRGAIL_INVARIANT_REPR_H_
#define IRGAIL_INVARIANT_REPR_H_

// Config-conditioned variational encoders/decoders for states and actions,
// a latent dynamics model, and two MINE statistics networks. Training
// minimizes
//
//   L = L_sr + L_ar + w_disent * (I_Ts + I_Ta) + w_dyn * L_dyn + w_kl * L_kl
//
// and, after every step, updates the statistics networks to track the
// mutual information between latents and configuration.

#include <filesystem>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "irgail/datasets.h"
#include "irgail/gaussian.h"
#include "irgail/mine.h"
#include "irgail/mlp.h"
#include "irgail/robot_family.h"
#include "irgail/tape.h"

namespace irgail {

struct ReprDims {
  int obs_dim = 0;
  int action_dim = 0;
  int config_dim = 0;
  int state_latent_dim = 8;
  int action_latent_dim = 4;
};

struct LossWeights {
  double disentangle = 0.1;
  double dynamics = 1.0;  // 0 gives the no-dynamics ablation
  double prior_kl = 1e-3;

  void Validate() const;
};

struct LossParts {
  double state_recon = 0.0;
  double action_recon = 0.0;
  double disentangle = 0.0;
  double dynamics = 0.0;
  double prior_kl = 0.0;
};

// Exact weighted sum of the parts.
double TotalLoss(const LossParts& parts, const LossWeights& weights);

struct LatentPair {
  std::vector<double> state;
  std::vector<double> action;
};

// One (s_t, a_t, s_{t+1}) sample tagged with its robot configuration.
struct Transition {
  std::vector<double> obs;
  std::vector<double> action;
  std::vector<double> next_obs;
  std::vector<double> config;
};

// Per-column affine whitening (x - mean) / std.
struct Whitening {
  std::vector<double> mean;
  std::vector<double> std;

  static Whitening Identity(size_t dim);
  // Fitted on the rows of `data`, std floored at kStdFloor.
  static Whitening Fit(const Matrix& data);
  Matrix Apply(const Matrix& rows) const;
  std::vector<double> Apply(std::span<const double> x) const;
};

struct ReprOptions {
  int steps = 20000;
  int batch_size = 256;
  double learning_rate = 3e-4;
  std::vector<int> hidden = {64, 64};
  MineOptions mine;
  // Statistics-network updates per encoder step, each on a fresh marginal
  // shuffle of the step's latents.
  int mine_updates = 1;
  uint64_t seed = 0;
};

// Standard-normal noise for the three reparameterized samples of a batch.
struct ReprNoise {
  Matrix state;
  Matrix action;
  Matrix next_state;

  static ReprNoise Sample(Eigen::Index rows, const ReprDims& dims, Rng& rng);
  static ReprNoise Zero(Eigen::Index rows, const ReprDims& dims);
};

// Whitened training batch.
struct ReprBatch {
  Matrix obs;
  Matrix action;
  Matrix next_obs;
  Matrix config;
};

class InvariantRepresentation {
 public:
  InvariantRepresentation() = default;
  InvariantRepresentation(const ReprDims& dims, const LossWeights& weights,
                          const ReprOptions& options, Rng& rng);

  const ReprDims& dims() const { return dims_; }
  const LossWeights& weights() const { return weights_; }
  void set_weights(const LossWeights& w) {
    w.Validate();
    weights_ = w;
  }

  // Encoders take raw observations/configs; whitening is applied inside.
  DiagGaussian EncodeState(std::span<const double> obs,
                           std::span<const double> config) const;
  DiagGaussian EncodeAction(std::span<const double> action,
                            std::span<const double> config) const;
  // Batched means; `config` is one row per sample.
  Matrix EncodeStateMean(const Matrix& obs, const Matrix& config) const;
  Matrix EncodeActionMean(const Matrix& action, const Matrix& config) const;

  ReprBatch Whiten(const Matrix& obs, const Matrix& action,
                   const Matrix& next_obs, const Matrix& config) const;

  Mlp& state_encoder() { return state_encoder_; }
  Mlp& action_encoder() { return action_encoder_; }
  Mlp& state_decoder() { return state_decoder_; }
  Mlp& action_decoder() { return action_decoder_; }
  Mlp& dynamics() { return dynamics_; }
  MineNetwork& state_mine() { return state_mine_; }
  MineNetwork& action_mine() { return action_mine_; }
  const Mlp& state_encoder() const { return state_encoder_; }
  const Mlp& action_encoder() const { return action_encoder_; }
  const Mlp& state_decoder() const { return state_decoder_; }
  const Mlp& action_decoder() const { return action_decoder_; }
  const Mlp& dynamics() const { return dynamics_; }
  const MineNetwork& state_mine() const { return state_mine_; }
  const MineNetwork& action_mine() const { return action_mine_; }

  const Whitening& obs_whitening() const { return obs_whitening_; }
  const Whitening& config_whitening() const { return config_whitening_; }
  void set_whitening(Whitening obs, Whitening config);

  nlohmann::json ToJson() const;
  static InvariantRepresentation FromJson(const nlohmann::json& j);
  void Save(const std::filesystem::path& path) const;
  static InvariantRepresentation Load(const std::filesystem::path& path);

 private:
  ReprDims dims_;
  LossWeights weights_;
  Mlp state_encoder_;
  Mlp action_encoder_;
  Mlp state_decoder_;
  Mlp action_decoder_;
  Mlp dynamics_;
  MineNetwork state_mine_;
  MineNetwork action_mine_;
  Whitening obs_whitening_;
  Whitening config_whitening_;
};

// Gradient buffers, one per trainable network of the main objective.
struct ReprGradients {
  std::vector<double> state_encoder;
  std::vector<double> action_encoder;
  std::vector<double> state_decoder;
  std::vector<double> action_decoder;
  std::vector<double> dynamics;

  explicit ReprGradients(const InvariantRepresentation& repr);
  void Zero();
};

// Nodes of one recorded objective.
struct ReprGraph {
  Var total;
  Var state_recon;
  Var action_recon;
  Var disentangle;
  Var dynamics;
  Var prior_kl;
  Var state_latent;   // reparameterized z^s_t
  Var action_latent;  // reparameterized z^a_t

  LossParts parts() const;
};

// Records the full objective for a whitened batch. Statistics networks are
// frozen inside; marginal configs use `marginal_rows`. When `grads` is null
// every network is frozen. With a zero dynamics weight the dynamics model is
// left out of the gradient entirely.
ReprGraph BuildReprLoss(Tape& tape, const InvariantRepresentation& repr,
                        const ReprBatch& batch, const ReprNoise& noise,
                        const std::vector<size_t>& marginal_rows,
                        ReprGradients* grads);

// Mean over rows of the squared Euclidean row error.
double SquaredErrorLoss(const Matrix& target, const Matrix& prediction);
Var SquaredErrorLoss(Tape& tape, Var target, Var prediction);

// (L_sr, L_ar) for raw transitions, using the supplied noise.
std::pair<double, double> ReconstructionLosses(
    const InvariantRepresentation& repr, const std::vector<Transition>& batch,
    const ReprNoise& noise);

// KL(state || N(0,I)) + KL(action || N(0,I)).
double PriorKlLoss(const DiagGaussian& state_dist,
                   const DiagGaussian& action_dist);

// ||F(z^s, z^a) - z^s_next||^2, single sample and batched (row mean).
double DynamicsLoss(const Mlp& dynamics, const LatentPair& z,
                    std::span<const double> next_state_latent);
double DynamicsLoss(const Mlp& dynamics, const Matrix& state_latent,
                    const Matrix& action_latent,
                    const Matrix& next_state_latent);

// Random-policy rollouts on `n_robots` configs sampled in `region`, exactly
// `steps_per_robot` transitions per robot.
std::vector<TrajectoryRecord> CollectRandomRollouts(
    Family family, ObsMode obs_mode, const ConfigSpace& space,
    const BallRegion& region, const EnvSettings& settings, int n_robots,
    int steps_per_robot, uint64_t seed);

// Flattens random rollouts (and expert demos when given and enabled) into
// config-tagged transitions.
std::vector<Transition> BuildReprDataset(
    const std::vector<TrajectoryRecord>& random_rollouts,
    const DemoSet* expert_demos, bool include_expert_demos);

std::vector<Transition> ToTransitions(
    const std::vector<TrajectoryRecord>& records);

struct ReprTrainingLog {
  std::vector<LossParts> parts;  // one entry per step
  std::vector<double> total;
  std::vector<double> state_mi;  // T_s bound on the step's batch
  std::vector<double> action_mi;

  void WriteCsv(const std::filesystem::path& path) const;
};

// Alternates one minibatch step on L (encoders, decoders, dynamics) with
// one MINE update per statistics network. Fits whitening on `data` first.
// Throws NumericalError naming the term when a loss goes non-finite.
ReprTrainingLog TrainRepresentation(InvariantRepresentation& repr,
                                    const std::vector<Transition>& data,
                                    const ReprOptions& options);

}  // namespace irgail

#endif  // IRGAIL_INVARIANT_REPR_H_
