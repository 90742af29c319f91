#include "irgail/mine.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace irgail {

namespace {

Matrix Concat(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows(), a.cols() + b.cols());
  out << a, b;
  return out;
}

double LogMeanExp(const Matrix& x) {
  const double m = x.maxCoeff();
  return m + std::log((x.array() - m).exp().mean());
}

Matrix GatherRows(const Matrix& m, const std::vector<size_t>& rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (size_t i = 0; i < rows.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = m.row(rows[i]);
  }
  return out;
}

}  // namespace

void MiBatch::Validate() const {
  if (latent.rows() == 0) throw std::invalid_argument("empty MI batch");
  if (latent.rows() < kMinMiBatch) {
    throw std::invalid_argument("MI batch needs at least " +
                                std::to_string(kMinMiBatch) + " pairs");
  }
  if (joint_config.rows() != latent.rows() ||
      marginal_config.rows() != latent.rows() ||
      joint_config.cols() != marginal_config.cols()) {
    throw std::invalid_argument("MI batch components have unequal lengths");
  }
  if (permutation.size() != static_cast<size_t>(latent.rows())) {
    throw std::invalid_argument("MI batch permutation has the wrong length");
  }
  std::vector<bool> seen(permutation.size(), false);
  for (size_t i = 0; i < permutation.size(); ++i) {
    const size_t p = permutation[i];
    if (p >= permutation.size() || seen[p]) {
      throw std::invalid_argument("MI batch permutation is not a permutation");
    }
    seen[p] = true;
    if (marginal_config.row(static_cast<Eigen::Index>(i)) !=
        joint_config.row(static_cast<Eigen::Index>(p))) {
      throw std::invalid_argument("marginal configs do not match the "
                                  "permuted joint configs");
    }
  }
}

MiBatch MakeMiBatch(const Matrix& latent, const Matrix& config, Rng& rng) {
  if (latent.rows() != config.rows()) {
    throw std::invalid_argument("MakeMiBatch: latent/config row mismatch");
  }
  MiBatch batch;
  batch.latent = latent;
  batch.joint_config = config;
  batch.permutation = rng.Permutation(static_cast<size_t>(config.rows()));
  batch.marginal_config = GatherRows(config, batch.permutation);
  batch.Validate();
  return batch;
}

double DvLowerBound(const Mlp& t, const MiBatch& batch) {
  batch.Validate();
  const Matrix joint = t.Forward(Concat(batch.latent, batch.joint_config));
  const Matrix marginal =
      t.Forward(Concat(batch.latent, batch.marginal_config));
  return joint.mean() - LogMeanExp(marginal);
}

Var DvLowerBound(Tape& tape, const Mlp& t, Var latent, Var joint_config,
                 Var marginal_config) {
  Var joint = t.Forward(tape, tape.ConcatCols(latent, joint_config));
  Var marginal = t.Forward(tape, tape.ConcatCols(latent, marginal_config));
  return tape.Mean(joint) - tape.LogMeanExp(marginal);
}

MineNetwork::MineNetwork(MineTarget target, int latent_dim, int config_dim,
                         const MineOptions& options, Rng& rng)
    : target_(target),
      latent_dim_(latent_dim),
      config_dim_(config_dim),
      ema_decay_(options.ema_decay) {
  std::vector<int> widths = {latent_dim + config_dim};
  widths.insert(widths.end(), options.hidden.begin(), options.hidden.end());
  widths.push_back(1);
  net_ = Mlp(widths, Activation::kTanh);
  net_.InitRandom(rng);
  optimizer_ = Adam(net_.num_params(), {.learning_rate = options.learning_rate});
}

void MineNetwork::Update(const MiBatch& batch) {
  batch.Validate();
  Tape tape;
  std::vector<double> grad(net_.num_params(), 0.0);
  Var joint = net_.Forward(
      tape, tape.Constant(Concat(batch.latent, batch.joint_config)), grad);
  Var marginal = net_.Forward(
      tape, tape.Constant(Concat(batch.latent, batch.marginal_config)), grad);

  // Track log E[exp T] with an exponential moving average in log space.
  const double batch_log_partition = LogMeanExp(marginal.value());
  if (!ema_ready_) {
    log_partition_ema_ = batch_log_partition;
    ema_ready_ = true;
  } else {
    const double a = std::log(ema_decay_) + log_partition_ema_;
    const double b = std::log(1.0 - ema_decay_) + batch_log_partition;
    const double m = std::max(a, b);
    log_partition_ema_ = m + std::log(std::exp(a - m) + std::exp(b - m));
  }

  // d/dtheta of mean(exp(T - log_ema)) = E[exp(T) dT] / ema, the de-biased
  // gradient of log E[exp T].
  Var partition =
      tape.Mean(tape.Exp(tape.Shift(marginal, -log_partition_ema_)));
  Var loss = partition - tape.Mean(joint);
  tape.Backward(loss);
  optimizer_.Step(net_.params(), grad);
}

nlohmann::json MineNetwork::ToJson() const {
  return {{"target", target_ == MineTarget::kStateLatent ? "state" : "action"},
          {"latent_dim", latent_dim_},
          {"config_dim", config_dim_},
          {"net", net_.ToJson()},
          {"ema_decay", ema_decay_},
          {"log_partition_ema", log_partition_ema_},
          {"ema_ready", ema_ready_},
          {"optimizer", optimizer_.ToJson()}};
}

MineNetwork MineNetwork::FromJson(const nlohmann::json& j) {
  MineNetwork m;
  m.target_ = j.at("target").get<std::string>() == "state"
                  ? MineTarget::kStateLatent
                  : MineTarget::kActionLatent;
  m.latent_dim_ = j.at("latent_dim").get<int>();
  m.config_dim_ = j.at("config_dim").get<int>();
  m.net_ = Mlp::FromJson(j.at("net"));
  m.ema_decay_ = j.at("ema_decay").get<double>();
  m.log_partition_ema_ = j.at("log_partition_ema").get<double>();
  m.ema_ready_ = j.at("ema_ready").get<bool>();
  m.optimizer_ = Adam::FromJson(j.at("optimizer"));
  return m;
}

double ProbeMutualInformation(const Matrix& train_latent,
                              const Matrix& train_config,
                              const Matrix& held_out_latent,
                              const Matrix& held_out_config, int steps,
                              int batch_size, const MineOptions& options,
                              uint64_t seed) {
  if (train_latent.rows() < batch_size) {
    throw std::invalid_argument("probe training set smaller than a batch");
  }
  Rng rng(seed);
  MineNetwork probe(MineTarget::kStateLatent,
                    static_cast<int>(train_latent.cols()),
                    static_cast<int>(train_config.cols()), options, rng);
  std::vector<size_t> rows(static_cast<size_t>(batch_size));
  for (int step = 0; step < steps; ++step) {
    for (auto& r : rows) r = rng.Index(static_cast<size_t>(train_latent.rows()));
    probe.Update(MakeMiBatch(GatherRows(train_latent, rows),
                             GatherRows(train_config, rows), rng));
  }
  return probe.LowerBound(MakeMiBatch(held_out_latent, held_out_config, rng));
}

}  // namespace irgail
