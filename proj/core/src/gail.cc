#include "irgail/gail.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace irgail {

namespace {

Matrix Concat(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows(), a.cols() + b.cols());
  out << a, b;
  return out;
}

Matrix ConfigRows(std::span<const double> config, Eigen::Index rows) {
  Matrix m(rows, static_cast<Eigen::Index>(config.size()));
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (size_t j = 0; j < config.size(); ++j) m(r, j) = config[j];
  }
  return m;
}

Matrix GatherRows(const Matrix& m, std::span<const size_t> rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (size_t i = 0; i < rows.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = m.row(rows[i]);
  }
  return out;
}

}  // namespace

Discriminator::Discriminator(int input_dim, const std::vector<int>& hidden,
                             double learning_rate, Rng& rng) {
  std::vector<int> widths = {input_dim};
  widths.insert(widths.end(), hidden.begin(), hidden.end());
  widths.push_back(1);
  net_ = Mlp(widths, Activation::kTanh);
  net_.InitRandom(rng);
  optimizer_ = Adam(net_.num_params(), {.learning_rate = learning_rate});
}

std::vector<double> Discriminator::Logits(const Matrix& latents) const {
  const Matrix out = net_.Forward(latents);
  std::vector<double> logits(static_cast<size_t>(out.rows()));
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    logits[i] = std::clamp(out(i, 0), -kLogitClamp, kLogitClamp);
  }
  return logits;
}

std::vector<double> Discriminator::Probabilities(const Matrix& latents) const {
  std::vector<double> p = Logits(latents);
  for (double& x : p) x = 1.0 / (1.0 + std::exp(-x));
  return p;
}

double Discriminator::Loss(const Matrix& expert, const Matrix& agent) const {
  return DiscriminatorLoss(Probabilities(expert), Probabilities(agent));
}

double Discriminator::UpdateEpoch(const Matrix& expert, const Matrix& agent,
                                  int batch_size, Rng& rng) {
  if (expert.rows() == 0 || agent.rows() == 0) {
    throw std::invalid_argument("discriminator update needs both sides");
  }
  if (batch_size < 1) throw std::invalid_argument("batch size must be >= 1");
  const auto n = static_cast<size_t>(agent.rows());
  const std::vector<size_t> perm = rng.Permutation(n);
  std::vector<double> grad(net_.num_params());
  double total = 0.0;
  int batches = 0;
  for (size_t start = 0; start < n; start += static_cast<size_t>(batch_size)) {
    const size_t count = std::min(static_cast<size_t>(batch_size), n - start);
    std::vector<size_t> expert_rows(count);
    for (auto& r : expert_rows) r = rng.Index(static_cast<size_t>(expert.rows()));
    std::fill(grad.begin(), grad.end(), 0.0);
    Tape tape;
    Var e = tape.Clamp(
        net_.Forward(tape, tape.Constant(GatherRows(expert, expert_rows)),
                     grad),
        -kLogitClamp, kLogitClamp);
    Var a = tape.Clamp(
        net_.Forward(tape,
                     tape.Constant(GatherRows(
                         agent, std::span<const size_t>(perm.data() + start,
                                                        count))),
                     grad),
        -kLogitClamp, kLogitClamp);
    Var loss = DiscriminatorLoss(tape, e, a);
    tape.Backward(loss);
    optimizer_.Step(net_.params(), grad);
    total += loss.scalar();
    ++batches;
  }
  return total / batches;
}

nlohmann::json Discriminator::ToJson() const {
  return {{"net", net_.ToJson()}, {"optimizer", optimizer_.ToJson()}};
}

Discriminator Discriminator::FromJson(const nlohmann::json& j) {
  Discriminator d;
  d.net_ = Mlp::FromJson(j.at("net"));
  d.optimizer_ = Adam::FromJson(j.at("optimizer"));
  return d;
}

double DiscriminatorLoss(std::span<const double> expert_probs,
                         std::span<const double> agent_probs) {
  if (expert_probs.empty() || agent_probs.empty()) {
    throw std::invalid_argument("discriminator loss needs expert and agent "
                                "samples");
  }
  double e = 0.0;
  for (double p : expert_probs) e -= std::log(p);
  double a = 0.0;
  for (double p : agent_probs) a -= std::log1p(-p);
  return e / static_cast<double>(expert_probs.size()) +
         a / static_cast<double>(agent_probs.size());
}

Var DiscriminatorLoss(Tape& tape, Var expert_logits, Var agent_logits) {
  // -log sigmoid(x) = softplus(-x); -log(1 - sigmoid(x)) = softplus(x).
  return tape.Mean(tape.Softplus(-expert_logits)) +
         tape.Mean(tape.Softplus(agent_logits));
}

double ImitationReward(double d) {
  const double p = std::clamp(d, kRewardProbClamp, 1.0 - kRewardProbClamp);
  return -std::log1p(-p);
}

std::string ToString(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::kGail:
      return "gail";
    case Algorithm::kIrGail:
      return "ir-gail";
    case Algorithm::kIrGailNoDyn:
      return "ir-gail-nodyn";
  }
  return "unknown";
}

Algorithm ParseAlgorithm(std::string_view name) {
  if (name == "gail") return Algorithm::kGail;
  if (name == "ir-gail") return Algorithm::kIrGail;
  if (name == "ir-gail-nodyn") return Algorithm::kIrGailNoDyn;
  throw std::invalid_argument("unknown algorithm '" + std::string(name) +
                              "' (expected gail, ir-gail or ir-gail-nodyn)");
}

void ImitationOptions::Validate() const {
  ppo.Validate();
  if (iterations < 1 || disc_batch_size < 1 || eval_episodes < 1) {
    throw std::invalid_argument("imitation budget must be positive");
  }
  if (!(disc_learning_rate > 0.0)) {
    throw std::invalid_argument("discriminator learning rate must be > 0");
  }
}

nlohmann::json ToJson(const ImitationOptions& o) {
  return {{"ppo", ToJson(o.ppo)},
          {"iterations", o.iterations},
          {"disc_hidden", o.disc_hidden},
          {"disc_learning_rate", o.disc_learning_rate},
          {"disc_batch_size", o.disc_batch_size},
          {"eval_episodes", o.eval_episodes}};
}

ImitationOptions ImitationOptionsFromJson(const nlohmann::json& j) {
  ImitationOptions o;
  if (j.contains("ppo")) o.ppo = PpoConfigFromJson(j.at("ppo"));
  o.iterations = j.value("iterations", o.iterations);
  o.disc_hidden = j.value("disc_hidden", o.disc_hidden);
  o.disc_learning_rate = j.value("disc_learning_rate", o.disc_learning_rate);
  o.disc_batch_size = j.value("disc_batch_size", o.disc_batch_size);
  o.eval_episodes = j.value("eval_episodes", o.eval_episodes);
  return o;
}

void WriteMetricsCsv(const std::vector<ImitationMetrics>& metrics,
                     const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out.precision(17);
  out << "iteration,disc_loss,mean_reward,true_return\n";
  for (const auto& m : metrics) {
    out << m.iteration << ',' << m.disc_loss << ',' << m.mean_reward << ','
        << m.true_return << '\n';
  }
}

Matrix EncodeDemos(const LatentEncoder& encoder, const DemoSet& demos) {
  std::vector<Matrix> parts;
  Eigen::Index rows = 0;
  for (const auto& rec : demos.records) {
    const auto n = static_cast<Eigen::Index>(rec.transitions.size());
    if (n == 0) continue;
    const auto od = static_cast<Eigen::Index>(
        rec.transitions.front().observation.size());
    const auto ad =
        static_cast<Eigen::Index>(rec.transitions.front().action.size());
    Matrix obs(n, od), act(n, ad);
    for (Eigen::Index t = 0; t < n; ++t) {
      const auto& tr = rec.transitions[static_cast<size_t>(t)];
      for (Eigen::Index j = 0; j < od; ++j) obs(t, j) = tr.observation[j];
      for (Eigen::Index j = 0; j < ad; ++j) act(t, j) = tr.action[j];
    }
    const Matrix cfg = ConfigRows(rec.config.params, n);
    parts.push_back(Concat(encoder.EncodeStates(obs, cfg),
                           encoder.EncodeActions(act, cfg)));
    rows += n;
  }
  if (rows == 0) throw std::invalid_argument("demo set has no transitions");
  Matrix out(rows, parts.front().cols());
  Eigen::Index at = 0;
  for (const auto& p : parts) {
    out.middleRows(at, p.rows()) = p;
    at += p.rows();
  }
  return out;
}

Matrix EncodeAgent(const LatentEncoder& encoder, const RolloutBatch& batch,
                   const RobotConfig& target) {
  const Matrix cfg = ConfigRows(target.params, batch.env_obs.rows());
  return Concat(encoder.EncodeStates(batch.env_obs, cfg),
                encoder.EncodeActions(batch.executed, cfg));
}

ImitationResult RunImitation(const RobotConfig& target,
                             const EnvSettings& settings, const DemoSet& demos,
                             const LatentEncoder& encoder,
                             const ImitationOptions& options, uint64_t seed) {
  options.Validate();
  ValidateConfig(target);
  const RobotEnv env(target, settings);
  Rng rng(seed);

  // Demos are encoded once; the encoder is frozen during imitation.
  const Matrix expert = EncodeDemos(encoder, demos);
  if (expert.cols() != encoder.state_dim() + encoder.action_dim()) {
    throw std::invalid_argument("encoder output width mismatch");
  }

  ImitationResult result;
  result.policy = Policy(env.observation_dim(), env.action_dim(),
                         target.obs_mode, options.ppo, rng);
  result.discriminator =
      Discriminator(static_cast<int>(expert.cols()), options.disc_hidden,
                    options.disc_learning_rate, rng);
  PpoOptimizers optimizers(result.policy, options.ppo);

  for (int it = 1; it <= options.iterations; ++it) {
    RolloutBatch batch = CollectRollout(
        env, result.policy, options.ppo.steps_per_iteration, rng);
    const Matrix agent = EncodeAgent(encoder, batch, target);
    ImitationMetrics m;
    m.iteration = it;
    m.disc_loss = result.discriminator.UpdateEpoch(
        expert, agent, options.disc_batch_size, rng);

    const std::vector<double> d = result.discriminator.Probabilities(agent);
    double reward_sum = 0.0;
    for (size_t i = 0; i < d.size(); ++i) {
      batch.rewards[i] = ImitationReward(d[i]);
      reward_sum += batch.rewards[i];
    }
    m.mean_reward = reward_sum / static_cast<double>(d.size());
    double ret = 0.0;
    for (double r : batch.episode_returns) ret += r;
    m.true_return = batch.episode_returns.empty()
                        ? std::nan("")
                        : ret / static_cast<double>(batch.episode_returns.size());

    PpoUpdate(result.policy, batch, options.ppo, optimizers, rng);
    result.metrics.push_back(m);
  }
  result.final_return = EvaluatePolicy(env, result.policy,
                                       options.eval_episodes,
                                       DeriveSeed(seed, 0xE7A1));
  return result;
}

}  // namespace irgail
