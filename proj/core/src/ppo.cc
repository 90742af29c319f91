#include "irgail/ppo.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <string>

#include "irgail/errors.h"

namespace irgail {

namespace {

constexpr int kPolicyCheckpointVersion = 1;

Matrix SpanRow(std::span<const double> x) {
  Matrix m(1, static_cast<Eigen::Index>(x.size()));
  for (size_t i = 0; i < x.size(); ++i) m(0, static_cast<Eigen::Index>(i)) = x[i];
  return m;
}

std::vector<double> RowVector(const Matrix& m, Eigen::Index row) {
  std::vector<double> out(static_cast<size_t>(m.cols()));
  for (Eigen::Index c = 0; c < m.cols(); ++c) out[c] = m(row, c);
  return out;
}

Matrix GatherRows(const Matrix& m, std::span<const size_t> rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (size_t i = 0; i < rows.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = m.row(rows[i]);
  }
  return out;
}

Matrix ColumnOf(std::span<const double> v) {
  Matrix m(static_cast<Eigen::Index>(v.size()), 1);
  for (size_t i = 0; i < v.size(); ++i) m(static_cast<Eigen::Index>(i), 0) = v[i];
  return m;
}

bool AllFinite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(),
                     [](double x) { return std::isfinite(x); });
}

struct SurrogateGraph {
  Var objective;  // mean clipped surrogate
  double clip_fraction = 0.0;
};

// Records the clipped surrogate. Rows whose ratio sits outside the trust
// region on the side the advantage pushes towards contribute the constant
// clipped value, so they carry no gradient.
SurrogateGraph RecordSurrogate(Tape& tape, const Policy& policy,
                               const Matrix& normalized_obs,
                               const Matrix& actions,
                               std::span<const double> old_log_probs,
                               std::span<const double> advantages,
                               double clip_ratio, std::span<double> actor_grad,
                               std::span<double> log_std_grad) {
  const auto rows = normalized_obs.rows();
  Var mean = policy.actor().Forward(tape, tape.Constant(normalized_obs),
                                    actor_grad);
  Var log_std = tape.RowParameter(
      ParamView{policy.log_std(), log_std_grad}, rows);
  Var log_prob = GaussianLogDensity(tape, {mean, log_std}, actions);
  Var ratio = tape.Exp(log_prob - tape.Constant(ColumnOf(old_log_probs)));

  Matrix live_weight(rows, 1);
  Matrix clipped_value(rows, 1);
  int clipped = 0;
  for (Eigen::Index i = 0; i < rows; ++i) {
    const double r = ratio.value()(i, 0);
    const double a = advantages[static_cast<size_t>(i)];
    const bool clip = (a > 0.0 && r > 1.0 + clip_ratio) ||
                      (a < 0.0 && r < 1.0 - clip_ratio);
    clipped += clip ? 1 : 0;
    live_weight(i, 0) = clip ? 0.0 : a;
    clipped_value(i, 0) =
        clip ? std::clamp(r, 1.0 - clip_ratio, 1.0 + clip_ratio) * a : 0.0;
  }
  SurrogateGraph g;
  g.objective = tape.Mean(tape.MulConst(ratio, live_weight) +
                          tape.Constant(clipped_value));
  g.clip_fraction = static_cast<double>(clipped) / static_cast<double>(rows);
  return g;
}

}  // namespace

void PpoConfig::Validate() const {
  if (!(gamma >= 0.0 && gamma <= 1.0)) {
    throw std::invalid_argument("ppo.gamma must lie in [0, 1]");
  }
  if (!(gae_lambda >= 0.0 && gae_lambda <= 1.0)) {
    throw std::invalid_argument("ppo.gae_lambda must lie in [0, 1]");
  }
  if (!(clip_ratio > 0.0)) {
    throw std::invalid_argument("ppo.clip_ratio must be positive");
  }
  if (epochs < 1 || minibatch_size < 1 || steps_per_iteration < 1) {
    throw std::invalid_argument(
        "ppo.epochs, minibatch_size and steps_per_iteration must be >= 1");
  }
  if (!(learning_rate > 0.0) || !(entropy_coef >= 0.0) ||
      !(value_coef >= 0.0) || !(target_kl > 0.0)) {
    throw std::invalid_argument("ppo coefficients out of range");
  }
}

nlohmann::json ToJson(const PpoConfig& c) {
  return {{"gamma", c.gamma},
          {"gae_lambda", c.gae_lambda},
          {"clip_ratio", c.clip_ratio},
          {"epochs", c.epochs},
          {"minibatch_size", c.minibatch_size},
          {"steps_per_iteration", c.steps_per_iteration},
          {"entropy_coef", c.entropy_coef},
          {"value_coef", c.value_coef},
          {"learning_rate", c.learning_rate},
          {"max_grad_norm", c.max_grad_norm},
          {"target_kl", c.target_kl},
          {"init_log_std", c.init_log_std},
          {"hidden", c.hidden}};
}

PpoConfig PpoConfigFromJson(const nlohmann::json& j) {
  PpoConfig c;
  c.gamma = j.value("gamma", c.gamma);
  c.gae_lambda = j.value("gae_lambda", c.gae_lambda);
  c.clip_ratio = j.value("clip_ratio", c.clip_ratio);
  c.epochs = j.value("epochs", c.epochs);
  c.minibatch_size = j.value("minibatch_size", c.minibatch_size);
  c.steps_per_iteration = j.value("steps_per_iteration", c.steps_per_iteration);
  c.entropy_coef = j.value("entropy_coef", c.entropy_coef);
  c.value_coef = j.value("value_coef", c.value_coef);
  c.learning_rate = j.value("learning_rate", c.learning_rate);
  c.max_grad_norm = j.value("max_grad_norm", c.max_grad_norm);
  c.target_kl = j.value("target_kl", c.target_kl);
  c.init_log_std = j.value("init_log_std", c.init_log_std);
  c.hidden = j.value("hidden", c.hidden);
  return c;
}

GaeResult GaeAdvantages(std::span<const double> rewards,
                        std::span<const double> values,
                        std::span<const uint8_t> dones, double gamma,
                        double lambda, double last_value) {
  if (rewards.size() != values.size() || rewards.size() != dones.size()) {
    throw std::invalid_argument(
        "GaeAdvantages: rewards, values and dones differ in length (" +
        std::to_string(rewards.size()) + ", " + std::to_string(values.size()) +
        ", " + std::to_string(dones.size()) + ")");
  }
  if (!(gamma >= 0.0 && gamma <= 1.0) || !(lambda >= 0.0 && lambda <= 1.0)) {
    throw std::invalid_argument("GaeAdvantages: gamma and lambda in [0, 1]");
  }
  const size_t n = rewards.size();
  GaeResult out;
  out.advantages.assign(n, 0.0);
  out.returns.assign(n, 0.0);
  double next_value = last_value;
  double next_adv = 0.0;
  for (size_t k = n; k-- > 0;) {
    const double live = dones[k] ? 0.0 : 1.0;
    const double delta = rewards[k] + gamma * next_value * live - values[k];
    next_adv = delta + gamma * lambda * live * next_adv;
    out.advantages[k] = next_adv;
    out.returns[k] = next_adv + values[k];
    next_value = values[k];
  }
  return out;
}

RunningNormalizer::RunningNormalizer(size_t dim)
    : mean_(dim, 0.0), m2_(dim, 0.0) {}

void RunningNormalizer::Update(const Matrix& rows) {
  if (rows.rows() == 0) return;
  if (rows.cols() != static_cast<Eigen::Index>(dim())) {
    throw std::invalid_argument("RunningNormalizer: dimension mismatch");
  }
  const double nb = static_cast<double>(rows.rows());
  const double total = count_ + nb;
  for (size_t j = 0; j < dim(); ++j) {
    const auto col = rows.col(static_cast<Eigen::Index>(j)).array();
    const double mb = col.mean();
    const double m2b = (col - mb).square().sum();
    const double delta = mb - mean_[j];
    mean_[j] += delta * nb / total;
    m2_[j] += m2b + delta * delta * count_ * nb / total;
  }
  count_ = total;
}

Matrix RunningNormalizer::Apply(const Matrix& rows) const {
  if (rows.cols() != static_cast<Eigen::Index>(dim())) {
    throw std::invalid_argument("RunningNormalizer: dimension mismatch");
  }
  Matrix out = rows;
  if (count_ < 2.0) return out;
  for (size_t j = 0; j < dim(); ++j) {
    const double sd = std::max(std::sqrt(m2_[j] / count_), kStdFloor);
    const auto c = static_cast<Eigen::Index>(j);
    out.col(c) = ((out.col(c).array() - mean_[j]) / sd)
                     .cwiseMax(-kClip)
                     .cwiseMin(kClip)
                     .matrix();
  }
  return out;
}

std::vector<double> RunningNormalizer::Apply(std::span<const double> x) const {
  return RowVector(Apply(SpanRow(x)), 0);
}

nlohmann::json RunningNormalizer::ToJson() const {
  return {{"mean", mean_}, {"m2", m2_}, {"count", count_}};
}

RunningNormalizer RunningNormalizer::FromJson(const nlohmann::json& j) {
  RunningNormalizer n;
  n.mean_ = j.at("mean").get<std::vector<double>>();
  n.m2_ = j.at("m2").get<std::vector<double>>();
  n.count_ = j.at("count").get<double>();
  if (n.mean_.size() != n.m2_.size()) {
    throw std::runtime_error("normalizer checkpoint is inconsistent");
  }
  return n;
}

Policy::Policy(size_t obs_dim, size_t action_dim, ObsMode obs_mode,
               const PpoConfig& config, Rng& rng)
    : log_std_(action_dim, config.init_log_std),
      normalizer_(obs_dim),
      obs_mode_(obs_mode) {
  std::vector<int> actor_widths = {static_cast<int>(obs_dim)};
  actor_widths.insert(actor_widths.end(), config.hidden.begin(),
                      config.hidden.end());
  std::vector<int> critic_widths = actor_widths;
  actor_widths.push_back(static_cast<int>(action_dim));
  critic_widths.push_back(1);
  actor_ = Mlp(actor_widths, Activation::kTanh);
  critic_ = Mlp(critic_widths, Activation::kTanh);
  actor_.InitRandom(rng, 0.01);
  critic_.InitRandom(rng);
}

DiagGaussian Policy::Distribution(std::span<const double> obs) const {
  return {actor_.Forward(normalizer_.Apply(obs)), log_std_};
}

Matrix Policy::MeanActions(const Matrix& obs) const {
  return actor_.Forward(normalizer_.Apply(obs));
}

double Policy::Value(std::span<const double> obs) const {
  return critic_.Forward(normalizer_.Apply(obs))[0];
}

Matrix Policy::Values(const Matrix& obs) const {
  return critic_.Forward(normalizer_.Apply(obs));
}

std::vector<double> Policy::Act(std::span<const double> obs,
                                bool deterministic, Rng& rng) const {
  DiagGaussian d = Distribution(obs);
  if (deterministic) return d.mean;
  return SampleReparam(d, rng.NormalVector(d.dim()));
}

bool Policy::AllFinite() const {
  return actor_.AllFinite() && critic_.AllFinite() &&
         irgail::AllFinite(log_std_);
}

nlohmann::json Policy::ToJson() const {
  return {{"schema", "irgail.policy"},
          {"version", kPolicyCheckpointVersion},
          {"obs_mode", ToString(obs_mode_)},
          {"actor", actor_.ToJson()},
          {"critic", critic_.ToJson()},
          {"log_std", log_std_},
          {"normalizer", normalizer_.ToJson()}};
}

Policy Policy::FromJson(const nlohmann::json& j) {
  if (j.value("version", -1) != kPolicyCheckpointVersion) {
    throw std::runtime_error("unsupported policy checkpoint version");
  }
  Policy p;
  p.obs_mode_ = ParseObsMode(j.at("obs_mode").get<std::string>());
  p.actor_ = Mlp::FromJson(j.at("actor"));
  p.critic_ = Mlp::FromJson(j.at("critic"));
  p.log_std_ = j.at("log_std").get<std::vector<double>>();
  p.normalizer_ = RunningNormalizer::FromJson(j.at("normalizer"));
  if (p.log_std_.size() != p.actor_.output_dim() ||
      p.normalizer_.dim() != p.actor_.input_dim()) {
    throw std::runtime_error("policy checkpoint has inconsistent shapes");
  }
  return p;
}

void Policy::Save(const std::filesystem::path& path) const {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out << ToJson().dump() << '\n';
}

Policy Policy::Load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return FromJson(nlohmann::json::parse(in));
}

std::vector<double> ClipAction(std::span<const double> action) {
  std::vector<double> out(action.begin(), action.end());
  for (double& a : out) a = std::clamp(a, -1.0, 1.0);
  return out;
}

Actor MakePolicyActor(const Policy& policy, bool deterministic) {
  return [&policy, deterministic](const RobotEnv& env, const EnvState& state,
                                  Rng& rng) {
    const auto obs = env.ObserveAs(state, policy.obs_mode());
    return ClipAction(policy.Act(obs, deterministic, rng));
  };
}

RolloutBatch CollectRollout(const RobotEnv& env, const Policy& policy,
                            int steps, Rng& rng) {
  if (steps < 1) throw std::invalid_argument("rollout needs >= 1 step");
  if (policy.obs_dim() != ObservationDim(env.config().family,
                                         policy.obs_mode()) ||
      policy.action_dim() != env.action_dim()) {
    throw std::invalid_argument("policy does not fit the environment");
  }
  const auto n = static_cast<Eigen::Index>(steps);
  const auto od = static_cast<Eigen::Index>(policy.obs_dim());
  const auto ad = static_cast<Eigen::Index>(policy.action_dim());
  RolloutBatch b;
  b.obs.resize(n, od);
  b.actions.resize(n, ad);
  b.executed.resize(n, ad);
  b.old_means.resize(n, ad);
  b.env_obs.resize(n, static_cast<Eigen::Index>(env.observation_dim()));
  b.old_log_std = policy.log_std();
  b.old_log_probs.reserve(steps);
  b.values.reserve(steps);
  b.rewards.reserve(steps);
  b.true_rewards.reserve(steps);
  b.terminated.reserve(steps);
  b.episode_end.reserve(steps);
  b.bootstrap_values.reserve(steps);

  EnvState state = env.Reset(rng.NextSeed());
  double episode_return = 0.0;
  for (Eigen::Index t = 0; t < n; ++t) {
    const auto obs = env.ObserveAs(state, policy.obs_mode());
    const auto env_obs = env.Observe(state);
    const DiagGaussian dist = policy.Distribution(obs);
    const auto action = SampleReparam(dist, rng.NormalVector(dist.dim()));
    const auto executed = ClipAction(action);
    const StepOutcome out = env.Step(state, executed);

    for (Eigen::Index j = 0; j < od; ++j) b.obs(t, j) = obs[j];
    for (Eigen::Index j = 0; j < b.env_obs.cols(); ++j) {
      b.env_obs(t, j) = env_obs[j];
    }
    for (Eigen::Index j = 0; j < ad; ++j) {
      b.actions(t, j) = action[j];
      b.executed(t, j) = executed[j];
      b.old_means(t, j) = dist.mean[j];
    }
    b.old_log_probs.push_back(LogDensity(dist, action));
    b.values.push_back(policy.Value(obs));
    b.rewards.push_back(out.reward);
    b.true_rewards.push_back(out.reward);
    b.terminated.push_back(out.terminated ? 1 : 0);
    const bool end = out.done() || t == n - 1;
    b.episode_end.push_back(end ? 1 : 0);
    b.bootstrap_values.push_back(
        end && !out.terminated
            ? policy.Value(env.ObserveAs(out.state, policy.obs_mode()))
            : 0.0);

    episode_return += out.reward;
    if (out.done()) {
      b.episode_returns.push_back(episode_return);
      episode_return = 0.0;
      state = env.Reset(rng.NextSeed());
    } else {
      state = out.state;
    }
  }
  return b;
}

PpoOptimizers::PpoOptimizers(const Policy& policy, const PpoConfig& config) {
  const AdamOptions opts{.learning_rate = config.learning_rate,
                         .max_grad_norm = config.max_grad_norm};
  actor = Adam(policy.actor().num_params(), opts);
  log_std = Adam(policy.log_std().size(), opts);
  critic = Adam(policy.critic().num_params(), opts);
}

SurrogateTerms ClippedSurrogate(const Policy& policy, const Matrix& obs,
                                const Matrix& actions,
                                std::span<const double> old_log_probs,
                                std::span<const double> advantages,
                                double clip_ratio) {
  if (static_cast<size_t>(obs.rows()) != old_log_probs.size() ||
      old_log_probs.size() != advantages.size() ||
      obs.rows() != actions.rows()) {
    throw std::invalid_argument("ClippedSurrogate: row count mismatch");
  }
  SurrogateTerms terms;
  terms.actor_grad.assign(policy.actor().num_params(), 0.0);
  terms.log_std_grad.assign(policy.log_std().size(), 0.0);
  Tape tape;
  SurrogateGraph g = RecordSurrogate(
      tape, policy, policy.normalizer().Apply(obs), actions, old_log_probs,
      advantages, clip_ratio, terms.actor_grad, terms.log_std_grad);
  tape.Backward(g.objective);
  terms.surrogate = g.objective.scalar();
  terms.clip_fraction = g.clip_fraction;
  return terms;
}

double MeanGaussianKl(const Matrix& old_means,
                      std::span<const double> old_log_std,
                      const Matrix& new_means,
                      std::span<const double> new_log_std) {
  if (old_means.rows() != new_means.rows() ||
      old_means.cols() != new_means.cols() ||
      static_cast<size_t>(old_means.cols()) != old_log_std.size() ||
      old_log_std.size() != new_log_std.size() || old_means.rows() == 0) {
    throw std::invalid_argument("MeanGaussianKl: shape mismatch");
  }
  double constant = 0.0;
  Eigen::RowVectorXd inv_two_var(old_means.cols());
  for (Eigen::Index j = 0; j < old_means.cols(); ++j) {
    const double lo = old_log_std[j];
    const double ln = new_log_std[j];
    inv_two_var(j) = 0.5 * std::exp(-2.0 * ln);
    constant += ln - lo + std::exp(2.0 * lo) * inv_two_var(j) - 0.5;
  }
  const Matrix diff2 = (old_means - new_means).array().square();
  const double mean_term =
      (diff2.array().rowwise() * inv_two_var.array()).rowwise().sum().mean();
  return constant + mean_term;
}

PpoStats PpoUpdate(Policy& policy, const RolloutBatch& batch,
                   const PpoConfig& config, PpoOptimizers& optimizers,
                   Rng& rng) {
  config.Validate();
  const size_t n = batch.size();
  if (n == 0) throw std::invalid_argument("PpoUpdate on an empty batch");

  // Non-terminal episode boundaries bootstrap from V(s').
  std::vector<double> rewards(n);
  for (size_t i = 0; i < n; ++i) {
    rewards[i] = batch.rewards[i] + config.gamma * batch.bootstrap_values[i];
  }
  const GaeResult gae = GaeAdvantages(rewards, batch.values, batch.episode_end,
                                      config.gamma, config.gae_lambda);
  std::vector<double> adv = gae.advantages;
  double mean = 0.0;
  for (double a : adv) mean += a;
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (double a : adv) var += (a - mean) * (a - mean);
  const double sd = std::sqrt(var / static_cast<double>(n));
  for (double& a : adv) a = (a - mean) / std::max(sd, 1e-8);

  const Matrix obs = policy.normalizer().Apply(batch.obs);
  const Policy snapshot = policy;
  const PpoOptimizers opt_snapshot = optimizers;

  std::vector<double> actor_grad(policy.actor().num_params());
  std::vector<double> log_std_grad(policy.log_std().size());
  std::vector<double> critic_grad(policy.critic().num_params());
  const auto mb = static_cast<size_t>(config.minibatch_size);

  PpoStats stats;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const std::vector<size_t> perm = rng.Permutation(n);
    double policy_loss = 0.0, value_loss = 0.0, clip_fraction = 0.0;
    int minibatches = 0;
    for (size_t start = 0; start < n; start += mb) {
      const std::span<const size_t> rows(perm.data() + start,
                                         std::min(mb, n - start));
      std::vector<double> old_lp, mb_adv, mb_ret;
      for (size_t r : rows) {
        old_lp.push_back(batch.old_log_probs[r]);
        mb_adv.push_back(adv[r]);
        mb_ret.push_back(gae.returns[r]);
      }
      std::fill(actor_grad.begin(), actor_grad.end(), 0.0);
      std::fill(log_std_grad.begin(), log_std_grad.end(), 0.0);
      std::fill(critic_grad.begin(), critic_grad.end(), 0.0);

      Tape tape;
      const Matrix mb_obs = GatherRows(obs, rows);
      SurrogateGraph surr = RecordSurrogate(
          tape, policy, mb_obs, GatherRows(batch.actions, rows), old_lp,
          mb_adv, config.clip_ratio, actor_grad, log_std_grad);
      Var v = policy.critic().Forward(tape, tape.Constant(mb_obs),
                                      critic_grad);
      Var v_loss = tape.Mean(tape.Square(v - tape.Constant(ColumnOf(mb_ret))));
      Var loss = -surr.objective + config.value_coef * v_loss;
      if (config.entropy_coef > 0.0) {
        Var log_std = tape.RowParameter(
            ParamView{policy.log_std(), log_std_grad}, 1);
        loss = loss - config.entropy_coef * tape.SumCols(log_std);
      }
      if (!std::isfinite(loss.scalar())) {
        policy = snapshot;
        optimizers = opt_snapshot;
        stats.restored = true;
        return stats;
      }
      tape.Backward(loss);
      try {
        optimizers.actor.Step(policy.actor().params(), actor_grad);
        optimizers.log_std.Step(policy.log_std(), log_std_grad);
        optimizers.critic.Step(policy.critic().params(), critic_grad);
      } catch (const NumericalError&) {
        policy = snapshot;
        optimizers = opt_snapshot;
        stats.restored = true;
        return stats;
      }
      for (double& l : policy.log_std()) {
        l = std::clamp(l, kLogStdMin, kLogStdMax);
      }
      policy_loss += -surr.objective.scalar();
      value_loss += v_loss.scalar();
      clip_fraction += surr.clip_fraction;
      ++minibatches;
    }
    if (!policy.AllFinite()) {
      policy = snapshot;
      optimizers = opt_snapshot;
      stats.restored = true;
      return stats;
    }
    stats.epochs_run = epoch + 1;
    stats.policy_loss = policy_loss / minibatches;
    stats.value_loss = value_loss / minibatches;
    stats.clip_fraction = clip_fraction / minibatches;
    stats.kl = MeanGaussianKl(batch.old_means, batch.old_log_std,
                              policy.actor().Forward(obs), policy.log_std());
    if (stats.kl > config.target_kl) {
      stats.early_stopped = true;
      break;
    }
  }
  double entropy = 0.0;
  for (double l : policy.log_std()) entropy += l + 0.5 * std::log(2.0 * M_PI * M_E);
  stats.entropy = entropy;
  policy.normalizer().Update(batch.obs);
  return stats;
}

double EvaluateActor(const RobotEnv& env, const Actor& actor, int episodes,
                     uint64_t seed) {
  if (episodes < 1) throw std::invalid_argument("need >= 1 episode");
  double total = 0.0;
  for (int e = 0; e < episodes; ++e) {
    Rng rng(DeriveSeed(seed, 2 * e + 1));
    EnvState state = env.Reset(DeriveSeed(seed, 2 * e));
    while (true) {
      const StepOutcome out = env.Step(state, actor(env, state, rng));
      total += out.reward;
      if (out.done()) break;
      state = out.state;
    }
  }
  return total / episodes;
}

double EvaluatePolicy(const RobotEnv& env, const Policy& policy, int episodes,
                      uint64_t seed) {
  return EvaluateActor(env, MakePolicyActor(policy, true), episodes, seed);
}

double EvaluateRandom(const RobotEnv& env, int episodes, uint64_t seed) {
  return EvaluateActor(env, RandomActor(), episodes, seed);
}

std::optional<double> AchievableReturn(Family family,
                                       const EnvSettings& settings) {
  switch (family) {
    case Family::kPendulum:
    case Family::kCartPole:
      return static_cast<double>(settings.horizon);
    case Family::kTwoLinkArm:
      return std::nullopt;
  }
  return std::nullopt;
}

ExpertResult TrainExpert(const RobotConfig& config, const EnvSettings& settings,
                         const PpoConfig& ppo, const ExpertOptions& options,
                         uint64_t seed) {
  ValidateConfig(config);
  ppo.Validate();
  if (options.max_iterations < 1 || options.eval_every < 1) {
    throw std::invalid_argument("expert budget must be positive");
  }
  const RobotEnv env(config, settings);
  Rng rng(seed);
  Policy policy(env.observation_dim(), env.action_dim(), config.obs_mode, ppo,
                rng);
  PpoOptimizers optimizers(policy, ppo);
  const uint64_t eval_seed = DeriveSeed(seed, 0xE7A1);

  ExpertResult best;
  best.eval_return = -std::numeric_limits<double>::infinity();
  for (int it = 1; it <= options.max_iterations; ++it) {
    RolloutBatch batch =
        CollectRollout(env, policy, ppo.steps_per_iteration, rng);
    PpoUpdate(policy, batch, ppo, optimizers, rng);
    if (it % options.eval_every != 0 && it != options.max_iterations) continue;
    const double ret =
        EvaluatePolicy(env, policy, options.eval_episodes, eval_seed);
    if (ret > best.eval_return) {
      best.policy = policy;
      best.eval_return = ret;
      best.iterations = it;
    }
    if (options.target_return && ret >= *options.target_return) {
      return best;
    }
  }
  if (options.target_return && options.require_target) {
    throw std::runtime_error(
        "expert for " + ToString(config.family) + " did not reach return " +
        std::to_string(*options.target_return) + " within " +
        std::to_string(options.max_iterations) + " iterations (best " +
        std::to_string(best.eval_return) + ")");
  }
  return best;
}

}  // namespace irgail
