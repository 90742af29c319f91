#include "irgail/invariant_repr.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <string>

#include "irgail/errors.h"
#include "irgail/optimizer.h"

namespace irgail {

namespace {

constexpr int kReprCheckpointVersion = 1;

Mlp MakeNet(int in, const std::vector<int>& hidden, int out, Rng& rng) {
  std::vector<int> widths = {in};
  widths.insert(widths.end(), hidden.begin(), hidden.end());
  widths.push_back(out);
  Mlp net(widths, Activation::kTanh);
  net.InitRandom(rng);
  return net;
}

Matrix RowsToMatrix(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) return Matrix();
  Matrix m(static_cast<Eigen::Index>(rows.size()),
           static_cast<Eigen::Index>(rows.front().size()));
  for (size_t i = 0; i < rows.size(); ++i) {
    for (size_t j = 0; j < rows[i].size(); ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          rows[i][j];
    }
  }
  return m;
}

Matrix SpanRow(std::span<const double> x) {
  Matrix m(1, static_cast<Eigen::Index>(x.size()));
  for (size_t i = 0; i < x.size(); ++i) m(0, i) = x[i];
  return m;
}

Matrix Concat(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows(), a.cols() + b.cols());
  out << a, b;
  return out;
}

Matrix GatherRows(const Matrix& m, const std::vector<size_t>& rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (size_t i = 0; i < rows.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = m.row(rows[i]);
  }
  return out;
}

std::span<double> GradSpan(ReprGradients* grads,
                           std::vector<double> ReprGradients::*member) {
  if (grads == nullptr) return {};
  return grads->*member;
}

nlohmann::json WhiteningToJson(const Whitening& w) {
  return {{"mean", w.mean}, {"std", w.std}};
}

Whitening WhiteningFromJson(const nlohmann::json& j) {
  return {j.at("mean").get<std::vector<double>>(),
          j.at("std").get<std::vector<double>>()};
}

}  // namespace

void LossWeights::Validate() const {
  if (!(disentangle >= 0.0) || !(dynamics >= 0.0) || !(prior_kl >= 0.0)) {
    throw std::invalid_argument("loss weights must be non-negative");
  }
}

double TotalLoss(const LossParts& p, const LossWeights& w) {
  return p.state_recon + p.action_recon + w.disentangle * p.disentangle +
         w.dynamics * p.dynamics + w.prior_kl * p.prior_kl;
}

Whitening Whitening::Identity(size_t dim) {
  return {std::vector<double>(dim, 0.0), std::vector<double>(dim, 1.0)};
}

Whitening Whitening::Fit(const Matrix& data) {
  if (data.rows() == 0) throw std::invalid_argument("Whitening::Fit on no data");
  Whitening w;
  const Eigen::RowVectorXd mean = data.colwise().mean();
  w.mean.assign(mean.data(), mean.data() + mean.size());
  w.std.resize(w.mean.size());
  for (Eigen::Index c = 0; c < data.cols(); ++c) {
    const double var = (data.col(c).array() - mean(c)).square().mean();
    w.std[c] = std::max(std::sqrt(var), kStdFloor);
  }
  return w;
}

Matrix Whitening::Apply(const Matrix& rows) const {
  if (rows.cols() != static_cast<Eigen::Index>(mean.size())) {
    throw std::invalid_argument("Whitening::Apply: dimension mismatch");
  }
  Eigen::Map<const Eigen::RowVectorXd> m(mean.data(), mean.size());
  Eigen::Map<const Eigen::RowVectorXd> s(std.data(), std.size());
  Matrix out = rows;
  out.rowwise() -= m;
  out.array().rowwise() /= s.array();
  return out;
}

std::vector<double> Whitening::Apply(std::span<const double> x) const {
  const Matrix out = Apply(SpanRow(x));
  return std::vector<double>(out.data(), out.data() + out.size());
}

ReprNoise ReprNoise::Sample(Eigen::Index rows, const ReprDims& dims,
                            Rng& rng) {
  auto draw = [&](int cols) {
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.Normal();
    return m;
  };
  ReprNoise n;
  n.state = draw(dims.state_latent_dim);
  n.action = draw(dims.action_latent_dim);
  n.next_state = draw(dims.state_latent_dim);
  return n;
}

ReprNoise ReprNoise::Zero(Eigen::Index rows, const ReprDims& dims) {
  return {Matrix::Zero(rows, dims.state_latent_dim),
          Matrix::Zero(rows, dims.action_latent_dim),
          Matrix::Zero(rows, dims.state_latent_dim)};
}

InvariantRepresentation::InvariantRepresentation(const ReprDims& dims,
                                                 const LossWeights& weights,
                                                 const ReprOptions& options,
                                                 Rng& rng)
    : dims_(dims), weights_(weights) {
  weights_.Validate();
  if (dims.obs_dim <= 0 || dims.action_dim <= 0 || dims.config_dim <= 0 ||
      dims.state_latent_dim <= 0 || dims.action_latent_dim <= 0) {
    throw std::invalid_argument("representation dimensions must be positive");
  }
  const auto& h = options.hidden;
  const int zs = dims.state_latent_dim;
  const int za = dims.action_latent_dim;
  const int c = dims.config_dim;
  state_encoder_ = MakeNet(dims.obs_dim + c, h, 2 * zs, rng);
  action_encoder_ = MakeNet(dims.action_dim + c, h, 2 * za, rng);
  state_decoder_ = MakeNet(zs + c, h, dims.obs_dim, rng);
  action_decoder_ = MakeNet(za + c, h, dims.action_dim, rng);
  dynamics_ = MakeNet(zs + za, h, zs, rng);
  state_mine_ =
      MineNetwork(MineTarget::kStateLatent, zs, c, options.mine, rng);
  action_mine_ =
      MineNetwork(MineTarget::kActionLatent, za, c, options.mine, rng);
  obs_whitening_ = Whitening::Identity(dims.obs_dim);
  config_whitening_ = Whitening::Identity(c);
}

void InvariantRepresentation::set_whitening(Whitening obs, Whitening config) {
  if (obs.mean.size() != static_cast<size_t>(dims_.obs_dim) ||
      config.mean.size() != static_cast<size_t>(dims_.config_dim)) {
    throw std::invalid_argument("whitening dimension mismatch");
  }
  obs_whitening_ = std::move(obs);
  config_whitening_ = std::move(config);
}

DiagGaussian InvariantRepresentation::EncodeState(
    std::span<const double> obs, std::span<const double> config) const {
  if (obs.size() != static_cast<size_t>(dims_.obs_dim) ||
      config.size() != static_cast<size_t>(dims_.config_dim)) {
    throw std::invalid_argument("EncodeState: dimension mismatch");
  }
  const Matrix in = Concat(obs_whitening_.Apply(SpanRow(obs)),
                           config_whitening_.Apply(SpanRow(config)));
  const Matrix out = state_encoder_.Forward(in);
  const int z = dims_.state_latent_dim;
  return DiagGaussian::Clamped(
      std::vector<double>(out.data(), out.data() + z),
      std::vector<double>(out.data() + z, out.data() + 2 * z));
}

DiagGaussian InvariantRepresentation::EncodeAction(
    std::span<const double> action, std::span<const double> config) const {
  if (action.size() != static_cast<size_t>(dims_.action_dim) ||
      config.size() != static_cast<size_t>(dims_.config_dim)) {
    throw std::invalid_argument("EncodeAction: dimension mismatch");
  }
  const Matrix in =
      Concat(SpanRow(action), config_whitening_.Apply(SpanRow(config)));
  const Matrix out = action_encoder_.Forward(in);
  const int z = dims_.action_latent_dim;
  return DiagGaussian::Clamped(
      std::vector<double>(out.data(), out.data() + z),
      std::vector<double>(out.data() + z, out.data() + 2 * z));
}

Matrix InvariantRepresentation::EncodeStateMean(const Matrix& obs,
                                                const Matrix& config) const {
  const Matrix out = state_encoder_.Forward(
      Concat(obs_whitening_.Apply(obs), config_whitening_.Apply(config)));
  return out.leftCols(dims_.state_latent_dim);
}

Matrix InvariantRepresentation::EncodeActionMean(const Matrix& action,
                                                 const Matrix& config) const {
  const Matrix out = action_encoder_.Forward(
      Concat(action, config_whitening_.Apply(config)));
  return out.leftCols(dims_.action_latent_dim);
}

ReprBatch InvariantRepresentation::Whiten(const Matrix& obs,
                                          const Matrix& action,
                                          const Matrix& next_obs,
                                          const Matrix& config) const {
  return {obs_whitening_.Apply(obs), action, obs_whitening_.Apply(next_obs),
          config_whitening_.Apply(config)};
}

nlohmann::json InvariantRepresentation::ToJson() const {
  return {{"schema", "irgail.representation"},
          {"version", kReprCheckpointVersion},
          {"dims",
           {{"obs", dims_.obs_dim},
            {"action", dims_.action_dim},
            {"config", dims_.config_dim},
            {"state_latent", dims_.state_latent_dim},
            {"action_latent", dims_.action_latent_dim}}},
          {"weights",
           {{"disentangle", weights_.disentangle},
            {"dynamics", weights_.dynamics},
            {"prior_kl", weights_.prior_kl}}},
          {"obs_whitening", WhiteningToJson(obs_whitening_)},
          {"config_whitening", WhiteningToJson(config_whitening_)},
          {"state_encoder", state_encoder_.ToJson()},
          {"action_encoder", action_encoder_.ToJson()},
          {"state_decoder", state_decoder_.ToJson()},
          {"action_decoder", action_decoder_.ToJson()},
          {"dynamics", dynamics_.ToJson()},
          {"state_mine", state_mine_.ToJson()},
          {"action_mine", action_mine_.ToJson()}};
}

InvariantRepresentation InvariantRepresentation::FromJson(
    const nlohmann::json& j) {
  if (j.value("version", -1) != kReprCheckpointVersion) {
    throw std::runtime_error("unsupported representation checkpoint version");
  }
  InvariantRepresentation r;
  const auto& d = j.at("dims");
  r.dims_ = {d.at("obs").get<int>(), d.at("action").get<int>(),
             d.at("config").get<int>(), d.at("state_latent").get<int>(),
             d.at("action_latent").get<int>()};
  const auto& w = j.at("weights");
  r.weights_ = {w.at("disentangle").get<double>(),
                w.at("dynamics").get<double>(), w.at("prior_kl").get<double>()};
  r.obs_whitening_ = WhiteningFromJson(j.at("obs_whitening"));
  r.config_whitening_ = WhiteningFromJson(j.at("config_whitening"));
  r.state_encoder_ = Mlp::FromJson(j.at("state_encoder"));
  r.action_encoder_ = Mlp::FromJson(j.at("action_encoder"));
  r.state_decoder_ = Mlp::FromJson(j.at("state_decoder"));
  r.action_decoder_ = Mlp::FromJson(j.at("action_decoder"));
  r.dynamics_ = Mlp::FromJson(j.at("dynamics"));
  r.state_mine_ = MineNetwork::FromJson(j.at("state_mine"));
  r.action_mine_ = MineNetwork::FromJson(j.at("action_mine"));
  return r;
}

void InvariantRepresentation::Save(const std::filesystem::path& path) const {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out << ToJson().dump() << '\n';
}

InvariantRepresentation InvariantRepresentation::Load(
    const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return FromJson(nlohmann::json::parse(in));
}

ReprGradients::ReprGradients(const InvariantRepresentation& repr)
    : state_encoder(repr.state_encoder().num_params(), 0.0),
      action_encoder(repr.action_encoder().num_params(), 0.0),
      state_decoder(repr.state_decoder().num_params(), 0.0),
      action_decoder(repr.action_decoder().num_params(), 0.0),
      dynamics(repr.dynamics().num_params(), 0.0) {}

void ReprGradients::Zero() {
  for (auto* v : {&state_encoder, &action_encoder, &state_decoder,
                  &action_decoder, &dynamics}) {
    std::fill(v->begin(), v->end(), 0.0);
  }
}

LossParts ReprGraph::parts() const {
  return {state_recon.scalar(), action_recon.scalar(), disentangle.scalar(),
          dynamics.scalar(), prior_kl.scalar()};
}

Var SquaredErrorLoss(Tape& tape, Var target, Var prediction) {
  return tape.Mean(tape.SumCols(tape.Square(target - prediction)));
}

double SquaredErrorLoss(const Matrix& target, const Matrix& prediction) {
  if (target.rows() != prediction.rows() ||
      target.cols() != prediction.cols() || target.rows() == 0) {
    throw std::invalid_argument("SquaredErrorLoss: shape mismatch or empty");
  }
  return (target - prediction).rowwise().squaredNorm().mean();
}

ReprGraph BuildReprLoss(Tape& tape, const InvariantRepresentation& repr,
                        const ReprBatch& batch, const ReprNoise& noise,
                        const std::vector<size_t>& marginal_rows,
                        ReprGradients* grads) {
  const ReprDims& d = repr.dims();
  const LossWeights& w = repr.weights();
  if (batch.obs.rows() == 0) {
    throw std::invalid_argument("representation batch is empty");
  }
  Var obs = tape.Constant(batch.obs);
  Var action = tape.Constant(batch.action);
  Var next_obs = tape.Constant(batch.next_obs);
  Var config = tape.Constant(batch.config);

  auto enc_s = GradSpan(grads, &ReprGradients::state_encoder);
  auto enc_a = GradSpan(grads, &ReprGradients::action_encoder);
  auto dec_s = GradSpan(grads, &ReprGradients::state_decoder);
  auto dec_a = GradSpan(grads, &ReprGradients::action_decoder);
  auto dyn = w.dynamics > 0.0 ? GradSpan(grads, &ReprGradients::dynamics)
                              : std::span<double>();

  GaussianVars qs = SplitGaussianHead(
      tape, repr.state_encoder().Forward(tape, tape.ConcatCols(obs, config),
                                         enc_s),
      d.state_latent_dim);
  GaussianVars qa = SplitGaussianHead(
      tape, repr.action_encoder().Forward(
                tape, tape.ConcatCols(action, config), enc_a),
      d.action_latent_dim);
  GaussianVars qs_next = SplitGaussianHead(
      tape, repr.state_encoder().Forward(
                tape, tape.ConcatCols(next_obs, config), enc_s),
      d.state_latent_dim);

  ReprGraph g;
  g.state_latent = ReparamSample(tape, qs, noise.state);
  g.action_latent = ReparamSample(tape, qa, noise.action);
  Var z_next = ReparamSample(tape, qs_next, noise.next_state);

  Var s_hat = repr.state_decoder().Forward(
      tape, tape.ConcatCols(g.state_latent, config), dec_s);
  Var a_hat = repr.action_decoder().Forward(
      tape, tape.ConcatCols(g.action_latent, config), dec_a);
  g.state_recon = SquaredErrorLoss(tape, obs, s_hat);
  g.action_recon = SquaredErrorLoss(tape, action, a_hat);

  g.prior_kl = tape.Mean(KlToStandardNormal(tape, qs) +
                         KlToStandardNormal(tape, qa));

  Var z_pred = repr.dynamics().Forward(
      tape, tape.ConcatCols(g.state_latent, g.action_latent), dyn);
  g.dynamics = SquaredErrorLoss(tape, z_next, z_pred);

  Matrix marginal(batch.config.rows(), batch.config.cols());
  if (marginal_rows.size() != static_cast<size_t>(batch.config.rows())) {
    throw std::invalid_argument("marginal row count mismatch");
  }
  for (size_t i = 0; i < marginal_rows.size(); ++i) {
    marginal.row(static_cast<Eigen::Index>(i)) =
        batch.config.row(marginal_rows[i]);
  }
  Var marginal_config = tape.Constant(marginal);
  g.disentangle = DvLowerBound(tape, repr.state_mine().net(), g.state_latent,
                               config, marginal_config) +
                  DvLowerBound(tape, repr.action_mine().net(),
                               g.action_latent, config, marginal_config);

  g.total = g.state_recon + g.action_recon + w.disentangle * g.disentangle +
            w.dynamics * g.dynamics + w.prior_kl * g.prior_kl;
  return g;
}

std::pair<double, double> ReconstructionLosses(
    const InvariantRepresentation& repr, const std::vector<Transition>& batch,
    const ReprNoise& noise) {
  if (batch.empty()) {
    throw std::invalid_argument("ReconstructionLosses on an empty batch");
  }
  std::vector<std::vector<double>> obs, act, next, cfg;
  for (const auto& t : batch) {
    obs.push_back(t.obs);
    act.push_back(t.action);
    next.push_back(t.next_obs);
    cfg.push_back(t.config);
  }
  const ReprBatch b = repr.Whiten(RowsToMatrix(obs), RowsToMatrix(act),
                                  RowsToMatrix(next), RowsToMatrix(cfg));
  std::vector<size_t> identity(batch.size());
  for (size_t i = 0; i < identity.size(); ++i) identity[i] = i;
  Tape tape;
  ReprGraph g = BuildReprLoss(tape, repr, b, noise, identity, nullptr);
  return {g.state_recon.scalar(), g.action_recon.scalar()};
}

double PriorKlLoss(const DiagGaussian& state_dist,
                   const DiagGaussian& action_dist) {
  return KlToStandardNormal(state_dist) + KlToStandardNormal(action_dist);
}

double DynamicsLoss(const Mlp& dynamics, const LatentPair& z,
                    std::span<const double> next_state_latent) {
  return DynamicsLoss(dynamics, SpanRow(z.state), SpanRow(z.action),
                      SpanRow(next_state_latent));
}

double DynamicsLoss(const Mlp& dynamics, const Matrix& state_latent,
                    const Matrix& action_latent,
                    const Matrix& next_state_latent) {
  const Matrix pred = dynamics.Forward(Concat(state_latent, action_latent));
  return SquaredErrorLoss(next_state_latent, pred);
}

std::vector<TrajectoryRecord> CollectRandomRollouts(
    Family family, ObsMode obs_mode, const ConfigSpace& space,
    const BallRegion& region, const EnvSettings& settings, int n_robots,
    int steps_per_robot, uint64_t seed) {
  if (n_robots < 1) throw std::invalid_argument("need at least one robot");
  std::vector<TrajectoryRecord> out;
  const Actor random = RandomActor();
  for (int r = 0; r < n_robots; ++r) {
    RobotConfig config = SampleConfig(family, obs_mode, space, region,
                                      std::nullopt, DeriveSeed(seed, 2 * r));
    RobotEnv env(config, settings);
    auto records =
        CollectSteps(env, random, steps_per_robot, DeriveSeed(seed, 2 * r + 1));
    out.insert(out.end(), records.begin(), records.end());
  }
  return out;
}

std::vector<Transition> ToTransitions(
    const std::vector<TrajectoryRecord>& records) {
  std::vector<Transition> out;
  for (const auto& r : records) {
    for (const auto& t : r.transitions) {
      out.push_back({t.observation, t.action, t.next_observation,
                     r.config.params});
    }
  }
  return out;
}

std::vector<Transition> BuildReprDataset(
    const std::vector<TrajectoryRecord>& random_rollouts,
    const DemoSet* expert_demos, bool include_expert_demos) {
  std::vector<Transition> out = ToTransitions(random_rollouts);
  if (include_expert_demos && expert_demos != nullptr) {
    auto demo = ToTransitions(expert_demos->records);
    out.insert(out.end(), demo.begin(), demo.end());
  }
  return out;
}

void ReprTrainingLog::WriteCsv(const std::filesystem::path& path) const {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out << "step,total,state_recon,action_recon,disentangle,dynamics,prior_kl,"
         "state_mi,action_mi\n";
  out.precision(17);
  for (size_t i = 0; i < total.size(); ++i) {
    const LossParts& p = parts[i];
    out << i << ',' << total[i] << ',' << p.state_recon << ','
        << p.action_recon << ',' << p.disentangle << ',' << p.dynamics << ','
        << p.prior_kl << ',' << state_mi[i] << ',' << action_mi[i] << '\n';
  }
}

ReprTrainingLog TrainRepresentation(InvariantRepresentation& repr,
                                    const std::vector<Transition>& data,
                                    const ReprOptions& options) {
  if (data.empty()) {
    throw std::invalid_argument("representation dataset is empty");
  }
  if (options.mine_updates < 1) {
    throw std::invalid_argument("mine_updates must be >= 1");
  }
  if (options.batch_size < kMinMiBatch) {
    throw std::invalid_argument("representation batch must hold at least " +
                                std::to_string(kMinMiBatch) + " samples");
  }
  std::vector<std::vector<double>> obs, act, next, cfg;
  obs.reserve(data.size());
  for (const auto& t : data) {
    obs.push_back(t.obs);
    act.push_back(t.action);
    next.push_back(t.next_obs);
    cfg.push_back(t.config);
  }
  const Matrix obs_m = RowsToMatrix(obs);
  const Matrix act_m = RowsToMatrix(act);
  const Matrix next_m = RowsToMatrix(next);
  const Matrix cfg_m = RowsToMatrix(cfg);
  Matrix all_obs(obs_m.rows() * 2, obs_m.cols());
  all_obs << obs_m, next_m;
  repr.set_whitening(Whitening::Fit(all_obs), Whitening::Fit(cfg_m));
  const ReprBatch full = repr.Whiten(obs_m, act_m, next_m, cfg_m);

  const AdamOptions adam{.learning_rate = options.learning_rate};
  Adam opt_enc_s(repr.state_encoder().num_params(), adam);
  Adam opt_enc_a(repr.action_encoder().num_params(), adam);
  Adam opt_dec_s(repr.state_decoder().num_params(), adam);
  Adam opt_dec_a(repr.action_decoder().num_params(), adam);
  Adam opt_dyn(repr.dynamics().num_params(), adam);
  ReprGradients grads(repr);

  Rng rng(options.seed);
  ReprTrainingLog log;
  const size_t n = data.size();
  const auto batch_size = static_cast<size_t>(options.batch_size);
  std::vector<size_t> rows(batch_size);
  for (int step = 0; step < options.steps; ++step) {
    for (auto& r : rows) r = rng.Index(n);
    ReprBatch b{GatherRows(full.obs, rows), GatherRows(full.action, rows),
                GatherRows(full.next_obs, rows), GatherRows(full.config, rows)};
    const ReprNoise noise =
        ReprNoise::Sample(static_cast<Eigen::Index>(batch_size), repr.dims(),
                          rng);
    const std::vector<size_t> perm = rng.Permutation(batch_size);

    grads.Zero();
    Tape tape;
    ReprGraph g = BuildReprLoss(tape, repr, b, noise, perm, &grads);
    const LossParts parts = g.parts();
    const std::pair<const char*, double> named[] = {
        {"state reconstruction", parts.state_recon},
        {"action reconstruction", parts.action_recon},
        {"disentangle", parts.disentangle},
        {"dynamics", parts.dynamics},
        {"prior KL", parts.prior_kl}};
    for (const auto& [name, value] : named) {
      if (!std::isfinite(value)) {
        throw NumericalError(std::string("non-finite ") + name +
                             " loss at representation step " +
                             std::to_string(step));
      }
    }
    tape.Backward(g.total);
    opt_enc_s.Step(repr.state_encoder().params(), grads.state_encoder);
    opt_enc_a.Step(repr.action_encoder().params(), grads.action_encoder);
    opt_dec_s.Step(repr.state_decoder().params(), grads.state_decoder);
    opt_dec_a.Step(repr.action_decoder().params(), grads.action_decoder);
    if (repr.weights().dynamics > 0.0) {
      opt_dyn.Step(repr.dynamics().params(), grads.dynamics);
    }

    // Statistics networks chase the encoders' current latents.
    const MiBatch state_batch =
        MakeMiBatch(g.state_latent.value(), b.config, rng);
    const MiBatch action_batch =
        MakeMiBatch(g.action_latent.value(), b.config, rng);
    log.state_mi.push_back(repr.state_mine().LowerBound(state_batch));
    log.action_mi.push_back(repr.action_mine().LowerBound(action_batch));
    repr.state_mine().Update(state_batch);
    repr.action_mine().Update(action_batch);
    for (int k = 1; k < options.mine_updates; ++k) {
      repr.state_mine().Update(MakeMiBatch(state_batch.latent, b.config, rng));
      repr.action_mine().Update(MakeMiBatch(action_batch.latent, b.config, rng));
    }

    log.parts.push_back(parts);
    log.total.push_back(g.total.scalar());
  }
  return log;
}

}  // namespace irgail
