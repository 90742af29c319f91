// End-to-end acceptance suite. Each check runs at its full tolerance and
// prints one PASS/FAIL line; the exit status is non-zero when any fails.
//
//   acceptance_test --work-dir DIR [--only 1,4,...]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "irgail/eval.h"
#include "irgail/experiment_config.h"
#include "irgail/gail.h"
#include "irgail/gaussian.h"
#include "irgail/invariant_repr.h"
#include "irgail/mine.h"
#include "irgail/pipeline.h"
#include "irgail/ppo.h"
#include "test_util.h"

namespace irgail {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

class Stopwatch {
 public:
  double Seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_ =
      std::chrono::steady_clock::now();
};

struct Outcome {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
};

template <typename... Args>
std::string Fmt(const char* format, Args... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), format, args...);
  return buf;
}

void Progress(const std::string& message) {
  std::cerr << "  " << message << std::endl;
}

// ---------------------------------------------------------------------------
// Configurations. Budgets are reduced from the library defaults so the whole
// suite fits a single desk CPU.

json PendulumJson(const fs::path& out) {
  return json{
      {"family", "pendulum"},
      {"obs_mode", "keypoint"},
      {"seed", 0},
      {"eval_seeds", {0, 1, 2}},
      {"ppo", {{"steps_per_iteration", 1024}, {"hidden", {32, 32}},
               {"learning_rate", 1e-3}}},
      {"expert", {{"max_iterations", 100}, {"eval_every", 2}, {"eval_episodes", 3}}},
      {"demos", {{"experts", 4}, {"trajectories", 16}}},
      {"representation",
       {{"random_robots", 16},
        {"steps_per_robot", 400},
        {"steps", 3000},
        {"batch_size", 128},
        {"mine", {{"hidden", {32, 32}}, {"learning_rate", 1e-3}}}}},
      {"imitation", {{"iterations", 25}, {"disc_hidden", {32, 32}},
                     {"disc_learning_rate", 1e-3}, {"eval_episodes", 3}}},
      {"evaluation",
       {{"n_interpolation", 4},
        {"n_extrapolation", 4},
        {"reference_episodes", 5},
        {"coupling", {{"robots", 8}, {"steps_per_robot", 400}, {"anchors", 20}}}}},
      {"output_dir", out.string()}};
}

json ArmJson(const fs::path& out) {
  return json{
      {"family", "two_link_arm"},
      {"obs_mode", "keypoint"},
      {"seed", 0},
      {"eval_seeds", {0, 1, 2}},
      {"ppo", {{"steps_per_iteration", 1024}, {"hidden", {32, 32}},
               {"learning_rate", 1e-3}}},
      {"expert", {{"max_iterations", 150}, {"eval_every", 10}, {"eval_episodes", 3}}},
      {"demos", {{"experts", 4}, {"trajectories", 16}}},
      {"representation",
       {{"random_robots", 16},
        {"steps_per_robot", 400},
        {"steps", 2000},
        {"batch_size", 128},
        {"mine", {{"hidden", {32, 32}}, {"learning_rate", 1e-3}}}}},
      {"imitation", {{"iterations", 60}, {"disc_hidden", {32, 32}},
                     {"disc_learning_rate", 1e-3}, {"eval_episodes", 3}}},
      {"evaluation",
       {{"algorithms", {"ir-gail"}},
        {"angle_control", false},
        {"n_interpolation", 4},
        {"n_extrapolation", 4},
        {"reference_episodes", 5}}},
      {"output_dir", out.string()}};
}

// Every stage, small enough to run three times.
json ReproJson(const fs::path& out) {
  json j = PendulumJson(out);
  j["eval_seeds"] = {0};
  j["demos"] = {{"experts", 2}, {"trajectories", 4}};
  j["representation"]["random_robots"] = 4;
  j["representation"]["steps_per_robot"] = 200;
  j["representation"]["steps"] = 200;
  j["imitation"]["iterations"] = 3;
  j["evaluation"]["n_interpolation"] = 1;
  j["evaluation"]["n_extrapolation"] = 1;
  j["evaluation"]["reference_episodes"] = 2;
  j["evaluation"]["coupling"] = {{"robots", 3}, {"steps_per_robot", 100}, {"anchors", 20}};
  return j;
}

ExperimentConfig MakeConfig(const json& j) { return ExperimentConfigFromJson(j); }

void RunStages(Pipeline& p) {
  Stopwatch w;
  p.GenExperts();
  Progress("gen-experts done (" + Fmt("%.0f s", w.Seconds()) + ")");
  p.Collect();
  p.TrainRepr();
  Progress("train-repr done (" + Fmt("%.0f s", w.Seconds()) + ")");
}

const EvalReport* FindCell(const std::vector<EvalReport>& reports, ObsMode obs,
                           SplitMode mode, Algorithm algorithm) {
  for (const auto& r : reports) {
    if (r.obs_mode == obs && r.mode == mode && r.algorithm == algorithm) {
      return &r;
    }
  }
  return nullptr;
}

// Mean of the valid normalized returns pooled over several cells.
double PooledMean(const std::vector<const EvalReport*>& cells) {
  double sum = 0.0;
  size_t n = 0;
  for (const auto* c : cells) {
    for (const auto& r : c->results) {
      if (r.valid) {
        sum += r.normalized;
        ++n;
      }
    }
  }
  return n == 0 ? std::nan("") : sum / static_cast<double>(n);
}

std::string CellText(const EvalReport* r) {
  if (r == nullptr) return "missing";
  return Fmt("%.3f+-%.3f", r->mean(), r->std()) + " (" +
         std::to_string(r->num_valid()) + "/" + std::to_string(r->results.size()) +
         " valid)";
}

// ---------------------------------------------------------------------------
// 1. Numerics.

struct Shape {
  std::vector<int> widths;
  Activation activation;
  bool operator<(const Shape& o) const {
    return std::tie(widths, activation) < std::tie(o.widths, o.activation);
  }
};

void AddNetworkShapes(const ExperimentConfig& c, std::set<Shape>& shapes) {
  Rng rng(0);
  auto add = [&](const Mlp& m) { shapes.insert({m.widths(), m.activation()}); };
  InvariantRepresentation repr(c.MakeReprDims(), c.representation.weights,
                               c.representation.options, rng);
  add(repr.state_encoder());
  add(repr.action_encoder());
  add(repr.state_decoder());
  add(repr.action_decoder());
  add(repr.dynamics());
  add(repr.state_mine().net());
  add(repr.action_mine().net());
  const int act = static_cast<int>(ActionDim(c.family));
  for (ObsMode mode : {c.obs_mode, c.expert.obs_mode, ObsMode::kAngle}) {
    const int obs = static_cast<int>(ObservationDim(c.family, mode));
    Policy policy(obs, act, mode, c.ppo, rng);
    add(policy.actor());
    add(policy.critic());
    add(Discriminator(obs + act, c.imitation.disc_hidden,
                      c.imitation.disc_learning_rate, rng)
            .net());
  }
  const auto dims = c.MakeReprDims();
  add(Discriminator(dims.state_latent_dim + dims.action_latent_dim,
                    c.imitation.disc_hidden, c.imitation.disc_learning_rate, rng)
          .net());
}

double WorstMlpGradientError(const Shape& shape) {
  Rng rng(11);
  Mlp net(shape.widths, shape.activation);
  net.InitRandom(rng);
  Matrix x = testing::RandomMatrix(6, shape.widths.front(), rng);
  const Matrix probe = testing::RandomMatrix(6, shape.widths.back(), rng);
  std::vector<double> grad(net.num_params(), 0.0);
  Tape tape;
  Var xv = tape.Variable(x);
  tape.Backward(tape.Mean(tape.MulConst(net.Forward(tape, xv, grad), probe)));
  auto objective = [&] { return (net.Forward(x).array() * probe.array()).mean(); };
  const double param_error =
      testing::RelativeError(grad, testing::NumericGradient(net.params(), objective));
  const Matrix gx = xv.grad();
  const double input_error = testing::RelativeError(
      {gx.data(), static_cast<size_t>(gx.size())},
      testing::NumericGradient(testing::Span(x), objective));
  return std::max(param_error, input_error);
}

double WorstGaeError() {
  Rng rng(1);
  double worst = 0.0;
  for (int episode = 0; episode < 100; ++episode) {
    const size_t n = 1 + rng.Index(200);
    std::vector<double> r(n), v(n);
    std::vector<uint8_t> d(n, 0);
    for (size_t i = 0; i < n; ++i) {
      r[i] = rng.Normal();
      v[i] = rng.Normal();
      d[i] = rng.Uniform(0, 1) < 0.03;
    }
    d[n - 1] = rng.Uniform(0, 1) < 0.5;
    const double gamma = 0.99, lambda = 0.95, last = rng.Normal();
    const auto got = GaeAdvantages(r, v, d, gamma, lambda, last);
    // A_t = sum_l (gamma lambda)^l delta_{t+l}, cut at episode ends.
    for (size_t t = 0; t < n; ++t) {
      double expected = 0.0, weight = 1.0;
      for (size_t k = t; k < n; ++k) {
        const double next = k + 1 < n ? v[k + 1] : last;
        expected += weight * (r[k] + (d[k] ? 0.0 : gamma * next) - v[k]);
        if (d[k]) break;
        weight *= gamma * lambda;
      }
      worst = std::max(worst, std::abs(got.advantages[t] - expected));
    }
  }
  return worst;
}

double WorstKlError() {
  Rng rng(5);
  double worst = 0.0;
  for (int trial = 0; trial < 4; ++trial) {
    const size_t dim = 1 + static_cast<size_t>(trial);
    DiagGaussian q{rng.NormalVector(dim), {}};
    for (size_t i = 0; i < dim; ++i) q.log_std.push_back(rng.Uniform(-0.7, 0.4));
    const DiagGaussian prior{std::vector<double>(dim, 0.0),
                             std::vector<double>(dim, 0.0)};
    const int n = 200000;
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
      const auto x = SampleReparam(q, rng.NormalVector(dim));
      acc += LogDensity(q, x) - LogDensity(prior, x);
    }
    worst = std::max(worst, std::abs(acc / n - KlToStandardNormal(q)));
  }
  return worst;
}

Outcome Numerics(const fs::path& work) {
  Stopwatch w;
  std::set<Shape> shapes;
  for (const auto& j : {PendulumJson(work), ArmJson(work)}) {
    AddNetworkShapes(MakeConfig(j), shapes);
    json angle = j;
    angle["obs_mode"] = "angle";
    AddNetworkShapes(MakeConfig(angle), shapes);
  }
  for (const char* family : {"pendulum", "cartpole", "two_link_arm"}) {
    AddNetworkShapes(MakeConfig(json{{"family", family}}), shapes);
  }
  double fd = 0.0;
  for (const auto& s : shapes) fd = std::max(fd, WorstMlpGradientError(s));
  const double gae = WorstGaeError();
  const double kl = WorstKlError();
  const double seconds = w.Seconds();
  Outcome o{1, "numerics"};
  o.pass = fd < 1e-4 && gae <= 1e-10 && kl <= 1e-2 && seconds < 60.0;
  o.detail = Fmt("finite-difference rel err %.2e over ", fd) +
             std::to_string(shapes.size()) + " shapes; " +
             Fmt("GAE max err %.1e; KL vs Monte Carlo %.1e; %.1f s", gae, kl, seconds);
  return o;
}

// ---------------------------------------------------------------------------
// 2. MINE on correlated Gaussians.

void CorrelatedGaussians(double rho, int n, Rng& rng, Matrix* x, Matrix* y) {
  x->resize(n, 1);
  y->resize(n, 1);
  const double s = std::sqrt(1.0 - rho * rho);
  for (int i = 0; i < n; ++i) {
    const double a = rng.Normal(), b = rng.Normal();
    (*x)(i, 0) = a;
    (*y)(i, 0) = rho * a + s * b;
  }
}

Outcome MineOracle() {
  Stopwatch w;
  Outcome o{2, "mine-oracle", true};
  for (double rho : {0.0, 0.5, 0.9}) {
    Rng rng(7);
    Matrix x, y, hx, hy;
    CorrelatedGaussians(rho, 20000, rng, &x, &y);
    CorrelatedGaussians(rho, 8192, rng, &hx, &hy);
    MineOptions options;
    options.learning_rate = 1e-3;
    const double estimate = ProbeMutualInformation(x, y, hx, hy, 3000, 256, options, 11);
    const double exact = 0.0 - 0.5 * std::log(1.0 - rho * rho);
    o.pass = o.pass && std::abs(estimate - exact) <= 0.1;
    o.detail += Fmt("rho=%.1f: %.4f vs %.4f; ", rho, estimate, exact);
  }
  const double seconds = w.Seconds();
  o.pass = o.pass && seconds < 120.0;
  o.detail += Fmt("%.1f s", seconds);
  return o;
}

// ---------------------------------------------------------------------------
// 3. Expert sanity on the unit pendulum with the default PPO budget.

Outcome ExpertSanity() {
  Stopwatch w;
  const RobotConfig target{Family::kPendulum, {1.0, 1.0}, ObsMode::kAngle};
  const EnvSettings env;
  const PpoConfig ppo;
  ExpertOptions options;
  options.target_return = AchievableReturn(Family::kPendulum, env);
  options.require_target = false;
  const ExpertResult expert = TrainExpert(target, env, ppo, options, 21);
  const ReferenceReturns refs =
      MeasureReferences(target, env, ppo, options, ObsMode::kAngle, 10, 22);
  const RobotEnv robot(target, env);
  const double expert_raw = EvaluatePolicy(robot, expert.policy, 20, 23);
  const double random_raw = EvaluateRandom(robot, 20, 24);
  const double expert_norm = NormalizedReturn(expert_raw, refs.expert, refs.random);
  const double random_norm = NormalizedReturn(random_raw, refs.expert, refs.random);
  const double seconds = w.Seconds();
  Outcome o{3, "expert-sanity"};
  o.pass = expert_norm >= 0.95 && random_norm <= 0.2 && seconds < 600.0;
  o.detail = Fmt("expert %.3f (raw %.1f), random %.3f (raw %.1f)", expert_norm,
                 expert_raw, random_norm, random_raw) +
             Fmt("; references %.1f/%.1f; %.1f s", refs.expert, refs.random, seconds);
  return o;
}

// ---------------------------------------------------------------------------
// 4-8 share one pendulum experiment.

struct PendulumRun {
  EvaluationOutcome outcome;
  double seconds = 0.0;
};

PendulumRun RunPendulum(const fs::path& dir) {
  Stopwatch w;
  fs::remove_all(dir);
  Pipeline p(MakeConfig(PendulumJson(dir)), Progress);
  RunStages(p);
  PendulumRun run;
  run.outcome = p.Evaluate();
  run.seconds = w.Seconds();
  Progress("pendulum experiment done (" + Fmt("%.0f s", run.seconds) + ")");
  return run;
}

Outcome Headline(const PendulumRun& run) {
  const auto& t = run.outcome.table;
  const auto* in = FindCell(t, ObsMode::kKeypoint, SplitMode::kInterpolation,
                            Algorithm::kIrGail);
  const auto* ex = FindCell(t, ObsMode::kKeypoint, SplitMode::kExtrapolation,
                            Algorithm::kIrGail);
  Outcome o{4, "headline"};
  o.pass = in && ex && in->valid() && ex->valid() && in->results.size() >= 12 &&
           ex->results.size() >= 12 && in->mean() >= 0.9 && ex->mean() >= 0.8 &&
           run.seconds <= 1800.0;
  o.detail = "IR-GAIL keypoint interpolation " + CellText(in) +
             ", extrapolation " + CellText(ex) +
             Fmt("; experiment %.0f s", run.seconds);
  return o;
}

Outcome Ordering(const PendulumRun& run) {
  const auto& t = run.outcome.table;
  const auto* ir = FindCell(t, ObsMode::kKeypoint, SplitMode::kExtrapolation,
                            Algorithm::kIrGail);
  const auto* gail = FindCell(t, ObsMode::kKeypoint, SplitMode::kExtrapolation,
                              Algorithm::kGail);
  const auto* angle = FindCell(t, ObsMode::kAngle, SplitMode::kInterpolation,
                               Algorithm::kGail);
  Outcome o{5, "ordering"};
  o.pass = ir && gail && angle && ir->valid() && gail->valid() && angle->valid() &&
           ir->mean() >= gail->mean() && angle->mean() >= 0.9;
  o.detail = "keypoint extrapolation IR-GAIL " + CellText(ir) + " vs GAIL " +
             CellText(gail) + "; angle-obs GAIL interpolation " + CellText(angle);
  return o;
}

Outcome Ablation(const PendulumRun& pendulum, const fs::path& arm_dir) {
  auto pooled = [](const std::vector<EvalReport>& ablation, Algorithm a) {
    std::vector<const EvalReport*> cells;
    for (const auto& r : ablation) {
      if (r.algorithm == a) cells.push_back(&r);
    }
    return PooledMean(cells);
  };
  auto all_valid = [](const std::vector<EvalReport>& ablation) {
    return ablation.size() == 4 &&
           std::all_of(ablation.begin(), ablation.end(),
                       [](const EvalReport& r) { return r.valid(); });
  };
  auto split_text = [](const char* family, const std::vector<EvalReport>& ablation) {
    std::string s = family;
    for (size_t i = 0; i < ablation.size(); ++i) {
      s += (i == 0 ? " " : ", ") + ToString(ablation[i].algorithm) + "/" +
           ToString(ablation[i].mode) + " " + Fmt("%.3f", ablation[i].mean());
    }
    return s;
  };
  const auto& pa = pendulum.outcome.ablation;
  const double p_ir = pooled(pa, Algorithm::kIrGail);
  const double p_nodyn = pooled(pa, Algorithm::kIrGailNoDyn);

  fs::remove_all(arm_dir);
  Pipeline arm(MakeConfig(ArmJson(arm_dir)), Progress);
  RunStages(arm);
  const auto aa = arm.Evaluate().ablation;
  const double a_ir = pooled(aa, Algorithm::kIrGail);
  const double a_nodyn = pooled(aa, Algorithm::kIrGailNoDyn);

  Outcome o{6, "ablation"};
  o.pass = all_valid(pa) && all_valid(aa) && std::abs(p_ir - p_nodyn) <= 0.1 &&
           a_ir >= a_nodyn;
  o.detail = Fmt("pendulum |%.3f - %.3f| = %.3f; arm %.3f vs noDyn %.3f [", p_ir,
                 p_nodyn, std::abs(p_ir - p_nodyn), a_ir, a_nodyn) +
             split_text("pendulum", pa) + "; " + split_text("arm", aa) + "]";
  return o;
}

Outcome Coupling(const PendulumRun& run) {
  Outcome o{7, "coupling"};
  if (!run.outcome.coupling) {
    o.detail = "no coupling analysis";
    return o;
  }
  const auto& c = *run.outcome.coupling;
  o.pass = c.groups >= 20 && c.group_discrepancy < c.random_discrepancy;
  o.detail = Fmt("group angle discrepancy %.4f vs random grouping %.4f over ",
                 c.group_discrepancy, c.random_discrepancy) +
             std::to_string(c.groups) + " groups";
  return o;
}

// Trained-MINE estimate of I(z^s, c) on held-out robots: a fresh statistics
// network is fit on one half of the held-out transitions and its bound
// reported on the other half. z^s is drawn from the encoder unless
// `use_means`.
double HeldOutStateMi(const InvariantRepresentation& repr,
                      const std::vector<Transition>& held_out, bool use_means) {
  const auto n = static_cast<Eigen::Index>(held_out.size());
  const int latent = repr.dims().state_latent_dim;
  const auto cfg_dim = static_cast<Eigen::Index>(held_out[0].config.size());
  Matrix z(n, latent), cfg(n, cfg_dim);
  Rng noise(30);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& t = held_out[static_cast<size_t>(i)];
    const DiagGaussian q = repr.EncodeState(t.obs, t.config);
    const auto row =
        use_means ? q.mean : SampleReparam(q, noise.NormalVector(latent));
    for (int j = 0; j < latent; ++j) z(i, j) = row[j];
    for (Eigen::Index j = 0; j < cfg_dim; ++j) cfg(i, j) = t.config[j];
  }
  Rng rng(31);
  const auto order = rng.Permutation(static_cast<size_t>(n));
  Matrix zs(n, latent), cs(n, cfg_dim);
  for (Eigen::Index i = 0; i < n; ++i) {
    zs.row(i) = z.row(static_cast<Eigen::Index>(order[i]));
    cs.row(i) = cfg.row(static_cast<Eigen::Index>(order[i]));
  }
  const Eigen::Index half = n / 2;
  MineOptions options;
  options.learning_rate = 1e-3;
  return ProbeMutualInformation(zs.topRows(half), cs.topRows(half),
                                zs.bottomRows(n - half), cs.bottomRows(n - half),
                                3000, 256, options, 32);
}

double TailMean(const std::vector<double>& v, size_t k) {
  k = std::min(k, v.size());
  double s = 0.0;
  for (size_t i = v.size() - k; i < v.size(); ++i) s += v[i];
  return k == 0 ? std::nan("") : s / static_cast<double>(k);
}

Outcome Disentanglement(const fs::path& dir) {
  Pipeline p(MakeConfig(PendulumJson(dir)), Progress);
  const auto& c = p.config();
  LossWeights ablated = c.representation.weights;
  ablated.disentangle = 0.0;
  Progress("training the representation with and without the disentangle loss");
  ReprTrainingLog log, ablated_log;
  const InvariantRepresentation trained =
      p.TrainVariant(c.representation.weights, &log);
  const InvariantRepresentation baseline = p.TrainVariant(ablated, &ablated_log);
  const auto held_out = ToTransitions(CollectRandomRollouts(
      c.family, c.obs_mode, c.config_space, c.region, c.env, 16, 400, 9001));
  const double mi = HeldOutStateMi(trained, held_out, false);
  const double mi_ablated = HeldOutStateMi(baseline, held_out, false);
  const double mean_mi = HeldOutStateMi(trained, held_out, true);
  const double mean_mi_ablated = HeldOutStateMi(baseline, held_out, true);
  Outcome o{8, "disentanglement"};
  o.pass = mi_ablated > 0.0 && mi <= 0.5 * mi_ablated;
  o.detail =
      Fmt("held-out I(z_s; c) %.4f with the disentangle loss vs %.4f without "
          "(%.0f%% drop); on encoder means %.4f vs %.4f; co-trained critic at "
          "the end of training %.4f vs %.4f",
          mi, mi_ablated, 100.0 * (1.0 - mi / mi_ablated), mean_mi,
          mean_mi_ablated, TailMean(log.state_mi, 200),
          TailMean(ablated_log.state_mi, 200));
  return o;
}

// ---------------------------------------------------------------------------
// 9. Reproducibility.

std::map<std::string, std::string> TreeDigests(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) {
      out[fs::relative(e.path(), root).string()] = FileDigest(e.path());
    }
  }
  return out;
}

void RunEverything(const fs::path& dir) {
  Pipeline p(MakeConfig(ReproJson(dir)));
  p.GenExperts();
  p.Collect();
  p.TrainRepr();
  const RobotConfig target{Family::kPendulum, {4.0, 0.8}, ObsMode::kKeypoint};
  for (Algorithm a : {Algorithm::kGail, Algorithm::kIrGail, Algorithm::kIrGailNoDyn}) {
    p.Imitate(target, a, 0);
  }
  p.Evaluate();
}

Outcome Reproducibility(const fs::path& work) {
  const fs::path a = work / "repro_a", b = work / "repro_b";
  fs::remove_all(a);
  fs::remove_all(b);
  RunEverything(a);
  const auto first = TreeDigests(a);
  RunEverything(a);  // again in place, over the same manifest
  const auto second = TreeDigests(a);
  RunEverything(b);
  auto third = TreeDigests(b);

  std::vector<std::string> differing;
  for (const auto& [file, digest] : first) {
    auto it = second.find(file);
    if (it == second.end() || it->second != digest) differing.push_back("a:" + file);
    // The manifest embeds the output directory; its stage table is compared
    // below instead.
    if (file == "manifest.json") continue;
    auto jt = third.find(file);
    if (jt == third.end() || jt->second != digest) differing.push_back("b:" + file);
  }
  if (first.size() != second.size() || first.size() != third.size()) {
    differing.push_back("file sets differ");
  }
  const json stages_a = Pipeline(MakeConfig(ReproJson(a))).ReadManifest().at("stages");
  const json stages_b = Pipeline(MakeConfig(ReproJson(b))).ReadManifest().at("stages");
  if (stages_a != stages_b) differing.push_back("manifest stages");

  Outcome o{9, "reproducibility"};
  o.pass = differing.empty() && stages_a.size() == 5;
  o.detail = std::to_string(first.size()) + " artifacts over " +
             std::to_string(stages_a.size()) + " stages";
  if (!differing.empty()) {
    o.detail += "; differing:";
    for (const auto& d : differing) o.detail += " " + d;
  }
  return o;
}

}  // namespace
}  // namespace irgail

int main(int argc, char** argv) {
  using namespace irgail;
  CLI::App app("End-to-end acceptance checks");
  std::string work = "acceptance_runs";
  std::vector<int> only;
  app.add_option("--work-dir", work, "Directory for experiment outputs");
  app.add_option("--only", only, "Run only these checks")->delimiter(',');
  CLI11_PARSE(app, argc, argv);
  const fs::path root(work);
  fs::create_directories(root);

  auto wanted = [&](int id) {
    return only.empty() || std::find(only.begin(), only.end(), id) != only.end();
  };
  std::vector<Outcome> outcomes;
  auto run = [&](int id, const std::function<Outcome()>& check) {
    if (!wanted(id)) return;
    std::cerr << "[" << id << "] running" << std::endl;
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {id, "error", false, e.what()};
    }
    std::cout << (o.pass ? "PASS" : "FAIL") << " [" << o.id << "] " << o.name
              << ": " << o.detail << std::endl;
    outcomes.push_back(o);
  };

  run(1, [&] { return Numerics(root); });
  run(2, [] { return MineOracle(); });
  run(3, [] { return ExpertSanity(); });

  const fs::path pendulum_dir = root / "pendulum";
  std::optional<PendulumRun> pendulum;
  auto need_pendulum = [&]() -> const PendulumRun& {
    if (!pendulum) pendulum = RunPendulum(pendulum_dir);
    return *pendulum;
  };
  run(4, [&] { return Headline(need_pendulum()); });
  run(5, [&] { return Ordering(need_pendulum()); });
  run(6, [&] { return Ablation(need_pendulum(), root / "arm"); });
  run(7, [&] { return Coupling(need_pendulum()); });
  run(8, [&] {
    if (!fs::exists(pendulum_dir / "repr.json")) need_pendulum();
    return Disentanglement(pendulum_dir);
  });
  run(9, [&] { return Reproducibility(root); });

  const auto failed = std::count_if(outcomes.begin(), outcomes.end(),
                                    [](const Outcome& o) { return !o.pass; });
  std::cout << outcomes.size() - failed << "/" << outcomes.size() << " passed"
            << std::endl;
  return failed == 0 ? 0 : 1;
}
