#include "irgail/eval.h"

#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace irgail {

namespace {

void OpenCsv(std::ofstream& out, const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  out.open(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out.precision(17);
}

std::string JoinParams(std::span<const double> params) {
  std::ostringstream s;
  s.precision(17);
  for (size_t i = 0; i < params.size(); ++i) {
    if (i > 0) s << ';';
    s << params[i];
  }
  return s.str();
}

std::vector<double> RowOf(const Matrix& m, Eigen::Index row) {
  std::vector<double> out(static_cast<size_t>(m.cols()));
  for (Eigen::Index c = 0; c < m.cols(); ++c) out[c] = m(row, c);
  return out;
}

double AngleDistance(const std::vector<double>& a,
                     const std::vector<double>& b) {
  double sum = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    const double d = std::remainder(a[i] - b[i], 2.0 * std::numbers::pi);
    sum += d * d;
  }
  return std::sqrt(sum);
}

double MeanPairwiseAngle(const std::vector<std::vector<double>>& angles) {
  double sum = 0.0;
  int pairs = 0;
  for (size_t i = 0; i < angles.size(); ++i) {
    for (size_t j = i + 1; j < angles.size(); ++j) {
      sum += AngleDistance(angles[i], angles[j]);
      ++pairs;
    }
  }
  return pairs > 0 ? sum / pairs : 0.0;
}

std::vector<double> JointAngles(const RobotRollout& rollout, size_t index) {
  return RecoverJointAngles(
      rollout.config,
      RowOf(rollout.observations, static_cast<Eigen::Index>(index)));
}

}  // namespace

double NormalizedReturn(double raw, double expert_ref, double random_ref) {
  if (!(expert_ref > random_ref)) {
    throw std::invalid_argument(
        "degenerate normalization: expert reference " +
        std::to_string(expert_ref) + " does not exceed random reference " +
        std::to_string(random_ref));
  }
  return (raw - random_ref) / (expert_ref - random_ref);
}

std::string ToString(SplitMode mode) {
  return mode == SplitMode::kInterpolation ? "interpolation" : "extrapolation";
}

Splits MakeSplits(Family family, ObsMode obs_mode, const ConfigSpace& space,
                  const BallRegion& ball, int n_interpolation,
                  int n_extrapolation, uint64_t seed) {
  space.Validate();
  if (n_interpolation < 0 || n_extrapolation < 0) {
    throw std::invalid_argument("split sizes must be non-negative");
  }
  if (!ball.InsideOf(space, /*strict=*/true)) {
    throw std::invalid_argument("ball region must lie strictly inside the "
                                "configuration space");
  }
  Splits s;
  for (int i = 0; i < n_interpolation; ++i) {
    s.interpolation.push_back(SampleConfig(family, obs_mode, space, ball,
                                           std::nullopt,
                                           DeriveSeed(seed, 2 * i)));
  }
  for (int i = 0; i < n_extrapolation; ++i) {
    s.extrapolation.push_back(SampleConfig(family, obs_mode, space,
                                           std::nullopt, ball,
                                           DeriveSeed(seed, 2 * i + 1)));
  }
  return s;
}

ReferenceReturns MeasureReferences(const RobotConfig& target,
                                   const EnvSettings& settings,
                                   const PpoConfig& ppo,
                                   const ExpertOptions& expert,
                                   ObsMode expert_obs_mode, int episodes,
                                   uint64_t seed) {
  const ExpertResult trained = TrainExpert(target.WithObsMode(expert_obs_mode),
                                           settings, ppo, expert,
                                           DeriveSeed(seed, 1));
  const RobotEnv env(target, settings);
  ReferenceReturns r;
  r.expert = EvaluatePolicy(env, trained.policy, episodes, DeriveSeed(seed, 2));
  r.random = EvaluateRandom(env, episodes, DeriveSeed(seed, 3));
  return r;
}

size_t EvalReport::num_valid() const {
  size_t n = 0;
  for (const auto& r : results) n += r.valid ? 1 : 0;
  return n;
}

double EvalReport::mean() const {
  if (num_valid() == 0) return std::numeric_limits<double>::quiet_NaN();
  double sum = 0.0;
  for (const auto& r : results) {
    if (r.valid) sum += r.normalized;
  }
  return sum / static_cast<double>(num_valid());
}

double EvalReport::std() const {
  if (num_valid() == 0) return std::numeric_limits<double>::quiet_NaN();
  const double m = mean();
  double sum = 0.0;
  for (const auto& r : results) {
    if (r.valid) sum += (r.normalized - m) * (r.normalized - m);
  }
  return std::sqrt(sum / static_cast<double>(num_valid()));
}

EvalReport EvaluateCell(Family family, ObsMode obs_mode, SplitMode mode,
                        Algorithm algorithm,
                        const std::vector<RobotConfig>& targets,
                        std::span<const uint64_t> seeds,
                        const ImitationRunner& run,
                        const ReferenceLookup& references) {
  EvalReport report{family, obs_mode, mode, algorithm, {}};
  for (const auto& target : targets) {
    for (uint64_t seed : seeds) {
      TargetResult r;
      r.config = target;
      r.seed = seed;
      try {
        const ReferenceReturns ref = references(target);
        r.raw_return = run(target, seed);
        r.normalized = NormalizedReturn(r.raw_return, ref.expert, ref.random);
        r.valid = std::isfinite(r.normalized);
        if (!r.valid) r.error = "non-finite return";
      } catch (const std::exception& e) {
        r.valid = false;
        r.error = e.what();
      }
      report.results.push_back(std::move(r));
    }
  }
  return report;
}

std::vector<EvalReport> RunTable(Family family,
                                 const std::vector<TableCell>& cells,
                                 const Splits& splits,
                                 std::span<const uint64_t> seeds,
                                 const RunnerFactory& runners,
                                 const ReferenceLookup& references) {
  std::vector<EvalReport> out;
  for (const auto& cell : cells) {
    const auto& base = cell.mode == SplitMode::kInterpolation
                           ? splits.interpolation
                           : splits.extrapolation;
    std::vector<RobotConfig> targets;
    for (const auto& t : base) targets.push_back(t.WithObsMode(cell.obs_mode));
    out.push_back(EvaluateCell(family, cell.obs_mode, cell.mode,
                               cell.algorithm, targets, seeds,
                               runners(cell.algorithm, cell.obs_mode),
                               references));
  }
  return out;
}

std::vector<EvalReport> RunAblation(Family family, ObsMode obs_mode,
                                    const Splits& splits,
                                    std::span<const uint64_t> seeds,
                                    const RunnerFactory& runners,
                                    const ReferenceLookup& references) {
  std::vector<TableCell> cells;
  for (SplitMode mode :
       {SplitMode::kInterpolation, SplitMode::kExtrapolation}) {
    cells.push_back({obs_mode, mode, Algorithm::kIrGail});
    cells.push_back({obs_mode, mode, Algorithm::kIrGailNoDyn});
  }
  return RunTable(family, cells, splits, seeds, runners, references);
}

void WriteReportCsv(const std::vector<EvalReport>& reports,
                    const std::filesystem::path& path) {
  std::ofstream out;
  OpenCsv(out, path);
  out << "family,obs_mode,mode,algorithm,mean,std,n_valid,n_runs,valid\n";
  for (const auto& r : reports) {
    out << ToString(r.family) << ',' << ToString(r.obs_mode) << ','
        << ToString(r.mode) << ',' << ToString(r.algorithm) << ',' << r.mean()
        << ',' << r.std() << ',' << r.num_valid() << ',' << r.results.size()
        << ',' << (r.valid() ? 1 : 0) << '\n';
  }
}

void WriteRunsCsv(const std::vector<EvalReport>& reports,
                  const std::filesystem::path& path) {
  std::ofstream out;
  OpenCsv(out, path);
  out << "family,obs_mode,mode,algorithm,config,seed,raw_return,normalized,"
         "valid,error\n";
  for (const auto& r : reports) {
    for (const auto& t : r.results) {
      std::string error = t.error;
      for (char& c : error) {
        if (c == ',' || c == '\n') c = ' ';
      }
      out << ToString(r.family) << ',' << ToString(r.obs_mode) << ','
          << ToString(r.mode) << ',' << ToString(r.algorithm) << ','
          << JoinParams(t.config.params) << ',' << t.seed << ','
          << t.raw_return << ',' << t.normalized << ',' << (t.valid ? 1 : 0)
          << ',' << error << '\n';
    }
  }
}

std::vector<CouplingGroup> CoupleStates(
    const LatentEncoder& encoder, const std::vector<RobotRollout>& rollouts,
    int n_anchors, uint64_t seed, std::vector<std::string>* warnings) {
  if (n_anchors < 1) throw std::invalid_argument("need at least one anchor");
  std::vector<size_t> robots;
  std::vector<Matrix> latents(rollouts.size());
  for (size_t i = 0; i < rollouts.size(); ++i) {
    const auto& r = rollouts[i];
    if (r.observations.rows() == 0) {
      if (warnings != nullptr) {
        warnings->push_back("robot " + std::to_string(i) + " (" +
                            JoinParams(r.config.params) +
                            ") has no states; skipped");
      }
      continue;
    }
    Matrix cfg(r.observations.rows(),
               static_cast<Eigen::Index>(r.config.params.size()));
    for (Eigen::Index k = 0; k < cfg.rows(); ++k) {
      for (Eigen::Index j = 0; j < cfg.cols(); ++j) {
        cfg(k, j) = r.config.params[j];
      }
    }
    latents[i] = encoder.EncodeStates(r.observations, cfg);
    robots.push_back(i);
  }
  if (robots.size() < 2) {
    throw std::invalid_argument("coupling needs at least two robots with "
                                "states");
  }
  size_t pooled = 0;
  for (size_t i : robots) pooled += static_cast<size_t>(latents[i].rows());

  Rng rng(seed);
  std::vector<CouplingGroup> groups;
  for (int a = 0; a < n_anchors; ++a) {
    // Uniform over the pooled set of encoded states.
    size_t pick = rng.Index(pooled);
    CouplingGroup g;
    for (size_t i : robots) {
      const auto n = static_cast<size_t>(latents[i].rows());
      if (pick < n) {
        g.anchor_robot = i;
        g.anchor_state = pick;
        break;
      }
      pick -= n;
    }
    g.anchor = RowOf(latents[g.anchor_robot],
                     static_cast<Eigen::Index>(g.anchor_state));
    const Eigen::Map<const Eigen::RowVectorXd> anchor(
        g.anchor.data(), static_cast<Eigen::Index>(g.anchor.size()));
    for (size_t i : robots) {
      Eigen::Index best = 0;
      const Eigen::VectorXd d2 =
          (latents[i].rowwise() - anchor).rowwise().squaredNorm();
      d2.minCoeff(&best);
      g.entries.push_back(
          {i, static_cast<size_t>(best), std::sqrt(d2(best))});
    }
    groups.push_back(std::move(g));
  }
  return groups;
}

double GroupAngleDiscrepancy(const std::vector<RobotRollout>& rollouts,
                             const std::vector<CouplingGroup>& groups) {
  if (groups.empty()) throw std::invalid_argument("no coupling groups");
  double sum = 0.0;
  for (const auto& g : groups) {
    std::vector<std::vector<double>> angles;
    for (const auto& e : g.entries) {
      angles.push_back(JointAngles(rollouts[e.robot], e.state_index));
    }
    sum += MeanPairwiseAngle(angles);
  }
  return sum / static_cast<double>(groups.size());
}

double RandomGroupingDiscrepancy(const std::vector<RobotRollout>& rollouts,
                                 const std::vector<CouplingGroup>& groups,
                                 uint64_t seed) {
  if (groups.empty()) throw std::invalid_argument("no coupling groups");
  Rng rng(seed);
  double sum = 0.0;
  for (const auto& g : groups) {
    std::vector<std::vector<double>> angles;
    for (const auto& e : g.entries) {
      const auto& r = rollouts[e.robot];
      angles.push_back(
          JointAngles(r, rng.Index(static_cast<size_t>(r.observations.rows()))));
    }
    sum += MeanPairwiseAngle(angles);
  }
  return sum / static_cast<double>(groups.size());
}

void WriteCouplingCsv(const std::vector<RobotRollout>& rollouts,
                      const std::vector<CouplingGroup>& groups,
                      const std::filesystem::path& path) {
  std::ofstream out;
  OpenCsv(out, path);
  out << "anchor_id,robot,config,state_index,distance,angles,observation\n";
  for (size_t a = 0; a < groups.size(); ++a) {
    for (const auto& e : groups[a].entries) {
      const auto& r = rollouts[e.robot];
      out << a << ',' << e.robot << ',' << JoinParams(r.config.params) << ','
          << e.state_index << ',' << e.distance << ','
          << JoinParams(JointAngles(r, e.state_index)) << ','
          << JoinParams(RowOf(r.observations,
                              static_cast<Eigen::Index>(e.state_index)))
          << '\n';
    }
  }
}

}  // namespace irgail
