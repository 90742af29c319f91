#include "irgail/pipeline.h"

#include <algorithm>
#include <fstream>
#include <iterator>
#include <sstream>
#include <stdexcept>

#include "irgail/errors.h"

namespace irgail {

namespace {

constexpr const char* kDemos = "demos.jsonl";
constexpr const char* kAngleDemos = "demos_angle.jsonl";
constexpr const char* kRandomRollouts = "random_rollouts.jsonl";
constexpr const char* kRepr = "repr.json";
constexpr const char* kReprNoDyn = "repr_nodyn.json";
constexpr const char* kReferences = "references.json";
constexpr const char* kManifest = "manifest.json";

std::string ConfigKey(const RobotConfig& c) {
  std::ostringstream s;
  s.precision(17);
  s << ToString(c.family);
  for (double p : c.params) s << '_' << p;
  return s.str();
}

void WriteJson(const nlohmann::json& j, const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out << j.dump(2) << '\n';
}

Matrix ObservationRows(const std::vector<TrajectoryRecord>& records) {
  size_t n = 0;
  for (const auto& r : records) n += r.transitions.size();
  if (n == 0) return Matrix();
  const size_t dim = records.front().transitions.front().observation.size();
  Matrix m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dim));
  Eigen::Index row = 0;
  for (const auto& r : records) {
    for (const auto& t : r.transitions) {
      for (size_t j = 0; j < dim; ++j) m(row, j) = t.observation[j];
      ++row;
    }
  }
  return m;
}

}  // namespace

std::string FileDigest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)),
                          std::istreambuf_iterator<char>());
  return HexDigest(Fnv1a(bytes));
}

Pipeline::Pipeline(ExperimentConfig config, Logger log)
    : config_(std::move(config)),
      root_(config_.output_dir),
      log_(std::move(log)) {
  config_.Validate();
}

void Pipeline::Log(const std::string& message) const {
  if (log_) log_(message);
}

std::filesystem::path Pipeline::Path(const std::string& relative) const {
  return root_ / relative;
}

uint64_t Pipeline::StageSeed(const std::string& stage) const {
  return DeriveSeed(config_.seed, Fnv1a(stage));
}

nlohmann::json Pipeline::ReadManifest() const {
  std::ifstream in(Path(kManifest));
  if (!in) return nlohmann::json::object();
  return nlohmann::json::parse(in);
}

void Pipeline::RecordStage(const std::string& stage,
                           const std::vector<std::string>& artifacts) {
  nlohmann::json manifest = ReadManifest();
  const std::string hash = ConfigHash(config_);
  manifest["schema"] = "irgail.manifest";
  manifest["version"] = 1;
  manifest["config_hash"] = hash;
  manifest["config"] = ToJson(config_);
  nlohmann::json& entry = manifest["stages"][stage];
  if (!entry.is_object() || stage != kStageImitate ||
      entry.value("config_hash", "") != hash) {
    entry["artifacts"] = nlohmann::json::object();
  }
  entry["seed"] = StageSeed(stage);
  entry["config_hash"] = hash;
  for (const auto& a : artifacts) entry["artifacts"][a] = FileDigest(Path(a));
  WriteJson(manifest, Path(kManifest));
}

void Pipeline::GenExperts() {
  const uint64_t seed = StageSeed(kStageGenExperts);
  const auto& c = config_;
  std::vector<std::string> artifacts;
  std::vector<TrajectoryRecord> demos, angle_demos;
  const bool angle_copy =
      c.obs_mode != ObsMode::kAngle && c.evaluation.angle_control;
  nlohmann::json index = nlohmann::json::array();
  for (int i = 0; i < c.demos.experts; ++i) {
    const RobotConfig source = SampleConfig(
        c.family, c.obs_mode, c.config_space, c.region, std::nullopt,
        DeriveSeed(seed, static_cast<uint64_t>(i)));
    Log("training expert " + std::to_string(i) + " on " + ConfigKey(source));
    const ExpertResult expert =
        TrainExpert(source.WithObsMode(c.expert.obs_mode), c.env, c.ppo,
                    c.MakeExpertOptions(), DeriveSeed(seed, 100 + i));
    Log("  reached return " + std::to_string(expert.eval_return) + " after " +
        std::to_string(expert.iterations) + " iterations");
    const std::string name = "experts/expert_" + std::to_string(i) + ".json";
    expert.policy.Save(Path(name));
    artifacts.push_back(name);
    index.push_back({{"config", source.params},
                     {"eval_return", expert.eval_return},
                     {"iterations", expert.iterations},
                     {"checkpoint", name}});

    const int count = c.demos.trajectories / c.demos.experts +
                      (i < c.demos.trajectories % c.demos.experts ? 1 : 0);
    const Actor actor = MakePolicyActor(expert.policy, true);
    const uint64_t demo_seed = DeriveSeed(seed, 200 + i);
    auto recs = irgail::Collect(RobotEnv(source, c.env), actor, count, demo_seed);
    demos.insert(demos.end(), recs.begin(), recs.end());
    if (angle_copy) {
      auto arecs = irgail::Collect(
          RobotEnv(source.WithObsMode(ObsMode::kAngle), c.env), actor, count,
          demo_seed);
      angle_demos.insert(angle_demos.end(), arecs.begin(), arecs.end());
    }
  }
  WriteJson(index, Path("experts/index.json"));
  artifacts.push_back("experts/index.json");
  SaveRecords(demos, Path(kDemos));
  artifacts.push_back(kDemos);
  if (angle_copy) {
    SaveRecords(angle_demos, Path(kAngleDemos));
    artifacts.push_back(kAngleDemos);
  }
  RecordStage(kStageGenExperts, artifacts);
}

void Pipeline::Collect() {
  const auto& c = config_;
  Log("collecting random rollouts on " +
      std::to_string(c.representation.random_robots) + " robots");
  const auto records = CollectRandomRollouts(
      c.family, c.obs_mode, c.config_space, c.region, c.env,
      c.representation.random_robots, c.representation.steps_per_robot,
      StageSeed(kStageCollect));
  SaveRecords(records, Path(kRandomRollouts));
  RecordStage(kStageCollect, {kRandomRollouts});
}

DemoSet Pipeline::LoadDemos(ObsMode mode) const {
  std::string name;
  if (mode == config_.obs_mode) {
    name = kDemos;
  } else if (mode == ObsMode::kAngle) {
    name = kAngleDemos;
  } else {
    throw std::invalid_argument("no demos are generated for observation mode " +
                                ToString(mode));
  }
  if (!std::filesystem::exists(Path(name))) {
    throw MissingArtifactError(name, kStageGenExperts);
  }
  return DemoSet{LoadRecords(Path(name))};
}

std::vector<Policy> Pipeline::LoadExperts() const {
  std::vector<Policy> experts;
  for (int i = 0; i < config_.demos.experts; ++i) {
    const std::string name = "experts/expert_" + std::to_string(i) + ".json";
    if (!std::filesystem::exists(Path(name))) {
      throw MissingArtifactError(name, kStageGenExperts);
    }
    experts.push_back(Policy::Load(Path(name)));
  }
  return experts;
}

std::vector<TrajectoryRecord> Pipeline::LoadRandomRollouts() const {
  if (!std::filesystem::exists(Path(kRandomRollouts))) {
    throw MissingArtifactError(kRandomRollouts, kStageCollect);
  }
  return LoadRecords(Path(kRandomRollouts));
}

InvariantRepresentation Pipeline::LoadRepresentation(
    Algorithm algorithm) const {
  if (algorithm == Algorithm::kGail) {
    throw std::invalid_argument("gail does not use a representation");
  }
  const std::string name =
      algorithm == Algorithm::kIrGail ? kRepr : kReprNoDyn;
  if (!std::filesystem::exists(Path(name))) {
    throw MissingArtifactError(name, kStageTrainRepr);
  }
  return InvariantRepresentation::Load(Path(name));
}

std::vector<Transition> Pipeline::ReprDataset() const {
  if (!config_.representation.include_expert_demos) {
    return BuildReprDataset(LoadRandomRollouts(), nullptr, false);
  }
  // Demos first so a fresh directory names the earliest missing stage.
  const DemoSet demos = LoadDemos(config_.obs_mode);
  return BuildReprDataset(LoadRandomRollouts(), &demos, true);
}

InvariantRepresentation Pipeline::TrainVariant(const LossWeights& weights,
                                               ReprTrainingLog* log) const {
  const uint64_t seed = StageSeed(kStageTrainRepr);
  ReprOptions options = config_.representation.options;
  options.seed = DeriveSeed(seed, 1);
  Rng rng(DeriveSeed(seed, 0));
  InvariantRepresentation repr(config_.MakeReprDims(), weights, options, rng);
  ReprTrainingLog local = TrainRepresentation(repr, ReprDataset(), options);
  if (log != nullptr) *log = std::move(local);
  return repr;
}

void Pipeline::TrainRepr() {
  std::vector<std::string> artifacts;
  ReprTrainingLog log;
  Log("training representation");
  TrainVariant(config_.representation.weights, &log).Save(Path(kRepr));
  log.WriteCsv(Path("repr_log.csv"));
  artifacts = {kRepr, "repr_log.csv"};
  if (config_.evaluation.ablation) {
    Log("training representation without the dynamics loss");
    LossWeights w = config_.representation.weights;
    w.dynamics = 0.0;
    TrainVariant(w, &log).Save(Path(kReprNoDyn));
    log.WriteCsv(Path("repr_nodyn_log.csv"));
    artifacts.push_back(kReprNoDyn);
    artifacts.push_back("repr_nodyn_log.csv");
  }
  RecordStage(kStageTrainRepr, artifacts);
}

ImitationResult Pipeline::RunImitationFor(
    const RobotConfig& target, Algorithm algorithm, uint64_t seed,
    const DemoSet& demos, const InvariantRepresentation* repr) const {
  const uint64_t run_seed =
      DeriveSeed(DeriveSeed(StageSeed(kStageImitate), seed),
                 Fnv1a(ConfigKey(target)));
  if (algorithm == Algorithm::kGail) {
    const IdentityEncoder encoder(
        static_cast<int>(ObservationDim(target.family, target.obs_mode)),
        static_cast<int>(ActionDim(target.family)));
    return RunImitation(target, config_.env, demos, encoder,
                        config_.MakeImitationOptions(), run_seed);
  }
  if (repr == nullptr) {
    throw MissingArtifactError(
        algorithm == Algorithm::kIrGail ? kRepr : kReprNoDyn, kStageTrainRepr);
  }
  if (target.obs_mode != config_.obs_mode) {
    throw std::invalid_argument(
        "the representation was trained on " + ToString(config_.obs_mode) +
        " observations");
  }
  const InvariantEncoder encoder(*repr);
  return RunImitation(target, config_.env, demos, encoder,
                      config_.MakeImitationOptions(), run_seed);
}

ImitationResult Pipeline::Imitate(const RobotConfig& target,
                                  Algorithm algorithm, uint64_t seed) {
  ValidateConfig(target);
  if (target.family != config_.family) {
    throw std::invalid_argument("target family differs from the experiment");
  }
  const DemoSet demos = LoadDemos(target.obs_mode);
  std::optional<InvariantRepresentation> repr;
  if (algorithm != Algorithm::kGail) repr = LoadRepresentation(algorithm);
  Log("imitating on " + ConfigKey(target) + " with " + ToString(algorithm));
  ImitationResult result = RunImitationFor(target, algorithm, seed, demos,
                                           repr ? &*repr : nullptr);
  const std::string dir = "imitation/" + ToString(algorithm) + "_" +
                          ToString(target.obs_mode) + "_" + ConfigKey(target) +
                          "_s" + std::to_string(seed);
  result.policy.Save(Path(dir + "/policy.json"));
  WriteMetricsCsv(result.metrics, Path(dir + "/metrics.csv"));
  RecordStage(kStageImitate, {dir + "/policy.json", dir + "/metrics.csv"});
  return result;
}

Splits Pipeline::EvaluationSplits() const {
  return MakeSplits(config_.family, config_.obs_mode, config_.config_space,
                    config_.region, config_.evaluation.n_interpolation,
                    config_.evaluation.n_extrapolation,
                    DeriveSeed(StageSeed(kStageEvaluate), 1));
}

ReferenceReturns Pipeline::References(const RobotConfig& target) {
  if (!references_loaded_) {
    references_loaded_ = true;
    std::ifstream in(Path(kReferences));
    if (in) {
      const auto j = nlohmann::json::parse(in);
      if (j.value("config_hash", "") == ConfigHash(config_)) {
        for (const auto& [key, v] : j.at("references").items()) {
          reference_cache_[key] = {v.at("expert").get<double>(),
                                   v.at("random").get<double>()};
        }
      }
    }
  }
  const std::string key = ConfigKey(target);
  if (auto it = reference_cache_.find(key); it != reference_cache_.end()) {
    return it->second;
  }
  Log("measuring references on " + key);
  ExpertOptions options = config_.MakeExpertOptions();
  options.require_target = false;
  const ReferenceReturns r = MeasureReferences(
      target, config_.env, config_.ppo, options, config_.expert.obs_mode,
      config_.evaluation.reference_episodes,
      DeriveSeed(StageSeed("references"), Fnv1a(key)));
  reference_cache_[key] = r;
  SaveReferences();
  return r;
}

void Pipeline::SaveReferences() const {
  nlohmann::json refs = nlohmann::json::object();
  for (const auto& [key, r] : reference_cache_) {
    refs[key] = {{"expert", r.expert}, {"random", r.random}};
  }
  WriteJson({{"config_hash", ConfigHash(config_)}, {"references", refs}},
            Path(kReferences));
}

EvaluationOutcome Pipeline::Evaluate() {
  const auto& c = config_;
  const bool needs_repr =
      c.evaluation.ablation ||
      std::find(c.evaluation.algorithms.begin(), c.evaluation.algorithms.end(),
                Algorithm::kIrGail) != c.evaluation.algorithms.end() ||
      std::find(c.evaluation.algorithms.begin(), c.evaluation.algorithms.end(),
                Algorithm::kIrGailNoDyn) != c.evaluation.algorithms.end();
  const bool needs_nodyn =
      c.evaluation.ablation ||
      std::find(c.evaluation.algorithms.begin(), c.evaluation.algorithms.end(),
                Algorithm::kIrGailNoDyn) != c.evaluation.algorithms.end();
  const bool angle_control =
      c.evaluation.angle_control && c.obs_mode != ObsMode::kAngle;

  // Fail fast on missing upstream artifacts.
  std::map<ObsMode, DemoSet> demos;
  demos[c.obs_mode] = LoadDemos(c.obs_mode);
  if (angle_control) demos[ObsMode::kAngle] = LoadDemos(ObsMode::kAngle);
  std::map<Algorithm, InvariantRepresentation> reprs;
  if (needs_repr) reprs[Algorithm::kIrGail] = LoadRepresentation(Algorithm::kIrGail);
  if (needs_nodyn) {
    reprs[Algorithm::kIrGailNoDyn] = LoadRepresentation(Algorithm::kIrGailNoDyn);
  }
  std::vector<Policy> experts;
  if (needs_repr) experts = LoadExperts();

  const Splits splits = EvaluationSplits();
  std::map<std::string, double> memo;
  const RunnerFactory runners = [&](Algorithm algorithm, ObsMode mode) {
    return ImitationRunner([&, algorithm, mode](const RobotConfig& target,
                                                uint64_t seed) {
      const std::string key = ToString(algorithm) + "/" + ToString(mode) +
                              "/" + ConfigKey(target) + "/" +
                              std::to_string(seed);
      if (auto it = memo.find(key); it != memo.end()) return it->second;
      Log("run " + key);
      auto it = reprs.find(algorithm);
      const ImitationResult r = RunImitationFor(
          target, algorithm, seed, demos.at(mode),
          it == reprs.end() ? nullptr : &it->second);
      Log("  raw return " + std::to_string(r.final_return));
      memo[key] = r.final_return;
      return r.final_return;
    });
  };
  const ReferenceLookup refs = [this](const RobotConfig& target) {
    return References(target);
  };

  std::vector<TableCell> cells;
  for (Algorithm a : c.evaluation.algorithms) {
    cells.push_back({c.obs_mode, SplitMode::kInterpolation, a});
    cells.push_back({c.obs_mode, SplitMode::kExtrapolation, a});
  }
  if (angle_control) {
    cells.push_back({ObsMode::kAngle, SplitMode::kInterpolation,
                     Algorithm::kGail});
  }
  EvaluationOutcome outcome;
  std::vector<std::string> artifacts;
  outcome.table =
      RunTable(c.family, cells, splits, c.eval_seeds, runners, refs);
  WriteReportCsv(outcome.table, Path("table.csv"));
  WriteRunsCsv(outcome.table, Path("runs.csv"));
  artifacts = {"table.csv", "runs.csv"};

  if (c.evaluation.ablation) {
    outcome.ablation =
        RunAblation(c.family, c.obs_mode, splits, c.eval_seeds, runners, refs);
    WriteReportCsv(outcome.ablation, Path("ablation.csv"));
    WriteRunsCsv(outcome.ablation, Path("ablation_runs.csv"));
    artifacts.push_back("ablation.csv");
    artifacts.push_back("ablation_runs.csv");
  }

  if (needs_repr) {
    const uint64_t seed = DeriveSeed(StageSeed(kStageEvaluate), 2);
    const auto& cp = c.evaluation.coupling;
    std::vector<RobotRollout> rollouts;
    for (int i = 0; i < cp.robots; ++i) {
      const RobotConfig robot = SampleConfig(
          c.family, c.obs_mode, c.config_space,
          cp.within_region ? std::optional<BallRegion>(c.region) : std::nullopt,
          std::nullopt, DeriveSeed(seed, 2 * i));
      const Actor actor =
          MakePolicyActor(experts[static_cast<size_t>(i) % experts.size()], false);
      const auto records =
          CollectSteps(RobotEnv(robot, c.env), actor, cp.steps_per_robot,
                       DeriveSeed(seed, 2 * i + 1));
      rollouts.push_back({robot, ObservationRows(records)});
    }
    std::vector<std::string> warnings;
    const InvariantEncoder encoder(reprs.at(Algorithm::kIrGail));
    const auto groups =
        CoupleStates(encoder, rollouts, c.evaluation.coupling.anchors,
                     DeriveSeed(seed, 1000), &warnings);
    for (const auto& w : warnings) Log("warning: " + w);
    CouplingSummary summary;
    summary.groups = static_cast<int>(groups.size());
    summary.group_discrepancy = GroupAngleDiscrepancy(rollouts, groups);
    summary.random_discrepancy =
        RandomGroupingDiscrepancy(rollouts, groups, DeriveSeed(seed, 1001));
    WriteCouplingCsv(rollouts, groups, Path("coupling.csv"));
    WriteJson({{"groups", summary.groups},
               {"group_angle_discrepancy", summary.group_discrepancy},
               {"random_grouping_discrepancy", summary.random_discrepancy}},
              Path("coupling_summary.json"));
    artifacts.push_back("coupling.csv");
    artifacts.push_back("coupling_summary.json");
    outcome.coupling = summary;
  }
  SaveReferences();
  artifacts.push_back(kReferences);
  RecordStage(kStageEvaluate, artifacts);
  return outcome;
}

}  // namespace irgail
