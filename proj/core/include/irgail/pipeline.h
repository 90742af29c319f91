#ifndef IRGAIL_PIPELINE_H_
#define IRGAIL_PIPELINE_H_

// The five dependent stages of an experiment, all writing under the
// configured output directory:
//
//   gen-experts  experts/expert_<i>.json, demos.jsonl [, demos_angle.jsonl]
//   collect      random_rollouts.jsonl
//   train-repr   repr.json, repr_log.csv [, repr_nodyn.json, ...]
//   imitate      imitation/<algorithm>_<config>_s<seed>/{policy.json,
//                metrics.csv}
//   evaluate     references.json, table.csv, runs.csv, ablation.csv,
//                ablation_runs.csv, coupling.csv, coupling_summary.json
//
// manifest.json records the config hash, the seed of every stage and a
// digest of every artifact it wrote.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "irgail/datasets.h"
#include "irgail/eval.h"
#include "irgail/experiment_config.h"
#include "irgail/gail.h"
#include "irgail/invariant_repr.h"

namespace irgail {

inline constexpr const char* kStageGenExperts = "gen-experts";
inline constexpr const char* kStageCollect = "collect";
inline constexpr const char* kStageTrainRepr = "train-repr";
inline constexpr const char* kStageImitate = "imitate";
inline constexpr const char* kStageEvaluate = "evaluate";

// Digest of a file's bytes.
std::string FileDigest(const std::filesystem::path& path);

struct CouplingSummary {
  double group_discrepancy = 0.0;
  double random_discrepancy = 0.0;
  int groups = 0;
};

struct EvaluationOutcome {
  std::vector<EvalReport> table;
  std::vector<EvalReport> ablation;
  std::optional<CouplingSummary> coupling;
};

class Pipeline {
 public:
  using Logger = std::function<void(const std::string&)>;

  explicit Pipeline(ExperimentConfig config, Logger log = nullptr);

  const ExperimentConfig& config() const { return config_; }
  const std::filesystem::path& root() const { return root_; }

  void GenExperts();
  void Collect();
  // Trains the main representation plus the dynamics-free variant when the
  // ablation is enabled.
  void TrainRepr();
  ImitationResult Imitate(const RobotConfig& target, Algorithm algorithm,
                          uint64_t seed);
  EvaluationOutcome Evaluate();

  // Artifact loaders; throw MissingArtifactError naming the producing stage.
  DemoSet LoadDemos(ObsMode mode) const;
  std::vector<TrajectoryRecord> LoadRandomRollouts() const;
  std::vector<Policy> LoadExperts() const;
  InvariantRepresentation LoadRepresentation(Algorithm algorithm) const;

  // Representation dataset as train-repr builds it.
  std::vector<Transition> ReprDataset() const;
  // Trains a representation with the configured options and `weights`
  // (used by train-repr and by disentanglement probes).
  InvariantRepresentation TrainVariant(const LossWeights& weights,
                                       ReprTrainingLog* log = nullptr) const;

  uint64_t StageSeed(const std::string& stage) const;
  Splits EvaluationSplits() const;
  // Reference returns for `target`, cached in references.json.
  ReferenceReturns References(const RobotConfig& target);

  nlohmann::json ReadManifest() const;

 private:
  void Log(const std::string& message) const;
  std::filesystem::path Path(const std::string& relative) const;
  void RecordStage(const std::string& stage,
                   const std::vector<std::string>& artifacts);
  ImitationResult RunImitationFor(const RobotConfig& target,
                                  Algorithm algorithm, uint64_t seed,
                                  const DemoSet& demos,
                                  const InvariantRepresentation* repr) const;
  void SaveReferences() const;

  ExperimentConfig config_;
  std::filesystem::path root_;
  Logger log_;
  std::map<std::string, ReferenceReturns> reference_cache_;
  bool references_loaded_ = false;
};

}  // namespace irgail

#endif  // IRGAIL_PIPELINE_H_
