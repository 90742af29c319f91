// Command-line driver for the experiment pipeline.
//
//   irgail <stage> --config exp.json [--set key.path=value ...]
//
// Exit codes: 0 success, 1 usage or configuration error, 2 missing upstream
// artifact, 3 numerical failure.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "irgail/errors.h"
#include "irgail/experiment_config.h"
#include "irgail/pipeline.h"

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitMissingArtifact = 2;
constexpr int kExitNumerical = 3;

irgail::ExperimentConfig ResolveConfig(const std::string& path,
                                       const std::vector<std::string>& sets,
                                       const std::string& output_dir) {
  // Overrides apply to the fully defaulted tree, so any documented field can
  // be set even when the file leaves it out.
  nlohmann::json tree = irgail::ToJson(irgail::LoadExperimentConfig(path));
  for (const auto& s : sets) irgail::ApplyOverride(tree, s);
  if (!output_dir.empty()) tree["output_dir"] = output_dir;
  return irgail::ExperimentConfigFromJson(tree);
}

std::vector<double> ParseTarget(const std::string& text) {
  std::vector<double> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    size_t used = 0;
    const double v = std::stod(item, &used);
    if (used != item.size()) {
      throw std::invalid_argument("bad --target component '" + item + "'");
    }
    out.push_back(v);
  }
  return out;
}

void PrintReports(const std::vector<irgail::EvalReport>& reports) {
  for (const auto& r : reports) {
    std::cout << irgail::ToString(r.algorithm) << ' '
              << irgail::ToString(r.obs_mode) << ' '
              << irgail::ToString(r.mode) << ": " << r.mean() << " +- "
              << r.std() << " (" << r.num_valid() << '/' << r.results.size()
              << " runs)\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Invariant-representation adversarial imitation pipeline"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> sets;
  std::string output_dir;
  bool quiet = false;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("-c,--config", config_path, "Experiment config (JSON)")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_option("--set", sets,
                    "Override a config field, e.g. --set ppo.learning_rate=1e-3");
    sub->add_option("-o,--output-dir", output_dir,
                    "Override the config's output_dir");
    sub->add_flag("-q,--quiet", quiet, "Suppress progress messages");
  };

  auto* gen = app.add_subcommand("gen-experts",
                                 "Train experts and record demonstrations");
  auto* collect =
      app.add_subcommand("collect", "Record random-policy rollouts");
  auto* train = app.add_subcommand("train-repr",
                                   "Train the invariant representation");
  auto* imitate =
      app.add_subcommand("imitate", "Imitate on one target configuration");
  auto* evaluate = app.add_subcommand(
      "evaluate", "Run the evaluation table, ablation and coupling analysis");
  auto* show = app.add_subcommand(
      "show-config", "Print the fully defaulted config and its hash");
  for (auto* sub : {gen, collect, train, imitate, evaluate, show}) {
    add_common(sub);
  }

  std::string target_text;
  std::string algorithm_text = "ir-gail";
  std::string obs_mode_text;
  uint64_t seed = 0;
  imitate->add_option("--target", target_text,
                      "Comma-separated configuration, e.g. 3.5,1.2")
      ->required();
  imitate->add_option("--algorithm", algorithm_text,
                      "gail, ir-gail or ir-gail-nodyn")
      ->check(CLI::IsMember({"gail", "ir-gail", "ir-gail-nodyn"}));
  imitate->add_option("--obs-mode", obs_mode_text,
                      "Observation mode of the target (default: config's)")
      ->check(CLI::IsMember({"keypoint", "angle"}));
  imitate->add_option("--seed", seed, "Run seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    const irgail::ExperimentConfig config =
        ResolveConfig(config_path, sets, output_dir);
    if (*show) {
      std::cout << irgail::ToJson(config).dump(2) << '\n'
                << "hash " << irgail::ConfigHash(config) << '\n';
      return 0;
    }
    irgail::Pipeline pipeline(config, [quiet](const std::string& m) {
      if (!quiet) std::cerr << m << '\n';
    });
    if (*gen) {
      pipeline.GenExperts();
    } else if (*collect) {
      pipeline.Collect();
    } else if (*train) {
      pipeline.TrainRepr();
    } else if (*imitate) {
      irgail::RobotConfig target;
      target.family = config.family;
      target.params = ParseTarget(target_text);
      target.obs_mode = obs_mode_text.empty()
                            ? config.obs_mode
                            : irgail::ParseObsMode(obs_mode_text);
      const auto result = pipeline.Imitate(
          target, irgail::ParseAlgorithm(algorithm_text), seed);
      std::cout << "final return " << result.final_return << '\n';
    } else if (*evaluate) {
      const auto outcome = pipeline.Evaluate();
      PrintReports(outcome.table);
      PrintReports(outcome.ablation);
      if (outcome.coupling) {
        std::cout << "coupling: group angle discrepancy "
                  << outcome.coupling->group_discrepancy
                  << " vs random grouping "
                  << outcome.coupling->random_discrepancy << " over "
                  << outcome.coupling->groups << " groups\n";
      }
    }
  } catch (const irgail::MissingArtifactError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitMissingArtifact;
  } catch (const irgail::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return 0;
}
