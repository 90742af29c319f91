#include "irgail/experiment_config.h"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace irgail {

namespace {

void Require(bool ok, const std::string& field, const std::string& what) {
  if (!ok) throw std::invalid_argument("config field '" + field + "' " + what);
}

// Every key of `user` must exist in `defaults`, recursively through objects.
void CheckKnownKeys(const nlohmann::json& user, const nlohmann::json& defaults,
                    const std::string& prefix) {
  for (auto it = user.begin(); it != user.end(); ++it) {
    const std::string path = prefix.empty() ? it.key() : prefix + "." + it.key();
    if (!defaults.contains(it.key())) {
      throw std::invalid_argument("unknown config field '" + path + "'");
    }
    const auto& d = defaults.at(it.key());
    if (d.is_object()) {
      if (!it->is_object()) {
        throw std::invalid_argument("config field '" + path +
                                    "' must be an object");
      }
      CheckKnownKeys(*it, d, path);
    }
  }
}

nlohmann::json WeightsJson(const LossWeights& w) {
  return {{"disentangle", w.disentangle},
          {"dynamics", w.dynamics},
          {"prior_kl", w.prior_kl}};
}

template <typename T>
T Get(const nlohmann::json& j, const char* key, const std::string& path) {
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw std::invalid_argument("config field '" + path + "." + key +
                                "' has the wrong type");
  }
}

}  // namespace

BallRegion DefaultRegion(const ConfigSpace& space) {
  BallRegion b;
  double narrowest = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < space.dim(); ++i) {
    b.center.push_back(0.5 * (space.lower[i] + space.upper[i]));
    narrowest = std::min(narrowest, space.upper[i] - space.lower[i]);
  }
  b.radius = 0.3 * narrowest;
  return b;
}

void ExperimentConfig::Validate() const {
  Require(schema_version == kConfigSchemaVersion, "schema_version",
          "must be " + std::to_string(kConfigSchemaVersion));
  config_space.Validate();
  Require(config_space.dim() == ConfigDim(family), "config_space",
          "does not match the family's configuration dimension");
  for (size_t i = 0; i < config_space.dim(); ++i) {
    Require(config_space.lower[i] > 0.0, "config_space.lower",
            "must be positive");
  }
  Require(region.radius > 0.0, "region.radius", "must be positive");
  Require(region.InsideOf(config_space, /*strict=*/true), "region",
          "must lie strictly inside config_space");
  Require(env.dt > 0.0, "env.dt", "must be positive");
  Require(env.horizon >= 1, "env.horizon", "must be >= 1");
  Require(env.reset_noise >= 0.0, "env.reset_noise", "must be >= 0");
  Require(!eval_seeds.empty(), "eval_seeds", "must not be empty");
  Require(demos.experts >= 1, "demos.experts", "must be >= 1");
  Require(demos.trajectories >= demos.experts, "demos.trajectories",
          "must be >= demos.experts");
  Require(representation.random_robots >= 1, "representation.random_robots",
          "must be >= 1");
  Require(representation.steps_per_robot >= 1,
          "representation.steps_per_robot", "must be >= 1");
  Require(representation.state_latent_dim >= 1 &&
              representation.action_latent_dim >= 1,
          "representation latent dims", "must be >= 1");
  representation.weights.Validate();
  Require(representation.options.steps >= 0, "representation.steps",
          "must be >= 0");
  Require(representation.options.batch_size >= kMinMiBatch,
          "representation.batch_size",
          "must be >= " + std::to_string(kMinMiBatch));
  Require(representation.options.learning_rate > 0.0,
          "representation.learning_rate", "must be positive");
  Require(representation.options.mine_updates >= 1,
          "representation.mine.updates_per_step", "must be >= 1");
  ppo.Validate();
  Require(expert.max_iterations >= 1 && expert.eval_every >= 1 &&
              expert.eval_episodes >= 1,
          "expert", "budgets must be >= 1");
  Require(expert.target_fraction > 0.0 && expert.target_fraction <= 1.0,
          "expert.target_fraction", "must lie in (0, 1]");
  MakeImitationOptions().Validate();
  Require(evaluation.n_interpolation >= 0 && evaluation.n_extrapolation >= 0,
          "evaluation split sizes", "must be >= 0");
  Require(evaluation.reference_episodes >= 1, "evaluation.reference_episodes",
          "must be >= 1");
  Require(evaluation.coupling.robots >= 2, "evaluation.coupling.robots",
          "must be >= 2");
  Require(evaluation.coupling.anchors >= 1 &&
              evaluation.coupling.steps_per_robot >= 1,
          "evaluation.coupling", "counts must be >= 1");
  Require(!output_dir.empty(), "output_dir", "must not be empty");
}

ImitationOptions ExperimentConfig::MakeImitationOptions() const {
  ImitationOptions o;
  o.ppo = ppo;
  o.iterations = imitation.iterations;
  o.disc_hidden = imitation.disc_hidden;
  o.disc_learning_rate = imitation.disc_learning_rate;
  o.disc_batch_size = imitation.disc_batch_size;
  o.eval_episodes = imitation.eval_episodes;
  return o;
}

ExpertOptions ExperimentConfig::MakeExpertOptions() const {
  ExpertOptions o;
  o.max_iterations = expert.max_iterations;
  o.eval_every = expert.eval_every;
  o.eval_episodes = expert.eval_episodes;
  if (auto achievable = AchievableReturn(family, env)) {
    o.target_return = expert.target_fraction * *achievable;
  }
  return o;
}

ReprDims ExperimentConfig::MakeReprDims() const {
  return {static_cast<int>(ObservationDim(family, obs_mode)),
          static_cast<int>(ActionDim(family)),
          static_cast<int>(ConfigDim(family)), representation.state_latent_dim,
          representation.action_latent_dim};
}

nlohmann::json ToJson(const ExperimentConfig& c) {
  std::vector<std::string> algorithms;
  for (Algorithm a : c.evaluation.algorithms) algorithms.push_back(ToString(a));
  const ReprOptions& ro = c.representation.options;
  return {
      {"schema_version", c.schema_version},
      {"family", ToString(c.family)},
      {"obs_mode", ToString(c.obs_mode)},
      {"config_space",
       {{"lower", c.config_space.lower}, {"upper", c.config_space.upper}}},
      {"region", {{"center", c.region.center}, {"radius", c.region.radius}}},
      {"env",
       {{"dt", c.env.dt},
        {"horizon", c.env.horizon},
        {"reset_noise", c.env.reset_noise}}},
      {"seed", c.seed},
      {"eval_seeds", c.eval_seeds},
      {"demos",
       {{"experts", c.demos.experts},
        {"trajectories", c.demos.trajectories}}},
      {"representation",
       {{"random_robots", c.representation.random_robots},
        {"steps_per_robot", c.representation.steps_per_robot},
        {"include_expert_demos", c.representation.include_expert_demos},
        {"state_latent_dim", c.representation.state_latent_dim},
        {"action_latent_dim", c.representation.action_latent_dim},
        {"weights", WeightsJson(c.representation.weights)},
        {"steps", ro.steps},
        {"batch_size", ro.batch_size},
        {"learning_rate", ro.learning_rate},
        {"hidden", ro.hidden},
        {"mine",
         {{"hidden", ro.mine.hidden},
          {"learning_rate", ro.mine.learning_rate},
          {"ema_decay", ro.mine.ema_decay},
          {"updates_per_step", ro.mine_updates}}}}},
      {"ppo", ToJson(c.ppo)},
      {"expert",
       {{"obs_mode", ToString(c.expert.obs_mode)},
        {"max_iterations", c.expert.max_iterations},
        {"eval_every", c.expert.eval_every},
        {"eval_episodes", c.expert.eval_episodes},
        {"target_fraction", c.expert.target_fraction}}},
      {"imitation",
       {{"iterations", c.imitation.iterations},
        {"disc_hidden", c.imitation.disc_hidden},
        {"disc_learning_rate", c.imitation.disc_learning_rate},
        {"disc_batch_size", c.imitation.disc_batch_size},
        {"eval_episodes", c.imitation.eval_episodes}}},
      {"evaluation",
       {{"n_interpolation", c.evaluation.n_interpolation},
        {"n_extrapolation", c.evaluation.n_extrapolation},
        {"algorithms", algorithms},
        {"angle_control", c.evaluation.angle_control},
        {"ablation", c.evaluation.ablation},
        {"reference_episodes", c.evaluation.reference_episodes},
        {"coupling",
         {{"robots", c.evaluation.coupling.robots},
          {"steps_per_robot", c.evaluation.coupling.steps_per_robot},
          {"anchors", c.evaluation.coupling.anchors},
          {"within_region", c.evaluation.coupling.within_region}}}}},
      {"output_dir", c.output_dir}};
}

ExperimentConfig ExperimentConfigFromJson(const nlohmann::json& user) {
  if (!user.is_object()) {
    throw std::invalid_argument("experiment config must be a JSON object");
  }
  ExperimentConfig defaults;
  if (user.contains("family")) {
    defaults.family = ParseFamily(user.at("family").get<std::string>());
  }
  defaults.config_space = DefaultConfigSpace(defaults.family);
  if (user.contains("config_space")) {
    const auto& s = user.at("config_space");
    defaults.config_space.lower =
        s.value("lower", defaults.config_space.lower);
    defaults.config_space.upper =
        s.value("upper", defaults.config_space.upper);
  }
  defaults.region = DefaultRegion(defaults.config_space);

  nlohmann::json tree = ToJson(defaults);
  CheckKnownKeys(user, tree, "");
  tree.merge_patch(user);

  ExperimentConfig c;
  try {
    c.schema_version = tree.at("schema_version").get<int>();
    c.family = ParseFamily(tree.at("family").get<std::string>());
    c.obs_mode = ParseObsMode(tree.at("obs_mode").get<std::string>());
    c.config_space.lower = Get<std::vector<double>>(tree.at("config_space"),
                                                    "lower", "config_space");
    c.config_space.upper = Get<std::vector<double>>(tree.at("config_space"),
                                                    "upper", "config_space");
    c.region.center =
        Get<std::vector<double>>(tree.at("region"), "center", "region");
    c.region.radius = Get<double>(tree.at("region"), "radius", "region");
    const auto& env = tree.at("env");
    c.env.dt = Get<double>(env, "dt", "env");
    c.env.horizon = Get<int>(env, "horizon", "env");
    c.env.reset_noise = Get<double>(env, "reset_noise", "env");
    c.seed = tree.at("seed").get<uint64_t>();
    c.eval_seeds = tree.at("eval_seeds").get<std::vector<uint64_t>>();
    c.demos.experts = Get<int>(tree.at("demos"), "experts", "demos");
    c.demos.trajectories = Get<int>(tree.at("demos"), "trajectories", "demos");

    const auto& r = tree.at("representation");
    const std::string rp = "representation";
    c.representation.random_robots = Get<int>(r, "random_robots", rp);
    c.representation.steps_per_robot = Get<int>(r, "steps_per_robot", rp);
    c.representation.include_expert_demos =
        Get<bool>(r, "include_expert_demos", rp);
    c.representation.state_latent_dim = Get<int>(r, "state_latent_dim", rp);
    c.representation.action_latent_dim = Get<int>(r, "action_latent_dim", rp);
    const auto& w = r.at("weights");
    c.representation.weights = {Get<double>(w, "disentangle", rp + ".weights"),
                                Get<double>(w, "dynamics", rp + ".weights"),
                                Get<double>(w, "prior_kl", rp + ".weights")};
    ReprOptions& ro = c.representation.options;
    ro.steps = Get<int>(r, "steps", rp);
    ro.batch_size = Get<int>(r, "batch_size", rp);
    ro.learning_rate = Get<double>(r, "learning_rate", rp);
    ro.hidden = Get<std::vector<int>>(r, "hidden", rp);
    const auto& m = r.at("mine");
    ro.mine.hidden = Get<std::vector<int>>(m, "hidden", rp + ".mine");
    ro.mine.learning_rate = Get<double>(m, "learning_rate", rp + ".mine");
    ro.mine.ema_decay = Get<double>(m, "ema_decay", rp + ".mine");
    ro.mine_updates = Get<int>(m, "updates_per_step", rp + ".mine");

    c.ppo = PpoConfigFromJson(tree.at("ppo"));

    const auto& e = tree.at("expert");
    c.expert.obs_mode = ParseObsMode(Get<std::string>(e, "obs_mode", "expert"));
    c.expert.max_iterations = Get<int>(e, "max_iterations", "expert");
    c.expert.eval_every = Get<int>(e, "eval_every", "expert");
    c.expert.eval_episodes = Get<int>(e, "eval_episodes", "expert");
    c.expert.target_fraction = Get<double>(e, "target_fraction", "expert");

    const auto& im = tree.at("imitation");
    c.imitation.iterations = Get<int>(im, "iterations", "imitation");
    c.imitation.disc_hidden =
        Get<std::vector<int>>(im, "disc_hidden", "imitation");
    c.imitation.disc_learning_rate =
        Get<double>(im, "disc_learning_rate", "imitation");
    c.imitation.disc_batch_size = Get<int>(im, "disc_batch_size", "imitation");
    c.imitation.eval_episodes = Get<int>(im, "eval_episodes", "imitation");

    const auto& ev = tree.at("evaluation");
    c.evaluation.n_interpolation = Get<int>(ev, "n_interpolation", "evaluation");
    c.evaluation.n_extrapolation = Get<int>(ev, "n_extrapolation", "evaluation");
    c.evaluation.algorithms.clear();
    for (const auto& a :
         Get<std::vector<std::string>>(ev, "algorithms", "evaluation")) {
      c.evaluation.algorithms.push_back(ParseAlgorithm(a));
    }
    c.evaluation.angle_control = Get<bool>(ev, "angle_control", "evaluation");
    c.evaluation.ablation = Get<bool>(ev, "ablation", "evaluation");
    c.evaluation.reference_episodes =
        Get<int>(ev, "reference_episodes", "evaluation");
    const auto& cp = ev.at("coupling");
    c.evaluation.coupling.robots = Get<int>(cp, "robots", "evaluation.coupling");
    c.evaluation.coupling.steps_per_robot =
        Get<int>(cp, "steps_per_robot", "evaluation.coupling");
    c.evaluation.coupling.anchors =
        Get<int>(cp, "anchors", "evaluation.coupling");
    c.evaluation.coupling.within_region =
        Get<bool>(cp, "within_region", "evaluation.coupling");
    c.output_dir = tree.at("output_dir").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("malformed config: ") + e.what());
  }
  c.Validate();
  return c;
}

ExperimentConfig LoadExperimentConfig(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument("config " + path.string() +
                                " is not valid JSON: " + e.what());
  }
  return ExperimentConfigFromJson(j);
}

void ApplyOverride(nlohmann::json& tree, const std::string& assignment) {
  const size_t eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw std::invalid_argument("override '" + assignment +
                                "' must have the form key.path=value");
  }
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  nlohmann::json value;
  try {
    value = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error&) {
    value = text;
  }
  nlohmann::json* node = &tree;
  size_t start = 0;
  while (true) {
    const size_t dot = key.find('.', start);
    const std::string part = key.substr(start, dot - start);
    if (!node->is_object() || !node->contains(part)) {
      throw std::invalid_argument("unknown config field '" + key + "'");
    }
    node = &(*node)[part];
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  if (node->is_object()) {
    throw std::invalid_argument("override '" + key +
                                "' names a section, not a field");
  }
  *node = value;
}

uint64_t Fnv1a(std::string_view bytes) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char b : bytes) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string HexDigest(uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(value));
  return buf;
}

std::string ConfigHash(const ExperimentConfig& config) {
  // Where artifacts land does not change what they contain.
  nlohmann::json j = ToJson(config);
  j.erase("output_dir");
  return HexDigest(Fnv1a(j.dump()));
}

}  // namespace irgail
