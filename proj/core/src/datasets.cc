#include "irgail/datasets.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

namespace irgail {

namespace {

constexpr const char* kSchema = "irgail.trajectories";
constexpr int kSchemaVersion = 1;

using nlohmann::json;

json RecordToJson(const TrajectoryRecord& r) {
  json obs = json::array();
  json actions = json::array();
  json next_obs = json::array();
  json rewards = json::array();
  json dones = json::array();
  for (const auto& t : r.transitions) {
    obs.push_back(t.observation);
    actions.push_back(t.action);
    next_obs.push_back(t.next_observation);
    rewards.push_back(t.reward);
    dones.push_back(t.done);
  }
  return {{"config", r.config.params},
          {"seed", r.seed},
          {"return", r.episode_return},
          {"obs", obs},
          {"actions", actions},
          {"next_obs", next_obs},
          {"rewards", rewards},
          {"dones", dones}};
}

TrajectoryRecord RecordFromJson(const json& j, Family family, ObsMode mode) {
  TrajectoryRecord r;
  r.config = RobotConfig{family, j.at("config").get<std::vector<double>>(),
                         mode};
  r.seed = j.at("seed").get<uint64_t>();
  r.episode_return = j.at("return").get<double>();
  const auto& obs = j.at("obs");
  const auto& actions = j.at("actions");
  const auto& next_obs = j.at("next_obs");
  const auto& rewards = j.at("rewards");
  const auto& dones = j.at("dones");
  const size_t n = obs.size();
  if (actions.size() != n || next_obs.size() != n || rewards.size() != n ||
      dones.size() != n) {
    throw std::runtime_error("episode arrays have unequal lengths");
  }
  r.transitions.resize(n);
  for (size_t i = 0; i < n; ++i) {
    auto& t = r.transitions[i];
    t.observation = obs[i].get<std::vector<double>>();
    t.action = actions[i].get<std::vector<double>>();
    t.next_observation = next_obs[i].get<std::vector<double>>();
    t.reward = rewards[i].get<double>();
    t.done = dones[i].get<bool>();
  }
  return r;
}

// Appends one episode starting from `seed`; stops early after `max_steps`.
TrajectoryRecord RunEpisode(const RobotEnv& env, const Actor& actor,
                            uint64_t seed, int max_steps) {
  TrajectoryRecord record;
  record.config = env.config();
  record.seed = seed;
  Rng rng(DeriveSeed(seed, 1));
  EnvState state = env.Reset(seed);
  std::vector<double> obs = env.Observe(state);
  for (int t = 0; t < max_steps; ++t) {
    std::vector<double> action = actor(env, state, rng);
    for (double& a : action) a = std::clamp(a, -1.0, 1.0);
    StepOutcome out = env.Step(state, action);
    TransitionRecord tr;
    tr.observation = obs;
    tr.action = action;
    tr.next_observation = env.Observe(out.state);
    tr.reward = out.reward;
    tr.done = out.done();
    record.episode_return += out.reward;
    obs = tr.next_observation;
    record.transitions.push_back(std::move(tr));
    state = std::move(out.state);
    if (record.transitions.back().done) break;
  }
  return record;
}

}  // namespace

bool TrajectoryRecord::IsChained() const {
  for (size_t i = 1; i < transitions.size(); ++i) {
    if (transitions[i].observation != transitions[i - 1].next_observation) {
      return false;
    }
  }
  return true;
}

std::vector<RobotConfig> DemoSet::SourceConfigs() const {
  std::vector<RobotConfig> out;
  for (const auto& r : records) {
    if (std::find(out.begin(), out.end(), r.config) == out.end()) {
      out.push_back(r.config);
    }
  }
  return out;
}

size_t DemoSet::num_transitions() const {
  size_t n = 0;
  for (const auto& r : records) n += r.length();
  return n;
}

Actor RandomActor() {
  return [](const RobotEnv& env, const EnvState&, Rng& rng) {
    std::vector<double> a(env.action_dim());
    for (double& v : a) v = rng.Uniform(-1.0, 1.0);
    return a;
  };
}

std::vector<TrajectoryRecord> Collect(const RobotEnv& env, const Actor& actor,
                                      int episodes, uint64_t seed) {
  std::vector<TrajectoryRecord> records;
  records.reserve(static_cast<size_t>(std::max(episodes, 0)));
  for (int e = 0; e < episodes; ++e) {
    records.push_back(RunEpisode(env, actor, DeriveSeed(seed, e),
                                 env.settings().horizon));
  }
  return records;
}

std::vector<TrajectoryRecord> CollectSteps(const RobotEnv& env,
                                           const Actor& actor, int steps,
                                           uint64_t seed) {
  std::vector<TrajectoryRecord> records;
  int remaining = steps;
  for (uint64_t e = 0; remaining > 0; ++e) {
    records.push_back(RunEpisode(env, actor, DeriveSeed(seed, e),
                                 std::min(remaining, env.settings().horizon)));
    remaining -= static_cast<int>(records.back().length());
  }
  return records;
}

void SaveRecords(const std::vector<TrajectoryRecord>& records,
                 const std::filesystem::path& path) {
  json header = {{"schema", kSchema},
                 {"version", kSchemaVersion},
                 {"count", records.size()},
                 {"family", nullptr},
                 {"obs_mode", nullptr},
                 {"config", nullptr}};
  if (!records.empty()) {
    const RobotConfig& first = records.front().config;
    header["family"] = ToString(first.family);
    header["obs_mode"] = ToString(first.obs_mode);
    bool shared = true;
    for (const auto& r : records) {
      if (r.config.family != first.family ||
          r.config.obs_mode != first.obs_mode) {
        throw std::invalid_argument("all records in one file must share "
                                    "family and observation mode");
      }
      shared = shared && r.config.params == first.params;
    }
    if (shared) header["config"] = first.params;
  }
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out << header.dump() << '\n';
  for (const auto& r : records) out << RecordToJson(r).dump() << '\n';
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

std::vector<TrajectoryRecord> LoadRecords(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  const std::string where = path.string() + ": ";

  std::string line;
  if (!std::getline(in, line)) {
    throw std::runtime_error(where + "missing header line");
  }
  json header;
  try {
    header = json::parse(line);
  } catch (const json::exception& e) {
    throw std::runtime_error(where + "malformed header at line 1: " +
                             e.what());
  }
  if (header.value("schema", "") != kSchema) {
    throw std::runtime_error(where + "not a trajectory file (line 1)");
  }
  if (header.value("version", -1) != kSchemaVersion) {
    throw std::runtime_error(where + "schema version " +
                             header.value("version", json(-1)).dump() +
                             " does not match supported version " +
                             std::to_string(kSchemaVersion));
  }
  const size_t count = header.at("count").get<size_t>();
  std::vector<TrajectoryRecord> records;
  if (count == 0) return records;
  const Family family = ParseFamily(header.at("family").get<std::string>());
  const ObsMode mode = ParseObsMode(header.at("obs_mode").get<std::string>());

  size_t line_no = 1;
  while (records.size() < count) {
    if (!std::getline(in, line)) {
      throw std::runtime_error(
          where + "truncated: expected " + std::to_string(count) +
          " episodes, last good line is " + std::to_string(line_no));
    }
    ++line_no;
    try {
      records.push_back(RecordFromJson(json::parse(line), family, mode));
    } catch (const std::exception& e) {
      throw std::runtime_error(where + "malformed episode at line " +
                               std::to_string(line_no) + " (last good line " +
                               std::to_string(line_no - 1) + "): " + e.what());
    }
  }
  return records;
}

DatasetStats ComputeDatasetStats(const std::vector<TrajectoryRecord>& records) {
  DatasetStats stats;
  stats.num_records = records.size();
  // Welford, one pass over observations and actions.
  std::vector<double> obs_m2;
  std::vector<double> act_m2;
  size_t n = 0;
  for (const auto& r : records) {
    for (const auto& t : r.transitions) {
      if (n == 0) {
        stats.obs_mean.assign(t.observation.size(), 0.0);
        obs_m2.assign(t.observation.size(), 0.0);
        stats.action_mean.assign(t.action.size(), 0.0);
        act_m2.assign(t.action.size(), 0.0);
      }
      ++n;
      auto update = [n](std::vector<double>& mean, std::vector<double>& m2,
                        const std::vector<double>& x) {
        if (x.size() != mean.size()) {
          throw std::invalid_argument("inconsistent dimensions in dataset");
        }
        for (size_t i = 0; i < x.size(); ++i) {
          const double delta = x[i] - mean[i];
          mean[i] += delta / static_cast<double>(n);
          m2[i] += delta * (x[i] - mean[i]);
        }
      };
      update(stats.obs_mean, obs_m2, t.observation);
      update(stats.action_mean, act_m2, t.action);
    }
  }
  stats.num_transitions = n;
  auto finish = [n](const std::vector<double>& m2) {
    std::vector<double> sd(m2.size());
    for (size_t i = 0; i < m2.size(); ++i) {
      sd[i] = std::max(std::sqrt(m2[i] / static_cast<double>(n)), kStdFloor);
    }
    return sd;
  };
  stats.obs_std = finish(obs_m2);
  stats.action_std = finish(act_m2);
  return stats;
}

}  // namespace irgail
