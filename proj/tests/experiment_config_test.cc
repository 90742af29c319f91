#include "irgail/experiment_config.h"

#include <fstream>
#include <stdexcept>

#include <gtest/gtest.h>

#include "test_util.h"

namespace irgail {
namespace {

using nlohmann::json;
using testing::TempDir;

TEST(ExperimentConfigTest, DefaultsForMinimalFile) {
  auto c = ExperimentConfigFromJson(json{{"family", "pendulum"}});
  EXPECT_EQ(c.family, Family::kPendulum);
  EXPECT_EQ(c.obs_mode, ObsMode::kKeypoint);
  EXPECT_EQ(c.config_space.lower, DefaultConfigSpace(Family::kPendulum).lower);
  EXPECT_EQ(c.representation.random_robots, 16);
  EXPECT_EQ(c.representation.state_latent_dim, 8);
  EXPECT_EQ(c.representation.action_latent_dim, 4);
  EXPECT_DOUBLE_EQ(c.representation.weights.disentangle, 0.1);
  EXPECT_DOUBLE_EQ(c.representation.weights.dynamics, 1.0);
  EXPECT_DOUBLE_EQ(c.representation.weights.prior_kl, 1e-3);
  EXPECT_EQ(c.representation.options.batch_size, 256);
  EXPECT_EQ(c.representation.options.steps, 20000);
  EXPECT_EQ(c.representation.options.mine_updates, 1);
  EXPECT_TRUE(c.evaluation.coupling.within_region);
  EXPECT_EQ(c.demos.trajectories, 32);
  EXPECT_EQ(c.eval_seeds.size(), 3u);
  EXPECT_TRUE(c.region.InsideOf(c.config_space, true));
}

TEST(ExperimentConfigTest, DefaultRegionIsCenteredAndInside) {
  for (Family f : {Family::kPendulum, Family::kCartPole, Family::kTwoLinkArm}) {
    auto space = DefaultConfigSpace(f);
    auto ball = DefaultRegion(space);
    for (size_t i = 0; i < space.dim(); ++i) {
      EXPECT_DOUBLE_EQ(ball.center[i], 0.5 * (space.lower[i] + space.upper[i]));
    }
    EXPECT_TRUE(ball.InsideOf(space, true));
  }
}

TEST(ExperimentConfigTest, JsonRoundTripIsStable) {
  auto c = ExperimentConfigFromJson(json{{"family", "two_link_arm"}, {"seed", 9}});
  auto j = ToJson(c);
  EXPECT_EQ(ToJson(ExperimentConfigFromJson(j)), j);
  EXPECT_EQ(ConfigHash(ExperimentConfigFromJson(j)), ConfigHash(c));
}

TEST(ExperimentConfigTest, UnknownKeysAreRejected) {
  EXPECT_THROW(ExperimentConfigFromJson(json{{"family", "pendulum"}, {"sed", 1}}),
               std::invalid_argument);
  EXPECT_THROW(ExperimentConfigFromJson(
                   json{{"family", "pendulum"}, {"ppo", {{"gama", 0.9}}}}),
               std::invalid_argument);
}

TEST(ExperimentConfigTest, InvalidValuesAreRejected) {
  EXPECT_ANY_THROW(ExperimentConfigFromJson(json{{"family", "hopper"}}));
  EXPECT_THROW(ExperimentConfigFromJson(json{
                   {"family", "pendulum"},
                   {"representation", {{"weights", {{"dynamics", -1.0}}}}}}),
               std::invalid_argument);
  EXPECT_THROW(ExperimentConfigFromJson(
                   json{{"family", "pendulum"},
                        {"region", {{"center", {0.75, 1.25}}, {"radius", 0.5}}}}),
               std::invalid_argument);
  EXPECT_THROW(ExperimentConfigFromJson(json{
                   {"family", "pendulum"},
                   {"representation", {{"mine", {{"updates_per_step", 0}}}}}}),
               std::invalid_argument);
}

TEST(ExperimentConfigTest, OverridesChangeExistingScalars) {
  auto tree = ToJson(ExperimentConfigFromJson(json{{"family", "pendulum"}}));
  ApplyOverride(tree, "representation.weights.dynamics=0");
  ApplyOverride(tree, "ppo.steps_per_iteration=512");
  ApplyOverride(tree, "obs_mode=angle");
  auto c = ExperimentConfigFromJson(tree);
  EXPECT_EQ(c.representation.weights.dynamics, 0.0);
  EXPECT_EQ(c.ppo.steps_per_iteration, 512);
  EXPECT_EQ(c.obs_mode, ObsMode::kAngle);
  EXPECT_THROW(ApplyOverride(tree, "ppo.nonexistent=1"), std::invalid_argument);
  EXPECT_THROW(ApplyOverride(tree, "no_equals_sign"), std::invalid_argument);
  EXPECT_THROW(ApplyOverride(tree, "ppo=3"), std::invalid_argument);
}

TEST(ExperimentConfigTest, HashIgnoresOutputDirButNotSettings) {
  auto a = ExperimentConfigFromJson(json{{"family", "pendulum"}, {"output_dir", "x"}});
  auto b = ExperimentConfigFromJson(json{{"family", "pendulum"}, {"output_dir", "y"}});
  auto c = ExperimentConfigFromJson(json{{"family", "pendulum"}, {"seed", 1}});
  EXPECT_EQ(ConfigHash(a), ConfigHash(b));
  EXPECT_NE(ConfigHash(a), ConfigHash(c));
  EXPECT_EQ(ConfigHash(a).size(), 16u);
}

TEST(ExperimentConfigTest, DerivedOptions) {
  auto c = ExperimentConfigFromJson(json{{"family", "pendulum"}});
  auto expert = c.MakeExpertOptions();
  ASSERT_TRUE(expert.target_return.has_value());
  EXPECT_DOUBLE_EQ(*expert.target_return, 0.95 * 200.0);
  auto dims = c.MakeReprDims();
  EXPECT_EQ(dims.obs_dim, 4);
  EXPECT_EQ(dims.action_dim, 1);
  EXPECT_EQ(dims.config_dim, 2);
  auto arm = ExperimentConfigFromJson(json{{"family", "two_link_arm"}});
  EXPECT_FALSE(arm.MakeExpertOptions().target_return.has_value());
  EXPECT_EQ(arm.MakeReprDims().obs_dim, 8);
}

TEST(ExperimentConfigTest, LoadsFromFile) {
  auto dir = TempDir("config_load");
  std::ofstream(dir / "c.json") << R"({"family": "cartpole", "seed": 4})";
  auto c = LoadExperimentConfig(dir / "c.json");
  EXPECT_EQ(c.family, Family::kCartPole);
  EXPECT_EQ(c.seed, 4u);
  std::ofstream(dir / "bad.json") << "{ not json";
  EXPECT_ANY_THROW(LoadExperimentConfig(dir / "bad.json"));
  EXPECT_ANY_THROW(LoadExperimentConfig(dir / "missing.json"));
}

TEST(HashTest, Fnv1aKnownValues) {
  EXPECT_EQ(Fnv1a(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(Fnv1a("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(HexDigest(0xabcULL), "0000000000000abc");
}

}  // namespace
}  // namespace irgail
