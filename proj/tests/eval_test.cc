#include "irgail/eval.h"

#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <stdexcept>

#include <gtest/gtest.h>

#include "test_util.h"

namespace irgail {
namespace {

using testing::RandomMatrix;
using testing::TempDir;

TEST(NormalizedReturnTest, Examples) {
  EXPECT_DOUBLE_EQ(NormalizedReturn(200.0, 200.0, 20.0), 1.0);
  EXPECT_DOUBLE_EQ(NormalizedReturn(20.0, 200.0, 20.0), 0.0);
  EXPECT_DOUBLE_EQ(NormalizedReturn(110.0, 200.0, 20.0), 0.5);
  EXPECT_THROW(NormalizedReturn(1.0, 5.0, 5.0), std::invalid_argument);
  EXPECT_THROW(NormalizedReturn(1.0, 4.0, 5.0), std::invalid_argument);
}

TEST(NormalizedReturnTest, InvariantToAffineRewardChanges) {
  Rng rng(1);
  for (int i = 0; i < 50; ++i) {
    const double random = rng.Uniform(-100, 0), expert = rng.Uniform(1, 100);
    const double raw = rng.Uniform(-150, 150);
    const double a = rng.Uniform(0.1, 10), b = rng.Uniform(-50, 50);
    EXPECT_NEAR(NormalizedReturn(a * raw + b, a * expert + b, a * random + b),
                NormalizedReturn(raw, expert, random), 1e-9);
  }
}

TEST(SplitsTest, InterpolationInsideExtrapolationOutside) {
  const auto space = DefaultConfigSpace(Family::kPendulum);
  const BallRegion ball{{2.875, 1.25}, 0.45};
  auto s = MakeSplits(Family::kPendulum, ObsMode::kKeypoint, space, ball, 6, 6, 3);
  ASSERT_EQ(s.interpolation.size(), 6u);
  ASSERT_EQ(s.extrapolation.size(), 6u);
  for (const auto& c : s.interpolation) EXPECT_TRUE(ball.Contains(c.params));
  for (const auto& c : s.extrapolation) {
    EXPECT_FALSE(ball.Contains(c.params));
    EXPECT_TRUE(space.Contains(c.params));
  }
  auto again = MakeSplits(Family::kPendulum, ObsMode::kKeypoint, space, ball, 6, 6, 3);
  EXPECT_EQ(again.interpolation, s.interpolation);
  EXPECT_EQ(again.extrapolation, s.extrapolation);
}

TEST(SplitsTest, EmptyAndInvalidRequests) {
  const auto space = DefaultConfigSpace(Family::kPendulum);
  auto s = MakeSplits(Family::kPendulum, ObsMode::kKeypoint, space,
                      BallRegion{{2.875, 1.25}, 0.45}, 0, 2, 1);
  EXPECT_TRUE(s.interpolation.empty());
  EXPECT_EQ(s.extrapolation.size(), 2u);
  // Ball touching the boundary of the space.
  EXPECT_THROW(MakeSplits(Family::kPendulum, ObsMode::kKeypoint, space,
                          BallRegion{{0.75, 1.25}, 0.3}, 1, 1, 1),
               std::invalid_argument);
}

TEST(EvaluateCellTest, AggregatesValidRunsAndMarksFailures) {
  std::vector<RobotConfig> targets = {{Family::kPendulum, {1.0, 1.0}},
                                      {Family::kPendulum, {2.0, 1.0}}};
  std::vector<uint64_t> seeds = {0, 1};
  auto refs = [](const RobotConfig&) { return ReferenceReturns{200.0, 20.0}; };
  auto runner = [](const RobotConfig& c, uint64_t seed) {
    return c.params[0] == 1.0 ? 200.0 : 110.0 + 90.0 * static_cast<double>(seed);
  };
  auto report = EvaluateCell(Family::kPendulum, ObsMode::kKeypoint,
                             SplitMode::kInterpolation, Algorithm::kIrGail,
                             targets, seeds, runner, refs);
  ASSERT_EQ(report.results.size(), 4u);
  EXPECT_TRUE(report.valid());
  // normalized: 1, 1, 0.5, 1
  EXPECT_NEAR(report.mean(), 0.875, 1e-12);
  EXPECT_NEAR(report.std(), std::sqrt((3 * 0.125 * 0.125 + 0.375 * 0.375) / 4), 1e-12);

  auto failing = [](const RobotConfig& c, uint64_t) -> double {
    if (c.params[0] == 2.0) throw std::runtime_error("diverged");
    return 200.0;
  };
  auto bad = EvaluateCell(Family::kPendulum, ObsMode::kKeypoint,
                          SplitMode::kExtrapolation, Algorithm::kGail, targets,
                          seeds, failing, refs);
  EXPECT_FALSE(bad.valid());
  EXPECT_EQ(bad.num_valid(), 2u);
  EXPECT_DOUBLE_EQ(bad.mean(), 1.0);
  EXPECT_NE(bad.results[2].error.find("diverged"), std::string::npos);

  EvalReport empty;
  EXPECT_TRUE(std::isnan(empty.mean()));
  EXPECT_FALSE(empty.valid());
}

TEST(RunTableTest, DeterministicAndCsvWritten) {
  Splits splits = MakeSplits(Family::kPendulum, ObsMode::kKeypoint,
                             DefaultConfigSpace(Family::kPendulum),
                             BallRegion{{2.875, 1.25}, 0.45}, 2, 2, 5);
  std::vector<uint64_t> seeds = {0, 1, 2};
  RunnerFactory factory = [](Algorithm a, ObsMode m) -> ImitationRunner {
    return [a, m](const RobotConfig& c, uint64_t seed) {
      EXPECT_EQ(c.obs_mode, m);
      return 50.0 + 40.0 * static_cast<double>(a) + c.params[0] + static_cast<double>(seed);
    };
  };
  auto refs = [](const RobotConfig&) { return ReferenceReturns{200.0, 20.0}; };
  std::vector<TableCell> cells = {
      {ObsMode::kKeypoint, SplitMode::kInterpolation, Algorithm::kGail},
      {ObsMode::kKeypoint, SplitMode::kExtrapolation, Algorithm::kIrGail},
      {ObsMode::kAngle, SplitMode::kInterpolation, Algorithm::kGail}};
  auto a = RunTable(Family::kPendulum, cells, splits, seeds, factory, refs);
  auto b = RunTable(Family::kPendulum, cells, splits, seeds, factory, refs);
  ASSERT_EQ(a.size(), 3u);
  for (size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].mean(), b[i].mean());
    EXPECT_EQ(a[i].results.size(), 6u);
  }
  EXPECT_EQ(a[2].obs_mode, ObsMode::kAngle);

  auto ablation = RunAblation(Family::kPendulum, ObsMode::kKeypoint, splits, seeds,
                              factory, refs);
  ASSERT_EQ(ablation.size(), 4u);
  EXPECT_EQ(ablation[0].algorithm, Algorithm::kIrGail);
  EXPECT_EQ(ablation[1].algorithm, Algorithm::kIrGailNoDyn);
  EXPECT_EQ(ablation[2].mode, SplitMode::kExtrapolation);

  auto dir = TempDir("report_csv");
  WriteReportCsv(a, dir / "table.csv");
  WriteRunsCsv(a, dir / "runs.csv");
  std::ifstream in(dir / "table.csv");
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "family,obs_mode,mode,algorithm,mean,std,n_valid,n_runs,valid");
  int rows = 0;
  for (std::string l; std::getline(in, l);) ++rows;
  EXPECT_EQ(rows, 3);
}

std::vector<RobotRollout> SharedAngleRollouts(int robots, int states, uint64_t seed) {
  Rng rng(seed);
  Matrix base = RandomMatrix(states, 2, rng, 0.1);
  std::vector<RobotRollout> out;
  for (int r = 0; r < robots; ++r) {
    auto order = rng.Permutation(static_cast<size_t>(states));
    Matrix obs(states, 2);
    for (int i = 0; i < states; ++i) obs.row(i) = base.row(static_cast<Eigen::Index>(order[i]));
    out.push_back({RobotConfig{Family::kPendulum, {1.0 + r, 1.0}, ObsMode::kAngle}, obs});
  }
  return out;
}

TEST(CouplingTest, AnchorRobotCouplesToItself) {
  Rng rng(2);
  std::vector<RobotRollout> rollouts;
  for (int r = 0; r < 4; ++r) {
    rollouts.push_back({RobotConfig{Family::kPendulum, {1.0 + r, 1.0}, ObsMode::kAngle},
                        RandomMatrix(30, 2, rng)});
  }
  IdentityEncoder enc(2, 1);
  auto groups = CoupleStates(enc, rollouts, 25, 3);
  ASSERT_EQ(groups.size(), 25u);
  for (const auto& g : groups) {
    ASSERT_EQ(g.entries.size(), 4u);
    for (const auto& e : g.entries) {
      if (e.robot == g.anchor_robot) {
        EXPECT_EQ(e.state_index, g.anchor_state);
        EXPECT_EQ(e.distance, 0.0);
      }
    }
  }
}

TEST(CouplingTest, PerfectlyInvariantEncoderSharesAnchorAngle) {
  auto rollouts = SharedAngleRollouts(5, 40, 4);
  IdentityEncoder enc(2, 1);
  auto groups = CoupleStates(enc, rollouts, 20, 5);
  for (const auto& g : groups) {
    const double anchor_angle = g.anchor[0];
    for (const auto& e : g.entries) {
      EXPECT_EQ(e.distance, 0.0);
      EXPECT_EQ(rollouts[e.robot].observations(static_cast<Eigen::Index>(e.state_index), 0),
                anchor_angle);
    }
  }
  EXPECT_EQ(GroupAngleDiscrepancy(rollouts, groups), 0.0);
  EXPECT_GT(RandomGroupingDiscrepancy(rollouts, groups, 6), 0.0);
}

TEST(CouplingTest, EmptyRobotsAreSkippedWithWarning) {
  auto rollouts = SharedAngleRollouts(3, 10, 7);
  rollouts[1].observations.resize(0, 2);
  IdentityEncoder enc(2, 1);
  std::vector<std::string> warnings;
  auto groups = CoupleStates(enc, rollouts, 20, 8, &warnings);
  EXPECT_EQ(warnings.size(), 1u);
  for (const auto& g : groups) EXPECT_EQ(g.entries.size(), 2u);
  rollouts[2].observations.resize(0, 2);
  EXPECT_THROW(CoupleStates(enc, rollouts, 20, 8), std::invalid_argument);
}

TEST(CouplingTest, DiscrepancyWrapsAngles) {
  // Two robots whose grouped states sit at +(pi - 0.05) and -(pi - 0.05):
  // 0.1 apart once wrapped.
  const double a = std::numbers::pi - 0.05;
  Matrix r0(1, 2), r1(1, 2);
  r0 << a, 0.0;
  r1 << -a, 0.0;
  std::vector<RobotRollout> rollouts = {
      {RobotConfig{Family::kPendulum, {1.0, 1.0}, ObsMode::kAngle}, r0},
      {RobotConfig{Family::kPendulum, {2.0, 1.0}, ObsMode::kAngle}, r1}};
  CouplingGroup g;
  g.entries = {{0, 0, 0.0}, {1, 0, 0.0}};
  EXPECT_NEAR(GroupAngleDiscrepancy(rollouts, {g}), 0.1, 1e-12);
  auto dir = TempDir("coupling_csv");
  WriteCouplingCsv(rollouts, {g}, dir / "c.csv");
  EXPECT_TRUE(std::filesystem::exists(dir / "c.csv"));
}

}  // namespace
}  // namespace irgail
