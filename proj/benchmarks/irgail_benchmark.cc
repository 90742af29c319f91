#include <cstdint>
#include <vector>

#include <benchmark/benchmark.h>

#include "irgail/gail.h"
#include "irgail/invariant_repr.h"
#include "irgail/mine.h"
#include "irgail/mlp.h"
#include "irgail/ppo.h"
#include "irgail/robot_family.h"

namespace irgail {
namespace {

Matrix Gaussian(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.Normal();
  return m;
}

void BM_MlpForward(benchmark::State& state) {
  const auto batch = static_cast<Eigen::Index>(state.range(0));
  Rng rng(1);
  Mlp net({10, 64, 64, 16}, Activation::kTanh);
  net.InitRandom(rng);
  const Matrix x = Gaussian(batch, 10, rng);
  for (auto _ : state) benchmark::DoNotOptimize(net.Forward(x));
  state.SetItemsProcessed(state.iterations() * batch);
}
BENCHMARK(BM_MlpForward)->Arg(1)->Arg(64)->Arg(256);

void BM_MlpForwardBackward(benchmark::State& state) {
  const auto batch = static_cast<Eigen::Index>(state.range(0));
  Rng rng(2);
  Mlp net({10, 64, 64, 16}, Activation::kTanh);
  net.InitRandom(rng);
  const Matrix x = Gaussian(batch, 10, rng);
  std::vector<double> grad(net.num_params());
  for (auto _ : state) {
    Tape tape;
    Var y = net.Forward(tape, tape.Constant(x), grad);
    tape.Backward(tape.Mean(tape.Square(y)));
    benchmark::DoNotOptimize(grad.data());
  }
  state.SetItemsProcessed(state.iterations() * batch);
}
BENCHMARK(BM_MlpForwardBackward)->Arg(64)->Arg(256);

void BM_EnvStep(benchmark::State& state) {
  const auto family = static_cast<Family>(state.range(0));
  const RobotEnv env(SampleConfig(family, ObsMode::kKeypoint,
                                  DefaultConfigSpace(family), std::nullopt,
                                  std::nullopt, 3));
  EnvState s = env.Reset(4);
  const std::vector<double> action(env.action_dim(), 0.1);
  for (auto _ : state) {
    StepOutcome out = env.Step(s, action);
    s = out.done() ? env.Reset(5) : out.state;
    benchmark::DoNotOptimize(env.Observe(s));
  }
  state.SetLabel(ToString(family));
}
BENCHMARK(BM_EnvStep)
    ->Arg(static_cast<int>(Family::kPendulum))
    ->Arg(static_cast<int>(Family::kCartPole))
    ->Arg(static_cast<int>(Family::kTwoLinkArm));

void BM_Gae(benchmark::State& state) {
  const auto n = static_cast<size_t>(state.range(0));
  Rng rng(6);
  std::vector<double> r(n), v(n);
  std::vector<uint8_t> d(n, 0);
  for (size_t i = 0; i < n; ++i) {
    r[i] = rng.Normal();
    v[i] = rng.Normal();
    d[i] = i % 200 == 199;
  }
  for (auto _ : state) benchmark::DoNotOptimize(GaeAdvantages(r, v, d, 0.99, 0.95));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(n));
}
BENCHMARK(BM_Gae)->Arg(2048);

void BM_MineUpdate(benchmark::State& state) {
  Rng rng(7);
  MineNetwork mine(MineTarget::kStateLatent, 8, 2, {}, rng);
  const MiBatch batch = MakeMiBatch(Gaussian(256, 8, rng), Gaussian(256, 2, rng), rng);
  for (auto _ : state) mine.Update(batch);
}
BENCHMARK(BM_MineUpdate);

// One objective evaluation and backward pass at the default pendulum sizes.
void BM_ReprLossStep(benchmark::State& state) {
  const Eigen::Index rows = 256;
  Rng rng(8);
  InvariantRepresentation repr(ReprDims{4, 1, 2, 8, 4}, LossWeights{}, ReprOptions{}, rng);
  const ReprBatch batch{Gaussian(rows, 4, rng), Gaussian(rows, 1, rng),
                        Gaussian(rows, 4, rng), Gaussian(rows, 2, rng)};
  const ReprNoise noise = ReprNoise::Sample(rows, repr.dims(), rng);
  const auto perm = rng.Permutation(static_cast<size_t>(rows));
  ReprGradients grads(repr);
  for (auto _ : state) {
    grads.Zero();
    Tape tape;
    ReprGraph g = BuildReprLoss(tape, repr, batch, noise, perm, &grads);
    tape.Backward(g.total);
    benchmark::DoNotOptimize(g.total.scalar());
  }
}
BENCHMARK(BM_ReprLossStep);

void BM_DiscriminatorEpoch(benchmark::State& state) {
  Rng rng(9);
  Discriminator disc(12, {64, 64}, 3e-4, rng);
  const Matrix expert = Gaussian(2048, 12, rng);
  const Matrix agent = Gaussian(2048, 12, rng);
  for (auto _ : state) benchmark::DoNotOptimize(disc.UpdateEpoch(expert, agent, 256, rng));
}
BENCHMARK(BM_DiscriminatorEpoch);

}  // namespace
}  // namespace irgail

BENCHMARK_MAIN();
