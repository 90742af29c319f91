#include "irgail/tape.h"

#include <functional>
#include <stdexcept>

#include <gtest/gtest.h>

#include "test_util.h"

namespace irgail {
namespace {

using testing::NumericGradient;
using testing::RandomMatrix;
using testing::RelativeError;
using testing::Span;

using UnaryBuilder = std::function<Var(Tape&, Var)>;

// Contracts op(x) against a fixed random matrix so every output entry
// matters, then compares dL/dx with finite differences.
double UnaryGradientError(const UnaryBuilder& op, Matrix x, uint64_t seed) {
  Rng rng(seed);
  Matrix probe;
  {
    Tape t;
    Var y = op(t, t.Constant(x));
    probe = RandomMatrix(y.rows(), y.cols(), rng);
  }
  auto loss = [&](Tape& t, Var xv) {
    return t.Mean(t.MulConst(op(t, xv), probe));
  };
  Tape tape;
  Var xv = tape.Variable(x);
  tape.Backward(loss(tape, xv));
  Matrix analytic = xv.grad();
  auto numeric = NumericGradient(Span(x), [&] {
    Tape t;
    return loss(t, t.Constant(x)).scalar();
  });
  return RelativeError({analytic.data(), static_cast<size_t>(analytic.size())},
                       numeric);
}

TEST(TapeTest, SquaredNormGradientIsTwiceTheInput) {
  Tape tape;
  Matrix p(1, 2);
  p << 1.0, 2.0;
  Var v = tape.Variable(p);
  // sum of squares = 2 * mean of squares over two entries.
  tape.Backward(tape.Scale(tape.Mean(tape.Square(v)), 2.0));
  EXPECT_DOUBLE_EQ(v.grad()(0, 0), 2.0);
  EXPECT_DOUBLE_EQ(v.grad()(0, 1), 4.0);
}

TEST(TapeTest, ConstantLossHasZeroGradient) {
  Tape tape;
  Var v = tape.Variable(Matrix::Ones(2, 3));
  Var c = tape.Constant(Matrix::Constant(2, 3, 4.0));
  Var loss = tape.Mean(tape.Add(tape.Scale(v, 0.0), c));
  tape.Backward(loss);
  EXPECT_EQ(v.grad().norm(), 0.0);
}

TEST(TapeTest, NonScalarLossIsRejected) {
  Tape tape;
  Var v = tape.Variable(Matrix::Ones(2, 2));
  EXPECT_THROW(tape.Backward(tape.Tanh(v)), std::invalid_argument);
}

TEST(TapeTest, ShapeMismatchIsRejected) {
  Tape tape;
  Var a = tape.Variable(Matrix::Ones(2, 2));
  Var b = tape.Variable(Matrix::Ones(2, 3));
  EXPECT_THROW(tape.Add(a, b), std::invalid_argument);
}

TEST(TapeTest, ElementwiseOpsMatchFiniteDifferences) {
  Rng rng(1);
  Matrix x = RandomMatrix(5, 3, rng);
  // Keep relu and clamp inputs away from their kinks.
  Matrix kinkless = x;
  for (Eigen::Index i = 0; i < kinkless.size(); ++i) {
    double& v = kinkless.data()[i];
    if (std::abs(v) < 0.05) v += 0.1;
  }
  Matrix positive = x.array().abs() + 0.5;

  struct Case {
    const char* name;
    UnaryBuilder op;
    Matrix input;
  };
  std::vector<Case> cases = {
      {"tanh", [](Tape& t, Var v) { return t.Tanh(v); }, x},
      {"relu", [](Tape& t, Var v) { return t.Relu(v); }, kinkless},
      {"exp", [](Tape& t, Var v) { return t.Exp(v); }, x},
      {"log", [](Tape& t, Var v) { return t.Log(v); }, positive},
      {"square", [](Tape& t, Var v) { return t.Square(v); }, x},
      {"softplus", [](Tape& t, Var v) { return t.Softplus(v); }, x},
      {"clamp", [](Tape& t, Var v) { return t.Clamp(v, -0.5, 0.5); },
       kinkless},
      {"scale", [](Tape& t, Var v) { return t.Scale(v, -1.7); }, x},
      {"shift", [](Tape& t, Var v) { return t.Shift(v, 0.3); }, x},
      {"mean", [](Tape& t, Var v) { return t.Mean(v); }, x},
      {"sum_cols", [](Tape& t, Var v) { return t.SumCols(v); }, x},
      {"log_mean_exp", [](Tape& t, Var v) { return t.LogMeanExp(v); }, x},
      {"slice", [](Tape& t, Var v) { return t.SliceCols(v, 1, 2); }, x},
      {"self_mul", [](Tape& t, Var v) { return t.Mul(v, t.Tanh(v)); }, x},
      {"self_sub", [](Tape& t, Var v) { return t.Sub(t.Exp(v), v); }, x},
      {"concat",
       [](Tape& t, Var v) { return t.ConcatCols(t.Tanh(v), t.Square(v)); },
       x},
      {"operators",
       [](Tape& t, Var v) { return -(2.0 * v) * v + v * 0.5 - v; }, x},
  };
  for (const auto& c : cases) {
    EXPECT_LT(UnaryGradientError(c.op, c.input, 7), 1e-4) << c.name;
  }
}

TEST(TapeTest, MulConstMatchesFiniteDifferences) {
  Rng rng(2);
  Matrix factor = RandomMatrix(4, 2, rng);
  EXPECT_LT(UnaryGradientError(
                [&](Tape& t, Var v) { return t.MulConst(v, factor); },
                RandomMatrix(4, 2, rng), 3),
            1e-4);
}

TEST(TapeTest, LogMeanExpIsStableForLargeInputs) {
  Tape tape;
  Matrix x(1, 3);
  x << 1000.0, 1000.0, 1000.0;
  EXPECT_NEAR(tape.LogMeanExp(tape.Constant(x)).scalar(), 1000.0, 1e-9);
}

TEST(TapeTest, ClampBlocksGradientOutsideRange) {
  Tape tape;
  Matrix x(1, 3);
  x << -2.0, 0.0, 2.0;
  Var v = tape.Variable(x);
  tape.Backward(tape.Mean(tape.Clamp(v, -1.0, 1.0)));
  EXPECT_EQ(v.grad()(0, 0), 0.0);
  EXPECT_NEAR(v.grad()(0, 1), 1.0 / 3.0, 1e-15);
  EXPECT_EQ(v.grad()(0, 2), 0.0);
}

TEST(TapeTest, AffineGradientsMatchFiniteDifferences) {
  Rng rng(4);
  const int in = 3, out = 2;
  std::vector<double> w(in * out), b(out);
  for (auto& v : w) v = rng.Normal();
  for (auto& v : b) v = rng.Normal();
  Matrix x = RandomMatrix(6, in, rng);
  Matrix probe = RandomMatrix(6, out, rng);
  auto build = [&](Tape& t, Var xv, std::span<double> gw,
                   std::span<double> gb) {
    Var y = t.Affine(xv, {w, gw}, {b, gb}, in, out);
    return t.Mean(t.MulConst(t.Tanh(y), probe));
  };
  std::vector<double> gw(w.size(), 0.0), gb(b.size(), 0.0);
  Tape tape;
  Var xv = tape.Variable(x);
  tape.Backward(build(tape, xv, gw, gb));
  auto value = [&] {
    Tape t;
    return build(t, t.Constant(x), {}, {}).scalar();
  };
  EXPECT_LT(RelativeError(gw, NumericGradient(w, value)), 1e-4);
  EXPECT_LT(RelativeError(gb, NumericGradient(b, value)), 1e-4);
  Matrix gx = xv.grad();
  EXPECT_LT(RelativeError({gx.data(), static_cast<size_t>(gx.size())},
                          NumericGradient(Span(x), value)),
            1e-4);
}

TEST(TapeTest, AffineComputesRowMajorProduct) {
  // W = [[1, 2], [3, 4], [5, 6]] (out=3, in=2), b = (1, 0, -1).
  std::vector<double> w = {1, 2, 3, 4, 5, 6};
  std::vector<double> b = {1, 0, -1};
  Tape tape;
  Matrix x(1, 2);
  x << 1.0, -1.0;
  Var y = tape.Affine(tape.Constant(x), {w, {}}, {b, {}}, 2, 3);
  EXPECT_DOUBLE_EQ(y.value()(0, 0), 0.0);
  EXPECT_DOUBLE_EQ(y.value()(0, 1), -1.0);
  EXPECT_DOUBLE_EQ(y.value()(0, 2), -2.0);
}

TEST(TapeTest, RowParameterAccumulatesOverRows) {
  std::vector<double> row = {0.5, -1.0};
  std::vector<double> grad(2, 0.0);
  Tape tape;
  Var r = tape.RowParameter({row, grad}, 4);
  ASSERT_EQ(r.rows(), 4);
  tape.Backward(tape.Mean(r));
  // d mean / d row_j = rows / (rows * cols) = 1/2.
  EXPECT_DOUBLE_EQ(grad[0], 0.5);
  EXPECT_DOUBLE_EQ(grad[1], 0.5);
}

TEST(TapeTest, FrozenParametersReceiveNoGradient) {
  std::vector<double> w = {1.0, 2.0}, b = {0.0};
  Tape tape;
  Var x = tape.Variable(Matrix::Ones(3, 2));
  tape.Backward(tape.Mean(tape.Affine(x, {w, {}}, {b, {}}, 2, 1)));
  EXPECT_DOUBLE_EQ(x.grad()(0, 0), 1.0 / 3.0);
}

TEST(TapeTest, BackwardIsDeterministic) {
  Rng rng(9);
  Matrix x = RandomMatrix(4, 4, rng);
  auto run = [&] {
    Tape t;
    Var v = t.Variable(x);
    t.Backward(t.LogMeanExp(t.Mul(t.Tanh(v), t.Softplus(v))));
    return v.grad();
  };
  EXPECT_EQ(run(), run());
}

}  // namespace
}  // namespace irgail
