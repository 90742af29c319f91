#include "irgail/optimizer.h"

#include <cmath>
#include <limits>
#include <stdexcept>

#include <gtest/gtest.h>

#include "irgail/errors.h"

namespace irgail {
namespace {

TEST(AdamTest, ZeroGradientLeavesParametersUnchanged) {
  Adam adam(3, {});
  std::vector<double> p = {1.0, -2.0, 3.0};
  adam.Step(p, std::vector<double>(3, 0.0));
  EXPECT_EQ(p, (std::vector<double>{1.0, -2.0, 3.0}));
  EXPECT_EQ(adam.step_count(), 1);
}

// Fresh state: m = (1-b1) g, v = (1-b2) g^2; after bias correction the step
// is lr * g / (|g| + eps) = lr for g = 1.
TEST(AdamTest, FirstStepMovesByLearningRate) {
  AdamOptions o;
  o.learning_rate = 0.1;
  Adam adam(1, o);
  std::vector<double> p = {0.0};
  adam.Step(p, std::vector<double>{1.0});
  EXPECT_NEAR(p[0], -0.1 / (1.0 + 1e-8), 1e-15);
}

TEST(AdamTest, SecondStepMatchesHandEvaluation) {
  AdamOptions o;
  o.learning_rate = 0.05;
  Adam adam(1, o);
  std::vector<double> p = {1.0};
  adam.Step(p, std::vector<double>{2.0});
  adam.Step(p, std::vector<double>{-1.0});
  double m = 0.0, v = 0.0, x = 1.0;
  for (int t = 1; t <= 2; ++t) {
    const double g = t == 1 ? 2.0 : -1.0;
    m = 0.9 * m + 0.1 * g;
    v = 0.999 * v + 0.001 * g * g;
    const double mh = m / (1 - std::pow(0.9, t));
    const double vh = v / (1 - std::pow(0.999, t));
    x -= 0.05 * mh / (std::sqrt(vh) + 1e-8);
  }
  EXPECT_NEAR(p[0], x, 1e-14);
}

TEST(AdamTest, ConvexQuadraticDescendsThenConverges) {
  AdamOptions o;
  o.learning_rate = 0.05;
  Adam adam(2, o);
  std::vector<double> p = {3.0, -2.0};
  auto loss = [&] { return p[0] * p[0] + 4.0 * p[1] * p[1]; };
  double previous = loss();
  for (int step = 0; step < 300; ++step) {
    adam.Step(p, std::vector<double>{2.0 * p[0], 8.0 * p[1]});
    const double current = loss();
    // Momentum overshoots close to the optimum; far away descent is strict.
    if (step < 100) EXPECT_LT(current, previous) << step;
    previous = current;
  }
  EXPECT_LT(previous, 1e-6);
}

TEST(AdamTest, NonFiniteGradientThrows) {
  Adam adam(2, {});
  std::vector<double> p = {0.0, 0.0};
  EXPECT_THROW(adam.Step(p, std::vector<double>{
                                1.0, std::numeric_limits<double>::quiet_NaN()}),
               NumericalError);
  EXPECT_EQ(p, (std::vector<double>{0.0, 0.0}));
}

TEST(AdamTest, SizeMismatchThrows) {
  Adam adam(2, {});
  std::vector<double> p = {0.0, 0.0, 0.0};
  EXPECT_THROW(adam.Step(p, std::vector<double>(3, 1.0)),
               std::invalid_argument);
}

TEST(AdamTest, GradientClippingBoundsTheStepInput) {
  AdamOptions o;
  o.learning_rate = 0.1;
  o.max_grad_norm = 1.0;
  Adam clipped(2, o);
  Adam reference(2, AdamOptions{.learning_rate = 0.1});
  std::vector<double> a = {0.0, 0.0}, b = {0.0, 0.0};
  // Direction (3, 4) has norm 5; clipped to (0.6, 0.8).
  clipped.Step(a, std::vector<double>{3.0, 4.0});
  reference.Step(b, std::vector<double>{0.6, 0.8});
  EXPECT_NEAR(a[0], b[0], 1e-15);
  EXPECT_NEAR(a[1], b[1], 1e-15);
}

TEST(AdamTest, JsonRoundTripContinuesIdentically) {
  Adam a(2, AdamOptions{.learning_rate = 0.02});
  std::vector<double> p = {1.0, 1.0};
  a.Step(p, std::vector<double>{0.3, -0.2});
  Adam b = Adam::FromJson(a.ToJson());
  std::vector<double> q = p;
  a.Step(p, std::vector<double>{0.1, 0.5});
  b.Step(q, std::vector<double>{0.1, 0.5});
  EXPECT_EQ(p, q);
  EXPECT_EQ(b.step_count(), 2);
}

}  // namespace
}  // namespace irgail
