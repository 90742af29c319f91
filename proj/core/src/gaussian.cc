#include "irgail/gaussian.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace irgail {

namespace {
const double kHalfLog2Pi = 0.5 * std::log(2.0 * std::numbers::pi);
}

void DiagGaussian::Validate() const {
  if (mean.size() != log_std.size()) {
    throw std::invalid_argument("DiagGaussian mean/log_std length mismatch");
  }
}

DiagGaussian DiagGaussian::Clamped(std::vector<double> mean,
                                   std::vector<double> log_std) {
  for (double& v : log_std) v = std::clamp(v, kLogStdMin, kLogStdMax);
  DiagGaussian g{std::move(mean), std::move(log_std)};
  g.Validate();
  return g;
}

std::vector<double> SampleReparam(const DiagGaussian& g,
                                  std::span<const double> noise) {
  g.Validate();
  if (noise.size() != g.dim()) {
    throw std::invalid_argument("SampleReparam: noise length mismatch");
  }
  std::vector<double> out(g.dim());
  for (size_t i = 0; i < g.dim(); ++i) {
    out[i] = g.mean[i] + std::exp(g.log_std[i]) * noise[i];
  }
  return out;
}

double LogDensity(const DiagGaussian& g, std::span<const double> x) {
  g.Validate();
  if (x.size() != g.dim()) {
    throw std::invalid_argument("LogDensity: point length mismatch");
  }
  double total = 0.0;
  for (size_t i = 0; i < g.dim(); ++i) {
    const double z = (x[i] - g.mean[i]) * std::exp(-g.log_std[i]);
    total += -0.5 * z * z - g.log_std[i] - kHalfLog2Pi;
  }
  return total;
}

double KlToStandardNormal(const DiagGaussian& g) {
  g.Validate();
  double total = 0.0;
  for (size_t i = 0; i < g.dim(); ++i) {
    const double var = std::exp(2.0 * g.log_std[i]);
    total += 0.5 * (g.mean[i] * g.mean[i] + var - 1.0 - 2.0 * g.log_std[i]);
  }
  return total;
}

GaussianVars SplitGaussianHead(Tape& tape, Var head, int dim) {
  if (head.cols() != 2 * dim) {
    throw std::invalid_argument("Gaussian head must have 2*dim columns");
  }
  Var mean = tape.SliceCols(head, 0, dim);
  Var log_std = tape.Clamp(tape.SliceCols(head, dim, dim), kLogStdMin,
                           kLogStdMax);
  return {mean, log_std};
}

Var ReparamSample(Tape& tape, const GaussianVars& g, const Matrix& noise) {
  return g.mean + tape.MulConst(tape.Exp(g.log_std), noise);
}

Var KlToStandardNormal(Tape& tape, const GaussianVars& g) {
  Var per_dim = tape.Square(g.mean) + tape.Exp(2.0 * g.log_std) -
                2.0 * g.log_std;
  return tape.SumCols(0.5 * tape.Shift(per_dim, -1.0));
}

Var GaussianLogDensity(Tape& tape, const GaussianVars& g, const Matrix& x) {
  // -0.5 * ((x - mu) * exp(-log_std))^2 - log_std - 0.5 log(2 pi)
  Var diff = tape.Constant(x) - g.mean;
  Var z = diff * tape.Exp(-g.log_std);
  Var per_dim = tape.Shift(-0.5 * tape.Square(z) - g.log_std, -kHalfLog2Pi);
  return tape.SumCols(per_dim);
}

}  // namespace irgail
