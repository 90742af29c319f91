#ifndef IRGAIL_GAUSSIAN_H_
#define IRGAIL_GAUSSIAN_H_

#include <span>
#include <vector>

#include "irgail/tape.h"

namespace irgail {

inline constexpr double kLogStdMin = -5.0;
inline constexpr double kLogStdMax = 2.0;

// Diagonal Gaussian given by its mean and per-dimension log standard
// deviation. Encoders and the stochastic policy both emit this form.
struct DiagGaussian {
  std::vector<double> mean;
  std::vector<double> log_std;

  size_t dim() const { return mean.size(); }
  // Throws std::invalid_argument on unequal lengths.
  void Validate() const;
  // Copy with log_std clamped to [kLogStdMin, kLogStdMax].
  static DiagGaussian Clamped(std::vector<double> mean,
                              std::vector<double> log_std);
};

// mean + exp(log_std) * noise.
std::vector<double> SampleReparam(const DiagGaussian& g,
                                  std::span<const double> noise);
double LogDensity(const DiagGaussian& g, std::span<const double> x);
// KL(g || N(0, I)) in closed form.
double KlToStandardNormal(const DiagGaussian& g);

// Batched, differentiable counterparts. Rows are samples.
struct GaussianVars {
  Var mean;
  Var log_std;
};

// Splits a (rows x 2*dim) head into mean and clamped log_std.
GaussianVars SplitGaussianHead(Tape& tape, Var head, int dim);
Var ReparamSample(Tape& tape, const GaussianVars& g, const Matrix& noise);
// Per-row KL to the standard normal, summed over dimensions (rows x 1).
Var KlToStandardNormal(Tape& tape, const GaussianVars& g);
// Per-row log density of `x` (rows x 1).
Var GaussianLogDensity(Tape& tape, const GaussianVars& g, const Matrix& x);

}  // namespace irgail

#endif  // IRGAIL_GAUSSIAN_H_
