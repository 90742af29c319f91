#ifndef IRGAIL_RANDOM_H_
#define IRGAIL_RANDOM_H_

#include <cstdint>
#include <random>
#include <vector>

namespace irgail {

// Mixes a base seed with a stream index (splitmix64). Used to hand
// independent, reproducible seeds to sub-tasks.
uint64_t DeriveSeed(uint64_t base, uint64_t stream);

// Seeded random source. Every stochastic routine takes one of these or a
// seed, so a run is a pure function of its seeds.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  double Uniform(double lo, double hi);
  double Normal();
  // Uniform integer in [0, n).
  size_t Index(size_t n);
  uint64_t NextSeed() { return engine_(); }

  std::vector<double> NormalVector(size_t n);
  std::vector<size_t> Permutation(size_t n);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace irgail

#endif  // IRGAIL_RANDOM_H_
