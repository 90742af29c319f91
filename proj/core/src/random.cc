#include "irgail/random.h"

#include <numeric>

namespace irgail {

uint64_t DeriveSeed(uint64_t base, uint64_t stream) {
  uint64_t z = base + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double Rng::Uniform(double lo, double hi) {
  // Generated by hand rather than uniform_real_distribution so that the
  // sequence is identical across standard library implementations.
  const double unit = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * unit;
}

double Rng::Normal() { return normal_(engine_); }

size_t Rng::Index(size_t n) {
  std::uniform_int_distribution<size_t> dist(0, n - 1);
  return dist(engine_);
}

std::vector<double> Rng::NormalVector(size_t n) {
  std::vector<double> out(n);
  for (double& v : out) v = Normal();
  return out;
}

std::vector<size_t> Rng::Permutation(size_t n) {
  std::vector<size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  for (size_t i = n; i > 1; --i) {
    std::swap(perm[i - 1], perm[Index(i)]);
  }
  return perm;
}

}  // namespace irgail
