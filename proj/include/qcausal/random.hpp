// Seed handling helpers.  All stochastic code in the library takes explicit
// 64-bit seeds; derived streams (per column, per pair, per trial) are spawned
// through splitmix64 so that adjacent user seeds do not produce overlapping
// engine states.
#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Dense>

namespace qcausal {

// splitmix64 finalizer; good avalanche behaviour, stable across platforms.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  return splitmix64(seed ^ splitmix64(stream));
}

inline std::mt19937_64 make_rng(std::uint64_t seed) {
  return std::mt19937_64{seed};
}

inline Eigen::VectorXd normal_vector(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v(i) = gauss(rng);
  return v;
}

}  // namespace qcausal
