#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <random>

namespace tim {

/// SplitMix64 step; the basis of all seed derivation in this library.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Deterministically combine a seed with a stream tag or index. Independent
/// sub-streams (per stage, per restart, per realization) are derived by
/// chaining mix_seed calls.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t tag) {
  std::uint64_t s = seed ^ (0x9e3779b97f4a7c15ULL + (tag << 1));
  std::uint64_t a = splitmix64(s);
  s ^= tag;
  return a ^ splitmix64(s);
}

/// K x r matrix of i.i.d. standard normal entries, filled row-major so the
/// draw order is fixed.
inline Eigen::MatrixXd randn_matrix(int rows, int cols, std::mt19937_64& gen) {
  std::normal_distribution<double> dist(0.0, 1.0);
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = dist(gen);
  return m;
}

}  // namespace tim
