#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Dense>

namespace acpo {

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using Vector = VectorX<double>;
using Matrix = MatrixX<double>;
using Index = Eigen::Index;

/// Seeded random stream. Every stochastic routine takes one of these by reference.
using Rng = std::mt19937_64;

/// Derives an independent stream seed from a base seed and a tag (splitmix64 finalizer).
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t tag) {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (tag + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline double uniform01(Rng& rng) {
  // 53 random bits, [0, 1)
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double standard_normal(Rng& rng) {
  // Box-Muller; avoids libstdc++ distribution state so streams stay reproducible.
  double u1 = uniform01(rng);
  while (u1 <= 0.0) u1 = uniform01(rng);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

/// Draws an index from an unnormalized-free probability vector (entries sum to 1).
template <typename Derived>
Index sample_categorical(const Eigen::MatrixBase<Derived>& probs, Rng& rng) {
  const double u = uniform01(rng);
  double acc = 0.0;
  const Index n = probs.size();
  for (Index i = 0; i < n; ++i) {
    acc += probs(i);
    if (u < acc) return i;
  }
  // Roundoff: fall back to the last index with positive mass.
  for (Index i = n - 1; i >= 0; --i)
    if (probs(i) > 0.0) return i;
  return n - 1;
}

/// Dirichlet(1, ..., 1) draw of the given size.
inline Vector sample_flat_dirichlet(Index n, Rng& rng) {
  Vector w(n);
  for (Index i = 0; i < n; ++i) {
    double u = uniform01(rng);
    while (u <= 0.0) u = uniform01(rng);
    w(i) = -std::log(u);
  }
  return w / w.sum();
}

}  // namespace acpo
