#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

namespace flowsentry {

using Rng = std::mt19937_64;

// splitmix64 finalizer over (base, stream); used to fan one master seed out
// into independent per-point, per-tree and per-start streams.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::size_t uniform_index(Rng& rng, std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

// Uniform draw on the open interval (0, 1).
inline double uniform_open(Rng& rng) {
  for (;;) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    if (u > 0.0) return u;
  }
}

// First k entries of a seeded partial Fisher-Yates shuffle of 0..n-1.
inline std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k, Rng& rng) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  if (k > n) k = n;
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + uniform_index(rng, n - i);
    std::swap(idx[i], idx[j]);
  }
  idx.resize(k);
  return idx;
}

inline std::vector<std::size_t> permutation(std::size_t n, Rng& rng) {
  return sample_without_replacement(n, n, rng);
}

}  // namespace flowsentry
