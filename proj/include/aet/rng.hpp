// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <random>
#include <string_view>

#include "aet/types.hpp"

namespace aet {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

using Rng = std::mt19937_64;

/// Independent generator for a named purpose. Streams derived from the same
/// seed with different names do not depend on the order they are created in.
inline Rng make_stream(std::uint64_t seed, std::string_view name) {
  return Rng(splitmix64(seed ^ fnv1a(name)));
}

/// Vector of iid standard normals.
inline VectorXd standard_normal(Rng& rng, int n) {
  std::normal_distribution<double> normal(0.0, 1.0);
  VectorXd out(n);
  for (int i = 0; i < n; ++i) out[i] = normal(rng);
  return out;
}

}  // namespace aet
