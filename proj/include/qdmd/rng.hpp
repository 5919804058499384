// Copyright 2026 The qdmd Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef QDMD_RNG_HPP
#define QDMD_RNG_HPP

#include <cstdint>
#include <random>
#include <string>
#include <string_view>

namespace qdmd {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace detail

/// Deterministic per-site random stream.
///
/// Seeding contract: every measurement/estimation site derives its stream
/// from the 64-bit master seed and a site label string. Streams for distinct
/// labels are statistically independent, so shot loops at different sites may
/// run in any order (or concurrently) without changing any reported count.
class RngStream {
 public:
  RngStream(std::uint64_t master_seed, std::string_view site_label) {
    std::uint64_t s = master_seed ^ detail::fnv1a64(site_label);
    // Expand through splitmix64 so labels differing in a single bit give
    // unrelated engine states.
    std::seed_seq seq{
        static_cast<std::uint32_t>(detail::splitmix64(s)),
        static_cast<std::uint32_t>(detail::splitmix64(s) >> 32),
        static_cast<std::uint32_t>(detail::splitmix64(s)),
        static_cast<std::uint32_t>(detail::splitmix64(s) >> 32),
        static_cast<std::uint32_t>(detail::splitmix64(s)),
        static_cast<std::uint32_t>(detail::splitmix64(s) >> 32),
    };
    engine_.seed(seq);
  }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform double in [0, 1) with 53 random bits. Hand-rolled so results do
  /// not depend on the standard library's distribution implementation.
  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  bool bernoulli(double p) { return uniform01() < p; }

  /// Uniform integer in [0, n).
  std::uint64_t uniform_int(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(engine_()) * n) >> 64);
  }

  /// Uniform double in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace qdmd

#endif  // QDMD_RNG_HPP
