// Copyright 2026 The arpf authors
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

#ifndef ARPF_RNG_HPP_
#define ARPF_RNG_HPP_

#include <bit>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>
#include <random>

namespace arpf
{

inline constexpr std::uint64_t splitmix64(std::uint64_t x)
{
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Derives a child seed from a base seed and a list of stream ids.
/// Every independent random stream in the project is seeded this way, so
/// replays are reproducible and streams never alias.
inline std::uint64_t mix_seed(std::uint64_t base, std::initializer_list<std::uint64_t> ids)
{
  std::uint64_t s = splitmix64(base);
  for (std::uint64_t id : ids) {
    s = splitmix64(s ^ splitmix64(id));
  }
  return s;
}

/// Well-known stream ids, one per consumer of randomness.
namespace streams
{
inline constexpr std::uint64_t scene = 0x01;
inline constexpr std::uint64_t trajectory = 0x02;
inline constexpr std::uint64_t frame = 0x03;
inline constexpr std::uint64_t pe = 0x04;
inline constexpr std::uint64_t coordinator = 0x05;
}  // namespace streams

/// Seeded random stream. Distributions are implemented here (not via the
/// std distribution objects) so draw counts are fixed and replays are
/// bit-stable within a build.
class Rng
{
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform double in [0, 1).
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Unbiased uniform integer in [0, n), n >= 1. Rejection on a power-of-two
  /// mask keeps the draw exactly uniform.
  std::uint64_t below(std::uint64_t n)
  {
    const std::uint64_t mask = std::bit_ceil(n) - 1;
    std::uint64_t v = engine_() & mask;
    while (v >= n) {
      v = engine_() & mask;
    }
    return v;
  }

  /// Gaussian draw via Box-Muller; always consumes exactly two uniforms.
  double normal(double mean, double stddev)
  {
    const double u1 = 1.0 - uniform01();  // (0, 1]
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    return mean + stddev * (r * std::cos(2.0 * std::numbers::pi * u2));
  }

  /// Poisson draw. Knuth's multiplicative method for small means; Gaussian
  /// approximation above 256 where the product would lose precision (means
  /// that large do not occur in the shipped scenarios).
  std::int64_t poisson(double mean)
  {
    if (!(mean > 0.0)) {
      return 0;
    }
    if (mean > 256.0) {
      const double v = std::round(mean + std::sqrt(mean) * normal(0.0, 1.0));
      return v > 0.0 ? static_cast<std::int64_t>(v) : 0;
    }
    const double threshold = std::exp(-mean);
    std::int64_t k = 0;
    double p = uniform01();
    while (p > threshold) {
      ++k;
      p *= uniform01();
    }
    return k;
  }

private:
  std::mt19937_64 engine_;
};

}  // namespace arpf

#endif  // ARPF_RNG_HPP_
