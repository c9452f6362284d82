// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include <boost/random/mersenne_twister.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_01.hpp>
#include <boost/random/uniform_int_distribution.hpp>
#include <boost/random/uniform_real_distribution.hpp>

namespace augmincer {

/// Every stochastic routine draws from this engine through Boost.Random
/// distributions, whose algorithms (unlike <random>'s) are fixed across
/// standard libraries, so a seed reproduces the same stream everywhere.
using Rng = boost::random::mt19937_64;

/// Independent stream `stream` derived from a user seed. std::seed_seq's
/// mixing algorithm is specified by the standard.
inline Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                    0x5eedu};
  return Rng(seq);
}

inline double draw_normal(Rng& rng, double mean = 0.0, double sd = 1.0) {
  return boost::random::normal_distribution<double>(mean, sd)(rng);
}

inline double draw_uniform(Rng& rng, double lo = 0.0, double hi = 1.0) {
  return boost::random::uniform_real_distribution<double>(lo, hi)(rng);
}

inline bool draw_bernoulli(Rng& rng, double p) { return draw_uniform(rng) < p; }

inline std::size_t draw_index(Rng& rng, std::size_t n) {
  return boost::random::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

/// Fisher-Yates shuffle driven by draw_index (std::shuffle is not portable).
template <typename T>
void shuffle(std::vector<T>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const std::size_t j = draw_index(rng, i);
    std::swap(v[i - 1], v[j]);
  }
}

}  // namespace augmincer
