// Copyright 2026 The EvaNet Authors. All Rights Reserved.
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

#ifndef EVANET_RANDOM_HPP_
#define EVANET_RANDOM_HPP_

#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>

namespace evanet {

using Rng = std::mt19937_64;

// SplitMix64 finalizer over (seed, stream). Used to derive independent
// sub-streams so that results do not depend on call order across workers.
constexpr std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0) {
  return Rng(mix_seed(seed, stream));
}

// Uniform integer in [lo, hi].
inline int uniform_int(Rng& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

inline double uniform_real(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

template <typename T>
const T& pick(std::span<const T> choices, Rng& rng) {
  if (choices.empty()) throw std::invalid_argument("pick from empty set");
  return choices[static_cast<std::size_t>(
      uniform_int(rng, 0, static_cast<int>(choices.size()) - 1))];
}

}  // namespace evanet

#endif  // EVANET_RANDOM_HPP_
