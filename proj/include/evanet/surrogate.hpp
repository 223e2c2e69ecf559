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

#ifndef EVANET_SURROGATE_HPP_
#define EVANET_SURROGATE_HPP_

#include <cstdint>

#include "evanet/genome.hpp"
#include "evanet/trainer.hpp"

namespace evanet {

// Per-attribute weights. Scored attributes of the hidden target:
//   stem: temporal length of every layer except 1x1x1;
//   module: repeat count (evolvable metas only), stream count;
//   target stream: its type, and for each space-time conv its kind and
//   temporal length, for each pool its temporal length.
// Candidate streams are matched to target streams by the assignment that
// maximizes credit, so the score ignores stream order. Layer attributes only
// earn credit when the matched stream has the same type. Unmatched candidate
// streams add their own attributes at zero credit.
struct SurrogateWeights {
  double layer_kind = 1;
  double temporal_len = 1;
  double stream_count = 1;
  double stream_type = 1;
  double repeats = 1;

  friend bool operator==(const SurrogateWeights&, const SurrogateWeights&) = default;
};

struct SurrogateLandscape {
  Genome target;
  SurrogateWeights weights;
  // Lengths within this distance earn half credit.
  int length_tolerance = 10;
  // score = base - noise * u * (1 - base), u in [0, 1) hashed from the
  // genome and noise_seed; the target still scores exactly 1.
  double noise = 0;
  std::uint64_t noise_seed = 0;
};

// Target drawn with sample_random_genome(meta, constraints, seed).
SurrogateLandscape default_landscape(MetaKind meta, std::uint64_t seed,
                                     const SearchConstraints& constraints = {});

int surrogate_attribute_count(const Genome& target);

// Noise-free weighted agreement in [0, 1].
double surrogate_similarity(const Genome& genome, const SurrogateLandscape& landscape);

// Throws std::invalid_argument on meta mismatch.
Fitness surrogate_fitness(const Genome& genome, const SurrogateLandscape& landscape);

}  // namespace evanet

#endif  // EVANET_SURROGATE_HPP_
