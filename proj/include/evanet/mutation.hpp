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

#ifndef EVANET_MUTATION_HPP_
#define EVANET_MUTATION_HPP_

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "evanet/genome.hpp"
#include "evanet/random.hpp"

namespace evanet {

enum class MutationKind { ChangeLayerType, ChangeTemporalSize, AddOrRemoveStream, ChangeRepeatCount };

inline constexpr MutationKind kAllMutationKinds[] = {
    MutationKind::ChangeLayerType, MutationKind::ChangeTemporalSize,
    MutationKind::AddOrRemoveStream, MutationKind::ChangeRepeatCount};

std::string_view to_string(MutationKind kind);
std::optional<MutationKind> parse_mutation_kind(std::string_view text);

// Raised when an operator has no legal move for the drawn target. Callers
// resample.
class MutationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// One applied mutation. Paths:
//   layer operators:   [module, stream, layer], or [-1, layer] for the stem
//   AddOrRemoveStream: [module, stream] (the appended or the removed stream)
//   ChangeRepeatCount: [module]
// before/after hold a LayerKind for ChangeLayerType and an integer otherwise
// (temporal length, stream count, repeat count). `added_stream` is set only
// when a stream was added.
struct MutationRecord {
  MutationKind kind = MutationKind::ChangeTemporalSize;
  std::vector<int> path;
  std::variant<int, LayerKind> before;
  std::variant<int, LayerKind> after;
  std::optional<StreamSpec> added_stream;

  friend bool operator==(const MutationRecord&, const MutationRecord&) = default;
};

using MutationLog = std::vector<MutationRecord>;

struct Mutation {
  Genome child;
  MutationRecord record;
};

// max(ceil(d - round / r), 1).
int mutation_count_schedule(long long round, int d, int r);

Mutation mutate_layer_type(const Genome& genome, std::span<const int> path,
                           const SearchConstraints& constraints, Rng& rng);
Mutation mutate_temporal_size(const Genome& genome, std::span<const int> path,
                              const SearchConstraints& constraints, Rng& rng);
Mutation mutate_stream_count(const Genome& genome, int module_index,
                             const SearchConstraints& constraints, Rng& rng);
Mutation mutate_repeat_count(const Genome& genome, int module_index,
                             const SearchConstraints& constraints, Rng& rng);

// Candidate targets of an operator in `genome` (paths as above).
std::vector<std::vector<int>> mutation_targets(const Genome& genome, MutationKind kind,
                                               const SearchConstraints& constraints);

struct MutationResult {
  Genome child;
  MutationLog log;
};

inline constexpr int kMaxMutationResamples = 100;

// Applies `count` operators in sequence. Each draw picks a kind uniformly
// among the enabled kinds that have targets, then a target uniformly; draws
// whose operator raises MutationError are retried, up to
// kMaxMutationResamples failures in total (then MutationError).
MutationResult apply_random_mutations(const Genome& genome, int count,
                                      const SearchConstraints& constraints, Rng& rng,
                                      std::span<const MutationKind> enabled = kAllMutationKinds);

// Replays one record; throws MutationError if `before` disagrees with the
// genome.
Genome apply_mutation(const Genome& genome, const MutationRecord& record);
Genome replay_log(const Genome& genome, const MutationLog& log);

// One JSON object per record, newline-terminated.
std::string serialize_mutation(const MutationRecord& record);
MutationRecord parse_mutation(std::string_view text);

}  // namespace evanet

#endif  // EVANET_MUTATION_HPP_
