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

#ifndef EVANET_EVOLUTION_HPP_
#define EVANET_EVOLUTION_HPP_

#include <cstdint>
#include <functional>
#include <mutex>
#include <optional>
#include <span>
#include <vector>

#include "evanet/genome.hpp"
#include "evanet/mutation.hpp"
#include "evanet/trainer.hpp"

namespace evanet {

enum class Removal { LeastFit, Oldest };
enum class Schedule { Annealed, Constant };  // Constant applies d mutations every round

std::string_view to_string(Removal removal);
std::string_view to_string(Schedule schedule);
std::optional<Removal> parse_removal(std::string_view text);
std::optional<Schedule> parse_schedule(std::string_view text);

struct EvolutionConfig {
  int population = 50;
  int tournament_size = 25;
  int rounds = 2000;
  int d = 7;
  int r = 100;
  Schedule schedule = Schedule::Annealed;
  Removal removal = Removal::LeastFit;
  std::uint64_t seed = 0;
  int workers = 1;
  MetaKind meta = MetaKind::Toy;
  SearchConstraints constraints;

  // Throws std::invalid_argument, e.g. unless 1 < S <= P.
  void check() const;
  int mutations_at(long long round) const;
};

struct Individual {
  std::int64_t id = 0;
  Genome genome;
  Fitness fitness;
  std::optional<std::int64_t> parent_id;
  std::int64_t birth_round = 0;  // 0 for the initial population, i + 1 for round i
  MutationLog mutations;
};

struct TraceRow {
  std::int64_t round = 0;  // 1-based count of committed rounds
  double best_fitness = 0;
  double mean_fitness = 0;
  std::int64_t evaluations = 0;

  friend bool operator==(const TraceRow&, const TraceRow&) = default;
};

// Evaluators must be safe to call concurrently when workers > 1.
using Evaluator = std::function<Fitness(const Genome&)>;

class PopulationStore {
 public:
  explicit PopulationStore(int capacity);
  PopulationStore(PopulationStore&& other) noexcept;

  int capacity() const { return capacity_; }
  std::vector<Individual> snapshot() const;
  std::size_t size() const;
  std::int64_t rounds() const;
  std::int64_t next_id() const;

  // Initial members, ids assigned in call order.
  std::int64_t seed_member(Individual individual);
  struct Commit {
    std::int64_t child_id;
    std::int64_t evicted_id;
    TraceRow trace;
  };
  // Assigns the child's id, inserts it and evicts one member, atomically.
  // `on_commit` runs inside the critical section with the stored child.
  Commit commit(Individual child, Removal removal,
                const std::function<void(const Individual&, const TraceRow&)>& on_commit = {});

 private:
  int capacity_;
  mutable std::mutex mu_;
  std::vector<Individual> members_;
  std::int64_t next_id_ = 0;
  std::int64_t rounds_ = 0;
};

// Samples S distinct members; the fittest wins, ties to the larger id.
const Individual& tournament_select(std::span<const Individual> members, int tournament_size,
                                    Rng& rng);

// Index of the member to evict.
std::size_t eviction_index(std::span<const Individual> members, Removal removal);

struct RoundResult {
  Individual child;
  std::int64_t evicted_id = 0;
  int retries = 0;
};

RoundResult evolution_round(PopulationStore& store, const EvolutionConfig& config,
                            const Evaluator& evaluator, long long round, Rng& rng);

struct SearchObserver {
  std::function<void(const Individual&)> on_individual;  // every created individual, in id order
  std::function<void(const TraceRow&)> on_trace;
};

struct EvolutionResult {
  std::vector<Individual> members;   // final population
  std::vector<Individual> history;   // every individual, id order
  std::vector<TraceRow> trace;       // one row per round
  int retries = 0;
};

PopulationStore init_population(const EvolutionConfig& config, const Evaluator& evaluator,
                                const SearchObserver& observer = {});

// `resume` holds a previously archived history prefix (id order); its
// individuals are replayed instead of re-evaluated.
EvolutionResult run_evolution(const EvolutionConfig& config, const Evaluator& evaluator,
                              const SearchObserver& observer = {},
                              std::span<const Individual> resume = {});
EvolutionResult run_random_search(const EvolutionConfig& config, const Evaluator& evaluator,
                                  const SearchObserver& observer = {},
                                  std::span<const Individual> resume = {});

struct TopK {
  std::vector<Individual> individuals;
  bool short_of_k = false;
};
// Highest fitness first, ties to the younger id; one entry per distinct
// serialized genome.
TopK top_k(std::span<const Individual> history, int k);

}  // namespace evanet

#endif  // EVANET_EVOLUTION_HPP_
