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

#include "evanet/evolution.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <numeric>
#include <set>
#include <stdexcept>
#include <string>
#include <thread>

namespace evanet {
namespace {

constexpr std::uint64_t kRoundStream = 0x726f756e64ULL << 24;
constexpr std::uint64_t kRandomStream = 0x72616e64ULL << 32;
constexpr int kMaxRoundRetries = 10;

Fitness safe_evaluate(const Evaluator& evaluator, const Genome& genome) {
  try {
    return evaluator(genome);
  } catch (const std::exception&) {
    return Fitness{};
  }
}

// Runs fn(i) for i in [begin, end) over `workers` threads.
template <typename Fn>
void parallel_for(long long begin, long long end, int workers, Fn&& fn) {
  std::atomic<long long> next{begin};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto work = [&] {
    try {
      for (long long i = next++; i < end; i = next++) fn(i);
    } catch (...) {
      std::lock_guard lock(failure_mu);
      if (!failure) failure = std::current_exception();
      next = end;
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> threads;
    for (int w = 0; w < workers; ++w) threads.emplace_back(work);
    for (std::thread& t : threads) t.join();
  }
  if (failure) std::rethrow_exception(failure);
}

using Proposer = std::function<Individual(PopulationStore&, long long, Rng&, int&)>;

Individual propose_mutant(PopulationStore& store, const EvolutionConfig& config,
                          const Evaluator& evaluator, long long round, Rng& rng, int& retries) {
  const std::vector<Individual> members = store.snapshot();
  const Individual& parent = tournament_select(members, config.tournament_size, rng);
  const int count = config.mutations_at(round);
  for (int attempt = 0;; ++attempt) {
    try {
      MutationResult mutated = apply_random_mutations(parent.genome, count, config.constraints, rng);
      Individual child;
      child.genome = std::move(mutated.child);
      child.mutations = std::move(mutated.log);
      child.parent_id = parent.id;
      child.birth_round = round + 1;
      child.fitness = safe_evaluate(evaluator, child.genome);
      return child;
    } catch (const MutationError&) {
      if (attempt == kMaxRoundRetries) throw;
      ++retries;
    }
  }
}

EvolutionResult run_search(const EvolutionConfig& config, const Evaluator& evaluator,
                           const SearchObserver& observer, std::span<const Individual> resume,
                           const Proposer& propose) {
  config.check();
  const auto P = static_cast<std::size_t>(config.population);
  for (std::size_t i = 0; i < resume.size(); ++i) {
    if (resume[i].id != static_cast<std::int64_t>(i)) {
      throw std::invalid_argument("resumed history must have consecutive ids from 0");
    }
    if ((i < P) != (resume[i].birth_round == 0)) {
      throw std::invalid_argument("resumed individual " + std::to_string(i) +
                                  " has the wrong birth round");
    }
  }
  if (resume.size() > P + static_cast<std::size_t>(config.rounds)) {
    throw std::invalid_argument("resumed history is longer than the configured run");
  }

  EvolutionResult result;
  PopulationStore store(config.population);
  auto record = [&](const Individual& child, const TraceRow& row) {
    result.history.push_back(child);
    result.trace.push_back(row);
    if (observer.on_trace) observer.on_trace(row);
  };

  // Initial population: replayed members first, the rest evaluated now.
  const std::size_t replayed_init = std::min(resume.size(), P);
  for (std::size_t i = 0; i < replayed_init; ++i) {
    store.seed_member(resume[i]);
    result.history.push_back(resume[i]);
  }
  std::vector<Individual> fresh(P - replayed_init);
  parallel_for(static_cast<long long>(replayed_init), static_cast<long long>(P), config.workers,
               [&](long long k) {
                 Individual& ind = fresh[static_cast<std::size_t>(k) - replayed_init];
                 ind.genome = sample_random_genome(config.meta, config.constraints,
                                                   mix_seed(config.seed, static_cast<std::uint64_t>(k)));
                 ind.fitness = safe_evaluate(evaluator, ind.genome);
               });
  for (Individual& ind : fresh) {
    ind.id = store.seed_member(ind);
    result.history.push_back(ind);
    if (observer.on_individual) observer.on_individual(ind);
  }

  for (std::size_t i = P; i < resume.size(); ++i) {
    Individual child = resume[i];
    store.commit(std::move(child), config.removal, record);
  }

  std::mutex retry_mu;
  const long long start = static_cast<long long>(store.rounds());
  parallel_for(start, config.rounds, config.workers, [&](long long round) {
    Rng rng = make_rng(config.seed, kRoundStream + static_cast<std::uint64_t>(round));
    int retries = 0;
    Individual child = propose(store, round, rng, retries);
    store.commit(std::move(child), config.removal, [&](const Individual& c, const TraceRow& row) {
      record(c, row);
      if (observer.on_individual) observer.on_individual(c);
    });
    std::lock_guard lock(retry_mu);
    result.retries += retries;
  });
  result.members = store.snapshot();
  return result;
}

}  // namespace

std::string_view to_string(Removal removal) {
  return removal == Removal::LeastFit ? "least_fit" : "oldest";
}

std::string_view to_string(Schedule schedule) {
  return schedule == Schedule::Annealed ? "annealed" : "constant";
}

std::optional<Removal> parse_removal(std::string_view text) {
  if (text == "least_fit") return Removal::LeastFit;
  if (text == "oldest") return Removal::Oldest;
  return std::nullopt;
}

std::optional<Schedule> parse_schedule(std::string_view text) {
  if (text == "annealed") return Schedule::Annealed;
  if (text == "constant") return Schedule::Constant;
  return std::nullopt;
}

void EvolutionConfig::check() const {
  if (population < 2) throw std::invalid_argument("population must be >= 2");
  if (tournament_size <= 1 || tournament_size > population) {
    throw std::invalid_argument("tournament size must satisfy 1 < S <= P (S=" +
                                std::to_string(tournament_size) +
                                ", P=" + std::to_string(population) + ")");
  }
  if (rounds < 0) throw std::invalid_argument("rounds must be >= 0");
  if (d < 1 || r < 1) throw std::invalid_argument("d and r must be >= 1");
  if (workers < 1) throw std::invalid_argument("workers must be >= 1");
  constraints.check();
}

int EvolutionConfig::mutations_at(long long round) const {
  return schedule == Schedule::Annealed ? mutation_count_schedule(round, d, r) : d;
}

PopulationStore::PopulationStore(int capacity) : capacity_(capacity) {
  if (capacity < 1) throw std::invalid_argument("population capacity must be >= 1");
}

PopulationStore::PopulationStore(PopulationStore&& other) noexcept
    : capacity_(other.capacity_),
      members_(std::move(other.members_)),
      next_id_(other.next_id_),
      rounds_(other.rounds_) {}

std::vector<Individual> PopulationStore::snapshot() const {
  std::lock_guard lock(mu_);
  return members_;
}

std::size_t PopulationStore::size() const {
  std::lock_guard lock(mu_);
  return members_.size();
}

std::int64_t PopulationStore::rounds() const {
  std::lock_guard lock(mu_);
  return rounds_;
}

std::int64_t PopulationStore::next_id() const {
  std::lock_guard lock(mu_);
  return next_id_;
}

std::int64_t PopulationStore::seed_member(Individual individual) {
  std::lock_guard lock(mu_);
  if (members_.size() >= static_cast<std::size_t>(capacity_)) {
    throw std::logic_error("population already full");
  }
  individual.id = next_id_++;
  members_.push_back(std::move(individual));
  return members_.back().id;
}

PopulationStore::Commit PopulationStore::commit(
    Individual child, Removal removal,
    const std::function<void(const Individual&, const TraceRow&)>& on_commit) {
  std::lock_guard lock(mu_);
  child.id = next_id_++;
  members_.push_back(std::move(child));
  const Individual stored = members_.back();
  const std::size_t victim = eviction_index(members_, removal);
  const std::int64_t evicted = members_[victim].id;
  members_.erase(members_.begin() + static_cast<std::ptrdiff_t>(victim));

  TraceRow row;
  row.round = ++rounds_;
  row.evaluations = next_id_;
  row.best_fitness = members_.front().fitness.value;
  double sum = 0;
  for (const Individual& m : members_) {
    row.best_fitness = std::max(row.best_fitness, m.fitness.value);
    sum += m.fitness.value;
  }
  row.mean_fitness = sum / static_cast<double>(members_.size());
  if (on_commit) on_commit(stored, row);
  return {stored.id, evicted, row};
}

const Individual& tournament_select(std::span<const Individual> members, int tournament_size,
                                    Rng& rng) {
  if (tournament_size <= 1 || static_cast<std::size_t>(tournament_size) > members.size()) {
    throw std::invalid_argument("tournament size must satisfy 1 < S <= population");
  }
  std::vector<std::size_t> idx(members.size());
  std::iota(idx.begin(), idx.end(), 0);
  const Individual* best = nullptr;
  for (std::size_t k = 0; k < static_cast<std::size_t>(tournament_size); ++k) {
    const auto j = static_cast<std::size_t>(
        uniform_int(rng, static_cast<int>(k), static_cast<int>(idx.size()) - 1));
    std::swap(idx[k], idx[j]);
    const Individual& cand = members[idx[k]];
    if (!best || cand.fitness.value > best->fitness.value ||
        (cand.fitness.value == best->fitness.value && cand.id > best->id)) {
      best = &cand;
    }
  }
  return *best;
}

std::size_t eviction_index(std::span<const Individual> members, Removal removal) {
  if (members.empty()) throw std::invalid_argument("nothing to evict");
  std::size_t victim = 0;
  for (std::size_t i = 1; i < members.size(); ++i) {
    const Individual& a = members[i];
    const Individual& v = members[victim];
    const bool older = a.id < v.id;
    if (removal == Removal::Oldest) {
      if (older) victim = i;
    } else if (a.fitness.value < v.fitness.value ||
               (a.fitness.value == v.fitness.value && older)) {
      victim = i;
    }
  }
  return victim;
}

RoundResult evolution_round(PopulationStore& store, const EvolutionConfig& config,
                            const Evaluator& evaluator, long long round, Rng& rng) {
  RoundResult out;
  Individual child = propose_mutant(store, config, evaluator, round, rng, out.retries);
  const PopulationStore::Commit c = store.commit(child, config.removal);
  child.id = c.child_id;
  out.child = std::move(child);
  out.evicted_id = c.evicted_id;
  return out;
}

PopulationStore init_population(const EvolutionConfig& config, const Evaluator& evaluator,
                                const SearchObserver& observer) {
  EvolutionConfig init = config;
  init.rounds = 0;
  const EvolutionResult r = run_evolution(init, evaluator, observer);
  PopulationStore store(config.population);
  for (const Individual& m : r.members) store.seed_member(m);
  return store;
}

EvolutionResult run_evolution(const EvolutionConfig& config, const Evaluator& evaluator,
                              const SearchObserver& observer, std::span<const Individual> resume) {
  return run_search(config, evaluator, observer, resume,
                    [&](PopulationStore& store, long long round, Rng& rng, int& retries) {
                      return propose_mutant(store, config, evaluator, round, rng, retries);
                    });
}

EvolutionResult run_random_search(const EvolutionConfig& config, const Evaluator& evaluator,
                                  const SearchObserver& observer,
                                  std::span<const Individual> resume) {
  return run_search(config, evaluator, observer, resume,
                    [&](PopulationStore&, long long round, Rng&, int&) {
                      Individual child;
                      child.genome = sample_random_genome(
                          config.meta, config.constraints,
                          mix_seed(config.seed, kRandomStream + static_cast<std::uint64_t>(round)));
                      child.birth_round = round + 1;
                      child.fitness = safe_evaluate(evaluator, child.genome);
                      return child;
                    });
}

TopK top_k(std::span<const Individual> history, int k) {
  if (k < 1) throw std::invalid_argument("k must be >= 1");
  std::vector<const Individual*> order;
  for (const Individual& ind : history) order.push_back(&ind);
  std::stable_sort(order.begin(), order.end(), [](const Individual* a, const Individual* b) {
    if (a->fitness.value != b->fitness.value) return a->fitness.value > b->fitness.value;
    return a->id > b->id;
  });
  TopK out;
  std::set<std::string> seen;
  for (const Individual* ind : order) {
    if (static_cast<int>(out.individuals.size()) == k) break;
    if (seen.insert(serialize_genome(ind->genome)).second) out.individuals.push_back(*ind);
  }
  out.short_of_k = static_cast<int>(out.individuals.size()) < k;
  return out;
}

}  // namespace evanet
