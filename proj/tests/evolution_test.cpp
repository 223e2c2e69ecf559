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

#include <algorithm>
#include <atomic>
#include <map>
#include <set>
#include <gtest/gtest.h>

#include "evanet/evolution.hpp"
#include "evanet/json_io.hpp"
#include "evanet/surrogate.hpp"
#include "test_util.hpp"

namespace evanet {
namespace {

EvolutionConfig desk_config(std::uint64_t seed, int rounds = 300) {
  EvolutionConfig c;
  c.population = 16;
  c.tournament_size = 8;
  c.rounds = rounds;
  c.r = 25;
  c.seed = seed;
  return c;
}

Evaluator surrogate_evaluator(const SurrogateLandscape& land) {
  return [&land](const Genome& g) { return surrogate_fitness(g, land); };
}

Individual member(std::int64_t id, double fitness) {
  Individual ind;
  ind.id = id;
  ind.genome = testing::small_toy_genome();
  ind.fitness.value = fitness;
  return ind;
}

// 1 stem length, per module repeats and stream count, plus stream attributes.
Genome twenty_attribute_genome() {
  Genome g = testing::small_toy_genome();
  ModuleSpec& m = g.modules[1];
  m.streams.push_back(StreamSpec{StreamType::TwoSpaceTime,
                                 {{LayerKind::Conv1x1x1, 1, 5}, {LayerKind::Conv3D, 5, 5},
                                  {LayerKind::ConvITGM, 7, 5}}});
  resplit_channels(m);
  return g;
}

// --- surrogate ---------------------------------------------------------------

TEST(Surrogate, TargetScoresOne) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const SurrogateLandscape land = default_landscape(MetaKind::Toy, seed);
    EXPECT_EQ(surrogate_fitness(land.target, land).value, 1.0);
    SurrogateLandscape noisy = land;
    noisy.noise = 0.5;
    EXPECT_EQ(surrogate_fitness(land.target, noisy).value, 1.0);
  }
}

TEST(Surrogate, OneKindOutOfTwenty) {
  SurrogateLandscape land;
  land.target = twenty_attribute_genome();
  ASSERT_EQ(surrogate_attribute_count(land.target), 20);
  Genome g = land.target;
  g.modules[0].streams[0].layers[1].kind = LayerKind::Conv3D;
  EXPECT_NEAR(surrogate_fitness(g, land).value, 0.95, 1e-12);
}

TEST(Surrogate, StreamPermutationInvariant) {
  SurrogateLandscape land;
  land.target = twenty_attribute_genome();
  Rng rng = make_rng(3, 0);
  for (int trial = 0; trial < 50; ++trial) {
    Genome g = sample_random_genome(MetaKind::Toy, SearchConstraints{}, static_cast<std::uint64_t>(trial));
    const double base = surrogate_similarity(g, land);
    for (ModuleSpec& m : g.modules) std::shuffle(m.streams.begin(), m.streams.end(), rng);
    EXPECT_EQ(surrogate_similarity(g, land), base);
  }
  Genome t = land.target;
  std::reverse(t.modules[1].streams.begin(), t.modules[1].streams.end());
  EXPECT_EQ(surrogate_similarity(t, land), 1.0);
}

TEST(Surrogate, MaximalOnlyAtTarget) {
  const SurrogateLandscape land = default_landscape(MetaKind::Toy, 11);
  for (std::uint64_t seed = 0; seed < 500; ++seed) {
    const Genome g = sample_random_genome(MetaKind::Toy, SearchConstraints{}, seed);
    const double s = surrogate_similarity(g, land);
    ASSERT_GE(s, 0.0);
    ASSERT_LE(s, 1.0);
    if (g != land.target) EXPECT_LT(s, 1.0);
  }
}

TEST(Surrogate, NoiseIsBoundedAndDeterministic) {
  SurrogateLandscape land = default_landscape(MetaKind::Toy, 5);
  land.noise = 0.2;
  land.noise_seed = 9;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const Genome g = sample_random_genome(MetaKind::Toy, SearchConstraints{}, seed);
    const double clean = surrogate_similarity(g, land);
    const double v = surrogate_fitness(g, land).value;
    EXPECT_EQ(v, surrogate_fitness(g, land).value);
    EXPECT_LE(v, clean);
    EXPECT_GE(v, clean - 0.2 * (1 - clean) - 1e-15);
  }
}

TEST(Surrogate, MetaMismatchThrows) {
  const SurrogateLandscape land = default_landscape(MetaKind::Toy, 0);
  const Genome g = sample_random_genome(MetaKind::InceptionLike, SearchConstraints{}, 0);
  EXPECT_THROW(surrogate_fitness(g, land), std::invalid_argument);
}

// --- config ------------------------------------------------------------------

TEST(EvolutionConfig, TournamentBounds) {
  EvolutionConfig c = desk_config(0);
  c.tournament_size = 17;
  EXPECT_THROW(c.check(), std::invalid_argument);
  c.tournament_size = 1;
  EXPECT_THROW(c.check(), std::invalid_argument);
  c.tournament_size = 16;
  EXPECT_NO_THROW(c.check());
  EXPECT_THROW(run_evolution(EvolutionConfig{.population = 4, .tournament_size = 5}, {}),
               std::invalid_argument);
}

// --- init ----------------------------------------------------------------------

TEST(InitPopulation, CardinalityAndDeterminism) {
  const SurrogateLandscape land = default_landscape(MetaKind::Toy, 1);
  const EvolutionConfig c = desk_config(4);
  const PopulationStore a = init_population(c, surrogate_evaluator(land));
  const PopulationStore b = init_population(c, surrogate_evaluator(land));
  const auto ma = a.snapshot();
  const auto mb = b.snapshot();
  ASSERT_EQ(ma.size(), 16u);
  for (std::size_t i = 0; i < ma.size(); ++i) {
    EXPECT_EQ(ma[i].id, static_cast<std::int64_t>(i));
    EXPECT_FALSE(ma[i].parent_id);
    EXPECT_EQ(serialize_genome(ma[i].genome), serialize_genome(mb[i].genome));
    EXPECT_EQ(ma[i].fitness.value, surrogate_fitness(ma[i].genome, land).value);
  }
}

TEST(InitPopulation, EvaluatorFailureScoresZero) {
  EvolutionConfig c = desk_config(0);
  std::atomic<int> calls{0};
  const PopulationStore s = init_population(c, [&](const Genome&) -> Fitness {
    if (calls++ % 2 == 0) throw std::runtime_error("boom");
    return {0.5, 0, 0};
  });
  int zeros = 0;
  for (const Individual& m : s.snapshot()) zeros += m.fitness.value == 0.0;
  EXPECT_EQ(zeros, 8);
}

// --- tournament ----------------------------------------------------------------

TEST(Tournament, FullTournamentIsArgmax) {
  std::vector<Individual> members;
  for (int i = 0; i < 10; ++i) members.push_back(member(i, (i * 7) % 10 / 10.0));
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng = make_rng(seed, 0);
    EXPECT_EQ(tournament_select(members, 10, rng).id, 7);
  }
}

TEST(Tournament, TiesGoToYoungest) {
  std::vector<Individual> members;
  for (int i = 0; i < 10; ++i) members.push_back(member(i, 0.5));
  EXPECT_EQ([&] { Rng rng = make_rng(0, 0); return tournament_select(members, 10, rng).id; }(), 9);
  // With a partial tournament the winner is always the largest sampled id;
  // over many draws every id but the smallest S-1 must win sometimes.
  std::set<std::int64_t> winners;
  Rng rng = make_rng(1, 0);
  for (int i = 0; i < 2000; ++i) winners.insert(tournament_select(members, 3, rng).id);
  EXPECT_EQ(*winners.begin(), 2);
  EXPECT_EQ(winners.size(), 8u);
}

TEST(Tournament, PairwiseMax) {
  const std::vector<Individual> members{member(0, 0.1), member(1, 0.9)};
  Rng rng = make_rng(0, 0);
  EXPECT_EQ(tournament_select(members, 2, rng).fitness.value, 0.9);
  const std::vector<Individual> flipped{member(0, 0.9), member(1, 0.1)};
  EXPECT_EQ(tournament_select(flipped, 2, rng).id, 0);
}

TEST(Tournament, SizeOutOfRange) {
  const std::vector<Individual> members{member(0, 0.1), member(1, 0.9)};
  Rng rng = make_rng(0, 0);
  EXPECT_THROW(tournament_select(members, 1, rng), std::invalid_argument);
  EXPECT_THROW(tournament_select(members, 3, rng), std::invalid_argument);
}

TEST(Tournament, SamplesUniformly) {
  // Winner is the max id among 2 draws from 6: P(id k) = k / C(6, 2).
  std::vector<Individual> members;
  for (int i = 0; i < 6; ++i) members.push_back(member(i, 0.0));
  std::map<std::int64_t, int> wins;
  Rng rng = make_rng(7, 0);
  const int n = 30000;
  for (int i = 0; i < n; ++i) ++wins[tournament_select(members, 2, rng).id];
  for (int k = 1; k < 6; ++k) EXPECT_NEAR(wins[k] / double(n), k / 15.0, 0.015) << k;
}

// --- eviction ------------------------------------------------------------------

TEST(Eviction, LeastFitSmallestIdOnTies) {
  const std::vector<Individual> members{member(4, 0.3), member(2, 0.1), member(9, 0.1), member(1, 0.8)};
  EXPECT_EQ(eviction_index(members, Removal::LeastFit), 1u);
  EXPECT_EQ(eviction_index(members, Removal::Oldest), 3u);
}

// --- rounds --------------------------------------------------------------------

TEST(EvolutionRound, FirstRoundAppliesSevenMutations) {
  const SurrogateLandscape land = default_landscape(MetaKind::Toy, 2);
  EvolutionConfig c = desk_config(3);
  c.r = 100;
  PopulationStore store = init_population(c, surrogate_evaluator(land));
  Rng rng = make_rng(3, 99);
  const RoundResult r = evolution_round(store, c, surrogate_evaluator(land), 0, rng);
  EXPECT_EQ(r.child.mutations.size(), 7u);
  EXPECT_EQ(r.child.birth_round, 1);
  EXPECT_EQ(r.child.id, 16);
  ASSERT_TRUE(r.child.parent_id);
  EXPECT_LT(*r.child.parent_id, 16);
  EXPECT_EQ(store.size(), 16u);
  EXPECT_EQ(store.rounds(), 1);
}

TEST(EvolutionRound, LeastFitChildIsEvicted) {
  EvolutionConfig c = desk_config(5);
  int calls = 0;
  const Evaluator ev = [&](const Genome&) -> Fitness {
    return {calls++ < 16 ? 0.5 + calls * 0.01 : 0.01, 0, 0};
  };
  PopulationStore store = init_population(c, ev);
  const auto before = store.snapshot();
  Rng rng = make_rng(5, 1);
  const RoundResult r = evolution_round(store, c, ev, 0, rng);
  EXPECT_EQ(r.evicted_id, r.child.id);
  const auto after = store.snapshot();
  ASSERT_EQ(after.size(), before.size());
  for (std::size_t i = 0; i < after.size(); ++i) {
    EXPECT_EQ(after[i].id, before[i].id);
    EXPECT_EQ(serialize_genome(after[i].genome), serialize_genome(before[i].genome));
  }
}

TEST(EvolutionRound, MutationLogReplaysFromParent) {
  const SurrogateLandscape land = default_landscape(MetaKind::Toy, 8);
  const EvolutionResult res = run_evolution(desk_config(8, 40), surrogate_evaluator(land));
  for (const Individual& ind : res.history) {
    if (!ind.parent_id) continue;
    const Individual& parent = res.history[static_cast<std::size_t>(*ind.parent_id)];
    EXPECT_EQ(replay_log(parent.genome, ind.mutations), ind.genome) << ind.id;
  }
}

// --- runs ----------------------------------------------------------------------

TEST(RunEvolution, InvariantsOnDeskRun) {
  const SurrogateLandscape land = default_landscape(MetaKind::Toy, 0);
  const EvolutionConfig c = desk_config(0);
  std::vector<std::int64_t> seen;
  int traces = 0;
  const SearchObserver obs{[&](const Individual& i) { seen.push_back(i.id); },
                           [&](const TraceRow&) { ++traces; }};
  const EvolutionResult r = run_evolution(c, surrogate_evaluator(land), obs);
  ASSERT_EQ(r.history.size(), 16u + 300u);
  ASSERT_EQ(r.trace.size(), 300u);
  EXPECT_EQ(traces, 300);
  EXPECT_EQ(r.members.size(), 16u);
  for (std::size_t i = 0; i < seen.size(); ++i) EXPECT_EQ(seen[i], static_cast<std::int64_t>(i));
  for (std::size_t i = 0; i < r.trace.size(); ++i) {
    EXPECT_EQ(r.trace[i].round, static_cast<std::int64_t>(i) + 1);
    EXPECT_EQ(r.trace[i].evaluations, 16 + static_cast<std::int64_t>(i) + 1);
    if (i > 0) EXPECT_GE(r.trace[i].best_fitness, r.trace[i - 1].best_fitness);
    EXPECT_LE(r.trace[i].mean_fitness, r.trace[i].best_fitness);
  }
  for (const Individual& ind : r.history) {
    if (ind.id < 16) {
      EXPECT_FALSE(ind.parent_id);
      EXPECT_EQ(ind.birth_round, 0);
    } else {
      ASSERT_TRUE(ind.parent_id);
      EXPECT_LT(*ind.parent_id, ind.id);
      EXPECT_EQ(ind.birth_round, ind.id - 15);
    }
  }
}

TEST(RunEvolution, ZeroRoundsIsInitialPopulation) {
  const SurrogateLandscape land = default_landscape(MetaKind::Toy, 0);
  EvolutionConfig c = desk_config(2, 0);
  const EvolutionResult r = run_evolution(c, surrogate_evaluator(land));
  const PopulationStore init = init_population(c, surrogate_evaluator(land));
  EXPECT_TRUE(r.trace.empty());
  ASSERT_EQ(r.members.size(), 16u);
  const auto snap = init.snapshot();
  for (std::size_t i = 0; i < snap.size(); ++i) {
    EXPECT_EQ(serialize_genome(r.members[i].genome), serialize_genome(snap[i].genome));
  }
}

TEST(RunEvolution, DeterministicSingleWorker) {
  const SurrogateLandscape land = default_landscape(MetaKind::Toy, 4);
  const EvolutionConfig c = desk_config(4, 60);
  const EvolutionResult a = run_evolution(c, surrogate_evaluator(land));
  const EvolutionResult b = run_evolution(c, surrogate_evaluator(land));
  ASSERT_EQ(a.history.size(), b.history.size());
  for (std::size_t i = 0; i < a.history.size(); ++i) {
    EXPECT_EQ(serialize_genome(a.history[i].genome), serialize_genome(b.history[i].genome));
    EXPECT_EQ(a.history[i].parent_id, b.history[i].parent_id);
  }
  EXPECT_EQ(a.trace, b.trace);
}

TEST(RunEvolution, MultiWorkerKeepsInvariants) {
  const SurrogateLandscape land = default_landscape(MetaKind::Toy, 6);
  EvolutionConfig c = desk_config(6, 120);
  c.workers = 4;
  const EvolutionResult r = run_evolution(c, surrogate_evaluator(land));
  ASSERT_EQ(r.history.size(), 136u);
  EXPECT_EQ(r.members.size(), 16u);
  std::set<std::int64_t> ids;
  for (const Individual& ind : r.history) {
    ids.insert(ind.id);
    if (ind.parent_id) EXPECT_LT(*ind.parent_id, ind.id);
  }
  EXPECT_EQ(ids.size(), 136u);
  for (std::size_t i = 1; i < r.trace.size(); ++i) {
    EXPECT_GE(r.trace[i].best_fitness, r.trace[i - 1].best_fitness);
  }
}

TEST(RunEvolution, ReachesNinetyFivePercentOnDefaultSurrogate) {
  int hits = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const SurrogateLandscape land = default_landscape(MetaKind::Toy, seed);
    hits += run_evolution(desk_config(seed), surrogate_evaluator(land)).trace.back().best_fitness >= 0.95;
  }
  EXPECT_GE(hits, 16);
}

TEST(RunEvolution, ResumeMatchesUninterrupted) {
  const SurrogateLandscape land = default_landscape(MetaKind::Toy, 12);
  const EvolutionConfig c = desk_config(12, 50);
  const EvolutionResult full = run_evolution(c, surrogate_evaluator(land));
  for (std::size_t cut : {0u, 5u, 16u, 40u, 66u}) {
    std::vector<Individual> prefix(full.history.begin(), full.history.begin() + cut);
    std::size_t fresh = 0;
    int calls = 0;
    std::vector<TraceRow> traced;
    const SearchObserver obs{[&](const Individual&) { ++fresh; }, [&](const TraceRow& t) { traced.push_back(t); }};
    const Evaluator counting = [&](const Genome& g) { ++calls; return surrogate_fitness(g, land); };
    const EvolutionResult r = run_evolution(c, counting, obs, prefix);
    EXPECT_EQ(fresh, 66 - cut);
    EXPECT_EQ(calls, static_cast<int>(66 - cut));
    EXPECT_EQ(r.trace, full.trace);
    EXPECT_EQ(traced, full.trace);
    ASSERT_EQ(r.history.size(), full.history.size());
    for (std::size_t i = 0; i < r.history.size(); ++i) {
      EXPECT_EQ(serialize_genome(r.history[i].genome), serialize_genome(full.history[i].genome));
    }
  }
}

TEST(RandomSearch, BudgetParityAndMonotone) {
  const SurrogateLandscape land = default_landscape(MetaKind::Toy, 3);
  const EvolutionConfig c = desk_config(3, 100);
  const EvolutionResult rs = run_random_search(c, surrogate_evaluator(land));
  const EvolutionResult evo = run_evolution(c, surrogate_evaluator(land));
  ASSERT_EQ(rs.history.size(), evo.history.size());
  ASSERT_EQ(rs.trace.size(), evo.trace.size());
  for (std::size_t i = 0; i < rs.trace.size(); ++i) {
    EXPECT_EQ(rs.trace[i].evaluations, evo.trace[i].evaluations);
    if (i > 0) EXPECT_GE(rs.trace[i].best_fitness, rs.trace[i - 1].best_fitness);
  }
  for (const Individual& ind : rs.history) {
    EXPECT_FALSE(ind.parent_id);
    EXPECT_TRUE(ind.mutations.empty());
  }
  // Same seed, same initial population.
  for (int i = 0; i < 16; ++i) {
    EXPECT_EQ(serialize_genome(rs.history[i].genome), serialize_genome(evo.history[i].genome));
  }
}

TEST(RandomSearch, LosesToEvolution) {
  int wins = 0;
  double evo_mean = 0, rs_mean = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const SurrogateLandscape land = default_landscape(MetaKind::Toy, seed);
    const double e = run_evolution(desk_config(seed), surrogate_evaluator(land)).trace.back().best_fitness;
    const double r = run_random_search(desk_config(seed), surrogate_evaluator(land)).trace.back().best_fitness;
    wins += e > r;
    evo_mean += e;
    rs_mean += r;
  }
  EXPECT_GE(wins, 16);
  EXPECT_LT(rs_mean, evo_mean);
}

// --- top_k ---------------------------------------------------------------------

TEST(TopK, Examples) {
  const SurrogateLandscape land = default_landscape(MetaKind::Toy, 1);
  const EvolutionResult r = run_evolution(desk_config(1, 80), surrogate_evaluator(land));
  const TopK top = top_k(r.history, 3);
  ASSERT_EQ(top.individuals.size(), 3u);
  EXPECT_FALSE(top.short_of_k);
  EXPECT_GE(top.individuals[0].fitness.value, top.individuals[1].fitness.value);
  EXPECT_GE(top.individuals[1].fitness.value, top.individuals[2].fitness.value);
  double best = 0;
  for (const Individual& i : r.history) best = std::max(best, i.fitness.value);
  EXPECT_EQ(top_k(r.history, 1).individuals.at(0).fitness.value, best);
}

TEST(TopK, DuplicatesCollapseAndTiesGoToYouth) {
  std::vector<Individual> h{member(0, 0.5), member(1, 0.9), member(2, 0.5), member(3, 0.9)};
  h[2].genome.modules[0].repeats = 2;
  const TopK top = top_k(h, 3);
  EXPECT_TRUE(top.short_of_k);
  ASSERT_EQ(top.individuals.size(), 2u);
  EXPECT_EQ(top.individuals[0].id, 3);
  EXPECT_EQ(top.individuals[1].id, 2);
  EXPECT_THROW(top_k(h, 0), std::invalid_argument);
}

}  // namespace
}  // namespace evanet
