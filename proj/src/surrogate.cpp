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

#include "evanet/surrogate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "evanet/random.hpp"

namespace evanet {
namespace {

struct Tally {
  double earned = 0;
  double possible = 0;
  int attributes = 0;

  void add(double weight, double credit) {
    earned += weight * credit;
    possible += weight;
    ++attributes;
  }
};

double length_credit(int want, int have, int tolerance) {
  if (want == have) return 1.0;
  if (tolerance <= 0) return 0.0;
  return std::max(0.0, 1.0 - std::abs(want - have) / (2.0 * tolerance));
}

// Weighted credit a candidate stream (null if unmatched) earns against a
// target stream; each attribute is also recorded in `tally` when given.
double stream_credit(const StreamSpec& target, const StreamSpec* cand,
                     const SurrogateLandscape& land, Tally* tally) {
  const SurrogateWeights& w = land.weights;
  const bool same_type = cand && cand->type == target.type;
  double earned = w.stream_type * (same_type ? 1.0 : 0.0);
  if (tally) tally->add(w.stream_type, same_type ? 1.0 : 0.0);
  for (std::size_t l = 0; l < target.layers.size(); ++l) {
    const LayerSpec& t = target.layers[l];
    const LayerSpec* c = same_type ? &cand->layers[l] : nullptr;
    if (is_space_time_conv(t.kind)) {
      const double kind = c && c->kind == t.kind ? 1.0 : 0.0;
      earned += w.layer_kind * kind;
      if (tally) tally->add(w.layer_kind, kind);
    }
    if (is_space_time_conv(t.kind) || is_pool(t.kind)) {
      const double len = c ? length_credit(t.temporal_len, c->temporal_len, land.length_tolerance) : 0.0;
      earned += w.temporal_len * len;
      if (tally) tally->add(w.temporal_len, len);
    }
  }
  return earned;
}

// Best assignment of candidate streams to target streams (each used once).
std::vector<int> best_assignment(const ModuleSpec& target, const ModuleSpec& cand,
                                 const SurrogateLandscape& land) {
  const std::size_t n = target.streams.size();
  const std::size_t m = cand.streams.size();
  if (m > 20) throw std::invalid_argument("too many streams to match");
  std::vector<std::vector<double>> credit(n, std::vector<double>(m));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      credit[i][j] = stream_credit(target.streams[i], &cand.streams[j], land, nullptr);
    }
  }
  const std::size_t masks = std::size_t{1} << m;
  // best[i][mask]: max credit for target streams i.. with candidates in mask used.
  std::vector<std::vector<double>> best(n + 1, std::vector<double>(masks, 0.0));
  for (std::size_t i = n; i-- > 0;) {
    for (std::size_t mask = 0; mask < masks; ++mask) {
      double b = best[i + 1][mask];
      for (std::size_t j = 0; j < m; ++j) {
        if (!(mask >> j & 1)) b = std::max(b, credit[i][j] + best[i + 1][mask | (std::size_t{1} << j)]);
      }
      best[i][mask] = b;
    }
  }
  std::vector<int> pick(n, -1);
  std::size_t mask = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (best[i][mask] == best[i + 1][mask]) continue;
    for (std::size_t j = 0; j < m; ++j) {
      if (!(mask >> j & 1) && best[i][mask] == credit[i][j] + best[i + 1][mask | (std::size_t{1} << j)]) {
        pick[i] = static_cast<int>(j);
        mask |= std::size_t{1} << j;
        break;
      }
    }
  }
  return pick;
}

Tally score(const Genome& genome, const SurrogateLandscape& land) {
  const Genome& target = land.target;
  const SurrogateWeights& w = land.weights;
  Tally tally;
  for (std::size_t l = 0; l < target.stem.size(); ++l) {
    if (target.stem[l].kind == LayerKind::Conv1x1x1) continue;
    tally.add(w.temporal_len, length_credit(target.stem[l].temporal_len, genome.stem[l].temporal_len,
                                            land.length_tolerance));
  }
  const bool repeats = meta_layout(target.meta).repeats_evolvable;
  for (std::size_t m = 0; m < target.modules.size(); ++m) {
    const ModuleSpec& t = target.modules[m];
    const ModuleSpec& c = genome.modules[m];
    if (repeats) tally.add(w.repeats, t.repeats == c.repeats ? 1.0 : 0.0);
    tally.add(w.stream_count, t.streams.size() == c.streams.size() ? 1.0 : 0.0);
    const std::vector<int> pick = best_assignment(t, c, land);
    std::vector<bool> used(c.streams.size(), false);
    for (std::size_t s = 0; s < t.streams.size(); ++s) {
      const StreamSpec* cand = nullptr;
      if (pick[s] >= 0) {
        used[static_cast<std::size_t>(pick[s])] = true;
        cand = &c.streams[static_cast<std::size_t>(pick[s])];
      }
      stream_credit(t.streams[s], cand, land, &tally);
    }
    // Surplus candidate streams count against the score with their own attributes.
    for (std::size_t j = 0; j < c.streams.size(); ++j) {
      if (!used[j]) stream_credit(c.streams[j], nullptr, land, &tally);
    }
  }
  return tally;
}

void check_meta(const Genome& genome, const SurrogateLandscape& land) {
  if (genome.meta != land.target.meta) {
    throw std::invalid_argument("surrogate target is " + std::string(to_string(land.target.meta)) +
                                ", genome is " + std::string(to_string(genome.meta)));
  }
  if (genome.stem.size() != land.target.stem.size() ||
      genome.modules.size() != land.target.modules.size()) {
    throw std::invalid_argument("genome skeleton does not match the surrogate target");
  }
}

}  // namespace

SurrogateLandscape default_landscape(MetaKind meta, std::uint64_t seed,
                                     const SearchConstraints& constraints) {
  SurrogateLandscape land;
  land.target = sample_random_genome(meta, constraints, mix_seed(seed, 0x7375));
  land.noise_seed = seed;
  return land;
}

int surrogate_attribute_count(const Genome& target) {
  SurrogateLandscape land;
  land.target = target;
  return score(target, land).attributes;
}

double surrogate_similarity(const Genome& genome, const SurrogateLandscape& land) {
  check_meta(genome, land);
  const Tally t = score(genome, land);
  return t.possible > 0 ? t.earned / t.possible : 1.0;
}

Fitness surrogate_fitness(const Genome& genome, const SurrogateLandscape& land) {
  double value = surrogate_similarity(genome, land);
  if (land.noise > 0) {
    const std::uint64_t h = std::strtoull(genome_hash(genome).c_str(), nullptr, 16);
    const double u = static_cast<double>(mix_seed(h, land.noise_seed) >> 11) * 0x1.0p-53;
    value -= land.noise * u * (1.0 - value);
  }
  return Fitness{std::clamp(value, 0.0, 1.0), 0, 0.0};
}

}  // namespace evanet
