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

#include "evanet/run.hpp"

#include <fstream>
#include <memory>
#include <sstream>

#include "evanet/surrogate.hpp"

namespace evanet {
namespace fs = std::filesystem;

Evaluator make_evaluator(const RunConfig& config) {
  if (config.evaluator == EvaluatorKind::Surrogate) {
    auto land = std::make_shared<const SurrogateLandscape>(make_landscape(config));
    return [land](const Genome& g) { return surrogate_fitness(g, *land); };
  }
  auto data = std::make_shared<const Dataset>(generate_toy_dataset(config.data));
  return [data, train = config.train](const Genome& g) { return fitness_train(g, *data, train); };
}

Json archived_config(const RunConfig& config, SearchMode mode) {
  Json doc;
  doc["search"] = mode == SearchMode::Evolution ? "evolution" : "random_search";
  Json resolved = run_config_to_json(config, mode);
  resolved.erase("out");
  resolved["evolution"].erase("workers");
  for (auto& [key, value] : resolved.items()) doc[key] = std::move(value);
  return doc;
}

SearchRun run_archived_search(const RunConfig& config, SearchMode mode, const fs::path& dir,
                              const SearchObserver& progress) {
  const Json frozen = archived_config(config, mode);
  SearchRun run;
  std::vector<Individual> prefix;
  if (archive_exists(dir)) {
    std::ifstream in(dir / kConfigFile);
    std::ostringstream ss;
    ss << in.rdbuf();
    Json existing;
    try {
      existing = Json::parse(ss.str());
    } catch (const Json::parse_error&) {
      throw ArchiveError((dir / kConfigFile).string() + ": unreadable");
    }
    if (existing != frozen) {
      throw ConfigError(dir.string() + " holds a run with a different config");
    }
    prefix = read_population(dir / kPopulationFile);
    run.resumed = prefix.size();
    const auto total = static_cast<std::size_t>(config.evolution.population + config.evolution.rounds);
    if (prefix.size() > total) throw ArchiveError(dir.string() + ": more individuals than the config allows");
    if (prefix.size() == total) {
      run.already_complete = true;
      run.result.history = std::move(prefix);
      return run;
    }
  }

  const Evaluator evaluator = make_evaluator(config);
  ArchiveWriter writer(dir, frozen);
  const SearchObserver observer{
      [&](const Individual& ind) {
        writer.append(ind);
        if (progress.on_individual) progress.on_individual(ind);
      },
      [&](const TraceRow& row) {
        writer.append(row);
        if (progress.on_trace) progress.on_trace(row);
      }};
  try {
    run.result = mode == SearchMode::Evolution
                     ? run_evolution(config.evolution, evaluator, observer, prefix)
                     : run_random_search(config.evolution, evaluator, observer, prefix);
  } catch (const std::invalid_argument& e) {
    throw ArchiveError(dir.string() + ": cannot resume: " + e.what());
  }
  return run;
}

}  // namespace evanet
