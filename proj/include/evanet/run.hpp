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

#ifndef EVANET_RUN_HPP_
#define EVANET_RUN_HPP_

#include <filesystem>

#include "evanet/archive.hpp"
#include "evanet/config.hpp"

namespace evanet {

// Surrogate or train-based, per `config.evaluator`. The returned function
// owns whatever data it needs.
Evaluator make_evaluator(const RunConfig& config);

// Archived config plus the search mode; workers and out are left out so a
// run can be resumed with a different worker count or path.
Json archived_config(const RunConfig& config, SearchMode mode);

struct SearchRun {
  EvolutionResult result;
  std::size_t resumed = 0;  // individuals read back from an existing archive
  bool already_complete = false;
};

// Runs (or resumes) a search, archiving into `dir`. A complete archive is
// left untouched. Throws ConfigError when `dir` holds a run with a
// different config and ArchiveError on I/O failures.
SearchRun run_archived_search(const RunConfig& config, SearchMode mode,
                              const std::filesystem::path& dir,
                              const SearchObserver& progress = {});

}  // namespace evanet

#endif  // EVANET_RUN_HPP_
