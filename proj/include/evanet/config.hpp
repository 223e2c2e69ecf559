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

#ifndef EVANET_CONFIG_HPP_
#define EVANET_CONFIG_HPP_

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

#include "evanet/dataset.hpp"
#include "evanet/evolution.hpp"
#include "evanet/json_io.hpp"
#include "evanet/surrogate.hpp"
#include "evanet/trainer.hpp"

namespace evanet {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class EvaluatorKind { Surrogate, Train };
enum class SearchMode { Evolution, RandomSearch };

struct SurrogateSettings {
  std::uint64_t seed = 0;
  double noise = 0;
  int length_tolerance = SurrogateLandscape{}.length_tolerance;
  SurrogateWeights weights;
};

// Everything a search, training or ensemble run needs. Every section and
// field is optional in the file; unknown keys are rejected.
struct RunConfig {
  EvolutionConfig evolution;
  EvaluatorKind evaluator = EvaluatorKind::Surrogate;
  SurrogateSettings surrogate;
  TrainConfig train;
  ToyVideoSpec data;
  std::string out;
};

// Throws ConfigError naming the offending field, or the line and column of
// malformed JSON. RandomSearch rejects the mutation keys d, r,
// tournament_size and schedule.
RunConfig parse_run_config(std::string_view text, SearchMode mode = SearchMode::Evolution);
// Fully resolved; keys not applicable to `mode` are omitted.
Json run_config_to_json(const RunConfig& config, SearchMode mode = SearchMode::Evolution);

Json train_config_to_json(const TrainConfig& config);
TrainConfig train_config_from_json(const Json& doc, const std::string& where);
Json data_spec_to_json(const ToyVideoSpec& spec);
ToyVideoSpec data_spec_from_json(const Json& doc, const std::string& where);

SurrogateLandscape make_landscape(const RunConfig& config);

}  // namespace evanet

#endif  // EVANET_CONFIG_HPP_
