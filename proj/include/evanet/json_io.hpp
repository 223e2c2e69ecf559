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

#ifndef EVANET_JSON_IO_HPP_
#define EVANET_JSON_IO_HPP_

// JSON conversions shared by the genome, mutation-log, archive and checkpoint
// formats. Kept out of the public headers that do not need nlohmann/json.

#include <initializer_list>
#include <string>
#include <string_view>

#include "json.hpp"
#include "evanet/genome.hpp"
#include "evanet/mutation.hpp"

namespace evanet {

using Json = nlohmann::ordered_json;

Json layer_to_json(const LayerSpec& layer);
LayerSpec layer_from_json(const Json& j, const std::string& where);
Json genome_to_json(const Genome& genome);

// `where` is the JSON pointer of `doc`, used in GenomeParseError messages.
Genome genome_from_json(const Json& doc, const std::string& where = "");

Json mutation_to_json(const MutationRecord& record);
MutationRecord mutation_from_json(const Json& doc, const std::string& where = "");

// Strict object helpers: throw GenomeParseError naming the field.
void require_keys(const Json& object, const std::string& where,
                  std::initializer_list<std::string_view> keys);
const Json& require(const Json& object, const std::string& where,
                    std::string_view key);
long long require_int(const Json& object, const std::string& where,
                      std::string_view key);
double require_number(const Json& object, const std::string& where,
                      std::string_view key);
std::string require_string(const Json& object, const std::string& where,
                           std::string_view key);
const Json& require_array(const Json& object, const std::string& where,
                          std::string_view key);

// Shortest round-trip decimal representation.
std::string format_double(double value);

}  // namespace evanet

#endif  // EVANET_JSON_IO_HPP_
