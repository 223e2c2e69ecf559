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

#ifndef EVANET_ARCHIVE_HPP_
#define EVANET_ARCHIVE_HPP_

#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "evanet/evolution.hpp"
#include "evanet/json_io.hpp"

namespace evanet {

// I/O failures and unreadable archives.
class ArchiveError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr const char* kPopulationFile = "population.jsonl";
inline constexpr const char* kTraceFile = "trace.csv";
inline constexpr const char* kConfigFile = "config.json";
inline constexpr const char* kTraceHeader = "round,best_fitness,mean_fitness,evaluations";

// Wall time is left out so that archives are reproducible byte for byte.
Json individual_to_json(const Individual& individual);
Individual individual_from_json(const Json& doc, const std::string& where = "");
std::string trace_row_to_csv(const TraceRow& row);

struct Archive {
  Json config;
  std::vector<Individual> individuals;  // id order
  std::vector<TraceRow> trace;
};

// A trailing line without its newline is an interrupted write and is
// skipped. Missing files throw ArchiveError.
std::vector<Individual> read_population(const std::filesystem::path& file);
std::vector<TraceRow> read_trace(const std::filesystem::path& file);
Archive read_archive(const std::filesystem::path& dir);
bool archive_exists(const std::filesystem::path& dir);

// Report data. The trace stops at the last round whose child made it into
// the population file. The layer table has one row per top-k genome with
// counts and mean temporal lengths of the module space-time convs.
std::string report_trace_csv(const Archive& archive);
std::string report_layers_csv(const Archive& archive, int k);

// Appends whole lines, flushed one at a time. Opening an existing
// population file drops any partial trailing line first; the trace file is
// always rewritten from the start.
class ArchiveWriter {
 public:
  ArchiveWriter(const std::filesystem::path& dir, const Json& config);

  void append(const Individual& individual);
  void append(const TraceRow& row);

 private:
  std::ofstream population_;
  std::ofstream trace_;
};

}  // namespace evanet

#endif  // EVANET_ARCHIVE_HPP_
