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

#include "evanet/archive.hpp"

#include <charconv>
#include <sstream>

namespace evanet {
namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw ArchiveError("cannot read " + file.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Complete lines only.
std::vector<std::string> complete_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  for (std::size_t nl; (nl = text.find('\n', start)) != std::string::npos; start = nl + 1) {
    lines.push_back(text.substr(start, nl - start));
  }
  return lines;
}

void write_line(std::ofstream& out, const std::string& line, const fs::path& file) {
  const std::string full = line + "\n";
  out.write(full.data(), static_cast<std::streamsize>(full.size()));
  out.flush();
  if (!out) throw ArchiveError("write failed: " + file.string());
}

template <typename T>
T parse_field(std::string_view text, const std::string& where) {
  T value{};
  auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || end != text.data() + text.size()) {
    throw ArchiveError(where + ": bad number \"" + std::string(text) + "\"");
  }
  return value;
}

}  // namespace

Json individual_to_json(const Individual& ind) {
  Json j;
  j["id"] = ind.id;
  j["parent_id"] = ind.parent_id ? Json(*ind.parent_id) : Json(nullptr);
  j["birth_round"] = ind.birth_round;
  j["fitness"] = ind.fitness.value;
  j["evaluated_at"] = ind.fitness.evaluated_at;
  j["genome"] = genome_to_json(ind.genome);
  Json log = Json::array();
  for (const MutationRecord& m : ind.mutations) log.push_back(mutation_to_json(m));
  j["mutations"] = std::move(log);
  return j;
}

Individual individual_from_json(const Json& doc, const std::string& where) {
  require_keys(doc, where, {"id", "parent_id", "birth_round", "fitness", "evaluated_at", "genome", "mutations"});
  Individual ind;
  ind.id = require_int(doc, where, "id");
  const Json& parent = require(doc, where, "parent_id");
  if (!parent.is_null()) ind.parent_id = require_int(doc, where, "parent_id");
  ind.birth_round = require_int(doc, where, "birth_round");
  ind.fitness.value = require_number(doc, where, "fitness");
  ind.fitness.evaluated_at = static_cast<int>(require_int(doc, where, "evaluated_at"));
  ind.genome = genome_from_json(require(doc, where, "genome"), where + "/genome");
  const Json& log = require_array(doc, where, "mutations");
  for (std::size_t i = 0; i < log.size(); ++i) {
    ind.mutations.push_back(mutation_from_json(log[i], where + "/mutations/" + std::to_string(i)));
  }
  return ind;
}

std::string trace_row_to_csv(const TraceRow& row) {
  return std::to_string(row.round) + "," + format_double(row.best_fitness) + "," +
         format_double(row.mean_fitness) + "," + std::to_string(row.evaluations);
}

std::vector<Individual> read_population(const fs::path& file) {
  std::vector<Individual> out;
  const auto lines = complete_lines(read_file(file));
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string where = file.filename().string() + ":" + std::to_string(i + 1);
    try {
      out.push_back(individual_from_json(Json::parse(lines[i]), ""));
    } catch (const Json::parse_error& e) {
      throw ArchiveError(where + ": " + e.what());
    } catch (const GenomeParseError& e) {
      throw ArchiveError(where + ": " + e.what());
    }
    if (out.back().id != static_cast<std::int64_t>(i)) {
      throw ArchiveError(where + ": expected id " + std::to_string(i));
    }
  }
  return out;
}

std::vector<TraceRow> read_trace(const fs::path& file) {
  const auto lines = complete_lines(read_file(file));
  if (lines.empty() || lines[0] != kTraceHeader) {
    throw ArchiveError(file.string() + ": missing header");
  }
  std::vector<TraceRow> out;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::string where = file.filename().string() + ":" + std::to_string(i + 1);
    std::vector<std::string_view> cells;
    std::string_view rest = lines[i];
    for (std::size_t comma; (comma = rest.find(',')) != std::string_view::npos; rest.remove_prefix(comma + 1)) {
      cells.push_back(rest.substr(0, comma));
    }
    cells.push_back(rest);
    if (cells.size() != 4) throw ArchiveError(where + ": expected 4 columns");
    out.push_back({parse_field<std::int64_t>(cells[0], where), parse_field<double>(cells[1], where),
                   parse_field<double>(cells[2], where), parse_field<std::int64_t>(cells[3], where)});
  }
  return out;
}

bool archive_exists(const fs::path& dir) { return fs::exists(dir / kPopulationFile); }

Archive read_archive(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw ArchiveError("no archive at " + dir.string());
  Archive a;
  try {
    a.config = Json::parse(read_file(dir / kConfigFile));
  } catch (const Json::parse_error& e) {
    throw ArchiveError((dir / kConfigFile).string() + ": " + e.what());
  }
  a.individuals = read_population(dir / kPopulationFile);
  a.trace = read_trace(dir / kTraceFile);
  return a;
}

std::string report_trace_csv(const Archive& archive) {
  std::int64_t population = 0;
  if (archive.config.contains("evolution") && archive.config["evolution"].contains("population")) {
    population = archive.config["evolution"]["population"].get<std::int64_t>();
  }
  const auto committed = static_cast<std::int64_t>(archive.individuals.size()) - population;
  std::string out = std::string(kTraceHeader) + "\n";
  for (const TraceRow& row : archive.trace) {
    if (row.round > committed) break;
    out += trace_row_to_csv(row) + "\n";
  }
  return out;
}

std::string report_layers_csv(const Archive& archive, int k) {
  static constexpr LayerKind kinds[] = {LayerKind::Conv3D, LayerKind::Conv2Plus1D, LayerKind::ConvITGM};
  std::string out = "rank,id,fitness";
  for (LayerKind kind : kinds) out += "," + std::string(to_string(kind));
  out += ",total";
  for (LayerKind kind : kinds) out += ",mean_len_" + std::string(to_string(kind));
  out += "\n";

  const TopK top = top_k(archive.individuals, k);
  for (std::size_t rank = 0; rank < top.individuals.size(); ++rank) {
    const Individual& ind = top.individuals[rank];
    int count[3] = {0, 0, 0};
    int length[3] = {0, 0, 0};
    for (const ModuleSpec& m : ind.genome.modules) {
      for (const StreamSpec& s : m.streams) {
        for (const LayerSpec& l : s.layers) {
          for (int i = 0; i < 3; ++i) {
            if (l.kind == kinds[i]) {
              ++count[i];
              length[i] += l.temporal_len;
            }
          }
        }
      }
    }
    out += std::to_string(rank + 1) + "," + std::to_string(ind.id) + "," + format_double(ind.fitness.value);
    for (int c : count) out += "," + std::to_string(c);
    out += "," + std::to_string(count[0] + count[1] + count[2]);
    for (int i = 0; i < 3; ++i) {
      out += ",";
      if (count[i] > 0) out += format_double(static_cast<double>(length[i]) / count[i]);
    }
    out += "\n";
  }
  return out;
}

ArchiveWriter::ArchiveWriter(const fs::path& dir, const Json& config) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ArchiveError("cannot create " + dir.string() + ": " + ec.message());

  const fs::path pop = dir / kPopulationFile;
  if (fs::exists(pop)) {
    const std::string text = read_file(pop);
    const std::size_t keep = text.rfind('\n') == std::string::npos ? 0 : text.rfind('\n') + 1;
    if (keep != text.size()) fs::resize_file(pop, keep);
  }
  {
    std::ofstream cfg(dir / kConfigFile, std::ios::binary | std::ios::trunc);
    cfg << config.dump(2) << "\n";
    if (!cfg) throw ArchiveError("write failed: " + (dir / kConfigFile).string());
  }
  population_.open(pop, std::ios::binary | std::ios::app);
  trace_.open(dir / kTraceFile, std::ios::binary | std::ios::trunc);
  if (!population_ || !trace_) throw ArchiveError("cannot open archive files in " + dir.string());
  write_line(trace_, kTraceHeader, dir / kTraceFile);
}

void ArchiveWriter::append(const Individual& individual) {
  write_line(population_, individual_to_json(individual).dump(), kPopulationFile);
}

void ArchiveWriter::append(const TraceRow& row) { write_line(trace_, trace_row_to_csv(row), kTraceFile); }

}  // namespace evanet
