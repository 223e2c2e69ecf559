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

#include "evanet/mutation.hpp"

#include <algorithm>
#include <array>

#include "evanet/json_io.hpp"

namespace evanet {
namespace {

constexpr std::array kMutationNames{
    std::pair{MutationKind::ChangeLayerType, std::string_view("change_layer_type")},
    std::pair{MutationKind::ChangeTemporalSize, std::string_view("change_temporal_size")},
    std::pair{MutationKind::AddOrRemoveStream, std::string_view("add_or_remove_stream")},
    std::pair{MutationKind::ChangeRepeatCount, std::string_view("change_repeat_count")},
};

std::string path_string(std::span<const int> path) {
  std::string out = "[";
  for (std::size_t i = 0; i < path.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(path[i]);
  }
  return out + "]";
}

LayerSpec& layer_at(Genome& genome, std::span<const int> path) {
  if (path.size() == 2 && path[0] == -1) {
    if (path[1] < 0 || static_cast<std::size_t>(path[1]) >= genome.stem.size()) {
      throw MutationError("no stem layer at " + path_string(path));
    }
    return genome.stem[static_cast<std::size_t>(path[1])];
  }
  if (path.size() != 3 || path[0] < 0 || path[1] < 0 || path[2] < 0) {
    throw MutationError("malformed layer path " + path_string(path));
  }
  const auto m = static_cast<std::size_t>(path[0]);
  const auto s = static_cast<std::size_t>(path[1]);
  const auto l = static_cast<std::size_t>(path[2]);
  if (m >= genome.modules.size() || s >= genome.modules[m].streams.size() ||
      l >= genome.modules[m].streams[s].layers.size()) {
    throw MutationError("no layer at " + path_string(path));
  }
  return genome.modules[m].streams[s].layers[l];
}

ModuleSpec& module_at(Genome& genome, int index) {
  if (index < 0 || static_cast<std::size_t>(index) >= genome.modules.size()) {
    throw MutationError("no module " + std::to_string(index));
  }
  return genome.modules[static_cast<std::size_t>(index)];
}

template <typename T>
std::vector<T> without(const std::vector<T>& values, const T& excluded) {
  std::vector<T> out;
  for (const T& v : values) {
    if (v != excluded) out.push_back(v);
  }
  return out;
}

int max_streams_for(const ModuleSpec& module, const SearchConstraints& constraints) {
  return std::min(constraints.max_streams, module.out_channels);
}

}  // namespace

std::string_view to_string(MutationKind kind) {
  for (const auto& [k, name] : kMutationNames) {
    if (k == kind) return name;
  }
  return "?";
}

std::optional<MutationKind> parse_mutation_kind(std::string_view text) {
  for (const auto& [k, name] : kMutationNames) {
    if (name == text) return k;
  }
  return std::nullopt;
}

int mutation_count_schedule(long long round, int d, int r) {
  if (d < 1 || r < 1 || round < 0) {
    throw std::invalid_argument("schedule requires d >= 1, r >= 1, round >= 0");
  }
  // ceil(d - i/r) == ceil((d*r - i) / r), exact in integers.
  const long long num = static_cast<long long>(d) * r - round;
  if (num <= 0) return 1;
  const long long count = (num + r - 1) / r;
  return static_cast<int>(std::max(count, 1LL));
}

Mutation mutate_layer_type(const Genome& genome, std::span<const int> path,
                           const SearchConstraints& constraints, Rng& rng) {
  if (path.size() != 3) {
    throw MutationError("layer type changes address module layers, got " + path_string(path));
  }
  Mutation out{genome, {}};
  LayerSpec& layer = layer_at(out.child, path);
  if (!is_space_time_conv(layer.kind)) {
    throw MutationError("layer at " + path_string(path) + " is not a space-time conv");
  }
  const auto choices = without(constraints.conv_kinds, layer.kind);
  if (choices.empty()) throw MutationError("no alternative kind");
  const LayerKind next = pick<LayerKind>(choices, rng);
  out.record = {MutationKind::ChangeLayerType, {path.begin(), path.end()}, layer.kind, next, {}};
  layer.kind = next;
  return out;
}

Mutation mutate_temporal_size(const Genome& genome, std::span<const int> path,
                              const SearchConstraints& constraints, Rng& rng) {
  Mutation out{genome, {}};
  LayerSpec& layer = layer_at(out.child, path);
  if (!is_space_time_conv(layer.kind) && !is_pool(layer.kind)) {
    throw MutationError("layer at " + path_string(path) + " has no temporal extent");
  }
  if (constraints.allowed_temporal_lens.size() < 2) {
    throw MutationError("singleton temporal length set");
  }
  const auto choices = without(constraints.allowed_temporal_lens, layer.temporal_len);
  const int next = pick<int>(choices, rng);
  out.record = {MutationKind::ChangeTemporalSize, {path.begin(), path.end()}, layer.temporal_len,
                next, {}};
  layer.temporal_len = next;
  return out;
}

Mutation mutate_stream_count(const Genome& genome, int module_index,
                             const SearchConstraints& constraints, Rng& rng) {
  Mutation out{genome, {}};
  ModuleSpec& module = module_at(out.child, module_index);
  const int n = static_cast<int>(module.streams.size());
  const int upper = max_streams_for(module, constraints);
  const bool can_add = n < upper;
  const bool can_remove = n > 1;
  if (!can_add && !can_remove) throw MutationError("stream count pinned at 1");
  const bool add = can_add && (!can_remove || uniform_int(rng, 0, 1) == 0);

  MutationRecord record{MutationKind::AddOrRemoveStream, {}, n, 0, {}};
  if (add) {
    const auto shares = split_channels(module.out_channels, n + 1);
    module.streams.push_back(sample_stream(constraints, shares.back(), rng));
    record.path = {module_index, n};
    record.after = n + 1;
  } else {
    const int victim = uniform_int(rng, 0, n - 1);
    module.streams.erase(module.streams.begin() + victim);
    record.path = {module_index, victim};
    record.after = n - 1;
  }
  resplit_channels(module);
  if (add) record.added_stream = module.streams.back();
  out.record = std::move(record);
  return out;
}

Mutation mutate_repeat_count(const Genome& genome, int module_index,
                             const SearchConstraints& constraints, Rng& rng) {
  if (!meta_layout(genome.meta).repeats_evolvable) throw MutationError("repeats fixed");
  Mutation out{genome, {}};
  ModuleSpec& module = module_at(out.child, module_index);
  std::vector<int> choices;
  for (int r = 1; r <= constraints.max_repeats; ++r) {
    if (r != module.repeats) choices.push_back(r);
  }
  if (choices.empty()) throw MutationError("no alternative repeat count");
  const int next = pick<int>(choices, rng);
  out.record = {MutationKind::ChangeRepeatCount, {module_index}, module.repeats, next, {}};
  module.repeats = next;
  return out;
}

std::vector<std::vector<int>> mutation_targets(const Genome& genome, MutationKind kind,
                                               const SearchConstraints& constraints) {
  std::vector<std::vector<int>> targets;
  switch (kind) {
    case MutationKind::ChangeLayerType:
    case MutationKind::ChangeTemporalSize: {
      const bool include_pools = kind == MutationKind::ChangeTemporalSize;
      if (include_pools) {
        for (std::size_t l = 0; l < genome.stem.size(); ++l) {
          if (genome.stem[l].kind != LayerKind::Conv1x1x1) targets.push_back({-1, static_cast<int>(l)});
        }
      }
      for (std::size_t m = 0; m < genome.modules.size(); ++m) {
        const auto& streams = genome.modules[m].streams;
        for (std::size_t s = 0; s < streams.size(); ++s) {
          for (std::size_t l = 0; l < streams[s].layers.size(); ++l) {
            const LayerKind k = streams[s].layers[l].kind;
            if (is_space_time_conv(k) || (include_pools && is_pool(k))) {
              targets.push_back({static_cast<int>(m), static_cast<int>(s), static_cast<int>(l)});
            }
          }
        }
      }
      break;
    }
    case MutationKind::AddOrRemoveStream:
      for (std::size_t m = 0; m < genome.modules.size(); ++m) {
        const ModuleSpec& module = genome.modules[m];
        if (module.streams.size() > 1 ||
            static_cast<int>(module.streams.size()) < max_streams_for(module, constraints)) {
          targets.push_back({static_cast<int>(m)});
        }
      }
      break;
    case MutationKind::ChangeRepeatCount:
      if (meta_layout(genome.meta).repeats_evolvable && constraints.max_repeats > 1) {
        for (std::size_t m = 0; m < genome.modules.size(); ++m) targets.push_back({static_cast<int>(m)});
      }
      break;
  }
  return targets;
}

MutationResult apply_random_mutations(const Genome& genome, int count,
                                      const SearchConstraints& constraints, Rng& rng,
                                      std::span<const MutationKind> enabled) {
  if (count < 1) throw std::invalid_argument("mutation count must be >= 1");
  MutationResult result{genome, {}};
  int failures = 0;
  while (static_cast<int>(result.log.size()) < count) {
    std::vector<MutationKind> applicable;
    std::vector<std::vector<std::vector<int>>> targets;
    for (MutationKind kind : enabled) {
      auto t = mutation_targets(result.child, kind, constraints);
      if (!t.empty()) {
        applicable.push_back(kind);
        targets.push_back(std::move(t));
      }
    }
    if (applicable.empty()) throw MutationError("no applicable mutation operator");

    const int k = uniform_int(rng, 0, static_cast<int>(applicable.size()) - 1);
    const auto& choices = targets[static_cast<std::size_t>(k)];
    const auto& path = choices[static_cast<std::size_t>(
        uniform_int(rng, 0, static_cast<int>(choices.size()) - 1))];
    try {
      Mutation m;
      switch (applicable[static_cast<std::size_t>(k)]) {
        case MutationKind::ChangeLayerType:
          m = mutate_layer_type(result.child, path, constraints, rng);
          break;
        case MutationKind::ChangeTemporalSize:
          m = mutate_temporal_size(result.child, path, constraints, rng);
          break;
        case MutationKind::AddOrRemoveStream:
          m = mutate_stream_count(result.child, path[0], constraints, rng);
          break;
        case MutationKind::ChangeRepeatCount:
          m = mutate_repeat_count(result.child, path[0], constraints, rng);
          break;
      }
      result.child = std::move(m.child);
      result.log.push_back(std::move(m.record));
    } catch (const MutationError&) {
      if (++failures >= kMaxMutationResamples) {
        throw MutationError("mutation resample budget exhausted");
      }
    }
  }
  return result;
}

Genome apply_mutation(const Genome& genome, const MutationRecord& record) {
  Genome child = genome;
  auto mismatch = [&] {
    return MutationError("record " + std::string(to_string(record.kind)) + " at " +
                         path_string(record.path) + " does not match the genome");
  };
  switch (record.kind) {
    case MutationKind::ChangeLayerType: {
      LayerSpec& layer = layer_at(child, record.path);
      if (record.before != std::variant<int, LayerKind>(layer.kind)) throw mismatch();
      layer.kind = std::get<LayerKind>(record.after);
      break;
    }
    case MutationKind::ChangeTemporalSize: {
      LayerSpec& layer = layer_at(child, record.path);
      if (record.before != std::variant<int, LayerKind>(layer.temporal_len)) throw mismatch();
      layer.temporal_len = std::get<int>(record.after);
      break;
    }
    case MutationKind::AddOrRemoveStream: {
      if (record.path.size() != 2) throw mismatch();
      ModuleSpec& module = module_at(child, record.path[0]);
      const int n = static_cast<int>(module.streams.size());
      if (record.before != std::variant<int, LayerKind>(n)) throw mismatch();
      const int index = record.path[1];
      if (std::get<int>(record.after) == n + 1) {
        if (!record.added_stream || index != n) throw mismatch();
        module.streams.push_back(*record.added_stream);
      } else if (std::get<int>(record.after) == n - 1) {
        if (index < 0 || index >= n) throw mismatch();
        module.streams.erase(module.streams.begin() + index);
      } else {
        throw mismatch();
      }
      resplit_channels(module);
      break;
    }
    case MutationKind::ChangeRepeatCount: {
      if (record.path.size() != 1) throw mismatch();
      ModuleSpec& module = module_at(child, record.path[0]);
      if (record.before != std::variant<int, LayerKind>(module.repeats)) throw mismatch();
      module.repeats = std::get<int>(record.after);
      break;
    }
  }
  return child;
}

Genome replay_log(const Genome& genome, const MutationLog& log) {
  Genome child = genome;
  for (const MutationRecord& record : log) child = apply_mutation(child, record);
  return child;
}

// --- JSON ---------------------------------------------------------------------

namespace {

Json value_to_json(const std::variant<int, LayerKind>& v) {
  if (const auto* kind = std::get_if<LayerKind>(&v)) return Json(to_string(*kind));
  return Json(std::get<int>(v));
}

std::variant<int, LayerKind> value_from_json(const Json& j, MutationKind kind,
                                             const std::string& where) {
  if (kind == MutationKind::ChangeLayerType) {
    if (!j.is_string()) throw GenomeParseError(where, "expected a layer kind");
    const auto k = parse_layer_kind(j.get<std::string>());
    if (!k) throw GenomeParseError(where, "unknown layer kind");
    return *k;
  }
  if (!j.is_number_integer()) throw GenomeParseError(where, "expected an integer");
  return j.get<int>();
}

}  // namespace

Json mutation_to_json(const MutationRecord& record) {
  Json j;
  j["kind"] = to_string(record.kind);
  j["path"] = record.path;
  j["before"] = value_to_json(record.before);
  j["after"] = value_to_json(record.after);
  if (record.added_stream) {
    Json s;
    s["type"] = to_string(record.added_stream->type);
    s["layers"] = Json::array();
    for (const LayerSpec& l : record.added_stream->layers) s["layers"].push_back(layer_to_json(l));
    j["stream"] = std::move(s);
  }
  return j;
}

MutationRecord mutation_from_json(const Json& doc, const std::string& where) {
  if (doc.contains("stream")) {
    require_keys(doc, where, {"kind", "path", "before", "after", "stream"});
  } else {
    require_keys(doc, where, {"kind", "path", "before", "after"});
  }
  MutationRecord record;
  const std::string kind_text = require_string(doc, where, "kind");
  const auto kind = parse_mutation_kind(kind_text);
  if (!kind) throw GenomeParseError(where + "/kind", "unknown mutation kind \"" + kind_text + "\"");
  record.kind = *kind;
  const Json& path = doc.at("path");
  if (!path.is_array()) throw GenomeParseError(where + "/path", "expected an array");
  for (const Json& p : path) {
    if (!p.is_number_integer()) throw GenomeParseError(where + "/path", "expected integers");
    record.path.push_back(p.get<int>());
  }
  record.before = value_from_json(doc.at("before"), record.kind, where + "/before");
  record.after = value_from_json(doc.at("after"), record.kind, where + "/after");
  if (doc.contains("stream")) {
    const std::string sw = where + "/stream";
    const Json& s = doc.at("stream");
    require_keys(s, sw, {"type", "layers"});
    const auto type = parse_stream_type(require_string(s, sw, "type"));
    if (!type) throw GenomeParseError(sw + "/type", "unknown stream type");
    StreamSpec stream{*type, {}};
    const Json& layers = require_array(s, sw, "layers");
    for (std::size_t l = 0; l < layers.size(); ++l) {
      stream.layers.push_back(layer_from_json(layers[l], sw + "/layers/" + std::to_string(l)));
    }
    record.added_stream = std::move(stream);
  }
  return record;
}

std::string serialize_mutation(const MutationRecord& record) {
  return mutation_to_json(record).dump() + "\n";
}

MutationRecord parse_mutation(std::string_view text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw GenomeParseError("byte " + std::to_string(e.byte), e.what());
  }
  return mutation_from_json(doc);
}

}  // namespace evanet
