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

#include "evanet/config.hpp"

#include <algorithm>
#include <initializer_list>
#include <limits>

namespace evanet {
namespace {

std::string field(const std::string& where, std::string_view key) {
  return where + "/" + std::string(key);
}

// Optional-field reader over one JSON object.
class Fields {
 public:
  Fields(const Json& obj, std::string where, std::initializer_list<std::string_view> allowed)
      : obj_(obj), where_(std::move(where)) {
    if (!obj.is_object()) throw ConfigError(where_ + ": expected an object");
    for (const auto& [key, value] : obj.items()) {
      if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
        throw ConfigError(field(where_, key) + ": unknown field");
      }
    }
  }

  bool has(std::string_view key) const { return obj_.contains(key); }

  void get(std::string_view key, int& out) const {
    if (const Json* v = find(key)) {
      if (!v->is_number_integer() || v->get<long long>() < std::numeric_limits<int>::min() ||
          v->get<long long>() > std::numeric_limits<int>::max()) {
        throw ConfigError(field(where_, key) + ": expected an integer");
      }
      out = v->get<int>();
    }
  }
  void get(std::string_view key, std::uint64_t& out) const {
    if (const Json* v = find(key)) {
      if (!v->is_number_unsigned()) throw ConfigError(field(where_, key) + ": expected a non-negative integer");
      out = v->get<std::uint64_t>();
    }
  }
  void get(std::string_view key, double& out) const {
    if (const Json* v = find(key)) {
      if (!v->is_number()) throw ConfigError(field(where_, key) + ": expected a number");
      out = v->get<double>();
    }
  }
  void get(std::string_view key, std::string& out) const {
    if (const Json* v = find(key)) {
      if (!v->is_string()) throw ConfigError(field(where_, key) + ": expected a string");
      out = v->get<std::string>();
    }
  }
  template <typename Enum, typename Parse>
  void get_enum(std::string_view key, Enum& out, Parse parse) const {
    std::string text;
    get(key, text);
    if (text.empty()) return;
    const auto parsed = parse(text);
    if (!parsed) throw ConfigError(field(where_, key) + ": unknown value \"" + text + "\"");
    out = *parsed;
  }
  const Json* find(std::string_view key) const {
    auto it = obj_.find(key);
    return it == obj_.end() ? nullptr : &*it;
  }
  const std::string& where() const { return where_; }

 private:
  const Json& obj_;
  std::string where_;
};

std::vector<LayerKind> kinds_from(const Json& arr, const std::string& where) {
  if (!arr.is_array()) throw ConfigError(where + ": expected an array");
  std::vector<LayerKind> out;
  for (const Json& v : arr) {
    const auto k = v.is_string() ? parse_layer_kind(v.get<std::string>()) : std::nullopt;
    if (!k) throw ConfigError(where + ": expected layer kind names");
    out.push_back(*k);
  }
  return out;
}

Json kinds_to(const std::vector<LayerKind>& kinds) {
  Json arr = Json::array();
  for (LayerKind k : kinds) arr.push_back(to_string(k));
  return arr;
}

std::optional<EvaluatorKind> parse_evaluator(std::string_view text) {
  if (text == "surrogate") return EvaluatorKind::Surrogate;
  if (text == "train") return EvaluatorKind::Train;
  return std::nullopt;
}

std::string line_column(std::string_view text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

template <typename Fn>
auto rethrow_as_config(Fn&& fn) {
  try {
    return fn();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

}  // namespace

Json train_config_to_json(const TrainConfig& c) {
  Json j;
  j["iterations"] = c.iterations;
  j["batch_size"] = c.batch_size;
  j["learning_rate"] = c.learning_rate;
  j["momentum"] = c.momentum;
  j["seed"] = c.seed;
  j["eval_every"] = c.eval_every;
  return j;
}

TrainConfig train_config_from_json(const Json& doc, const std::string& where) {
  const Fields f(doc, where, {"iterations", "batch_size", "learning_rate", "momentum", "seed", "eval_every"});
  TrainConfig c;
  f.get("iterations", c.iterations);
  f.get("batch_size", c.batch_size);
  f.get("learning_rate", c.learning_rate);
  f.get("momentum", c.momentum);
  f.get("seed", c.seed);
  f.get("eval_every", c.eval_every);
  rethrow_as_config([&] { c.check(); return 0; });
  return c;
}

Json data_spec_to_json(const ToyVideoSpec& s) {
  Json j;
  j["frames"] = s.frames;
  j["height"] = s.height;
  j["width"] = s.width;
  j["channels"] = s.channels;
  j["num_classes"] = s.num_classes;
  j["square"] = s.square;
  j["noise"] = s.noise;
  j["train_samples"] = s.train_samples;
  j["val_samples"] = s.val_samples;
  j["test_samples"] = s.test_samples;
  j["seed"] = s.seed;
  return j;
}

ToyVideoSpec data_spec_from_json(const Json& doc, const std::string& where) {
  const Fields f(doc, where, {"frames", "height", "width", "channels", "num_classes", "square", "noise",
                              "train_samples", "val_samples", "test_samples", "seed"});
  ToyVideoSpec s;
  f.get("frames", s.frames);
  f.get("height", s.height);
  f.get("width", s.width);
  f.get("channels", s.channels);
  f.get("num_classes", s.num_classes);
  f.get("square", s.square);
  f.get("noise", s.noise);
  f.get("train_samples", s.train_samples);
  f.get("val_samples", s.val_samples);
  f.get("test_samples", s.test_samples);
  f.get("seed", s.seed);
  rethrow_as_config([&] { check_spec(s); return 0; });
  return s;
}

RunConfig parse_run_config(std::string_view text, SearchMode mode) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ConfigError("malformed JSON at " + line_column(text, e.byte));
  }
  const Fields top(doc, "", {"evolution", "constraints", "surrogate", "train", "data", "out"});
  RunConfig c;

  if (const Json* evo = top.find("evolution")) {
    const Fields f(*evo, "/evolution", {"population", "tournament_size", "rounds", "d", "r", "schedule",
                                        "removal", "seed", "workers", "meta", "evaluator"});
    if (mode == SearchMode::RandomSearch) {
      for (std::string_view key : {"d", "r", "tournament_size", "schedule"}) {
        if (f.has(key)) throw ConfigError(field("/evolution", key) + ": not applicable to random search");
      }
    }
    EvolutionConfig& e = c.evolution;
    f.get("population", e.population);
    f.get("tournament_size", e.tournament_size);
    f.get("rounds", e.rounds);
    f.get("d", e.d);
    f.get("r", e.r);
    f.get_enum("schedule", e.schedule, parse_schedule);
    f.get_enum("removal", e.removal, parse_removal);
    f.get("seed", e.seed);
    f.get("workers", e.workers);
    f.get_enum("meta", e.meta, parse_meta_kind);
    f.get_enum("evaluator", c.evaluator, parse_evaluator);
  }
  if (mode == SearchMode::RandomSearch) {
    // Selection is unused; keep the config valid for any population size.
    c.evolution.tournament_size = c.evolution.population;
  }
  if (const Json* con = top.find("constraints")) {
    const Fields f(*con, "/constraints",
                   {"allowed_temporal_lens", "max_streams", "max_repeats", "conv_kinds", "pool_kinds"});
    SearchConstraints& s = c.evolution.constraints;
    if (const Json* lens = f.find("allowed_temporal_lens")) {
      if (!lens->is_array()) throw ConfigError("/constraints/allowed_temporal_lens: expected an array");
      s.allowed_temporal_lens.clear();
      for (const Json& v : *lens) {
        if (!v.is_number_integer()) throw ConfigError("/constraints/allowed_temporal_lens: expected integers");
        s.allowed_temporal_lens.push_back(v.get<int>());
      }
    }
    f.get("max_streams", s.max_streams);
    f.get("max_repeats", s.max_repeats);
    if (const Json* k = f.find("conv_kinds")) s.conv_kinds = kinds_from(*k, "/constraints/conv_kinds");
    if (const Json* k = f.find("pool_kinds")) s.pool_kinds = kinds_from(*k, "/constraints/pool_kinds");
  }
  if (const Json* sur = top.find("surrogate")) {
    const Fields f(*sur, "/surrogate", {"seed", "noise", "length_tolerance", "weights"});
    f.get("seed", c.surrogate.seed);
    f.get("noise", c.surrogate.noise);
    f.get("length_tolerance", c.surrogate.length_tolerance);
    if (const Json* w = f.find("weights")) {
      const Fields g(*w, "/surrogate/weights",
                     {"layer_kind", "temporal_len", "stream_count", "stream_type", "repeats"});
      g.get("layer_kind", c.surrogate.weights.layer_kind);
      g.get("temporal_len", c.surrogate.weights.temporal_len);
      g.get("stream_count", c.surrogate.weights.stream_count);
      g.get("stream_type", c.surrogate.weights.stream_type);
      g.get("repeats", c.surrogate.weights.repeats);
    }
    if (c.surrogate.noise < 0 || c.surrogate.noise > 1) throw ConfigError("/surrogate/noise: must be in [0, 1]");
    if (c.surrogate.length_tolerance < 0) throw ConfigError("/surrogate/length_tolerance: must be >= 0");
  }
  if (const Json* t = top.find("train")) c.train = train_config_from_json(*t, "/train");
  if (const Json* d = top.find("data")) c.data = data_spec_from_json(*d, "/data");
  top.get("out", c.out);
  rethrow_as_config([&] { c.evolution.check(); return 0; });
  return c;
}

Json run_config_to_json(const RunConfig& c, SearchMode mode) {
  const EvolutionConfig& e = c.evolution;
  Json evo;
  evo["population"] = e.population;
  if (mode == SearchMode::Evolution) {
    evo["tournament_size"] = e.tournament_size;
    evo["d"] = e.d;
    evo["r"] = e.r;
    evo["schedule"] = to_string(e.schedule);
  }
  evo["rounds"] = e.rounds;
  evo["removal"] = to_string(e.removal);
  evo["seed"] = e.seed;
  evo["workers"] = e.workers;
  evo["meta"] = to_string(e.meta);
  evo["evaluator"] = c.evaluator == EvaluatorKind::Surrogate ? "surrogate" : "train";

  Json con;
  con["allowed_temporal_lens"] = e.constraints.allowed_temporal_lens;
  con["max_streams"] = e.constraints.max_streams;
  con["max_repeats"] = e.constraints.max_repeats;
  con["conv_kinds"] = kinds_to(e.constraints.conv_kinds);
  con["pool_kinds"] = kinds_to(e.constraints.pool_kinds);

  Json sur;
  sur["seed"] = c.surrogate.seed;
  sur["noise"] = c.surrogate.noise;
  sur["length_tolerance"] = c.surrogate.length_tolerance;
  const SurrogateWeights& w = c.surrogate.weights;
  sur["weights"] = Json{{"layer_kind", w.layer_kind}, {"temporal_len", w.temporal_len},
                        {"stream_count", w.stream_count}, {"stream_type", w.stream_type},
                        {"repeats", w.repeats}};

  Json doc;
  doc["evolution"] = std::move(evo);
  doc["constraints"] = std::move(con);
  doc["surrogate"] = std::move(sur);
  doc["train"] = train_config_to_json(c.train);
  doc["data"] = data_spec_to_json(c.data);
  doc["out"] = c.out;
  return doc;
}

SurrogateLandscape make_landscape(const RunConfig& c) {
  SurrogateLandscape land = default_landscape(c.evolution.meta, c.surrogate.seed, c.evolution.constraints);
  land.noise = c.surrogate.noise;
  land.length_tolerance = c.surrogate.length_tolerance;
  land.weights = c.surrogate.weights;
  return land;
}

}  // namespace evanet
