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

#include "evanet/genome.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>

#include "evanet/json_io.hpp"
#include "evanet/kernels.hpp"

namespace evanet {
namespace {

constexpr std::array kLayerKindNames{
    std::pair{LayerKind::Conv3D, std::string_view("conv3d")},
    std::pair{LayerKind::Conv2Plus1D, std::string_view("conv21d")},
    std::pair{LayerKind::ConvITGM, std::string_view("itgm")},
    std::pair{LayerKind::Conv1x1x1, std::string_view("conv1x1")},
    std::pair{LayerKind::MaxPool, std::string_view("maxpool")},
    std::pair{LayerKind::AvgPool, std::string_view("avgpool")},
};

constexpr std::array kStreamTypeNames{
    std::pair{StreamType::OnlyPointwise, std::string_view("t1")},
    std::pair{StreamType::OneSpaceTime, std::string_view("t2")},
    std::pair{StreamType::TwoSpaceTime, std::string_view("t3")},
    std::pair{StreamType::PoolThenPointwise, std::string_view("t4")},
};

constexpr std::array kMetaNames{
    std::pair{MetaKind::InceptionLike, std::string_view("inception")},
    std::pair{MetaKind::ResNetLike, std::string_view("resnet")},
    std::pair{MetaKind::Toy, std::string_view("toy")},
};

template <typename Table, typename Enum>
std::string_view name_of(const Table& table, Enum value) {
  for (const auto& [e, name] : table) {
    if (e == value) return name;
  }
  return "?";
}

template <typename Enum, typename Table>
std::optional<Enum> value_of(const Table& table, std::string_view text) {
  for (const auto& [e, name] : table) {
    if (name == text) return e;
  }
  return std::nullopt;
}

constexpr std::array kAllStreamTypes{
    StreamType::OnlyPointwise, StreamType::OneSpaceTime,
    StreamType::TwoSpaceTime, StreamType::PoolThenPointwise};

int scaled(int base, double scale) {
  return std::max(1, static_cast<int>(std::lround(base * scale)));
}

LayerSpec pointwise(int channels) {
  return LayerSpec{LayerKind::Conv1x1x1, 1, channels};
}

template <typename T>
bool contains(const std::vector<T>& values, const T& v) {
  return std::find(values.begin(), values.end(), v) != values.end();
}

}  // namespace

const SearchConstraints& permissive_constraints() {
  static const SearchConstraints permissive = [] {
    SearchConstraints c;
    c.allowed_temporal_lens.clear();
    for (int len = 1; len <= 31; len += 2) c.allowed_temporal_lens.push_back(len);
    c.pool_kinds = {LayerKind::MaxPool, LayerKind::AvgPool};
    return c;
  }();
  return permissive;
}


bool is_space_time_conv(LayerKind kind) {
  return kind == LayerKind::Conv3D || kind == LayerKind::Conv2Plus1D ||
         kind == LayerKind::ConvITGM;
}

bool is_pool(LayerKind kind) {
  return kind == LayerKind::MaxPool || kind == LayerKind::AvgPool;
}

std::string_view to_string(LayerKind kind) { return name_of(kLayerKindNames, kind); }
std::string_view to_string(StreamType type) { return name_of(kStreamTypeNames, type); }
std::string_view to_string(MetaKind meta) { return name_of(kMetaNames, meta); }

std::optional<LayerKind> parse_layer_kind(std::string_view text) {
  return value_of<LayerKind>(kLayerKindNames, text);
}
std::optional<StreamType> parse_stream_type(std::string_view text) {
  return value_of<StreamType>(kStreamTypeNames, text);
}
std::optional<MetaKind> parse_meta_kind(std::string_view text) {
  return value_of<MetaKind>(kMetaNames, text);
}

void SearchConstraints::check() const {
  if (allowed_temporal_lens.empty()) {
    throw std::invalid_argument("allowed_temporal_lens is empty");
  }
  for (int len : allowed_temporal_lens) {
    if (len < 1 || len % 2 == 0) {
      throw std::invalid_argument("temporal length " + std::to_string(len) +
                                  " must be odd and positive");
    }
  }
  if (max_streams < 1 || max_streams > 6) {
    throw std::invalid_argument("max_streams must be in [1, 6]");
  }
  if (max_repeats < 1 || max_repeats > 6) {
    throw std::invalid_argument("max_repeats must be in [1, 6]");
  }
  if (conv_kinds.empty()) throw std::invalid_argument("conv_kinds is empty");
  for (LayerKind k : conv_kinds) {
    if (!is_space_time_conv(k)) {
      throw std::invalid_argument(std::string(to_string(k)) +
                                  " is not a space-time conv kind");
    }
  }
  if (pool_kinds.empty()) throw std::invalid_argument("pool_kinds is empty");
  for (LayerKind k : pool_kinds) {
    if (!is_pool(k)) {
      throw std::invalid_argument(std::string(to_string(k)) +
                                  " is not a pooling kind");
    }
  }
}

bool SearchConstraints::allows_temporal_len(int len) const {
  return contains(allowed_temporal_lens, len);
}

const MetaLayout& meta_layout(MetaKind meta) {
  static const MetaLayout inception{
      .stem = {{LayerKind::Conv3D, 7, 64},
               {LayerKind::MaxPool, 1, 64},
               {LayerKind::Conv1x1x1, 1, 64},
               {LayerKind::Conv3D, 3, 192},
               {LayerKind::MaxPool, 1, 192}},
      .stem_spatial_stride = {2, 2, 1, 1, 2},
      .module_channels = {256, 480, 512, 512, 512, 528, 832, 832, 1024},
      .reductions = {false, false, false, true, false, false, false, false,
                     true, false},
      .repeats_evolvable = false,
      .default_channel_scale = 1.0,
  };
  static const MetaLayout resnet{
      .stem = {{LayerKind::Conv3D, 7, 64}, {LayerKind::Conv3D, 3, 64}},
      .stem_spatial_stride = {2, 2},
      .module_channels = {256, 512, 1024, 2048},
      .reductions = {false, false, true, true, false},
      .repeats_evolvable = true,
      .default_channel_scale = 1.0,
  };
  static const MetaLayout toy{
      .stem = {{LayerKind::Conv3D, 3, 64}},
      .stem_spatial_stride = {2},
      .module_channels = {128, 256},
      .reductions = {true, true, false},
      .repeats_evolvable = true,
      .default_channel_scale = 0.0625,
  };
  switch (meta) {
    case MetaKind::InceptionLike:
      return inception;
    case MetaKind::ResNetLike:
      return resnet;
    case MetaKind::Toy:
      break;
  }
  return toy;
}

std::size_t module_count(MetaKind meta) {
  return meta_layout(meta).module_channels.size();
}

std::vector<int> split_channels(int total, int streams) {
  if (streams < 1) throw std::invalid_argument("split over zero streams");
  std::vector<int> out(static_cast<std::size_t>(streams), total / streams);
  out.front() += total % streams;
  return out;
}

StreamSpec sample_stream(StreamType type, const SearchConstraints& constraints,
                         int channels, Rng& rng) {
  auto space_time = [&] {
    const LayerKind kind = pick<LayerKind>(constraints.conv_kinds, rng);
    const int len = pick<int>(constraints.allowed_temporal_lens, rng);
    return LayerSpec{kind, len, channels};
  };
  StreamSpec stream{type, {}};
  switch (type) {
    case StreamType::OnlyPointwise:
      stream.layers = {pointwise(channels)};
      break;
    case StreamType::OneSpaceTime:
      stream.layers = {pointwise(channels)};
      stream.layers.push_back(space_time());
      break;
    case StreamType::TwoSpaceTime:
      stream.layers = {pointwise(channels)};
      stream.layers.push_back(space_time());
      stream.layers.push_back(space_time());
      break;
    case StreamType::PoolThenPointwise: {
      const LayerKind kind = pick<LayerKind>(constraints.pool_kinds, rng);
      const int len = pick<int>(constraints.allowed_temporal_lens, rng);
      stream.layers = {LayerSpec{kind, len, channels}, pointwise(channels)};
      break;
    }
  }
  return stream;
}

StreamSpec sample_stream(const SearchConstraints& constraints, int channels,
                         Rng& rng) {
  const StreamType type = pick<StreamType>(kAllStreamTypes, rng);
  return sample_stream(type, constraints, channels, rng);
}

void resplit_channels(ModuleSpec& module) {
  const auto shares =
      split_channels(module.out_channels, static_cast<int>(module.streams.size()));
  for (std::size_t s = 0; s < module.streams.size(); ++s) {
    for (LayerSpec& layer : module.streams[s].layers) {
      layer.out_channels = shares[s];
    }
  }
}

Genome sample_random_genome(MetaKind meta, const SearchConstraints& constraints,
                            std::uint64_t seed) {
  return sample_random_genome(meta, constraints, seed,
                              meta_layout(meta).default_channel_scale);
}

Genome sample_random_genome(MetaKind meta, const SearchConstraints& constraints,
                            std::uint64_t seed, double channel_scale) {
  constraints.check();
  if (!(channel_scale > 0.0) || !std::isfinite(channel_scale)) {
    throw std::invalid_argument("channel_scale must be positive");
  }
  const MetaLayout& layout = meta_layout(meta);
  Rng rng = make_rng(seed);

  Genome genome;
  genome.meta = meta;
  genome.channel_scale = channel_scale;
  for (LayerSpec layer : layout.stem) {
    layer.out_channels = scaled(layer.out_channels, channel_scale);
    if (layer.kind != LayerKind::Conv1x1x1) {
      layer.temporal_len = pick<int>(constraints.allowed_temporal_lens, rng);
    }
    genome.stem.push_back(layer);
  }
  for (int base : layout.module_channels) {
    ModuleSpec module;
    module.out_channels = scaled(base, channel_scale);
    const int max_streams = std::min(constraints.max_streams, module.out_channels);
    const int streams = uniform_int(rng, 1, max_streams);
    module.repeats = layout.repeats_evolvable
                         ? uniform_int(rng, 1, constraints.max_repeats)
                         : 1;
    const auto shares = split_channels(module.out_channels, streams);
    for (int share : shares) {
      module.streams.push_back(sample_stream(constraints, share, rng));
    }
    genome.modules.push_back(std::move(module));
  }
  return genome;
}

ValidationReport validate(const Genome& genome,
                          const SearchConstraints& constraints) {
  ValidationReport report;
  auto fail = [&](const std::string& path, const std::string& what) {
    report.ok = false;
    report.violations.push_back(path + ": " + what);
  };
  auto check_len = [&](const std::string& path, const LayerSpec& layer) {
    if (layer.kind == LayerKind::Conv1x1x1) {
      if (layer.temporal_len != 1) fail(path, "conv1x1 temporal_len must be 1");
    } else if (!constraints.allows_temporal_len(layer.temporal_len)) {
      fail(path, "temporal_len not in allowed set (" +
                     std::to_string(layer.temporal_len) + ")");
    }
    if (layer.out_channels < 1) fail(path, "out_channels must be positive");
  };

  const MetaLayout& layout = meta_layout(genome.meta);
  if (!(genome.channel_scale > 0.0) || !std::isfinite(genome.channel_scale)) {
    fail("channel_scale", "must be positive");
  }

  if (genome.stem.size() != layout.stem.size()) {
    fail("stem", "expected " + std::to_string(layout.stem.size()) +
                     " layers for meta " + std::string(to_string(genome.meta)));
  } else {
    for (std::size_t i = 0; i < genome.stem.size(); ++i) {
      const std::string path = "stem[" + std::to_string(i) + "]";
      if (genome.stem[i].kind != layout.stem[i].kind) {
        fail(path, "stem kind is fixed to " +
                       std::string(to_string(layout.stem[i].kind)));
      }
      check_len(path, genome.stem[i]);
    }
  }

  if (genome.modules.size() != layout.module_channels.size()) {
    fail("modules", "expected " + std::to_string(layout.module_channels.size()) +
                        " modules for meta " +
                        std::string(to_string(genome.meta)));
  }

  for (std::size_t m = 0; m < genome.modules.size(); ++m) {
    const ModuleSpec& module = genome.modules[m];
    const std::string mpath = "modules[" + std::to_string(m) + "]";
    const int n = static_cast<int>(module.streams.size());
    if (n < 1) fail(mpath, "streams < 1");
    if (n > constraints.max_streams) {
      fail(mpath, "streams > " + std::to_string(constraints.max_streams) + " (" +
                      std::to_string(n) + ")");
    }
    if (module.repeats < 1 || module.repeats > constraints.max_repeats) {
      fail(mpath, "repeats not in [1, " + std::to_string(constraints.max_repeats) +
                      "] (" + std::to_string(module.repeats) + ")");
    }
    if (!layout.repeats_evolvable && module.repeats != 1) {
      fail(mpath, "repeats fixed to 1 for meta " +
                      std::string(to_string(genome.meta)));
    }
    if (module.out_channels < std::max(n, 1)) {
      fail(mpath, "out_channels smaller than stream count");
      continue;
    }
    if (n < 1) continue;
    const auto shares = split_channels(module.out_channels, n);
    for (int s = 0; s < n; ++s) {
      const StreamSpec& stream = module.streams[static_cast<std::size_t>(s)];
      const std::string spath = mpath + ".streams[" + std::to_string(s) + "]";
      const auto& layers = stream.layers;
      std::vector<bool> st;  // expected space-time slot pattern
      bool ok_shape = false;
      switch (stream.type) {
        case StreamType::OnlyPointwise:
          ok_shape = layers.size() == 1 && layers[0].kind == LayerKind::Conv1x1x1;
          break;
        case StreamType::OneSpaceTime:
          ok_shape = layers.size() == 2 && layers[0].kind == LayerKind::Conv1x1x1 &&
                     is_space_time_conv(layers[1].kind);
          break;
        case StreamType::TwoSpaceTime:
          ok_shape = layers.size() == 3 && layers[0].kind == LayerKind::Conv1x1x1 &&
                     is_space_time_conv(layers[1].kind) &&
                     is_space_time_conv(layers[2].kind);
          break;
        case StreamType::PoolThenPointwise:
          ok_shape = layers.size() == 2 && is_pool(layers[0].kind) &&
                     layers[1].kind == LayerKind::Conv1x1x1;
          break;
      }
      if (!ok_shape) {
        fail(spath, "layers do not match stream type " +
                        std::string(to_string(stream.type)));
      }
      for (std::size_t l = 0; l < layers.size(); ++l) {
        const LayerSpec& layer = layers[l];
        const std::string lpath = spath + ".layers[" + std::to_string(l) + "]";
        check_len(lpath, layer);
        if (is_space_time_conv(layer.kind) && !contains(constraints.conv_kinds, layer.kind)) {
          fail(lpath, "kind " + std::string(to_string(layer.kind)) +
                          " not in allowed conv kinds");
        }
        if (is_pool(layer.kind) && !contains(constraints.pool_kinds, layer.kind)) {
          fail(lpath, "kind " + std::string(to_string(layer.kind)) +
                          " not in allowed pool kinds");
        }
        if (layer.out_channels != shares[static_cast<std::size_t>(s)]) {
          fail(lpath, "out_channels " + std::to_string(layer.out_channels) +
                          " differs from the even split share " +
                          std::to_string(shares[static_cast<std::size_t>(s)]));
        }
      }
    }
  }
  return report;
}

std::int64_t count_genome_parameters(const Genome& genome, int input_channels,
                                     const SearchConstraints& constraints) {
  const ValidationReport report = validate(genome, constraints);
  if (!report.ok) {
    throw std::invalid_argument("invalid genome: " + report.violations.front());
  }
  if (input_channels < 1) throw std::invalid_argument("input_channels < 1");

  std::int64_t total = 0;
  int cin = input_channels;
  auto walk = [&](const LayerSpec& layer, int in) {
    total += kernels::param_count(layer, in, layer.out_channels, kDefaultMixtures);
    return is_pool(layer.kind) ? in : layer.out_channels;
  };
  for (const LayerSpec& layer : genome.stem) cin = walk(layer, cin);
  for (const ModuleSpec& module : genome.modules) {
    for (int r = 0; r < module.repeats; ++r) {
      for (const StreamSpec& stream : module.streams) {
        int c = cin;
        for (const LayerSpec& layer : stream.layers) c = walk(layer, c);
      }
      if (cin != module.out_channels) {
        total += static_cast<std::int64_t>(cin) * module.out_channels;
      }
      cin = module.out_channels;
    }
  }
  return total;
}

LayerOptionCount layer_option_count(const SearchConstraints& constraints) {
  const int lens = static_cast<int>(constraints.allowed_temporal_lens.size());
  return {static_cast<int>(constraints.conv_kinds.size()) * lens + 1, lens + 1};
}

double search_space_log10_size(const SearchConstraints& constraints,
                               MetaKind meta, int max_convs_per_module,
                               int max_pools_per_module) {
  return search_space_log10_size(layer_option_count(constraints),
                                 static_cast<int>(module_count(meta)),
                                 max_convs_per_module, max_pools_per_module);
}

double search_space_log10_size(LayerOptionCount options, int modules,
                               int max_convs_per_module, int max_pools_per_module) {
  if (max_convs_per_module < 1 || max_pools_per_module < 1) {
    throw std::invalid_argument("B and D must be >= 1");
  }
  if (options.conv_options < 1 || options.pool_options < 1 || modules < 1) {
    throw std::invalid_argument("option counts and module count must be positive");
  }
  const double conv = options.conv_options;
  const double pool = options.pool_options;
  const double n = modules;
  const double a = (5.0 + max_convs_per_module * n) * std::log10(conv);
  const double b = (max_pools_per_module * n) * std::log10(pool);
  const double hi = std::max(a, b);
  const double lo = std::min(a, b);
  return hi + std::log1p(std::pow(10.0, lo - hi)) / std::log(10.0);
}

// --- serialization -------------------------------------------------------

std::string format_double(double value) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) return "nan";
  return std::string(buf, end);
}

void require_keys(const Json& object, const std::string& where,
                  std::initializer_list<std::string_view> keys) {
  if (!object.is_object()) throw GenomeParseError(where, "expected an object");
  for (const auto& [key, value] : object.items()) {
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
      throw GenomeParseError(where + "/" + key, "unknown field");
    }
  }
  for (std::string_view key : keys) {
    if (!object.contains(key)) {
      throw GenomeParseError(where + "/" + std::string(key), "missing field");
    }
  }
}

const Json& require(const Json& object, const std::string& where,
                    std::string_view key) {
  if (!object.is_object()) throw GenomeParseError(where, "expected an object");
  auto it = object.find(key);
  if (it == object.end()) {
    throw GenomeParseError(where + "/" + std::string(key), "missing field");
  }
  return *it;
}

long long require_int(const Json& object, const std::string& where,
                      std::string_view key) {
  const Json& v = require(object, where, key);
  if (!v.is_number_integer()) {
    throw GenomeParseError(where + "/" + std::string(key), "expected an integer");
  }
  return v.get<long long>();
}

double require_number(const Json& object, const std::string& where,
                      std::string_view key) {
  const Json& v = require(object, where, key);
  if (!v.is_number()) {
    throw GenomeParseError(where + "/" + std::string(key), "expected a number");
  }
  return v.get<double>();
}

std::string require_string(const Json& object, const std::string& where,
                           std::string_view key) {
  const Json& v = require(object, where, key);
  if (!v.is_string()) {
    throw GenomeParseError(where + "/" + std::string(key), "expected a string");
  }
  return v.get<std::string>();
}

Json layer_to_json(const LayerSpec& layer) {
  Json j;
  j["kind"] = to_string(layer.kind);
  j["t"] = layer.temporal_len;
  j["c"] = layer.out_channels;
  return j;
}

Json genome_to_json(const Genome& genome) {
  Json doc;
  doc["meta"] = to_string(genome.meta);
  doc["channel_scale"] = genome.channel_scale;
  doc["stem"] = Json::array();
  for (const LayerSpec& layer : genome.stem) doc["stem"].push_back(layer_to_json(layer));
  doc["modules"] = Json::array();
  for (const ModuleSpec& module : genome.modules) {
    Json m;
    m["repeats"] = module.repeats;
    m["out_channels"] = module.out_channels;
    m["streams"] = Json::array();
    for (const StreamSpec& stream : module.streams) {
      Json s;
      s["type"] = to_string(stream.type);
      s["layers"] = Json::array();
      for (const LayerSpec& layer : stream.layers) s["layers"].push_back(layer_to_json(layer));
      m["streams"].push_back(std::move(s));
    }
    doc["modules"].push_back(std::move(m));
  }
  return doc;
}

namespace {

int to_int(long long v, const std::string& where) {
  if (v < -(1LL << 30) || v > (1LL << 30)) throw GenomeParseError(where, "integer out of range");
  return static_cast<int>(v);
}

}  // namespace

LayerSpec layer_from_json(const Json& j, const std::string& where) {
  require_keys(j, where, {"kind", "t", "c"});
  const std::string kind_text = require_string(j, where, "kind");
  const auto kind = parse_layer_kind(kind_text);
  if (!kind) throw GenomeParseError(where + "/kind", "unknown layer kind \"" + kind_text + "\"");
  return LayerSpec{*kind, to_int(require_int(j, where, "t"), where + "/t"),
                   to_int(require_int(j, where, "c"), where + "/c")};
}

const Json& require_array(const Json& object, const std::string& where,
                          std::string_view key) {
  const Json& v = require(object, where, key);
  if (!v.is_array()) {
    throw GenomeParseError(where + "/" + std::string(key), "expected an array");
  }
  return v;
}

Genome genome_from_json(const Json& doc, const std::string& where) {
  require_keys(doc, where, {"meta", "channel_scale", "stem", "modules"});
  Genome genome;
  const std::string meta_text = require_string(doc, where, "meta");
  const auto meta = parse_meta_kind(meta_text);
  if (!meta) throw GenomeParseError(where + "/meta", "unknown meta \"" + meta_text + "\"");
  genome.meta = *meta;
  genome.channel_scale = require_number(doc, where, "channel_scale");

  const Json& stem = require_array(doc, where, "stem");
  for (std::size_t i = 0; i < stem.size(); ++i) {
    genome.stem.push_back(layer_from_json(stem[i], where + "/stem/" + std::to_string(i)));
  }
  const Json& modules = require_array(doc, where, "modules");
  for (std::size_t m = 0; m < modules.size(); ++m) {
    const std::string mw = where + "/modules/" + std::to_string(m);
    require_keys(modules[m], mw, {"repeats", "out_channels", "streams"});
    ModuleSpec module;
    module.repeats = to_int(require_int(modules[m], mw, "repeats"), mw + "/repeats");
    module.out_channels =
        to_int(require_int(modules[m], mw, "out_channels"), mw + "/out_channels");
    const Json& streams = require_array(modules[m], mw, "streams");
    for (std::size_t s = 0; s < streams.size(); ++s) {
      const std::string sw = mw + "/streams/" + std::to_string(s);
      require_keys(streams[s], sw, {"type", "layers"});
      const std::string type_text = require_string(streams[s], sw, "type");
      const auto type = parse_stream_type(type_text);
      if (!type) throw GenomeParseError(sw + "/type", "unknown stream type \"" + type_text + "\"");
      StreamSpec stream{*type, {}};
      const Json& layers = require_array(streams[s], sw, "layers");
      for (std::size_t l = 0; l < layers.size(); ++l) {
        stream.layers.push_back(layer_from_json(layers[l], sw + "/layers/" + std::to_string(l)));
      }
      module.streams.push_back(std::move(stream));
    }
    genome.modules.push_back(std::move(module));
  }

  const ValidationReport report = validate(genome, permissive_constraints());
  if (!report.ok) {
    throw GenomeParseError(where.empty() ? "/" : where, report.violations.front());
  }
  return genome;
}

std::string serialize_genome(const Genome& genome) {
  return genome_to_json(genome).dump() + "\n";
}

Genome parse_genome(std::string_view text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw GenomeParseError("byte " + std::to_string(e.byte), e.what());
  }
  return genome_from_json(doc);
}

std::string genome_hash(const Genome& genome) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : serialize_genome(genome)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace evanet
