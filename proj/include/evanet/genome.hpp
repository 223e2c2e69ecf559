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

#ifndef EVANET_GENOME_HPP_
#define EVANET_GENOME_HPP_

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "evanet/random.hpp"

namespace evanet {

enum class LayerKind { Conv3D, Conv2Plus1D, ConvITGM, Conv1x1x1, MaxPool, AvgPool };

enum class StreamType {
  OnlyPointwise,      // t1: 1x1x1
  OneSpaceTime,       // t2: 1x1x1 -> space-time conv
  TwoSpaceTime,       // t3: 1x1x1 -> space-time conv -> space-time conv
  PoolThenPointwise,  // t4: space-time pool -> 1x1x1
};

enum class MetaKind { InceptionLike, ResNetLike, Toy };

bool is_space_time_conv(LayerKind kind);
bool is_pool(LayerKind kind);

std::string_view to_string(LayerKind kind);
std::string_view to_string(StreamType type);
std::string_view to_string(MetaKind meta);
std::optional<LayerKind> parse_layer_kind(std::string_view text);
std::optional<StreamType> parse_stream_type(std::string_view text);
std::optional<MetaKind> parse_meta_kind(std::string_view text);

// Spatial extent is implied by kind: 3x3 for space-time convs and pools,
// 1x1 for Conv1x1x1 (whose temporal_len is always 1). Pools preserve their
// input channels; their `out_channels` records the stream share only.
struct LayerSpec {
  LayerKind kind = LayerKind::Conv1x1x1;
  int temporal_len = 1;
  int out_channels = 1;

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

struct StreamSpec {
  StreamType type = StreamType::OnlyPointwise;
  std::vector<LayerSpec> layers;

  int out_channels() const { return layers.empty() ? 0 : layers.back().out_channels; }
  friend bool operator==(const StreamSpec&, const StreamSpec&) = default;
};

struct ModuleSpec {
  std::vector<StreamSpec> streams;
  int repeats = 1;
  int out_channels = 1;

  friend bool operator==(const ModuleSpec&, const ModuleSpec&) = default;
};

// Channel counts stored in a genome are the executed widths; channel_scale
// records the multiplier that was applied to the meta-architecture's base
// widths when the genome was sampled.
struct Genome {
  MetaKind meta = MetaKind::Toy;
  double channel_scale = 1.0;
  std::vector<LayerSpec> stem;
  std::vector<ModuleSpec> modules;

  friend bool operator==(const Genome&, const Genome&) = default;
};

struct SearchConstraints {
  std::vector<int> allowed_temporal_lens{1, 3, 5, 7, 9, 11};
  int max_streams = 6;
  int max_repeats = 6;
  std::vector<LayerKind> conv_kinds{LayerKind::Conv3D, LayerKind::Conv2Plus1D,
                                    LayerKind::ConvITGM};
  std::vector<LayerKind> pool_kinds{LayerKind::MaxPool};

  // Throws std::invalid_argument on empty sets, even/non-positive lengths or
  // kinds outside their family.
  void check() const;
  bool allows_temporal_len(int len) const;
};

// Anything the type invariants admit: odd lengths up to 31, both pool kinds.
// Used for archived genomes.
const SearchConstraints& permissive_constraints();

// Fixed skeleton of a meta-architecture.
struct MetaLayout {
  std::vector<LayerSpec> stem;          // base widths, default lengths
  std::vector<int> stem_spatial_stride;  // per stem layer
  std::vector<int> module_channels;      // base widths
  // reductions[k] is true when a 1x3x3 stride-2 max pool follows module k-1
  // (index 0: after the stem).
  std::vector<bool> reductions;
  bool repeats_evolvable = true;
  double default_channel_scale = 1.0;
};

const MetaLayout& meta_layout(MetaKind meta);
std::size_t module_count(MetaKind meta);

constexpr int kSpatialKernel = 3;
constexpr int kDefaultMixtures = 4;

// Even split of `total` over `streams`; the remainder goes to the first stream.
std::vector<int> split_channels(int total, int streams);

Genome sample_random_genome(MetaKind meta, const SearchConstraints& constraints,
                            std::uint64_t seed);
Genome sample_random_genome(MetaKind meta, const SearchConstraints& constraints,
                            std::uint64_t seed, double channel_scale);

// Draws a stream of a uniformly chosen type with `channels` width.
StreamSpec sample_stream(const SearchConstraints& constraints, int channels,
                         Rng& rng);
StreamSpec sample_stream(StreamType type, const SearchConstraints& constraints,
                         int channels, Rng& rng);

// Re-divides `module.out_channels` over its current streams.
void resplit_channels(ModuleSpec& module);

struct ValidationReport {
  bool ok = true;
  std::vector<std::string> violations;
};

ValidationReport validate(const Genome& genome,
                          const SearchConstraints& constraints = {});

// Convolution weights (bias excluded) over stem, all module repetitions and
// the 1x1x1 residual projections inserted where a module changes width.
// Throws std::invalid_argument for an invalid genome.
std::int64_t count_genome_parameters(const Genome& genome, int input_channels,
                                     const SearchConstraints& constraints = {});

struct LayerOptionCount {
  int conv_options = 0;
  int pool_options = 0;
  friend bool operator==(const LayerOptionCount&, const LayerOptionCount&) = default;
};

LayerOptionCount layer_option_count(const SearchConstraints& constraints);

// log10 of (conv^(5 + B*N) + pool^(D*N)) with N the meta's module count.
double search_space_log10_size(const SearchConstraints& constraints,
                               MetaKind meta, int max_convs_per_module,
                               int max_pools_per_module);
double search_space_log10_size(LayerOptionCount options, int module_count,
                               int max_convs_per_module, int max_pools_per_module);

class GenomeParseError : public std::runtime_error {
 public:
  GenomeParseError(std::string where, const std::string& reason)
      : std::runtime_error(where + ": " + reason), where_(std::move(where)) {}
  const std::string& where() const { return where_; }

 private:
  std::string where_;
};

// One JSON document terminated by '\n'.
std::string serialize_genome(const Genome& genome);
// Strict: every field required, unknown fields rejected, invariants checked.
Genome parse_genome(std::string_view text);

// 64-bit FNV-1a of the serialized genome, as 16 hex digits.
std::string genome_hash(const Genome& genome);

}  // namespace evanet

#endif  // EVANET_GENOME_HPP_
