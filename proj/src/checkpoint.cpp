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

#include "evanet/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include "evanet/archive.hpp"
#include "evanet/config.hpp"

namespace evanet {
namespace fs = std::filesystem;

namespace {

std::string layer_file(const std::string& path) {
  std::string name = path;
  for (char& c : name) {
    if (c == '/') c = '.';
  }
  return "layers/" + name + ".bin";
}

void write_file(const fs::path& file, std::string_view bytes) {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw ArchiveError("write failed: " + file.string());
}

std::string read_file(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw ArchiveError("cannot read " + file.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool same_parameter_shapes(const kernels::Layer& a, const kernels::Layer& b) {
  if (a.index() != b.index()) return false;
  const auto pa = kernels::parameters(a);
  const auto pb = kernels::parameters(b);
  if (pa.size() != pb.size()) return false;
  for (std::size_t i = 0; i < pa.size(); ++i) {
    if (!pa[i]->same_shape(*pb[i])) return false;
  }
  return true;
}

}  // namespace

std::string history_csv(std::span<const HistoryRow> history) {
  std::string out = "iteration,loss,val_accuracy\n";
  for (const HistoryRow& row : history) {
    out += std::to_string(row.iteration) + "," + format_double(row.loss) + "," +
           (row.val_accuracy ? format_double(*row.val_accuracy) : "") + "\n";
  }
  return out;
}

void save_checkpoint(const fs::path& dir, const Checkpoint& cp, std::span<const HistoryRow> history) {
  std::error_code ec;
  fs::create_directories(dir / "layers", ec);
  if (ec) throw ArchiveError("cannot create " + dir.string() + ": " + ec.message());

  Network net = cp.model.network;
  Json layers = Json::array();
  for (const NamedLayer& nl : named_layers(net)) {
    const std::string file = layer_file(nl.path);
    write_file(dir / file, kernels::dump_layer(*nl.layer));
    layers.push_back(Json{{"path", nl.path}, {"file", file}});
  }

  Json m;
  m["genome_hash"] = genome_hash(net.genome);
  m["genome"] = genome_to_json(net.genome);
  m["num_classes"] = net.num_classes;
  m["input_channels"] = net.input_channels;
  m["iteration"] = cp.model.iteration;
  m["train"] = train_config_to_json(cp.train);
  m["data"] = data_spec_to_json(cp.data);
  m["metrics"] = cp.metrics;
  m["layers"] = std::move(layers);
  write_file(dir / "manifest.json", m.dump(2) + "\n");
  write_file(dir / "history.csv", history_csv(history));
}

Checkpoint load_checkpoint(const fs::path& path) {
  const fs::path dir = fs::is_directory(path) ? path : path.parent_path();
  Json m;
  try {
    m = Json::parse(read_file(dir / "manifest.json"));
  } catch (const Json::parse_error& e) {
    throw ArchiveError((dir / "manifest.json").string() + ": " + e.what());
  }
  require_keys(m, "", {"genome_hash", "genome", "num_classes", "input_channels", "iteration", "train",
                       "data", "metrics", "layers"});

  Checkpoint cp;
  const Genome genome = genome_from_json(require(m, "", "genome"), "/genome");
  if (require_string(m, "", "genome_hash") != genome_hash(genome)) {
    throw GenomeParseError("/genome_hash", "does not match the genome");
  }
  const int num_classes = static_cast<int>(require_int(m, "", "num_classes"));
  const int input_channels = static_cast<int>(require_int(m, "", "input_channels"));
  try {
    cp.train = train_config_from_json(require(m, "", "train"), "/train");
    cp.data = data_spec_from_json(require(m, "", "data"), "/data");
  } catch (const ConfigError& e) {
    throw GenomeParseError("", e.what());
  }
  cp.metrics = require(m, "", "metrics");
  cp.model.iteration = static_cast<int>(require_int(m, "", "iteration"));
  cp.model.network = build_network(genome, num_classes, input_channels, 0);

  const Json& files = require_array(m, "", "layers");
  auto named = named_layers(cp.model.network);
  if (files.size() != named.size()) {
    throw GenomeParseError("/layers", "expected " + std::to_string(named.size()) + " layers");
  }
  for (std::size_t i = 0; i < named.size(); ++i) {
    const std::string where = "/layers/" + std::to_string(i);
    require_keys(files[i], where, {"path", "file"});
    if (require_string(files[i], where, "path") != named[i].path) {
      throw GenomeParseError(where + "/path", "expected " + named[i].path);
    }
    kernels::Layer loaded = kernels::load_layer(read_file(dir / require_string(files[i], where, "file")));
    if (!same_parameter_shapes(loaded, *named[i].layer)) {
      throw GenomeParseError(where, "layer does not match the genome");
    }
    *named[i].layer = std::move(loaded);
  }
  return cp;
}

}  // namespace evanet
