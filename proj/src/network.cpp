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

#include "evanet/network.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace evanet {
namespace {

int channels_out(const kernels::Layer& layer, int cin) {
  return std::visit(
      [&](const auto& l) -> int {
        using T = std::decay_t<decltype(l)>;
        if constexpr (std::is_same_v<T, kernels::Pool>) {
          return cin;
        } else {
          return static_cast<int>(l.bias.size());
        }
      },
      layer);
}

kernels::Pool reduction_pool() {
  return kernels::Pool{kernels::PoolKind::Max, 1, 3, 3, 2};
}

template <typename NetT, typename Fn>
void for_each_node(NetT& net, Fn&& fn) {
  std::size_t stem = 0, reduce = 0;
  for (auto& stage : net.body) {
    if (auto* node = std::get_if<Node>(&stage)) {
      if (stem < net.genome.stem.size()) {
        fn("stem/" + std::to_string(stem++), *node);
      } else {
        fn("reduce/" + std::to_string(reduce++), *node);
      }
      continue;
    }
    auto& block = std::get<Block>(stage);
    const std::string prefix =
        "modules/" + std::to_string(block.module) + "/repeat/" + std::to_string(block.repeat);
    for (std::size_t s = 0; s < block.streams.size(); ++s) {
      for (std::size_t l = 0; l < block.streams[s].size(); ++l) {
        fn(prefix + "/streams/" + std::to_string(s) + "/layers/" + std::to_string(l),
           block.streams[s][l]);
      }
    }
    if (block.projection) fn(prefix + "/projection", *block.projection);
  }
  fn(std::string("head"), net.head);
}

}  // namespace

Network build_network(const Genome& genome, int num_classes, int input_channels,
                      std::uint64_t init_seed) {
  const ValidationReport report = validate(genome, permissive_constraints());
  if (!report.ok) throw std::invalid_argument("invalid genome: " + report.violations.front());
  if (num_classes < 2) throw std::invalid_argument("num_classes must be >= 2");
  if (input_channels < 1) throw std::invalid_argument("input_channels must be >= 1");

  const MetaLayout& layout = meta_layout(genome.meta);
  Rng rng = make_rng(init_seed, 0x6e6574);
  Network net;
  net.genome = genome;
  net.input_channels = input_channels;
  net.num_classes = num_classes;

  int c = input_channels;
  for (std::size_t i = 0; i < genome.stem.size(); ++i) {
    const LayerSpec& spec = genome.stem[i];
    Node node{kernels::make_layer(spec, c, layout.stem_spatial_stride[i], kDefaultMixtures, rng),
              !is_pool(spec.kind)};
    c = channels_out(node.layer, c);
    net.body.emplace_back(std::move(node));
  }
  if (layout.reductions[0]) net.body.emplace_back(Node{reduction_pool(), false});

  for (std::size_t m = 0; m < genome.modules.size(); ++m) {
    const ModuleSpec& module = genome.modules[m];
    for (int r = 0; r < module.repeats; ++r) {
      Block block;
      block.module = static_cast<int>(m);
      block.repeat = r;
      int total = 0;
      for (const StreamSpec& stream : module.streams) {
        std::vector<Node> nodes;
        int sc = c;
        for (std::size_t l = 0; l < stream.layers.size(); ++l) {
          const LayerSpec& spec = stream.layers[l];
          const bool last = l + 1 == stream.layers.size();
          Node node{kernels::make_layer(spec, sc, 1, kDefaultMixtures, rng),
                    !is_pool(spec.kind) && !last};
          sc = channels_out(node.layer, sc);
          nodes.push_back(std::move(node));
        }
        total += sc;
        block.streams.push_back(std::move(nodes));
      }
      if (total != module.out_channels) {
        throw std::invalid_argument("module " + std::to_string(m) + ": streams produce " +
                                    std::to_string(total) + " channels, expected " +
                                    std::to_string(module.out_channels));
      }
      if (c != module.out_channels) {
        block.projection = Node{kernels::make_pointwise(c, module.out_channels, rng), false};
      }
      c = module.out_channels;
      net.body.emplace_back(std::move(block));
    }
    if (layout.reductions[m + 1]) net.body.emplace_back(Node{reduction_pool(), false});
  }
  net.head = Node{kernels::make_pointwise(c, num_classes, rng), false};
  return net;
}

std::vector<NamedLayer> named_layers(Network& net) {
  std::vector<NamedLayer> out;
  for_each_node(net, [&](std::string name, Node& node) { out.push_back({std::move(name), &node.layer}); });
  return out;
}

std::vector<Tensor*> parameters(Network& net) {
  std::vector<Tensor*> out;
  for_each_node(net, [&](const std::string&, Node& node) {
    for (Tensor* t : kernels::parameters(node.layer)) out.push_back(t);
  });
  return out;
}

std::vector<const Tensor*> parameters(const Network& net) {
  std::vector<const Tensor*> out;
  for_each_node(net, [&](const std::string&, const Node& node) {
    for (const Tensor* t : kernels::parameters(node.layer)) out.push_back(t);
  });
  return out;
}

std::int64_t parameter_count(const Network& net) {
  std::int64_t total = 0;
  for (const Tensor* t : parameters(net)) total += static_cast<std::int64_t>(t->size());
  return total;
}

std::vector<Tensor> zero_gradients(const Network& net) {
  std::vector<Tensor> out;
  for (const Tensor* t : parameters(net)) out.emplace_back(t->shape());
  return out;
}

namespace {

struct NodeTrace {
  Tensor input;
  Tensor output;
};

struct BlockTrace {
  Tensor input;
  std::vector<std::vector<NodeTrace>> streams;
  NodeTrace projection;
  Tensor output;
};

using StageTrace = std::variant<NodeTrace, BlockTrace>;

struct Trace {
  std::vector<StageTrace> stages;
  Tensor features;
  NodeTrace head;
};

void relu_inplace(Tensor& t) {
  for (double& v : t.values()) v = v > 0 ? v : 0.0;
}

Tensor run_node(const Node& node, const Tensor& x, NodeTrace* trace) {
  Tensor y = kernels::forward(node.layer, x);
  if (node.relu) relu_inplace(y);
  if (trace) {
    trace->input = x;
    trace->output = y;
  }
  return y;
}

Tensor concat_channels(const std::vector<Tensor>& parts) {
  const Tensor& first = parts.front();
  const std::size_t sites = first.dim(0) * first.dim(1) * first.dim(2);
  std::size_t total = 0;
  for (const Tensor& p : parts) total += p.dim(3);
  Tensor out({first.dim(0), first.dim(1), first.dim(2), total});
  std::size_t offset = 0;
  for (const Tensor& p : parts) {
    const std::size_t c = p.dim(3);
    for (std::size_t i = 0; i < sites; ++i) {
      std::copy_n(p.data() + i * c, c, out.data() + i * total + offset);
    }
    offset += c;
  }
  return out;
}

Tensor slice_channels(const Tensor& t, std::size_t begin, std::size_t count) {
  const std::size_t sites = t.dim(0) * t.dim(1) * t.dim(2);
  const std::size_t total = t.dim(3);
  Tensor out({t.dim(0), t.dim(1), t.dim(2), count});
  for (std::size_t i = 0; i < sites; ++i) {
    std::copy_n(t.data() + i * total + begin, count, out.data() + i * count);
  }
  return out;
}

Tensor run_block(const Block& block, const Tensor& x, BlockTrace* trace) {
  std::vector<Tensor> outs;
  if (trace) {
    trace->input = x;
    trace->streams.resize(block.streams.size());
  }
  for (std::size_t s = 0; s < block.streams.size(); ++s) {
    const auto& nodes = block.streams[s];
    if (trace) trace->streams[s].resize(nodes.size());
    Tensor h = x;
    for (std::size_t l = 0; l < nodes.size(); ++l) {
      h = run_node(nodes[l], h, trace ? &trace->streams[s][l] : nullptr);
    }
    outs.push_back(std::move(h));
  }
  Tensor y = concat_channels(outs);
  const Tensor shortcut =
      block.projection ? run_node(*block.projection, x, trace ? &trace->projection : nullptr) : x;
  if (!y.same_shape(shortcut)) {
    throw std::invalid_argument("module " + std::to_string(block.module) + ": residual shape " +
                                shortcut.shape_string() + " vs " + y.shape_string());
  }
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += shortcut[i];
  relu_inplace(y);
  if (trace) trace->output = y;
  return y;
}

Tensor global_average(const Tensor& f) {
  const std::size_t c = f.dim(3);
  const std::size_t sites = f.size() / c;
  Tensor out({1, 1, 1, c});
  for (std::size_t i = 0; i < sites; ++i) {
    for (std::size_t k = 0; k < c; ++k) out[k] += f[i * c + k];
  }
  for (double& v : out.values()) v /= static_cast<double>(sites);
  return out;
}

Tensor run(const Network& net, const Tensor& input, Trace* trace) {
  if (input.rank() != 4 || static_cast<int>(input.dim(3)) != net.input_channels) {
    throw std::invalid_argument("network input must be T x Y x X x " +
                                std::to_string(net.input_channels) + ", got " +
                                input.shape_string());
  }
  Tensor h = input;
  for (const Stage& stage : net.body) {
    if (const auto* node = std::get_if<Node>(&stage)) {
      NodeTrace* nt = nullptr;
      if (trace) nt = &std::get<NodeTrace>(trace->stages.emplace_back(NodeTrace{}));
      h = run_node(*node, h, nt);
    } else {
      BlockTrace* bt = nullptr;
      if (trace) bt = &std::get<BlockTrace>(trace->stages.emplace_back(BlockTrace{}));
      h = run_block(std::get<Block>(stage), h, bt);
    }
  }
  const Tensor pooled = global_average(h);
  if (trace) trace->features = std::move(h);
  Tensor logits = run_node(net.head, pooled, trace ? &trace->head : nullptr);
  logits.reshape({static_cast<std::size_t>(net.num_classes)});
  return logits;
}

struct Backprop {
  const Network& net;
  std::vector<Tensor>& grads;
  std::size_t cursor;  // parameter index one past the next node to process

  Tensor node(const Node& n, const NodeTrace& t, Tensor g) {
    if (n.relu) {
      for (std::size_t i = 0; i < g.size(); ++i) {
        if (!(t.output[i] > 0)) g[i] = 0.0;
      }
    }
    kernels::LayerGrads lg = kernels::backward(n.layer, t.input, g);
    cursor -= lg.params.size();
    for (std::size_t p = 0; p < lg.params.size(); ++p) {
      Tensor& dst = grads[cursor + p];
      const Tensor& src = lg.params[p];
      for (std::size_t i = 0; i < src.size(); ++i) dst[i] += src[i];
    }
    return std::move(lg.input);
  }

  Tensor block(const Block& b, const BlockTrace& t, Tensor g) {
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (!(t.output[i] > 0)) g[i] = 0.0;
    }
    Tensor gx = b.projection ? node(*b.projection, t.projection, g) : g;
    std::vector<std::size_t> offsets;
    std::size_t offset = 0;
    for (const auto& stream : t.streams) {
      offsets.push_back(offset);
      offset += stream.back().output.dim(3);
    }
    for (std::size_t s = b.streams.size(); s-- > 0;) {
      const auto& nodes = b.streams[s];
      const auto& traces = t.streams[s];
      Tensor h = slice_channels(g, offsets[s], traces.back().output.dim(3));
      for (std::size_t l = nodes.size(); l-- > 0;) h = node(nodes[l], traces[l], std::move(h));
      for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += h[i];
    }
    return gx;
  }
};

}  // namespace

Tensor forward(const Network& net, const Tensor& input) { return run(net, input, nullptr); }

Tensor forward_batch(const Network& net, std::span<const Tensor> inputs) {
  const auto k = static_cast<std::size_t>(net.num_classes);
  Tensor out({inputs.size(), k});
  for (std::size_t n = 0; n < inputs.size(); ++n) {
    const Tensor logits = run(net, inputs[n], nullptr);
    std::copy_n(logits.data(), k, out.data() + n * k);
  }
  return out;
}

Tensor softmax(const Tensor& logits) {
  Tensor p = logits;
  const double top = *std::max_element(p.values().begin(), p.values().end());
  double z = 0;
  for (double& v : p.values()) z += (v = std::exp(v - top));
  for (double& v : p.values()) v /= z;
  return p;
}

double loss_and_gradient(const Network& net, const Tensor& input, int label,
                         std::vector<Tensor>& grads) {
  if (label < 0 || label >= net.num_classes) throw std::invalid_argument("label out of range");
  Trace trace;
  const Tensor logits = run(net, input, &trace);
  const Tensor p = softmax(logits);
  const auto y = static_cast<std::size_t>(label);
  const double loss = -std::log(std::max(p[y], 1e-300));

  Tensor g({1, 1, 1, static_cast<std::size_t>(net.num_classes)}, 0.0);
  for (std::size_t k = 0; k < p.size(); ++k) g[k] = p[k] - (k == y ? 1.0 : 0.0);

  Backprop bp{net, grads, grads.size()};
  const Tensor g_pooled = bp.node(net.head, trace.head, std::move(g));
  const Tensor& f = trace.features;
  const std::size_t c = f.dim(3);
  const std::size_t sites = f.size() / c;
  Tensor gh(f.shape());
  for (std::size_t i = 0; i < sites; ++i) {
    for (std::size_t k = 0; k < c; ++k) gh[i * c + k] = g_pooled[k] / static_cast<double>(sites);
  }
  for (std::size_t s = net.body.size(); s-- > 0;) {
    if (const auto* node = std::get_if<Node>(&net.body[s])) {
      gh = bp.node(*node, std::get<NodeTrace>(trace.stages[s]), std::move(gh));
    } else {
      gh = bp.block(std::get<Block>(net.body[s]), std::get<BlockTrace>(trace.stages[s]),
                    std::move(gh));
    }
  }
  return loss;
}
}  // namespace evanet
