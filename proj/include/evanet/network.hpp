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

#ifndef EVANET_NETWORK_HPP_
#define EVANET_NETWORK_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "evanet/genome.hpp"
#include "evanet/kernels.hpp"
#include "evanet/tensor.hpp"

namespace evanet {

struct Node {
  kernels::Layer layer;
  bool relu = false;
};

// One repetition of a module: parallel streams, channel concat, residual add
// (through `projection` when widths differ), ReLU.
struct Block {
  int module = 0;
  int repeat = 0;
  std::vector<std::vector<Node>> streams;
  std::optional<Node> projection;  // PointwiseConv
};

using Stage = std::variant<Node, Block>;

struct Network {
  Genome genome;
  int input_channels = 1;
  int num_classes = 2;
  std::vector<Stage> body;
  Node head;  // PointwiseConv, Cfinal x num_classes over pooled features
};

Network build_network(const Genome& genome, int num_classes, int input_channels,
                      std::uint64_t init_seed);

// Every layer in a fixed traversal order with a stable path name such as
// "stem/0", "modules/1/repeat/0/streams/2/layers/1", "modules/1/repeat/0/projection",
// "reduce/0" or "head".
struct NamedLayer {
  std::string path;
  kernels::Layer* layer;
};
std::vector<NamedLayer> named_layers(Network& net);

std::vector<Tensor*> parameters(Network& net);
std::vector<const Tensor*> parameters(const Network& net);
std::int64_t parameter_count(const Network& net);

// Logits for one T x Y x X x C clip.
Tensor forward(const Network& net, const Tensor& input);
// N x num_classes.
Tensor forward_batch(const Network& net, std::span<const Tensor> inputs);

Tensor softmax(const Tensor& logits);

// Softmax cross-entropy for one clip; adds d(loss)/d(param) into `grads`
// (aligned with parameters(net), shapes matching). Returns the loss.
double loss_and_gradient(const Network& net, const Tensor& input, int label,
                         std::vector<Tensor>& grads);

std::vector<Tensor> zero_gradients(const Network& net);

}  // namespace evanet

#endif  // EVANET_NETWORK_HPP_
