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

#ifndef EVANET_DATASET_HPP_
#define EVANET_DATASET_HPP_

#include <cstdint>
#include <vector>

#include "evanet/tensor.hpp"

namespace evanet {

// Moving-square videos. A class is a (direction, blink period) pair:
// direction = label % 4 over {up, down, left, right}, period = 2 for
// label < 4 and 4 otherwise. With 4 classes the square never blinks; with 2
// it moves up or down.
struct ToyVideoSpec {
  int frames = 16;
  int height = 32;
  int width = 32;
  int channels = 1;
  int num_classes = 8;
  int square = 8;
  double noise = 0.05;
  int train_samples = 800;
  int val_samples = 200;
  int test_samples = 200;
  std::uint64_t seed = 0;

  friend bool operator==(const ToyVideoSpec&, const ToyVideoSpec&) = default;
};

struct Split {
  std::vector<Tensor> inputs;  // T x Y x X x C each
  std::vector<int> labels;

  std::size_t size() const { return inputs.size(); }
};

struct Dataset {
  ToyVideoSpec spec;
  Split train;
  Split val;
  Split test;
};

// Throws std::invalid_argument for specs the class definition cannot honor.
void check_spec(const ToyVideoSpec& spec);

// One example of class `label`; all randomness comes from `rng_seed`.
Tensor render_clip(const ToyVideoSpec& spec, int label, std::uint64_t rng_seed);

Dataset generate_toy_dataset(const ToyVideoSpec& spec);

}  // namespace evanet

#endif  // EVANET_DATASET_HPP_
