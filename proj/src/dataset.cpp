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

#include "evanet/dataset.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

#include "evanet/random.hpp"

namespace evanet {
namespace {

constexpr int kDy[] = {-1, 1, 0, 0};
constexpr int kDx[] = {0, 0, -1, 1};

Split make_split(const ToyVideoSpec& spec, int count, std::uint64_t split_seed) {
  Split split;
  split.inputs.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    const int label = i % spec.num_classes;
    split.inputs.push_back(render_clip(spec, label, mix_seed(split_seed, static_cast<std::uint64_t>(i))));
    split.labels.push_back(label);
  }
  return split;
}

}  // namespace

void check_spec(const ToyVideoSpec& spec) {
  if (spec.frames < 4) throw std::invalid_argument("temporal classes need T >= 4");
  if (spec.num_classes != 2 && spec.num_classes != 4 && spec.num_classes != 8) {
    throw std::invalid_argument("num_classes must be 2, 4 or 8");
  }
  if (spec.channels < 1 || spec.square < 1) {
    throw std::invalid_argument("channels and square size must be positive");
  }
  // The square must stay fully inside the frame for the whole clip.
  const int travel = spec.frames - 1;
  if (spec.height < spec.square + travel || spec.width < spec.square + travel) {
    throw std::invalid_argument("frame of " + std::to_string(spec.height) + "x" +
                                std::to_string(spec.width) + " too small for square " +
                                std::to_string(spec.square) + " over " +
                                std::to_string(spec.frames) + " frames");
  }
  if (spec.noise < 0) throw std::invalid_argument("noise must be non-negative");
  if (spec.train_samples < 1 || spec.val_samples < 1 || spec.test_samples < 1) {
    throw std::invalid_argument("every split needs at least one sample");
  }
}

Tensor render_clip(const ToyVideoSpec& spec, int label, std::uint64_t rng_seed) {
  if (label < 0 || label >= spec.num_classes) throw std::invalid_argument("label out of range");
  Rng rng(rng_seed);
  const int direction = spec.num_classes == 2 ? label : label % 4;
  const int period = spec.num_classes == 8 && label >= 4 ? 4 : (spec.num_classes == 8 ? 2 : 0);
  const int phase = period ? uniform_int(rng, 0, period - 1) : 0;
  const int dy = kDy[direction];
  const int dx = kDx[direction];
  const int travel = spec.frames - 1;

  // Start so that the whole trajectory stays in frame.
  auto start = [&](int extent, int step) {
    const int lo = step < 0 ? travel : 0;
    const int hi = extent - spec.square - (step > 0 ? travel : 0);
    return uniform_int(rng, lo, hi);
  };
  const int y0 = start(spec.height, dy);
  const int x0 = start(spec.width, dx);

  const auto t_n = static_cast<std::size_t>(spec.frames);
  const auto y_n = static_cast<std::size_t>(spec.height);
  const auto x_n = static_cast<std::size_t>(spec.width);
  const auto c_n = static_cast<std::size_t>(spec.channels);
  Tensor clip({t_n, y_n, x_n, c_n});
  std::normal_distribution<double> noise(0.0, 1.0);
  for (int t = 0; t < spec.frames; ++t) {
    const bool visible = period == 0 || ((t + phase) % period) < period / 2;
    const int top = y0 + dy * t;
    const int left = x0 + dx * t;
    for (int y = 0; y < spec.height; ++y) {
      for (int x = 0; x < spec.width; ++x) {
        const bool inside = visible && y >= top && y < top + spec.square && x >= left &&
                            x < left + spec.square;
        for (std::size_t c = 0; c < c_n; ++c) {
          double v = inside ? 1.0 : 0.0;
          if (spec.noise > 0) v += spec.noise * noise(rng);
          clip.at({static_cast<std::size_t>(t), static_cast<std::size_t>(y),
                   static_cast<std::size_t>(x), c}) = std::clamp(v, 0.0, 1.0);
        }
      }
    }
  }
  return clip;
}

Dataset generate_toy_dataset(const ToyVideoSpec& spec) {
  check_spec(spec);
  Dataset data;
  data.spec = spec;
  data.train = make_split(spec, spec.train_samples, mix_seed(spec.seed, 1));
  data.val = make_split(spec, spec.val_samples, mix_seed(spec.seed, 2));
  data.test = make_split(spec, spec.test_samples, mix_seed(spec.seed, 3));
  return data;
}

}  // namespace evanet
