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

#include "evanet/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <string>

namespace evanet {

void TrainConfig::check() const {
  if (iterations < 1) throw std::invalid_argument("iterations must be >= 1");
  if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
  if (!(learning_rate >= 0) || !std::isfinite(learning_rate)) {
    throw std::invalid_argument("learning_rate must be finite and >= 0");
  }
  if (!(momentum >= 0 && momentum < 1)) throw std::invalid_argument("momentum must be in [0, 1)");
  if (eval_every < 0) throw std::invalid_argument("eval_every must be >= 0");
}

TrainingDiverged::TrainingDiverged(int iteration, TrainedModel last_finite,
                                   std::vector<HistoryRow> history)
    : std::runtime_error("training diverged at iteration " + std::to_string(iteration)),
      iteration_(iteration),
      last_finite_(std::move(last_finite)),
      history_(std::move(history)) {}

TrainResult train(Network network, const Dataset& data, const TrainConfig& config) {
  config.check();
  if (data.spec.num_classes != network.num_classes) {
    throw std::invalid_argument("dataset has " + std::to_string(data.spec.num_classes) +
                                " classes, network " + std::to_string(network.num_classes));
  }
  const Split& train_split = data.train;
  if (train_split.size() == 0) throw std::invalid_argument("empty training split");

  Rng rng = make_rng(config.seed, 0x747261696e);
  std::vector<std::size_t> order(train_split.size());
  std::iota(order.begin(), order.end(), 0);
  std::size_t next = order.size();

  std::vector<Tensor*> params = parameters(network);
  std::vector<Tensor> velocity = zero_gradients(network);
  TrainResult result;
  const double scale = 1.0 / config.batch_size;

  for (int it = 1; it <= config.iterations; ++it) {
    std::vector<Tensor> grads = zero_gradients(network);
    double loss = 0;
    for (int b = 0; b < config.batch_size; ++b) {
      if (next == order.size()) {
        std::shuffle(order.begin(), order.end(), rng);
        next = 0;
      }
      const std::size_t i = order[next++];
      loss += loss_and_gradient(network, train_split.inputs[i], train_split.labels[i], grads);
    }
    loss *= scale;
    const bool finite_grads = std::all_of(grads.begin(), grads.end(),
                                          [](const Tensor& g) { return g.all_finite(); });
    if (!std::isfinite(loss) || !finite_grads) {
      throw TrainingDiverged(it, TrainedModel{std::move(network), it - 1},
                             std::move(result.history));
    }
    for (std::size_t p = 0; p < params.size(); ++p) {
      Tensor& w = *params[p];
      Tensor& v = velocity[p];
      const Tensor& g = grads[p];
      for (std::size_t k = 0; k < w.size(); ++k) {
        v[k] = config.momentum * v[k] + g[k] * scale;
        w[k] -= config.learning_rate * v[k];
      }
    }
    HistoryRow row{it, loss, std::nullopt};
    const bool eval = it == config.iterations || (config.eval_every > 0 && it % config.eval_every == 0);
    if (eval) row.val_accuracy = accuracy(network, data.val);
    result.history.push_back(row);
  }
  result.model = TrainedModel{std::move(network), config.iterations};
  return result;
}

double accuracy_from_probabilities(const Tensor& probs, std::span<const int> labels) {
  if (probs.rank() != 2 || probs.dim(0) != labels.size()) {
    throw std::invalid_argument("probabilities must be N x K with N labels");
  }
  if (labels.empty()) return 0.0;
  const std::size_t k = probs.dim(1);
  std::size_t correct = 0;
  for (std::size_t n = 0; n < labels.size(); ++n) {
    const double* row = probs.data() + n * k;
    // First maximal index wins.
    const auto best = static_cast<int>(std::max_element(row, row + k) - row);
    if (best == labels[n]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(labels.size());
}

double accuracy(const Network& network, const Split& split) {
  return accuracy_from_probabilities(forward_batch(network, split.inputs), split.labels);
}

Fitness fitness_train(const Genome& genome, const Dataset& data, const TrainConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  Fitness fitness;
  try {
    Network net = build_network(genome, data.spec.num_classes, data.spec.channels, config.seed);
    TrainResult result = train(std::move(net), data, config);
    fitness.value = *result.history.back().val_accuracy;
    fitness.evaluated_at = result.model.iteration;
  } catch (const TrainingDiverged& e) {
    fitness.value = 0.0;
    fitness.evaluated_at = e.iteration();
  }
  fitness.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return fitness;
}

Tensor average_probabilities(std::span<const Tensor> probs) {
  if (probs.empty()) throw std::invalid_argument("ensemble needs at least one model");
  Tensor out(probs.front().shape());
  for (const Tensor& p : probs) {
    if (!p.same_shape(out)) {
      throw std::invalid_argument("ensemble members disagree on shape: " + p.shape_string() +
                                  " vs " + out.shape_string());
    }
    for (std::size_t i = 0; i < p.size(); ++i) out[i] += p[i];
  }
  for (double& v : out.values()) v /= static_cast<double>(probs.size());
  return out;
}

Tensor ensemble_predict(std::span<const TrainedModel> models, std::span<const Tensor> inputs) {
  if (models.empty()) throw std::invalid_argument("ensemble needs at least one model");
  const int classes = models.front().network.num_classes;
  std::vector<Tensor> probs;
  for (const TrainedModel& m : models) {
    if (m.network.num_classes != classes) {
      throw std::invalid_argument("class-count mismatch: " + std::to_string(classes) + " vs " +
                                  std::to_string(m.network.num_classes));
    }
    Tensor logits = forward_batch(m.network, inputs);
    const auto k = static_cast<std::size_t>(classes);
    for (std::size_t n = 0; n < inputs.size(); ++n) {
      Tensor row({k}, std::vector<double>(logits.data() + n * k, logits.data() + (n + 1) * k));
      const Tensor p = softmax(row);
      std::copy_n(p.data(), k, logits.data() + n * k);
    }
    probs.push_back(std::move(logits));
  }
  return average_probabilities(probs);
}

}  // namespace evanet
