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

#ifndef EVANET_TRAINER_HPP_
#define EVANET_TRAINER_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "evanet/dataset.hpp"
#include "evanet/network.hpp"

namespace evanet {

struct TrainConfig {
  int iterations = 1000;
  int batch_size = 8;
  double learning_rate = 0.005;
  double momentum = 0.9;
  std::uint64_t seed = 0;
  // Validation accuracy is measured every `eval_every` iterations and after
  // the last one; 0 means only after the last one.
  int eval_every = 0;

  void check() const;
  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

struct HistoryRow {
  int iteration = 0;
  double loss = 0;  // mean over the iteration's batch
  std::optional<double> val_accuracy;
};

struct TrainedModel {
  Network network;
  int iteration = 0;
};

struct TrainResult {
  TrainedModel model;
  std::vector<HistoryRow> history;
};

struct Fitness {
  double value = 0;
  int evaluated_at = 0;
  double wall_time = 0;  // seconds
};

// Loss became non-finite. `last_finite` holds the weights before the failing
// update and `history` the rows recorded so far.
class TrainingDiverged : public std::runtime_error {
 public:
  TrainingDiverged(int iteration, TrainedModel last_finite, std::vector<HistoryRow> history);
  int iteration() const { return iteration_; }
  const TrainedModel& last_finite() const { return last_finite_; }
  const std::vector<HistoryRow>& history() const { return history_; }

 private:
  int iteration_;
  TrainedModel last_finite_;
  std::vector<HistoryRow> history_;
};

// SGD with momentum on softmax cross-entropy. Batches are drawn from a
// reshuffled permutation of the training split each epoch.
TrainResult train(Network network, const Dataset& data, const TrainConfig& config);

double accuracy(const Network& network, const Split& split);
double accuracy_from_probabilities(const Tensor& probs, std::span<const int> labels);

// Build from `config.seed`, train, score on the validation split. A diverged
// run scores 0.
Fitness fitness_train(const Genome& genome, const Dataset& data, const TrainConfig& config);

// Mean of per-model softmax outputs, N x K.
Tensor ensemble_predict(std::span<const TrainedModel> models, std::span<const Tensor> inputs);
Tensor average_probabilities(std::span<const Tensor> probs);

}  // namespace evanet

#endif  // EVANET_TRAINER_HPP_
