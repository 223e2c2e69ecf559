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

#ifndef EVANET_CHECKPOINT_HPP_
#define EVANET_CHECKPOINT_HPP_

#include <filesystem>
#include <span>

#include "evanet/dataset.hpp"
#include "evanet/json_io.hpp"
#include "evanet/trainer.hpp"

namespace evanet {

// Directory layout: manifest.json, layers/<path>.bin (one dump_layer blob per
// named layer) and history.csv (iteration,loss,val_accuracy).
struct Checkpoint {
  TrainedModel model;
  TrainConfig train;
  ToyVideoSpec data;
  Json metrics = Json::object();
};

void save_checkpoint(const std::filesystem::path& dir, const Checkpoint& checkpoint,
                     std::span<const HistoryRow> history = {});
// `path` is the checkpoint directory or its manifest.json. Throws
// ArchiveError on I/O failures and GenomeParseError on a bad manifest.
Checkpoint load_checkpoint(const std::filesystem::path& path);

std::string history_csv(std::span<const HistoryRow> history);

}  // namespace evanet

#endif  // EVANET_CHECKPOINT_HPP_
