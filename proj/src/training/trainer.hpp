// Copyright 2026 The Triformer Authors. All Rights Reserved.
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

#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "data/series.hpp"
#include "model/triformer.hpp"

namespace triformer::training {

struct TrainConfig {
  double lr = 1e-4;
  std::size_t batch = 32;
  std::size_t max_epochs = 10;
  std::size_t patience = 3;
  std::uint64_t seed = 1;
};

struct Metrics {
  double mse = 0.0;
  double mae = 0.0;
};

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double val_mse = 0.0;
  double val_mae = 0.0;
  double wall_seconds = 0.0;
};

struct RunHistory {
  std::vector<EpochRecord> epochs;
  std::size_t best_epoch = 0;  // 1-based, 0 when no epoch ran
  Metrics best;
  Metrics initial;  // validation metrics of the untrained model
  double wall_seconds = 0.0;
  std::string checkpoint_path;
};

// Stops after `patience` consecutive epochs without a strict improvement.
class EarlyStopping {
 public:
  explicit EarlyStopping(std::size_t patience) : patience_(patience) {}

  // Records one epoch's validation loss; returns true if it is the new best.
  bool observe(double val_loss);
  bool should_stop() const noexcept { return stale_ >= patience_; }
  std::size_t best_epoch() const noexcept { return best_epoch_; }
  double best_value() const noexcept { return best_; }
  std::size_t epochs_seen() const noexcept { return seen_; }

 private:
  std::size_t patience_;
  std::size_t seen_ = 0;
  std::size_t stale_ = 0;
  std::size_t best_epoch_ = 0;
  double best_ = 0.0;
};

// Maps a B x N x H batch of inputs to B x N x F forecasts.
using Forecaster = std::function<Tensor(const Tensor&)>;

Forecaster model_forecaster(const Triformer& model);

// Averages over every window, variable and horizon step. Windows are
// processed in order in chunks of `batch`.
Metrics evaluate(const Forecaster& forecaster, const data::WindowDataset& windows,
                 std::size_t batch = 64);
Metrics evaluate(const Triformer& model, const data::WindowDataset& windows,
                 std::size_t batch = 64);

// Repeats the last observed value over the horizon.
Metrics persistence_baseline(const data::WindowDataset& windows);

using EpochCallback = std::function<void(const EpochRecord&)>;

// Mini-batch Adam on the MSE loss with early stopping on validation MSE.
// The best epoch's parameters are restored before returning. Throws
// NumericError naming the batch when a loss is not finite.
RunHistory train(Triformer& model, const data::WindowDataset& train_windows,
                 const data::WindowDataset& val_windows, const TrainConfig& config,
                 const EpochCallback& on_epoch = {});

std::string history_to_json(const RunHistory& history, bool include_wall_time = true);

}  // namespace triformer::training
