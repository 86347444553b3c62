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

#include "training/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>

#include <json.hpp>

#include "tensor/error.hpp"

namespace triformer::training {

bool EarlyStopping::observe(double val_loss) {
  ++seen_;
  if (best_epoch_ == 0 || val_loss < best_) {
    best_ = val_loss;
    best_epoch_ = seen_;
    stale_ = 0;
    return true;
  }
  ++stale_;
  return false;
}

Forecaster model_forecaster(const Triformer& model) {
  return [&model](const Tensor& x) { return model.predict(x); };
}

Metrics evaluate(const Forecaster& forecaster, const data::WindowDataset& windows,
                 std::size_t batch) {
  if (windows.size() == 0) throw DataError("evaluate: no windows");
  if (batch == 0) batch = 1;
  double sq = 0.0;
  double ab = 0.0;
  std::size_t count = 0;
  std::vector<std::size_t> ids;
  for (std::size_t start = 0; start < windows.size(); start += batch) {
    const std::size_t end = std::min(windows.size(), start + batch);
    ids.resize(end - start);
    std::iota(ids.begin(), ids.end(), start);
    const Tensor target = windows.targets(ids);
    const Tensor pred = forecaster(windows.inputs(ids));
    if (pred.shape() != target.shape()) {
      throw ShapeError("evaluate: forecast shape " + shape_string(pred.shape()) +
                       " does not match target " + shape_string(target.shape()));
    }
    for (std::size_t i = 0; i < pred.numel(); ++i) {
      const double e = pred[i] - target[i];
      sq += e * e;
      ab += std::abs(e);
    }
    count += pred.numel();
  }
  return Metrics{sq / static_cast<double>(count), ab / static_cast<double>(count)};
}

Metrics evaluate(const Triformer& model, const data::WindowDataset& windows, std::size_t batch) {
  return evaluate(model_forecaster(model), windows, batch);
}

Metrics persistence_baseline(const data::WindowDataset& windows) {
  const std::size_t h = windows.lookback();
  const std::size_t f = windows.horizon();
  return evaluate(
      [h, f](const Tensor& x) {
        const std::size_t rows = x.dim(0) * x.dim(1);
        Tensor out({x.dim(0), x.dim(1), f});
        for (std::size_t r = 0; r < rows; ++r) {
          const double last = x[r * h + h - 1];
          for (std::size_t k = 0; k < f; ++k) out[r * f + k] = last;
        }
        return out;
      },
      windows);
}

RunHistory train(Triformer& model, const data::WindowDataset& train_windows,
                 const data::WindowDataset& val_windows, const TrainConfig& config,
                 const EpochCallback& on_epoch) {
  if (config.batch == 0 || config.max_epochs == 0 || config.patience == 0 || !(config.lr > 0.0)) {
    throw ConfigError("train: lr, batch, max_epochs and patience must be positive");
  }
  if (train_windows.size() == 0 || val_windows.size() == 0) {
    throw DataError("train: need at least one training and one validation window");
  }
  using Clock = std::chrono::steady_clock;
  const auto run_start = Clock::now();

  RunHistory history;
  history.initial = evaluate(model, val_windows);

  const std::vector<Parameter*> params = model.parameters();
  const AdamOptions adam{.lr = config.lr};
  EarlyStopping stopper(config.patience);
  std::vector<Tensor> best_state = model.snapshot();
  std::mt19937_64 rng(config.seed);
  std::vector<std::size_t> order(train_windows.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  std::size_t global_batch = 0;
  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    const auto epoch_start = Clock::now();
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch, ++global_batch) {
      const std::size_t end = std::min(order.size(), start + config.batch);
      const std::span<const std::size_t> ids(order.data() + start, end - start);
      model.zero_grad();
      Var loss;
      try {
        loss = mse(model.forward(train_windows.inputs(ids)), constant(train_windows.targets(ids)));
      } catch (const NumericError& e) {
        throw NumericError("non-finite value in batch " + std::to_string(global_batch) +
                           " of epoch " + std::to_string(epoch) + ": " + e.what());
      }
      const double value = loss.value().item();
      if (!std::isfinite(value)) {
        throw NumericError("non-finite loss in batch " + std::to_string(global_batch));
      }
      backward(loss);
      adam_step(params, adam);
      loss_sum += value * static_cast<double>(ids.size());
    }
    model.zero_grad();

    const Metrics val = evaluate(model, val_windows);
    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss_sum / static_cast<double>(order.size());
    rec.val_mse = val.mse;
    rec.val_mae = val.mae;
    rec.wall_seconds = std::chrono::duration<double>(Clock::now() - epoch_start).count();
    history.epochs.push_back(rec);
    if (stopper.observe(val.mse)) {
      best_state = model.snapshot();
      history.best = val;
    }
    if (on_epoch) on_epoch(rec);
    if (stopper.should_stop()) break;
  }
  model.restore(best_state);
  history.best_epoch = stopper.best_epoch();
  history.wall_seconds = std::chrono::duration<double>(Clock::now() - run_start).count();
  return history;
}

std::string history_to_json(const RunHistory& history, bool include_wall_time) {
  nlohmann::ordered_json doc;
  doc["epochs"] = nlohmann::ordered_json::array();
  for (const EpochRecord& e : history.epochs) {
    nlohmann::ordered_json rec;
    rec["epoch"] = e.epoch;
    rec["train_loss"] = e.train_loss;
    rec["val_mse"] = e.val_mse;
    rec["val_mae"] = e.val_mae;
    if (include_wall_time) rec["wall_seconds"] = e.wall_seconds;
    doc["epochs"].push_back(rec);
  }
  doc["best_epoch"] = history.best_epoch;
  doc["metrics"] = {{"val_mse", history.best.mse},
                    {"val_mae", history.best.mae},
                    {"initial_val_mse", history.initial.mse},
                    {"initial_val_mae", history.initial.mae}};
  if (include_wall_time) doc["wall_seconds"] = history.wall_seconds;
  doc["checkpoint"] = history.checkpoint_path;
  return doc.dump(2) + "\n";
}

}  // namespace triformer::training
