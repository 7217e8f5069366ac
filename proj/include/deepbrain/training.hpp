// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "backprop.hpp"
#include "checkpoint.hpp"
#include "errors.hpp"
#include "model_config.hpp"
#include "network.hpp"
#include "optimizer.hpp"
#include "preprocess.hpp"
#include "rng.hpp"
#include "signal_model.hpp"

namespace deepbrain {

struct TrainConfig {
  std::size_t epochs = 200;
  std::size_t batch_size = 64;
  std::uint64_t seed = 1;
  bool shuffle_each_epoch = true;
  std::optional<double> lr;         // Adam default 1e-4 when unset
  std::optional<double> clip_norm;  // global-norm clipping, off when unset
  PreprocessConfig preprocess;      // recorded in the checkpoint

  void validate() const {
    if (epochs == 0) throw ArgumentError("epochs must be >= 1");
    if (batch_size == 0) throw ArgumentError("batch_size must be >= 1");
    if (lr && !(*lr > 0.0)) throw ArgumentError("learning rate must be > 0");
    if (clip_norm && !(*clip_norm > 0.0)) throw ArgumentError("clip norm must be > 0");
  }
};

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double valid_accuracy = 0.0;
  std::size_t optimizer_steps = 0;  // cumulative
};

struct TrainResult {
  Checkpoint checkpoint;  // best validation accuracy, ties to the earlier epoch
  std::vector<EpochRecord> history;
  double initial_loss = 0.0;  // eval-mode loss of the initial parameters on the training set
  std::size_t optimizer_steps = 0;
};

/// Fraction of windows whose argmax matches the label.
inline double accuracy(const Matrix& probs, std::span<const ProcessedWindow> windows) {
  if (windows.empty()) return 0.0;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < windows.size(); ++i) {
    const auto row = probs.row(static_cast<Eigen::Index>(i));
    const std::vector<double> p(row.data(), row.data() + row.size());
    if (decode_class(p) == windows[i].label()) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(windows.size());
}

inline double dataset_loss(const ModelConfig& config, const ModelParams& params, const Dataset& data) {
  const Matrix probs = predict_probs(config, params, data.windows);
  return cross_entropy_loss(probs, one_hots_from_windows(data.windows));
}

/// Minibatch BPTT + Adam. Seeds: parameters from derive_seed(seed, 0); the
/// epoch-e shuffle from derive_seed(seed, 1000 + e); the dropout mask of batch
/// b in epoch e from derive_seed(derive_seed(seed, 2000 + e), b).
inline TrainResult train_model(const ModelConfig& config, const TrainConfig& tcfg, const Dataset& train,
                               const Dataset& valid,
                               const std::function<void(const EpochRecord&)>& on_epoch = {}) {
  config.validate();
  tcfg.validate();
  if (train.empty() || valid.empty()) throw ArgumentError("training and validation sets must be non-empty");

  ModelParams params = init_params(config, derive_seed(tcfg.seed, 0));
  AdamState adam = AdamState::for_params(params, tcfg.lr.value_or(1e-4));

  TrainResult result;
  result.initial_loss = dataset_loss(config, params, train);

  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<ProcessedWindow> batch_windows;

  double best_accuracy = -1.0;
  ModelParams best_params;
  std::size_t best_epoch = 0;
  std::vector<double> loss_history, acc_history;

  for (std::size_t epoch = 1; epoch <= tcfg.epochs; ++epoch) {
    if (tcfg.shuffle_each_epoch) {
      Rng rng(derive_seed(tcfg.seed, 1000 + epoch));
      rng.shuffle(order.begin(), order.end());
    }
    const std::uint64_t epoch_seed = derive_seed(tcfg.seed, 2000 + epoch);
    double loss_sum = 0.0;
    std::size_t batch_index = 0;
    for (std::size_t start = 0; start < order.size(); start += tcfg.batch_size, ++batch_index) {
      const std::size_t len = std::min(tcfg.batch_size, order.size() - start);
      batch_windows.clear();
      for (std::size_t k = 0; k < len; ++k) batch_windows.push_back(train.windows[order[start + k]]);
      const Tensor batch = batch_from_windows(batch_windows);
      const Matrix labels = one_hots_from_windows(batch_windows);

      auto fwd = model_forward(config, params, batch, ForwardMode::train(derive_seed(epoch_seed, batch_index)));
      const double loss = cross_entropy_loss(fwd.probs, labels);
      if (!std::isfinite(loss))
        throw TrainingError("non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                            std::to_string(batch_index));
      loss_sum += loss * static_cast<double>(len);

      GradientSet grads = backward(config, params, *fwd.trace, batch, labels);
      if (tcfg.clip_norm) clip_global_norm(grads, *tcfg.clip_norm);
      adam_step(params, grads, adam);
      ++result.optimizer_steps;
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss_sum / static_cast<double>(order.size());
    rec.valid_accuracy = accuracy(predict_probs(config, params, valid.windows), valid.windows);
    rec.optimizer_steps = result.optimizer_steps;
    result.history.push_back(rec);
    loss_history.push_back(rec.train_loss);
    acc_history.push_back(rec.valid_accuracy);
    if (on_epoch) on_epoch(rec);

    if (rec.valid_accuracy > best_accuracy) {
      best_accuracy = rec.valid_accuracy;
      best_params = params;
      best_epoch = epoch;
    }
  }

  auto& ck = result.checkpoint;
  ck.model_config = config;
  ck.preprocess_config = tcfg.preprocess;
  ck.params = std::move(best_params);
  ck.provenance.seed = tcfg.seed;
  ck.provenance.epochs = tcfg.epochs;
  ck.provenance.best_epoch = best_epoch;
  ck.provenance.final_loss = loss_history.back();
  ck.provenance.loss_history = std::move(loss_history);
  ck.provenance.valid_accuracy_history = std::move(acc_history);
  ck.provenance.dataset_hash = dataset_hash(train);
  return result;
}

}  // namespace deepbrain
