// SPDX-License-Identifier: Apache-2.0
#pragma once

// Train/evaluate protocol shared by the comparison table and the acceptance
// benchmark: generate -> preprocess -> 80/20 split -> hold 10% of the training
// part out for checkpoint selection -> train -> evaluate on the test part.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "evaluation.hpp"
#include "preprocess.hpp"
#include "synthgen.hpp"
#include "training.hpp"

namespace deepbrain {

struct BenchmarkConfig {
  GenSpec gen;
  PreprocessConfig preprocess;
  std::size_t epochs = 120;  // tuned default; validation accuracy saturates by ~110 epochs
  std::size_t batch_size = 64;
  double train_fraction = 0.8;
  double valid_fraction = 0.1;  // of the training part
};

struct RunOutcome {
  ModelKind kind = ModelKind::DeepBrain;
  bool noisy = false;
  std::uint64_t seed = 0;
  MetricsReport test_metrics;
  TrainResult training;
};

inline std::vector<LabelClass> labels_of(const Dataset& d) {
  std::vector<LabelClass> out;
  out.reserve(d.size());
  for (const auto& w : d.windows) out.push_back(w.label());
  return out;
}

inline RunOutcome run_benchmark(ModelKind kind, bool noisy, std::uint64_t seed, const BenchmarkConfig& cfg,
                                const std::function<void(const EpochRecord&)>& on_epoch = {}) {
  const auto sessions = generate_dataset(cfg.gen, noisy, seed);
  const auto windows = preprocess_all(sessions, cfg.preprocess);
  const auto [train_all, test] = split_dataset(windows, cfg.train_fraction, seed);
  const auto [train, valid] = split_dataset(train_all, 1.0 - cfg.valid_fraction, derive_seed(seed, 1));

  TrainConfig tc;
  tc.epochs = cfg.epochs;
  tc.batch_size = cfg.batch_size;
  tc.seed = seed;
  tc.preprocess = cfg.preprocess;

  RunOutcome out;
  out.kind = kind;
  out.noisy = noisy;
  out.seed = seed;
  out.training = train_model(ModelConfig::for_kind(kind), tc, train, valid, on_epoch);
  const auto& ck = out.training.checkpoint;
  out.test_metrics =
      evaluate_probabilities(predict_probs(ck.model_config, ck.params, test.windows), labels_of(test));
  return out;
}

/// One row of the comparison table: means over seeds.
struct ComparisonRow {
  std::string condition;  // "quiet" | "noisy"
  ModelKind kind = ModelKind::DeepBrain;
  double accuracy = 0.0, precision = 0.0, recall = 0.0, f1 = 0.0, auc = 0.0;
  std::vector<double> seed_accuracies;
};

/// Rows ordered by condition (as given) then by the input kind list.
inline std::vector<ComparisonRow> compare_models(const std::vector<ModelKind>& kinds,
                                                 const std::vector<bool>& conditions,
                                                 const std::vector<std::uint64_t>& seeds,
                                                 const BenchmarkConfig& cfg,
                                                 const std::function<void(const RunOutcome&)>& on_run = {}) {
  if (kinds.empty() || conditions.empty() || seeds.empty())
    throw ArgumentError("compare_models needs at least one kind, condition and seed");
  std::vector<ComparisonRow> rows;
  for (bool noisy : conditions) {
    for (auto kind : kinds) {
      ComparisonRow row;
      row.condition = noisy ? "noisy" : "quiet";
      row.kind = kind;
      for (auto seed : seeds) {
        const auto run = run_benchmark(kind, noisy, seed, cfg);
        if (on_run) on_run(run);
        const auto& m = run.test_metrics;
        row.accuracy += m.accuracy;
        row.precision += m.weighted_precision;
        row.recall += m.weighted_recall;
        row.f1 += m.weighted_f1;
        row.auc += m.micro_auc;
        row.seed_accuracies.push_back(m.accuracy);
      }
      const double s = static_cast<double>(seeds.size());
      row.accuracy /= s;
      row.precision /= s;
      row.recall /= s;
      row.f1 /= s;
      row.auc /= s;
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

}  // namespace deepbrain
