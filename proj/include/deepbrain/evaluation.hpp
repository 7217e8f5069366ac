// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "rng.hpp"
#include "signal_model.hpp"
#include "tensor.hpp"

namespace deepbrain {

// ------------------------------------------------------------ confusion metrics

struct ConfusionCounts {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
  std::size_t total() const { return tp + fp + tn + fn; }
  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

inline void check_lengths(std::size_t a, std::size_t b) {
  if (a != b) throw ArgumentError("predictions and labels differ in length");
  if (a == 0) throw ArgumentError("no predictions to evaluate");
}

/// One-vs-rest counts for `positive`.
inline ConfusionCounts confusion_counts(std::span<const LabelClass> predictions,
                                        std::span<const LabelClass> labels, LabelClass positive) {
  check_lengths(predictions.size(), labels.size());
  ConfusionCounts c;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const bool pred = predictions[i] == positive, truth = labels[i] == positive;
    if (pred && truth) ++c.tp;
    else if (pred) ++c.fp;
    else if (truth) ++c.fn;
    else ++c.tn;
  }
  return c;
}

struct ClassMetrics {
  ConfusionCounts counts;
  double precision = 0.0;
  double recall = 0.0;  // identical to tpr
  double f1 = 0.0;
  double tpr = 0.0;
  double fpr = 0.0;
  std::size_t support = 0;
  bool precision_undefined = false;  // no positive predictions; precision reported as 0
  bool recall_undefined = false;     // class absent from the labels
  double auc = std::numeric_limits<double>::quiet_NaN();
};

struct MetricsReport {
  std::array<ClassMetrics, kClassCount> per_class{};
  double accuracy = 0.0;
  double weighted_precision = 0.0, weighted_recall = 0.0, weighted_f1 = 0.0;
  double macro_precision = 0.0, macro_recall = 0.0, macro_f1 = 0.0;
  double micro_auc = std::numeric_limits<double>::quiet_NaN();
};

inline double safe_ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

inline MetricsReport classification_metrics(std::span<const LabelClass> predictions,
                                            std::span<const LabelClass> labels) {
  check_lengths(predictions.size(), labels.size());
  MetricsReport r;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) correct += predictions[i] == labels[i];
  r.accuracy = safe_ratio(correct, labels.size());

  const double n = static_cast<double>(labels.size());
  for (auto cls : kAllClasses) {
    auto& m = r.per_class[class_index(cls)];
    m.counts = confusion_counts(predictions, labels, cls);
    const auto& c = m.counts;
    m.support = c.tp + c.fn;
    m.precision_undefined = c.tp + c.fp == 0;
    m.recall_undefined = c.tp + c.fn == 0;
    m.precision = safe_ratio(c.tp, c.tp + c.fp);
    m.recall = m.tpr = safe_ratio(c.tp, c.tp + c.fn);
    m.fpr = safe_ratio(c.fp, c.fp + c.tn);
    m.f1 = m.precision + m.recall > 0.0 ? 2.0 * m.precision * m.recall / (m.precision + m.recall) : 0.0;

    const double w = static_cast<double>(m.support) / n;
    r.weighted_precision += w * m.precision;
    r.weighted_recall += w * m.recall;
    r.weighted_f1 += w * m.f1;
    r.macro_precision += m.precision / kClassCount;
    r.macro_recall += m.recall / kClassCount;
    r.macro_f1 += m.f1 / kClassCount;
  }
  return r;
}

// ------------------------------------------------------------ ROC / AUC

struct RocPoint {
  double threshold;  // +inf for the origin
  double fpr;
  double tpr;
};

struct RocCurve {
  std::vector<RocPoint> points;
};

/// Sweeps thresholds over the distinct scores from high to low; tied scores
/// form a single step. `positives[i]` marks example i as positive.
inline RocCurve roc_curve_binary(std::span<const double> scores, const std::vector<bool>& positives) {
  if (scores.size() != positives.size()) throw ArgumentError("scores and labels differ in length");
  const auto n_pos = static_cast<std::size_t>(std::count(positives.begin(), positives.end(), true));
  const std::size_t n_neg = positives.size() - n_pos;
  if (n_pos == 0 || n_neg == 0)
    throw DegenerateInputError("ROC needs at least one positive and one negative example");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return scores[a] > scores[b]; });

  RocCurve curve;
  curve.points.push_back({std::numeric_limits<double>::infinity(), 0.0, 0.0});
  std::size_t tp = 0, fp = 0;
  for (std::size_t i = 0; i < order.size();) {
    const double s = scores[order[i]];
    for (; i < order.size() && scores[order[i]] == s; ++i) (positives[order[i]] ? tp : fp) += 1;
    curve.points.push_back({s, safe_ratio(fp, n_neg), safe_ratio(tp, n_pos)});
  }
  return curve;
}

inline RocCurve roc_curve(std::span<const double> scores, std::span<const LabelClass> labels,
                          LabelClass positive) {
  std::vector<bool> pos(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) pos[i] = labels[i] == positive;
  return roc_curve_binary(scores, pos);
}

/// Trapezoidal area under the curve.
inline double auc(const RocCurve& curve) {
  double area = 0.0;
  for (std::size_t i = 1; i < curve.points.size(); ++i) {
    const auto& a = curve.points[i - 1];
    const auto& b = curve.points[i];
    area += (b.fpr - a.fpr) * (a.tpr + b.tpr) * 0.5;
  }
  return area;
}

/// Fills per-class and micro-average AUC from an [n x 4] probability matrix.
inline void attach_auc(MetricsReport& report, const Matrix& probs, std::span<const LabelClass> labels) {
  const auto n = static_cast<std::size_t>(probs.rows());
  std::vector<double> flat_scores;
  std::vector<bool> flat_pos;
  flat_scores.reserve(n * kClassCount);
  flat_pos.reserve(n * kClassCount);
  for (auto cls : kAllClasses) {
    const auto k = class_index(cls);
    std::vector<double> scores(n);
    for (std::size_t i = 0; i < n; ++i) {
      scores[i] = probs(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k));
      flat_scores.push_back(scores[i]);
      flat_pos.push_back(labels[i] == cls);
    }
    try {
      report.per_class[k].auc = auc(roc_curve(scores, labels, cls));
    } catch (const DegenerateInputError&) {
      report.per_class[k].auc = std::numeric_limits<double>::quiet_NaN();
    }
  }
  report.micro_auc = auc(roc_curve_binary(flat_scores, flat_pos));
}

/// Metrics from class probabilities: argmax predictions plus ROC-based AUCs.
inline MetricsReport evaluate_probabilities(const Matrix& probs, std::span<const LabelClass> labels) {
  if (static_cast<std::size_t>(probs.rows()) != labels.size())
    throw ArgumentError("probability rows and labels differ in length");
  std::vector<LabelClass> preds(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto row = probs.row(static_cast<Eigen::Index>(i));
    preds[i] = decode_class(std::span<const double>(row.data(), static_cast<std::size_t>(row.size())));
  }
  auto report = classification_metrics(preds, labels);
  attach_auc(report, probs, labels);
  return report;
}

// ------------------------------------------------------------ Spearman

/// 1-based ranks; ties share their mean rank.
inline std::vector<double> mid_ranks(std::span<const double> x) {
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return x[a] < x[b]; });
  std::vector<double> ranks(x.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && x[order[j]] == x[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) ranks[order[k]] = r;
    i = j;
  }
  return ranks;
}

/// Pearson correlation of mid-ranks.
inline double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ArgumentError("spearman: length mismatch");
  if (x.size() < 2) throw ArgumentError("spearman needs at least two observations");
  const auto rx = mid_ranks(x), ry = mid_ranks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) throw DegenerateInputError("spearman is undefined for a constant series");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

// ------------------------------------------------------------ similarity

struct SimilarityMatrix {
  std::array<std::array<double, kClassCount>, kClassCount> values{};
  std::array<double, kClassCount> self{};   // diagonal
  std::array<double, kClassCount> cross{};  // mean of the row's off-diagonal entries
};

/// Mean Spearman over `samples_per_pair` randomly drawn session pairs per
/// unordered class pair (distinct sessions on the diagonal). Pairs whose
/// correlation is undefined (a constant session) are redrawn up to a bound.
inline SimilarityMatrix similarity_matrix(const SessionSet& sessions, std::size_t samples_per_pair,
                                          std::uint64_t seed) {
  if (samples_per_pair == 0) throw ArgumentError("samples_per_pair must be >= 1");
  std::array<std::vector<std::size_t>, kClassCount> by_class;
  for (std::size_t i = 0; i < sessions.size(); ++i)
    by_class[class_index(sessions.sessions[i].label())].push_back(i);
  for (auto cls : kAllClasses)
    if (by_class[class_index(cls)].size() < 2)
      throw ArgumentError("similarity_matrix needs at least two sessions of class " +
                          std::string(class_name(cls)));

  SimilarityMatrix out;
  std::uint64_t pair_counter = 0;
  for (std::size_t a = 0; a < kClassCount; ++a) {
    for (std::size_t b = a; b < kClassCount; ++b, ++pair_counter) {
      Rng rng(derive_seed(seed, pair_counter));
      const auto& A = by_class[a];
      const auto& B = by_class[b];
      double sum = 0.0;
      std::size_t got = 0, attempts = 0;
      while (got < samples_per_pair) {
        if (++attempts > 100 * samples_per_pair)
          throw DegenerateInputError("too many constant sessions to estimate similarity");
        const std::size_t i = A[rng.below(A.size())];
        std::size_t j = B[rng.below(B.size())];
        if (a == b && i == j) continue;
        try {
          sum += spearman(sessions.sessions[i].values(), sessions.sessions[j].values());
          ++got;
        } catch (const DegenerateInputError&) {
        }
      }
      out.values[a][b] = out.values[b][a] = sum / static_cast<double>(samples_per_pair);
    }
  }
  for (std::size_t a = 0; a < kClassCount; ++a) {
    out.self[a] = out.values[a][a];
    double s = 0.0;
    for (std::size_t b = 0; b < kClassCount; ++b)
      if (b != a) s += out.values[a][b];
    out.cross[a] = s / static_cast<double>(kClassCount - 1);
  }
  return out;
}

}  // namespace deepbrain
