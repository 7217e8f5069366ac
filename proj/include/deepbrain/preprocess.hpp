// SPDX-License-Identifier: Apache-2.0
#pragma once

// RawSession -> ProcessedWindow:
//   outlier repair -> Y = 2A - B separation -> block-mean downsample -> [0,1] scaling.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "errors.hpp"
#include "signal_model.hpp"

namespace deepbrain {

/// How the separated series is mapped into [0,1].
enum class Normalization {
  /// Clamp to [range_min, range_max] of the score scale, then rescale linearly.
  /// Keeps the absolute level, which is what separates relaxed from focused.
  FixedRange,
  /// Per-series min-max. Invariant to affine changes of the session, so the
  /// plateau level is lost.
  PerSeries,
};

struct PreprocessConfig {
  double outlier_z_threshold = 3.0;
  std::size_t baseline_window = kSessionLength;  // trailing samples used for B
  std::size_t downsample_factor = kSessionLength / kWindowLength;
  double normalization_epsilon = 1e-9;
  Normalization normalization = Normalization::FixedRange;
  double range_min = 0.0;
  double range_max = 100.0;

  void validate(std::size_t series_length = kSessionLength) const {
    if (!(outlier_z_threshold > 0.0)) throw ArgumentError("outlier_z_threshold must be > 0");
    if (baseline_window == 0) throw ArgumentError("baseline_window must be >= 1");
    if (downsample_factor == 0 || series_length % downsample_factor != 0)
      throw ArgumentError("downsample_factor must divide the session length");
    if (!(normalization_epsilon >= 0.0)) throw ArgumentError("normalization_epsilon must be >= 0");
    if (!(range_max > range_min)) throw ArgumentError("range_max must exceed range_min");
  }

  friend bool operator==(const PreprocessConfig&, const PreprocessConfig&) = default;
};

/// Indices with |x - mean| > z * sigma (population sigma). Empty when sigma is 0.
inline std::vector<std::size_t> detect_outliers(std::span<const double> series, double z_threshold) {
  if (series.size() < 3) throw ArgumentError("outlier detection needs at least 3 samples");
  const double n = static_cast<double>(series.size());
  double mean = 0.0;
  for (double x : series) mean += x;
  mean /= n;
  double ss = 0.0;
  for (double x : series) ss += (x - mean) * (x - mean);
  const double sigma = std::sqrt(ss / n);

  std::vector<std::size_t> out;
  if (sigma == 0.0) return out;
  for (std::size_t i = 0; i < series.size(); ++i)
    if (std::abs(series[i] - mean) > z_threshold * sigma) out.push_back(i);
  return out;
}

/// Flagged samples take the mean of their original neighbours; endpoints copy
/// their single neighbour.
inline std::vector<double> replace_outliers(std::span<const double> series,
                                            std::span<const std::size_t> outliers) {
  std::vector<double> out(series.begin(), series.end());
  const std::size_t n = series.size();
  for (std::size_t i : outliers) {
    if (i >= n) throw ArgumentError("outlier index out of range");
    if (n == 1) continue;
    if (i == 0)
      out[i] = series[1];
    else if (i == n - 1)
      out[i] = series[n - 2];
    else
      out[i] = 0.5 * (series[i - 1] + series[i + 1]);
  }
  return out;
}

namespace detail {

inline double median_of(std::vector<double>& v) {
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double hi = v[mid];
  if (v.size() % 2 == 1) return hi;
  const double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lo + hi);
}

}  // namespace detail

/// Y_i = 2 x_i - B_i with B_i the median of the trailing `baseline_window`
/// samples ending at i.
inline std::vector<double> separate_features(std::span<const double> series,
                                             const PreprocessConfig& config) {
  if (series.empty()) throw ArgumentError("separate_features on an empty series");
  const std::size_t w = std::max<std::size_t>(config.baseline_window, 1);
  std::vector<double> out(series.size());
  std::vector<double> scratch;
  scratch.reserve(std::min(w, series.size()));
  for (std::size_t i = 0; i < series.size(); ++i) {
    const std::size_t begin = i + 1 >= w ? i + 1 - w : 0;
    scratch.assign(series.begin() + static_cast<std::ptrdiff_t>(begin),
                   series.begin() + static_cast<std::ptrdiff_t>(i + 1));
    out[i] = 2.0 * series[i] - detail::median_of(scratch);
  }
  return out;
}

/// Non-overlapping block means.
inline std::vector<double> downsample(std::span<const double> series, std::size_t factor) {
  if (factor == 0 || series.size() % factor != 0)
    throw ArgumentError("downsample factor " + std::to_string(factor) +
                        " does not divide length " + std::to_string(series.size()));
  std::vector<double> out(series.size() / factor);
  for (std::size_t b = 0; b < out.size(); ++b) {
    double sum = 0.0;
    for (std::size_t k = 0; k < factor; ++k) sum += series[b * factor + k];
    out[b] = sum / static_cast<double>(factor);
  }
  return out;
}

/// (x - min) / (max - min); a flat series (range <= epsilon) maps to 0.5.
inline std::vector<double> minmax_normalize(std::span<const double> series, double epsilon) {
  if (series.empty()) throw ArgumentError("minmax_normalize on an empty series");
  const auto [lo_it, hi_it] = std::minmax_element(series.begin(), series.end());
  const double lo = *lo_it, range = *hi_it - *lo_it;
  std::vector<double> out(series.size());
  if (range <= epsilon) {
    std::fill(out.begin(), out.end(), 0.5);
    return out;
  }
  for (std::size_t i = 0; i < series.size(); ++i)
    out[i] = std::clamp((series[i] - lo) / range, 0.0, 1.0);
  return out;
}

/// Clamp into [lo, hi] then rescale to [0,1].
inline std::vector<double> range_normalize(std::span<const double> series, double lo, double hi) {
  if (!(hi > lo)) throw ArgumentError("range_normalize needs hi > lo");
  std::vector<double> out(series.size());
  for (std::size_t i = 0; i < series.size(); ++i)
    out[i] = (std::clamp(series[i], lo, hi) - lo) / (hi - lo);
  return out;
}

/// Everything up to (but excluding) the label attachment; useful for streams.
inline std::vector<double> preprocess_values(std::span<const double> values,
                                             const PreprocessConfig& config) {
  config.validate(values.size());
  const auto flagged = detect_outliers(values, config.outlier_z_threshold);
  const auto repaired = replace_outliers(values, flagged);
  const auto separated = separate_features(repaired, config);
  const auto reduced = downsample(separated, config.downsample_factor);
  return config.normalization == Normalization::FixedRange
             ? range_normalize(reduced, config.range_min, config.range_max)
             : minmax_normalize(reduced, config.normalization_epsilon);
}

inline ProcessedWindow preprocess_session(const RawSession& session, const PreprocessConfig& config,
                                          std::size_t index = 0) {
  return ProcessedWindow(preprocess_values(session.values(), config), session.label(),
                         SessionRef{session.subject_id(), index});
}

inline Dataset preprocess_all(const SessionSet& sessions, const PreprocessConfig& config) {
  Dataset out;
  out.metadata = sessions.metadata;
  out.windows.reserve(sessions.size());
  for (std::size_t i = 0; i < sessions.size(); ++i)
    out.windows.push_back(preprocess_session(sessions.sessions[i], config, i));
  return out;
}

}  // namespace deepbrain
