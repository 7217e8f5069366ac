// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include <deepbrain/preprocess.hpp>
#include <deepbrain/rng.hpp>

using namespace deepbrain;

using V = std::vector<double>;
using I = std::vector<std::size_t>;

TEST(DetectOutliers, FlatSeriesHasNone) { EXPECT_TRUE(detect_outliers(V{50, 50, 50, 50}, 3.0).empty()); }

TEST(DetectOutliers, SingleSpike) {
  // mean 10, population sigma 30: |100 - 10| = 90 > 2 * 30.
  EXPECT_EQ(detect_outliers(V{0, 0, 0, 0, 0, 0, 0, 0, 0, 100}, 2.0), I{9});
}

TEST(DetectOutliers, SmallSeriesWithinThreeSigma) { EXPECT_TRUE(detect_outliers(V{1, 2, 3}, 3.0).empty()); }

TEST(DetectOutliers, TooShortIsArgumentError) { EXPECT_THROW(detect_outliers(V{1, 2}, 3.0), ArgumentError); }

TEST(ReplaceOutliers, NeighbourMean) { EXPECT_EQ(replace_outliers(V{1, 100, 3}, I{1}), (V{1, 2, 3})); }

TEST(ReplaceOutliers, EndpointCopiesNeighbour) { EXPECT_EQ(replace_outliers(V{100, 2, 3}, I{0}), (V{2, 2, 3})); }

TEST(ReplaceOutliers, NoOutliersIsIdentity) { EXPECT_EQ(replace_outliers(V{1, 2, 3}, I{}), (V{1, 2, 3})); }

TEST(ReplaceOutliers, UsesOriginalNeighbours) {
  // Adjacent flagged points each see the other's original value.
  EXPECT_EQ(replace_outliers(V{0, 10, 20, 30}, I{1, 2}), (V{0, 10, 20, 30}));
  EXPECT_THROW(replace_outliers(V{1, 2, 3}, I{3}), ArgumentError);
}

TEST(ReplaceOutliers, OnlyFlaggedIndicesChange) {
  Rng rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    V x(kSessionLength);
    for (auto& v : x) v = rng.normal(50, 5);
    for (int k = 0; k < 3; ++k) x[rng.below(x.size())] += 60;
    const auto flagged = detect_outliers(x, 3.0);
    const auto y = replace_outliers(x, flagged);
    for (std::size_t i = 0; i < x.size(); ++i)
      if (std::find(flagged.begin(), flagged.end(), i) == flagged.end()) EXPECT_EQ(x[i], y[i]);
  }
}

TEST(SeparateFeatures, ConstantSeriesIsFixedPoint) {
  const auto y = separate_features(V(kSessionLength, 50.0), PreprocessConfig{});
  for (double v : y) EXPECT_EQ(v, 50.0);
}

TEST(SeparateFeatures, WholeSeriesBaseline) {
  PreprocessConfig c;
  c.baseline_window = 3;
  // Trailing medians: 50, 50, 50.
  EXPECT_EQ(separate_features(V{50, 50, 80}, c), (V{50, 50, 110}));
}

TEST(SeparateFeatures, TrailingWindowMedian) {
  PreprocessConfig c;
  c.baseline_window = 2;
  // Medians over [1], [1,3], [3,5] -> 1, 2, 4.
  EXPECT_EQ(separate_features(V{1, 3, 5}, c), (V{1, 4, 6}));
}

TEST(SeparateFeatures, Asymmetric) {
  // F(u, v) = 2u - v with u in the raw role and v as the baseline.
  auto f = [](double u, double v) { return 2 * u - v; };
  EXPECT_EQ(f(60, 40), 80);
  EXPECT_EQ(f(40, 60), 20);
  Rng rng(9);
  for (int i = 0; i < 1000; ++i) {
    const double u = rng.uniform(0, 100), v = rng.uniform(0, 100);
    if (u == v) continue;
    PreprocessConfig c;
    c.baseline_window = 2;
    // Second output of [v, u] is 2u - median(v, u); of [u, v] is 2v - median(u, v).
    const double fuv = separate_features(V{v, u}, c)[1];
    const double fvu = separate_features(V{u, v}, c)[1];
    EXPECT_NE(fuv, fvu);
  }
}

TEST(Downsample, BlockMeans) {
  EXPECT_EQ(downsample(V{1, 3, 5, 7}, 2), (V{2, 6}));
  EXPECT_EQ(downsample(V{4, 1, 9}, 1), (V{4, 1, 9}));
  const auto d = downsample(V(kSessionLength, 7.25), 6);
  EXPECT_EQ(d, V(kWindowLength, 7.25));
  EXPECT_THROW(downsample(V{1, 2, 3}, 2), ArgumentError);
  EXPECT_THROW(downsample(V{1, 2}, 0), ArgumentError);
}

TEST(MinmaxNormalize, LinearMap) { EXPECT_EQ(minmax_normalize(V{2, 4, 6}, 1e-9), (V{0, 0.5, 1})); }

TEST(MinmaxNormalize, FlatSeriesIsHalf) { EXPECT_EQ(minmax_normalize(V{5, 5, 5}, 1e-9), (V{0.5, 0.5, 0.5})); }

TEST(MinmaxNormalize, OutputInUnitIntervalWithExtremesHit) {
  Rng rng(1);
  for (int trial = 0; trial < 200; ++trial) {
    V x(1 + rng.below(60));
    for (auto& v : x) v = rng.normal(0, 1000);
    const auto y = minmax_normalize(x, 1e-9);
    for (double v : y) EXPECT_TRUE(v >= 0.0 && v <= 1.0);
    if (x.size() > 1) {
      EXPECT_EQ(*std::min_element(y.begin(), y.end()), 0.0);
      EXPECT_EQ(*std::max_element(y.begin(), y.end()), 1.0);
    }
  }
}

TEST(RangeNormalize, ClampsAndScales) {
  EXPECT_EQ(range_normalize(V{-10, 0, 50, 100, 130}, 0, 100), (V{0, 0, 0.5, 1, 1}));
}

namespace {
RawSession session_of(V values, LabelClass c = LabelClass::Relaxed) {
  return RawSession(std::move(values), c, "t", Gender::Male, false);
}
}  // namespace

TEST(PreprocessSession, ConstantSession) {
  const auto w = preprocess_session(session_of(V(kSessionLength, 50.0)), PreprocessConfig{});
  for (double f : w.features()) EXPECT_EQ(f, 0.5);
  EXPECT_EQ(w.one_hot(), (std::array<double, 4>{1, 0, 0, 0}));

  PreprocessConfig per_series;
  per_series.normalization = Normalization::PerSeries;
  for (double level : {0.0, 13.0, 58.0, 99.5}) {
    const auto flat = preprocess_session(session_of(V(kSessionLength, level)), per_series);
    for (double f : flat.features()) EXPECT_EQ(f, 0.5);
  }
}

TEST(PreprocessSession, RampGivesStrictlyIncreasingFeatures) {
  // Hand oracle: no outliers (|x - 89.5| <= 89.5 < 3 sigma = 155.9); the
  // trailing median of 0..i is i/2, so Y_i = 1.5 i; block means of Y are
  // 1.5 * (6b + 2.5), i.e. 3.75, 12.75, ...; clamped at 100 from block 11 on
  // under fixed range, strictly increasing under per-series scaling.
  V ramp(kSessionLength);
  for (std::size_t i = 0; i < ramp.size(); ++i) ramp[i] = static_cast<double>(i);
  PreprocessConfig per_series;
  per_series.normalization = Normalization::PerSeries;
  const auto w = preprocess_session(session_of(ramp), per_series);
  const auto f = w.features();
  for (std::size_t b = 0; b < kWindowLength; ++b) EXPECT_NEAR(f[b], static_cast<double>(b) / 29.0, 1e-12);
  for (std::size_t b = 1; b < kWindowLength; ++b) EXPECT_GT(f[b], f[b - 1]);

  const auto fixed = preprocess_session(session_of(ramp), PreprocessConfig{});
  EXPECT_NEAR(fixed.features()[0], 0.0375, 1e-12);
  EXPECT_NEAR(fixed.features()[10], 0.9375, 1e-12);
  for (std::size_t b = 11; b < kWindowLength; ++b) EXPECT_EQ(fixed.features()[b], 1.0);
}

TEST(PreprocessSession, Deterministic) {
  Rng rng(4);
  V x(kSessionLength);
  for (auto& v : x) v = rng.normal(60, 8);
  const auto s = session_of(x, LabelClass::Focused);
  EXPECT_EQ(preprocess_session(s, {}), preprocess_session(s, {}));
}

TEST(PreprocessSession, LinearRampsGiveMonotoneFeatures) {
  Rng rng(12);
  for (int trial = 0; trial < 100; ++trial) {
    V x(kSessionLength);
    const double a = rng.uniform(0, 50), b = rng.uniform(0.01, 0.5);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = a + b * static_cast<double>(i);
    for (auto mode : {Normalization::FixedRange, Normalization::PerSeries}) {
      PreprocessConfig c;
      c.normalization = mode;
      const auto w = preprocess_session(session_of(x), c);
      const auto f = w.features();
      for (std::size_t b = 1; b < f.size(); ++b) EXPECT_GE(f[b], f[b - 1]);
    }
  }
}

TEST(PreprocessConfig, Validation) {
  PreprocessConfig c;
  c.downsample_factor = 7;
  EXPECT_THROW(c.validate(), ArgumentError);
  c = {};
  c.outlier_z_threshold = 0;
  EXPECT_THROW(c.validate(), ArgumentError);
}
