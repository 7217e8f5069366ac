// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include <deepbrain/benchmark.hpp>
#include <deepbrain/evaluation.hpp>
#include <deepbrain/report.hpp>

using namespace deepbrain;

namespace {

constexpr auto A = LabelClass::Relaxed;
constexpr auto B = LabelClass::RelaxedToFocused;
using L = std::vector<LabelClass>;

// Pair counting: P(score+ > score-) + 0.5 P(tie).
double mann_whitney(const std::vector<double>& s, const std::vector<bool>& pos) {
  double wins = 0.0, pairs = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i)
    for (std::size_t j = 0; j < s.size(); ++j)
      if (pos[i] && !pos[j]) {
        pairs += 1.0;
        wins += s[i] > s[j] ? 1.0 : (s[i] == s[j] ? 0.5 : 0.0);
      }
  return wins / pairs;
}

struct Fixture {
  std::vector<double> scores;
  std::vector<bool> positives;
};

Fixture random_fixture(std::uint64_t seed) {
  Rng rng(seed);
  Fixture f;
  const std::size_t n = 2 + rng.below(60);
  const bool coarse = rng.bernoulli(0.5);  // coarse scores tie often
  for (std::size_t i = 0; i < n; ++i) {
    const bool p = rng.bernoulli(0.4);
    double s = rng.uniform() + (p ? 0.2 : 0.0);
    if (coarse) s = std::round(s * 5.0) / 5.0;
    f.scores.push_back(s);
    f.positives.push_back(p);
  }
  f.positives[0] = true;
  f.positives[1] = false;
  return f;
}

SessionSet ramp_sessions(std::size_t per_class) {
  SessionSet set;
  std::vector<double> up(kSessionLength), down(kSessionLength);
  for (std::size_t i = 0; i < kSessionLength; ++i) {
    up[i] = static_cast<double>(i);
    down[i] = -static_cast<double>(i);
  }
  for (auto c : kAllClasses)
    for (std::size_t k = 0; k < per_class; ++k)
      set.sessions.emplace_back((c == A || c == LabelClass::FocusedToRelaxed) ? down : up, c, "S", Gender::Male, false);
  return set;
}

}  // namespace

TEST(ConfusionCounts, HandCounted) {
  EXPECT_EQ(confusion_counts(L{A, A, B, B}, L{A, B, A, B}, A), (ConfusionCounts{1, 1, 1, 1}));
  const auto perfect = confusion_counts(L{A, B, B, A}, L{A, B, B, A}, B);
  EXPECT_EQ(perfect.fp, 0u);
  EXPECT_EQ(perfect.fn, 0u);
  EXPECT_EQ(confusion_counts(L{A, B, A}, L{B, A, A}, LabelClass::Focused), (ConfusionCounts{0, 0, 3, 0}));
  EXPECT_THROW(confusion_counts(L{A}, L{A, B}, A), ArgumentError);
}

TEST(ClassificationMetrics, FixedExamples) {
  const auto half = classification_metrics(L{A, A, B, B}, L{A, B, A, B});
  EXPECT_DOUBLE_EQ(half.accuracy, 0.5);
  EXPECT_DOUBLE_EQ(half.per_class[0].precision, 0.5);
  EXPECT_DOUBLE_EQ(half.per_class[0].recall, 0.5);
  EXPECT_DOUBLE_EQ(half.per_class[0].f1, 0.5);

  const auto three = classification_metrics(L{A, A, A, B}, L{A, A, A, A});
  EXPECT_DOUBLE_EQ(three.accuracy, 0.75);
  EXPECT_DOUBLE_EQ(three.per_class[0].recall, 0.75);
  EXPECT_DOUBLE_EQ(three.per_class[0].precision, 1.0);
  EXPECT_TRUE(three.per_class[1].recall_undefined);

  const auto perfect = classification_metrics(L{A, B, LabelClass::Focused}, L{A, B, LabelClass::Focused});
  EXPECT_DOUBLE_EQ(perfect.accuracy, 1.0);
  for (std::size_t k : {0u, 1u, 3u}) EXPECT_DOUBLE_EQ(perfect.per_class[k].f1, 1.0);
  EXPECT_DOUBLE_EQ(perfect.weighted_f1, 1.0);
}

TEST(ClassificationMetrics, UndefinedPrecisionIsFlaggedZero) {
  const auto r = classification_metrics(L{A, A}, L{A, B});
  EXPECT_TRUE(r.per_class[1].precision_undefined);
  EXPECT_EQ(r.per_class[1].precision, 0.0);
  EXPECT_FALSE(r.per_class[0].precision_undefined);
}

TEST(ClassificationMetrics, WeightedAggregatesBySupport) {
  // Supports: A=3, B=1. Per class: A p=1 r=2/3, B p=1/2 r=1.
  const auto r = classification_metrics(L{A, A, B, B}, L{A, A, A, B});
  EXPECT_NEAR(r.weighted_precision, (3 * 1.0 + 1 * 0.5) / 4, 1e-15);
  EXPECT_NEAR(r.weighted_recall, (3 * (2.0 / 3) + 1 * 1.0) / 4, 1e-15);
  EXPECT_NEAR(r.weighted_recall, r.accuracy, 1e-15);
}

TEST(ClassificationMetrics, Properties) {
  Rng rng(31);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + rng.below(50);
    L p(n), y(n);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < n; ++i) {
      p[i] = class_from_index(rng.below(4));
      y[i] = class_from_index(rng.below(4));
      correct += p[i] == y[i];
    }
    const auto r = classification_metrics(p, y);
    EXPECT_NEAR(r.accuracy, static_cast<double>(correct) / static_cast<double>(n), 1e-15);
    for (const auto& c : r.per_class) {
      EXPECT_EQ(c.recall, c.tpr);
      const double hm = c.precision + c.recall > 0 ? 2 * c.precision * c.recall / (c.precision + c.recall) : 0.0;
      EXPECT_NEAR(c.f1, hm, 1e-12);
    }
  }
}

TEST(Roc, FourPointExample) {
  const std::vector<double> s{0.9, 0.8, 0.7, 0.6};
  const auto c = roc_curve_binary(s, {true, false, true, false});
  const std::vector<std::pair<double, double>> expected{{0, 0}, {0, 0.5}, {0.5, 0.5}, {0.5, 1}, {1, 1}};
  ASSERT_EQ(c.points.size(), expected.size());
  for (std::size_t i = 0; i < expected.size(); ++i) {
    EXPECT_DOUBLE_EQ(c.points[i].fpr, expected[i].first);
    EXPECT_DOUBLE_EQ(c.points[i].tpr, expected[i].second);
  }
  EXPECT_DOUBLE_EQ(auc(c), 0.75);
  EXPECT_DOUBLE_EQ(mann_whitney(s, {true, false, true, false}), 0.75);
}

TEST(Roc, SeparatedAndTiedScores) {
  const auto sep = roc_curve_binary(std::vector<double>{0.9, 0.8, 0.2, 0.1}, {true, true, false, false});
  bool through_corner = false;
  for (const auto& p : sep.points) through_corner |= p.fpr == 0.0 && p.tpr == 1.0;
  EXPECT_TRUE(through_corner);
  EXPECT_DOUBLE_EQ(auc(sep), 1.0);

  const auto tied = roc_curve_binary(std::vector<double>{0.5, 0.5, 0.5}, {true, false, true});
  ASSERT_EQ(tied.points.size(), 2u);
  EXPECT_EQ(tied.points[0].fpr, 0.0);
  EXPECT_EQ(tied.points[1].tpr, 1.0);
  EXPECT_DOUBLE_EQ(auc(tied), 0.5);
}

TEST(Roc, SingleClassIsDegenerate) {
  EXPECT_THROW(roc_curve(std::vector<double>{0.1, 0.2}, L{A, A}, A), DegenerateInputError);
  EXPECT_THROW(roc_curve(std::vector<double>{0.1, 0.2}, L{A, A}, B), DegenerateInputError);
}

TEST(Roc, AucEqualsPairCountingOnRandomFixtures) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto f = random_fixture(seed);
    EXPECT_NEAR(auc(roc_curve_binary(f.scores, f.positives)), mann_whitney(f.scores, f.positives), 1e-12)
        << "seed " << seed;
  }
}

TEST(Roc, EndpointsAndMonotonicityOnRandomFixtures) {
  for (std::uint64_t seed = 100; seed < 200; ++seed) {
    const auto f = random_fixture(seed);
    const auto c = roc_curve_binary(f.scores, f.positives);
    EXPECT_EQ(c.points.front().fpr, 0.0);
    EXPECT_EQ(c.points.front().tpr, 0.0);
    EXPECT_EQ(c.points.back().fpr, 1.0);
    EXPECT_EQ(c.points.back().tpr, 1.0);
    for (std::size_t i = 1; i < c.points.size(); ++i) {
      EXPECT_GE(c.points[i].fpr, c.points[i - 1].fpr);
      EXPECT_GE(c.points[i].tpr, c.points[i - 1].tpr);
      EXPECT_LT(c.points[i].threshold, c.points[i - 1].threshold);
    }
  }
}

TEST(EvaluateProbabilities, MicroAucAndPerClass) {
  Matrix p(4, 4);
  p << 0.7, 0.1, 0.1, 0.1,
       0.1, 0.7, 0.1, 0.1,
       0.1, 0.1, 0.7, 0.1,
       0.1, 0.1, 0.1, 0.7;
  const auto r = evaluate_probabilities(p, L{A, B, LabelClass::FocusedToRelaxed, LabelClass::Focused});
  EXPECT_DOUBLE_EQ(r.accuracy, 1.0);
  EXPECT_DOUBLE_EQ(r.micro_auc, 1.0);
  for (const auto& c : r.per_class) EXPECT_DOUBLE_EQ(c.auc, 1.0);

  const auto partial = evaluate_probabilities(p.topRows(2), L{A, B});
  EXPECT_TRUE(std::isnan(partial.per_class[3].auc));
}

TEST(Spearman, Examples) {
  using V = std::vector<double>;
  EXPECT_DOUBLE_EQ(spearman(V{1, 2, 3}, V{10, 20, 30}), 1.0);
  EXPECT_DOUBLE_EQ(spearman(V{1, 2, 3}, V{3, 2, 1}), -1.0);
  // 1 - 6 * sum d^2 / (n (n^2 - 1)) with d = (1, 1, 1, 1): 1 - 24 / 60.
  EXPECT_NEAR(spearman(V{1, 2, 3, 4}, V{2, 1, 4, 3}), 0.6, 1e-15);
  EXPECT_THROW(spearman(V{1, 1, 1}, V{1, 2, 3}), DegenerateInputError);
  EXPECT_THROW(spearman(V{1, 2}, V{1, 2, 3}), ArgumentError);
}

TEST(Spearman, MidRanks) {
  EXPECT_EQ(mid_ranks(std::vector<double>{10, 20, 20, 5}), (std::vector<double>{2, 3.5, 3.5, 1}));
}

TEST(Spearman, InvariantUnderMonotoneTransform) {
  Rng rng(77);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> x(3 + rng.below(40)), y(x.size()), x3(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      x[i] = rng.uniform(0.1, 10);
      y[i] = x[i] + rng.normal(0, 3);
      x3[i] = x[i] * x[i] * x[i];
    }
    EXPECT_NEAR(spearman(x, y), spearman(x3, y), 1e-12);
  }
}

TEST(Similarity, IdenticalRampsAndSymmetry) {
  const auto m = similarity_matrix(ramp_sessions(3), 10, 5);
  for (std::size_t a = 0; a < kClassCount; ++a) {
    EXPECT_DOUBLE_EQ(m.self[a], 1.0);
    for (std::size_t b = 0; b < kClassCount; ++b) EXPECT_EQ(m.values[a][b], m.values[b][a]);
  }
  EXPECT_DOUBLE_EQ(m.values[0][1], -1.0);
  EXPECT_DOUBLE_EQ(m.values[0][2], 1.0);
  // Row 0 is (1, -1, 1, -1): cross = (-1 + 1 - 1) / 3.
  EXPECT_NEAR(m.cross[0], -1.0 / 3.0, 1e-15);
}

TEST(Similarity, DeterministicEntriesInRange) {
  GenSpec spec;
  spec.sessions_per_class = 8;
  const auto set = generate_dataset(spec, true, 3);
  const auto a = similarity_matrix(set, 20, 9), b = similarity_matrix(set, 20, 9);
  EXPECT_EQ(a.values, b.values);
  for (const auto& row : a.values)
    for (double v : row) EXPECT_TRUE(v >= -1.0 && v <= 1.0);
}

TEST(Similarity, ArgumentErrors) {
  EXPECT_THROW(similarity_matrix(ramp_sessions(1), 10, 1), ArgumentError);
  EXPECT_THROW(similarity_matrix(ramp_sessions(2), 0, 1), ArgumentError);
}

TEST(Report, TableLayouts) {
  std::ostringstream sim;
  write_similarity_csv(sim, similarity_matrix(ramp_sessions(2), 4, 1));
  std::string header;
  std::istringstream lines(sim.str());
  std::getline(lines, header);
  EXPECT_EQ(header, "class,relaxed,relaxed_to_focused,focused_to_relaxed,focused,self,cross");
  std::size_t rows = 0;
  for (std::string l; std::getline(lines, l);) {
    ++rows;
    EXPECT_EQ(std::count(l.begin(), l.end(), ','), 6);
  }
  EXPECT_EQ(rows, 4u);

  std::ostringstream roc;
  write_roc_csv(roc, roc_curve_binary(std::vector<double>{0.9, 0.1}, {true, false}));
  EXPECT_EQ(roc.str().rfind("threshold,fpr,tpr\n", 0), 0u);
}

TEST(CompareModels, SingleKindSingleSeedIsOneRow) {
  BenchmarkConfig cfg;
  cfg.gen.sessions_per_class = 10;
  cfg.epochs = 2;
  const auto rows = compare_models({ModelKind::Mlp}, {true}, {1}, cfg);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].condition, "noisy");
  EXPECT_EQ(rows[0].seed_accuracies.size(), 1u);
  std::ostringstream out;
  write_comparison_csv(out, rows);
  EXPECT_EQ(out.str().rfind("method,accuracy,precision,recall,f1,auc\nmlp,", 0), 0u);
  EXPECT_THROW(compare_models({}, {true}, {1}, cfg), ArgumentError);
}
