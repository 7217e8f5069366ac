// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <algorithm>
#include <map>
#include <numeric>

#include <deepbrain/synthgen.hpp>

using namespace deepbrain;

namespace {

GenSpec noiseless() {
  GenSpec s;
  s.quiet_noise_std = 0.0;
  s.noisy_noise_std = 0.0;
  s.outlier_rate = 0.0;
  for (auto& p : s.profiles) p.level_jitter = 0.0;
  return s;
}

double mean(std::span<const double> v) { return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size()); }

}  // namespace

TEST(GenerateSession, NoiselessPlateausAreConstant) {
  const auto spec = noiseless();
  const auto& male = spec.profiles[0];
  const auto r = generate_session(LabelClass::Relaxed, male, spec, false, 3);
  const auto f = generate_session(LabelClass::Focused, male, spec, false, 3);
  for (double v : r.values()) EXPECT_EQ(v, 58.0);
  for (double v : f.values()) EXPECT_EQ(v, 78.0);
}

TEST(GenerateSession, NoiselessRampEndpointsAndMonotone) {
  const auto spec = noiseless();
  for (const auto& prof : spec.profiles) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const auto ups = generate_session(LabelClass::RelaxedToFocused, prof, spec, false, seed);
      const auto up = ups.values();
      EXPECT_NEAR(up.front(), prof.relaxed_level, 1.0);
      EXPECT_NEAR(up.back(), prof.focused_level, 1.0);
      for (std::size_t i = 1; i < up.size(); ++i) EXPECT_GE(up[i], up[i - 1]);

      const auto downs = generate_session(LabelClass::FocusedToRelaxed, prof, spec, false, seed);
      const auto down = downs.values();
      EXPECT_NEAR(down.front(), prof.focused_level, 1.0);
      EXPECT_NEAR(down.back(), prof.relaxed_level, 1.0);
      for (std::size_t i = 1; i < down.size(); ++i) EXPECT_LE(down[i], down[i - 1]);
    }
  }
}

TEST(GenerateSession, SettleDriftShape) {
  auto spec = noiseless();
  spec.settle_amplitude = 4.0;
  const auto& prof = spec.profiles[0];
  const auto rs = generate_session(LabelClass::Relaxed, prof, spec, false, 1);
  const auto fs = generate_session(LabelClass::Focused, prof, spec, false, 1);
  const auto r = rs.values(), f = fs.values();
  EXPECT_DOUBLE_EQ(r.front(), 62.0);
  EXPECT_DOUBLE_EQ(f.front(), 74.0);
  for (std::size_t i = 1; i < r.size(); ++i) {
    EXPECT_LT(r[i], r[i - 1]);
    EXPECT_GT(f[i], f[i - 1]);
  }
}

TEST(GenerateDataset, SizeBalanceAndOrder) {
  const auto set = generate_dataset(GenSpec{}, false, 11);
  ASSERT_EQ(set.size(), 800u);
  std::map<LabelClass, std::size_t> hist;
  for (const auto& s : set.sessions) ++hist[s.label()];
  for (auto c : kAllClasses) EXPECT_EQ(hist[c], 200u);
  EXPECT_EQ(set.sessions.front().label(), LabelClass::Relaxed);
  EXPECT_EQ(set.sessions.back().label(), LabelClass::Focused);
  EXPECT_EQ(set.sessions[0].subject_id(), "S1");
  EXPECT_EQ(set.sessions[1].subject_id(), "S2");
  EXPECT_EQ(set.sessions[1].gender(), Gender::Female);
}

TEST(GenerateDataset, DeterministicAndSeedSensitive) {
  GenSpec spec;
  spec.sessions_per_class = 10;
  const auto a = generate_dataset(spec, true, 5);
  const auto b = generate_dataset(spec, true, 5);
  const auto c = generate_dataset(spec, true, 6);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a.sessions[i], b.sessions[i]);
  EXPECT_FALSE(std::ranges::equal(a.sessions[0].values(), c.sessions[0].values()));
  for (const auto& s : a.sessions) EXPECT_TRUE(s.noisy());
}

TEST(GenerateDataset, MaleRelaxedAboveFemaleRelaxed) {
  const auto set = generate_dataset(GenSpec{}, false, 2);
  double male = 0.0, female = 0.0;
  std::size_t nm = 0, nf = 0;
  for (const auto& s : set.sessions) {
    if (s.label() != LabelClass::Relaxed) continue;
    (s.gender() == Gender::Male ? male : female) += mean(s.values());
    ++(s.gender() == Gender::Male ? nm : nf);
  }
  EXPECT_GT(male / static_cast<double>(nm), female / static_cast<double>(nf));
}

TEST(GenerateDataset, NoisyHasLargerResidualSpread) {
  // Residual stddev around the profile level on plateau sessions, outliers excluded.
  GenSpec spec;
  spec.outlier_rate = 0.0;
  spec.sessions_per_class = 20;
  auto spread = [&](bool noisy) {
    const auto set = generate_dataset(spec, noisy, 9);
    double ss = 0.0;
    std::size_t n = 0;
    for (const auto& s : set.sessions) {
      if (s.label() != LabelClass::Relaxed) continue;
      const double m = mean(s.values());
      for (double v : s.values()) ss += (v - m) * (v - m), ++n;
    }
    return std::sqrt(ss / static_cast<double>(n));
  };
  const double quiet = spread(false), noisy = spread(true);
  EXPECT_NEAR(quiet, 1.5, 0.1);
  EXPECT_NEAR(noisy, 6.0, 0.3);
}

TEST(GenSpec, Validation) {
  GenSpec s;
  s.sessions_per_class = 0;
  EXPECT_THROW(generate_dataset(s, false, 1), ArgumentError);
  s = {};
  s.profiles[0].focused_level = 10;
  EXPECT_THROW(s.validate(), ArgumentError);
  s = {};
  s.outlier_rate = 1.5;
  EXPECT_THROW(s.validate(), ArgumentError);
}
