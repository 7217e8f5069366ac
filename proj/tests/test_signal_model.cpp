// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <algorithm>
#include <sstream>

#include <deepbrain/session_io.hpp>
#include <deepbrain/signal_model.hpp>

using namespace deepbrain;

namespace {

Dataset numbered_windows(std::size_t n) {
  Dataset d;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> f(kWindowLength, static_cast<double>(i) / static_cast<double>(n));
    d.windows.emplace_back(f, class_from_index(i % kClassCount), SessionRef{"S", i});
  }
  return d;
}

std::vector<std::size_t> ids(const Dataset& d) {
  std::vector<std::size_t> out;
  for (const auto& w : d.windows) out.push_back(w.source().index);
  return out;
}

}  // namespace

TEST(OneHot, CanonicalOrdering) {
  EXPECT_EQ(encode_one_hot(LabelClass::Relaxed), (std::array<double, 4>{1, 0, 0, 0}));
  EXPECT_EQ(encode_one_hot(LabelClass::Focused), (std::array<double, 4>{0, 0, 0, 1}));
  EXPECT_EQ(encode_one_hot(LabelClass::RelaxedToFocused), (std::array<double, 4>{0, 1, 0, 0}));
}

TEST(OneHot, DecodeIsInverse) {
  for (auto c : kAllClasses) {
    const auto v = encode_one_hot(c);
    EXPECT_EQ(decode_class(v), c);
  }
}

TEST(DecodeClass, ArgmaxAndTies) {
  EXPECT_EQ(decode_class(std::vector<double>{0.1, 0.2, 0.6, 0.1}), LabelClass::FocusedToRelaxed);
  EXPECT_EQ(decode_class(std::vector<double>{0.25, 0.25, 0.25, 0.25}), LabelClass::Relaxed);
  EXPECT_EQ(decode_class(std::vector<double>{0, 0, 0, 1}), LabelClass::Focused);
  EXPECT_EQ(decode_class(std::vector<double>{0, 0.5, 0, 0.5}), LabelClass::RelaxedToFocused);
}

TEST(DecodeClass, WrongLengthIsShapeError) {
  EXPECT_THROW(decode_class(std::vector<double>{0.5, 0.5}), ShapeError);
}

TEST(RawSession, RejectsWrongLengthAndNonFinite) {
  EXPECT_THROW(RawSession(std::vector<double>(179, 1.0), LabelClass::Relaxed, "a", Gender::Male, false),
               DataError);
  std::vector<double> v(kSessionLength, 1.0);
  v[10] = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(RawSession(v, LabelClass::Relaxed, "a", Gender::Male, false), DataError);
}

TEST(ProcessedWindow, EnforcesInvariants) {
  EXPECT_THROW(ProcessedWindow(std::vector<double>(29, 0.5), LabelClass::Relaxed), ShapeError);
  std::vector<double> f(kWindowLength, 0.5);
  f[3] = 1.2;
  EXPECT_THROW(ProcessedWindow(f, LabelClass::Relaxed), DataError);
  const ProcessedWindow ok(std::vector<double>(kWindowLength, 0.5), LabelClass::Focused);
  const auto oh = ok.one_hot();
  EXPECT_EQ(std::count(oh.begin(), oh.end(), 1.0), 1);
  EXPECT_EQ(std::count(oh.begin(), oh.end(), 0.0), 3);
}

TEST(SplitDataset, Sizes) {
  const auto [train, test] = split_dataset(numbered_windows(10), 0.8, 1);
  EXPECT_EQ(train.size(), 8u);
  EXPECT_EQ(test.size(), 2u);
}

TEST(SplitDataset, DeterministicUnderSeed) {
  const auto data = numbered_windows(10);
  const auto a = split_dataset(data, 0.8, 1);
  const auto b = split_dataset(data, 0.8, 1);
  EXPECT_EQ(ids(a.first), ids(b.first));
  EXPECT_EQ(ids(a.second), ids(b.second));
}

TEST(SplitDataset, SeedChangesPermutation) {
  const auto data = numbered_windows(10);
  EXPECT_NE(ids(split_dataset(data, 0.8, 1).first), ids(split_dataset(data, 0.8, 2).first));
}

TEST(SplitDataset, IsAPartition) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const std::size_t n = 1 + seed * 7 % 97;
    const auto [train, test] = split_dataset(numbered_windows(n), 0.3 + 0.01 * static_cast<double>(seed), seed);
    auto all = ids(train);
    const auto rest = ids(test);
    all.insert(all.end(), rest.begin(), rest.end());
    std::sort(all.begin(), all.end());
    ASSERT_EQ(all.size(), n);
    for (std::size_t i = 0; i < n; ++i) EXPECT_EQ(all[i], i);
  }
}

TEST(SplitDataset, ArgumentErrors) {
  EXPECT_THROW(split_dataset(Dataset{}, 0.8, 1), ArgumentError);
  EXPECT_THROW(split_dataset(numbered_windows(4), 0.0, 1), ArgumentError);
  EXPECT_THROW(split_dataset(numbered_windows(4), 1.0, 1), ArgumentError);
}

TEST(SessionJsonl, FieldNamesAndRoundTrip) {
  std::vector<double> v(kSessionLength);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = 0.1 * static_cast<double>(i) + 1.0 / 3.0;
  SessionSet set;
  set.sessions.emplace_back(v, LabelClass::FocusedToRelaxed, "subj-7", Gender::Female, true);
  std::ostringstream out;
  write_sessions_jsonl(out, set);
  const std::string line = out.str();
  EXPECT_EQ(line.rfind("{\"subject_id\":\"subj-7\",\"gender\":\"F\",\"label\":\"focused_to_relaxed\",\"noisy\":true,\"values\":[", 0), 0u);

  std::istringstream in(line);
  const auto back = read_sessions_jsonl(in);
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(back.sessions[0], set.sessions[0]);
}

TEST(SessionJsonl, MalformedRecordsAreDataErrors) {
  std::istringstream bad_json("{not json}\n");
  EXPECT_THROW(read_sessions_jsonl(bad_json), DataError);
  std::istringstream bad_label(R"({"subject_id":"a","gender":"M","label":"sleepy","noisy":false,"values":[1]})");
  EXPECT_THROW(read_sessions_jsonl(bad_label), DataError);
  std::istringstream short_values(R"({"subject_id":"a","gender":"M","label":"relaxed","noisy":false,"values":[1,2]})");
  EXPECT_THROW(read_sessions_jsonl(short_values), DataError);
}
