// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "rng.hpp"

namespace deepbrain {

inline constexpr std::size_t kSessionLength = 180;
inline constexpr std::size_t kWindowLength = 30;
inline constexpr std::size_t kClassCount = 4;

/// Mental-state classes. The numeric values are the canonical label indices
/// and are persisted in checkpoints; do not reorder.
enum class LabelClass : std::uint8_t {
  Relaxed = 0,
  RelaxedToFocused = 1,
  FocusedToRelaxed = 2,
  Focused = 3,
};

inline constexpr std::array<LabelClass, kClassCount> kAllClasses = {
    LabelClass::Relaxed, LabelClass::RelaxedToFocused,
    LabelClass::FocusedToRelaxed, LabelClass::Focused};

enum class Gender : std::uint8_t { Male, Female };

inline std::size_t class_index(LabelClass c) { return static_cast<std::size_t>(c); }

inline LabelClass class_from_index(std::size_t i) {
  if (i >= kClassCount) throw ArgumentError("class index out of range: " + std::to_string(i));
  return static_cast<LabelClass>(i);
}

inline std::string_view class_name(LabelClass c) {
  switch (c) {
    case LabelClass::Relaxed: return "relaxed";
    case LabelClass::RelaxedToFocused: return "relaxed_to_focused";
    case LabelClass::FocusedToRelaxed: return "focused_to_relaxed";
    case LabelClass::Focused: return "focused";
  }
  return "?";
}

inline LabelClass parse_class(std::string_view name) {
  for (auto c : kAllClasses)
    if (class_name(c) == name) return c;
  throw DataError("unknown class label: " + std::string(name));
}

inline std::string_view gender_code(Gender g) { return g == Gender::Male ? "M" : "F"; }

inline Gender parse_gender(std::string_view code) {
  if (code == "M") return Gender::Male;
  if (code == "F") return Gender::Female;
  throw DataError("unknown gender code: " + std::string(code));
}

/// One EEG score series of exactly kSessionLength finite samples.
class RawSession {
 public:
  RawSession(std::vector<double> values, LabelClass label, std::string subject_id,
             Gender gender, bool noisy)
      : values_(std::move(values)),
        label_(label),
        subject_id_(std::move(subject_id)),
        gender_(gender),
        noisy_(noisy) {
    if (values_.size() != kSessionLength)
      throw DataError("session must have " + std::to_string(kSessionLength) +
                      " samples, got " + std::to_string(values_.size()));
    for (double v : values_)
      if (!std::isfinite(v)) throw DataError("session contains a non-finite sample");
  }

  std::span<const double> values() const { return values_; }
  LabelClass label() const { return label_; }
  const std::string& subject_id() const { return subject_id_; }
  Gender gender() const { return gender_; }
  bool noisy() const { return noisy_; }

  friend bool operator==(const RawSession&, const RawSession&) = default;

 private:
  std::vector<double> values_;
  LabelClass label_;
  std::string subject_id_;
  Gender gender_;
  bool noisy_;
};

/// Where a window came from.
struct SessionRef {
  std::string subject_id;
  std::size_t index = 0;  // position in the originating session collection
  friend bool operator==(const SessionRef&, const SessionRef&) = default;
};

inline std::array<double, kClassCount> encode_one_hot(LabelClass c) {
  std::array<double, kClassCount> v{};
  v[class_index(c)] = 1.0;
  return v;
}

/// Argmax; ties go to the lowest index.
inline LabelClass decode_class(std::span<const double> probs) {
  if (probs.size() != kClassCount)
    throw ShapeError("decode_class expects " + std::to_string(kClassCount) +
                     " values, got " + std::to_string(probs.size()));
  std::size_t best = 0;
  for (std::size_t k = 1; k < kClassCount; ++k)
    if (probs[k] > probs[best]) best = k;
  return class_from_index(best);
}

/// Normalised network input: kWindowLength features in [0,1] plus a one-hot label.
class ProcessedWindow {
 public:
  ProcessedWindow(std::vector<double> features, LabelClass label, SessionRef source = {})
      : features_(std::move(features)), label_(label), source_(std::move(source)) {
    if (features_.size() != kWindowLength)
      throw ShapeError("window must have " + std::to_string(kWindowLength) +
                       " features, got " + std::to_string(features_.size()));
    for (double f : features_)
      if (!(f >= 0.0 && f <= 1.0)) throw DataError("window feature outside [0,1]");
  }

  std::span<const double> features() const { return features_; }
  LabelClass label() const { return label_; }
  std::array<double, kClassCount> one_hot() const { return encode_one_hot(label_); }
  const SessionRef& source() const { return source_; }

  friend bool operator==(const ProcessedWindow&, const ProcessedWindow&) = default;

 private:
  std::vector<double> features_;
  LabelClass label_;
  SessionRef source_;
};

struct Dataset {
  std::vector<ProcessedWindow> windows;
  std::map<std::string, std::string> metadata;

  std::size_t size() const { return windows.size(); }
  bool empty() const { return windows.empty(); }
};

/// Raw sessions as produced by the generator or read from JSONL.
struct SessionSet {
  std::vector<RawSession> sessions;
  std::map<std::string, std::string> metadata;

  std::size_t size() const { return sessions.size(); }
  bool empty() const { return sessions.empty(); }
};

namespace detail {

template <typename Collection>
std::pair<Collection, Collection> split_items(const Collection& data, auto member,
                                              double train_fraction, std::uint64_t seed) {
  const auto& items = data.*member;
  if (items.empty()) throw ArgumentError("cannot split an empty dataset");
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw ArgumentError("train_fraction must lie in (0,1)");

  std::vector<std::size_t> order(items.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(order.begin(), order.end());

  const auto n_train =
      static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(items.size())));
  Collection train, test;
  train.metadata = test.metadata = data.metadata;
  for (std::size_t i = 0; i < order.size(); ++i)
    (i < n_train ? train.*member : test.*member).push_back(items[order[i]]);
  return {std::move(train), std::move(test)};
}

}  // namespace detail

/// Seeded shuffle then cut; the train part holds round(train_fraction * N) items.
inline std::pair<Dataset, Dataset> split_dataset(const Dataset& data, double train_fraction,
                                                 std::uint64_t seed) {
  return detail::split_items(data, &Dataset::windows, train_fraction, seed);
}

inline std::pair<SessionSet, SessionSet> split_dataset(const SessionSet& data,
                                                       double train_fraction,
                                                       std::uint64_t seed) {
  return detail::split_items(data, &SessionSet::sessions, train_fraction, seed);
}

}  // namespace deepbrain
