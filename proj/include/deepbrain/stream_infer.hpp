// SPDX-License-Identifier: Apache-2.0
#pragma once

// Sliding-window inference over a stream of raw score samples.
// After the first kSessionLength samples, one inference runs every `stride`
// samples; a command is emitted whenever the k-vote smoothed class changes.

#include <array>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <deque>
#include <functional>
#include <istream>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "checkpoint.hpp"
#include "errors.hpp"
#include "network.hpp"
#include "preprocess.hpp"
#include "signal_model.hpp"

namespace deepbrain {

struct CommandMap {
  std::array<std::string, kClassCount> commands = {"stop", "start_task", "end_task", "forward"};

  const std::string& operator[](LabelClass c) const { return commands[class_index(c)]; }
  void set(LabelClass c, std::string command) { commands[class_index(c)] = std::move(command); }
};

struct StreamConfig {
  std::size_t stride = 30;
  std::size_t smoothing = 3;  // majority vote over the last k decisions; odd
  CommandMap commands;

  void validate() const {
    if (stride == 0) throw ArgumentError("stride must be >= 1");
    if (smoothing == 0 || smoothing % 2 == 0) throw ArgumentError("smoothing window must be odd and >= 1");
  }
};

struct WindowDecision {
  LabelClass label = LabelClass::Relaxed;
  std::array<double, kClassCount> probs{};
};

/// Applies the checkpoint's preprocessing, then an eval-mode forward pass.
inline WindowDecision classify_window(const Checkpoint& ck, std::span<const double> raw_window) {
  if (raw_window.size() != kSessionLength)
    throw ShapeError("classify_window expects " + std::to_string(kSessionLength) + " samples");
  const auto features = preprocess_values(raw_window, ck.preprocess_config);
  const Tensor batch({1, features.size(), 1}, features);
  const Matrix probs = model_forward(ck.model_config, ck.params, batch, ForwardMode::eval()).probs;
  WindowDecision d;
  for (std::size_t k = 0; k < kClassCount; ++k) d.probs[k] = probs(0, static_cast<Eigen::Index>(k));
  d.label = decode_class(d.probs);
  return d;
}

struct StreamLogEntry {
  std::size_t sample_index = 0;  // samples consumed when the inference ran
  LabelClass label = LabelClass::Relaxed;
  std::array<double, kClassCount> probs{};
  std::optional<std::string> command;
};

inline std::string to_jsonl(const StreamLogEntry& e) {
  nlohmann::ordered_json j;
  j["i"] = e.sample_index;
  j["class"] = class_name(e.label);
  j["probs"] = e.probs;
  j["command"] = e.command ? nlohmann::ordered_json(*e.command) : nlohmann::ordered_json(nullptr);
  return j.dump();
}

struct StreamSummary {
  std::size_t samples = 0;
  std::size_t windows = 0;
  std::size_t malformed = 0;
  std::size_t commands = 0;
};

/// Number of inferences for an n-sample stream.
inline std::size_t expected_inferences(std::size_t n, std::size_t stride) {
  return n < kSessionLength ? 0 : (n - kSessionLength) / stride + 1;
}

class StreamProcessor {
 public:
  StreamProcessor(const Checkpoint& ck, StreamConfig cfg) : ck_(ck), cfg_(std::move(cfg)) { cfg_.validate(); }

  /// Feeds one sample; returns a log entry when an inference ran.
  std::optional<StreamLogEntry> push(double sample) {
    buffer_.push_back(sample);
    if (buffer_.size() > kSessionLength) buffer_.pop_front();
    ++consumed_;
    if (consumed_ < kSessionLength || (consumed_ - kSessionLength) % cfg_.stride != 0) return std::nullopt;

    const std::vector<double> window(buffer_.begin(), buffer_.end());
    const auto d = classify_window(ck_, window);
    recent_.push_back(d.label);
    if (recent_.size() > cfg_.smoothing) recent_.pop_front();
    const LabelClass smoothed = vote();

    StreamLogEntry e{consumed_, d.label, d.probs, std::nullopt};
    if (!current_ || *current_ != smoothed) {
      current_ = smoothed;
      e.command = cfg_.commands[smoothed];
    }
    return e;
  }

  std::optional<LabelClass> smoothed_class() const { return current_; }

 private:
  // Majority over the recent decisions; ties keep the current class if it is
  // among the leaders, otherwise go to the most recent leader.
  LabelClass vote() const {
    std::array<std::size_t, kClassCount> counts{};
    for (auto c : recent_) ++counts[class_index(c)];
    const std::size_t best = *std::max_element(counts.begin(), counts.end());
    if (current_ && counts[class_index(*current_)] == best) return *current_;
    for (auto it = recent_.rbegin(); it != recent_.rend(); ++it)
      if (counts[class_index(*it)] == best) return *it;
    return recent_.back();
  }

  const Checkpoint& ck_;
  StreamConfig cfg_;
  std::deque<double> buffer_;
  std::deque<LabelClass> recent_;
  std::optional<LabelClass> current_;
  std::size_t consumed_ = 0;
};

/// Parses one line as a finite decimal number.
inline std::optional<double> parse_sample(std::string_view line) {
  while (!line.empty() && (line.back() == '\r' || line.back() == ' ' || line.back() == '\t')) line.remove_suffix(1);
  while (!line.empty() && (line.front() == ' ' || line.front() == '\t')) line.remove_prefix(1);
  if (!line.empty() && line.front() == '+') line.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(line.data(), line.data() + line.size(), v);
  if (line.empty() || ec != std::errc() || ptr != line.data() + line.size() || !std::isfinite(v))
    return std::nullopt;
  return v;
}

/// Reads one number per line; malformed lines are skipped and counted,
/// blank lines ignored.
inline StreamSummary run_stream(std::istream& in, const Checkpoint& ck, const StreamConfig& cfg,
                                const std::function<void(const StreamLogEntry&)>& sink) {
  StreamProcessor proc(ck, cfg);
  StreamSummary summary;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto v = parse_sample(line);
    if (!v) {
      ++summary.malformed;
      continue;
    }
    ++summary.samples;
    if (auto e = proc.push(*v)) {
      ++summary.windows;
      if (e->command) ++summary.commands;
      sink(*e);
    }
  }
  return summary;
}

}  // namespace deepbrain
