// SPDX-License-Identifier: Apache-2.0
#pragma once

// Synthetic stand-in for single-channel EEG score recordings.
//
// Each session is drawn from its own Rng seeded with
// derive_seed(master_seed, k), where k = class_index * sessions_per_class + i
// is the session's position in the (class-major) output. Draw order inside a
// session: relaxed-level jitter, focused-level jitter, transition centre, then
// for every sample a normal noise variate followed by an outlier Bernoulli.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "errors.hpp"
#include "rng.hpp"
#include "signal_model.hpp"

namespace deepbrain {

struct SubjectProfile {
  std::string subject_id;
  Gender gender = Gender::Male;
  double relaxed_level = 58.0;
  double focused_level = 78.0;
  double level_jitter = 2.0;  // stddev of the per-session level offsets

  static SubjectProfile male(std::string id) { return {std::move(id), Gender::Male, 58.0, 78.0, 2.0}; }
  static SubjectProfile female(std::string id) {
    return {std::move(id), Gender::Female, 45.0, 70.0, 2.0};
  }

  void validate() const {
    if (!(focused_level > relaxed_level))
      throw ArgumentError("profile " + subject_id + ": focused_level must exceed relaxed_level");
    if (!(level_jitter >= 0.0)) throw ArgumentError("level_jitter must be >= 0");
  }
};

struct GenSpec {
  std::size_t sessions_per_class = 200;
  std::vector<SubjectProfile> profiles = {SubjectProfile::male("S1"), SubjectProfile::female("S2"),
                                          SubjectProfile::male("S3"), SubjectProfile::female("S4")};
  double quiet_noise_std = 1.5;
  double noisy_noise_std = 6.0;
  double outlier_rate = 0.01;
  double outlier_magnitude = 40.0;
  double transition_center_min = 0.35;  // fractions of the session length
  double transition_center_max = 0.65;
  double transition_steepness = 0.08;  // logistic scale, fraction of the session length
  // Optional onset drift on plateau sessions: relaxed sessions start
  // settle_amplitude above their level, focused ones below, decaying with
  // time constant settle_time (fraction of the session length). Off by default.
  double settle_amplitude = 0.0;
  double settle_time = 0.15;

  void validate() const {
    if (sessions_per_class == 0) throw ArgumentError("sessions_per_class must be >= 1");
    if (profiles.empty()) throw ArgumentError("at least one subject profile is required");
    for (const auto& p : profiles) p.validate();
    if (!(quiet_noise_std >= 0.0 && noisy_noise_std >= 0.0))
      throw ArgumentError("noise stddevs must be >= 0");
    if (!(outlier_rate >= 0.0 && outlier_rate <= 1.0))
      throw ArgumentError("outlier_rate must lie in [0,1]");
    if (!(transition_center_min >= 0.0 && transition_center_min <= transition_center_max &&
          transition_center_max <= 1.0))
      throw ArgumentError("transition centre range must be a sub-interval of [0,1]");
    if (!(transition_steepness > 0.0)) throw ArgumentError("transition_steepness must be > 0");
    if (!(settle_time > 0.0)) throw ArgumentError("settle_time must be > 0");
  }
};

inline RawSession generate_session(LabelClass cls, const SubjectProfile& profile,
                                   const GenSpec& spec, bool noisy, std::uint64_t seed) {
  Rng rng(seed);
  const double relaxed = profile.relaxed_level + rng.normal(0.0, profile.level_jitter);
  const double focused = profile.focused_level + rng.normal(0.0, profile.level_jitter);
  const double length = static_cast<double>(kSessionLength);
  const double center =
      rng.uniform(spec.transition_center_min, spec.transition_center_max) * length;
  const double scale = spec.transition_steepness * length;
  const double tau = spec.settle_time * length;
  const double noise_std = noisy ? spec.noisy_noise_std : spec.quiet_noise_std;

  std::vector<double> values(kSessionLength);
  for (std::size_t i = 0; i < kSessionLength; ++i) {
    const double t = static_cast<double>(i);
    const double ramp = 1.0 / (1.0 + std::exp(-(t - center) / scale));
    const double settle = spec.settle_amplitude * std::exp(-t / tau);
    double level = 0.0;
    switch (cls) {
      case LabelClass::Relaxed: level = relaxed + settle; break;
      case LabelClass::Focused: level = focused - settle; break;
      case LabelClass::RelaxedToFocused: level = relaxed + (focused - relaxed) * ramp; break;
      case LabelClass::FocusedToRelaxed: level = focused + (relaxed - focused) * ramp; break;
    }
    double x = level + rng.normal(0.0, noise_std);
    if (rng.bernoulli(spec.outlier_rate)) x += spec.outlier_magnitude;
    values[i] = x;
  }
  return RawSession(std::move(values), cls, profile.subject_id, profile.gender, noisy);
}

inline nlohmann::ordered_json gen_spec_to_json(const GenSpec& spec) {
  nlohmann::ordered_json j;
  j["sessions_per_class"] = spec.sessions_per_class;
  auto& profiles = j["profiles"] = nlohmann::ordered_json::array();
  for (const auto& p : spec.profiles)
    profiles.push_back({{"subject_id", p.subject_id},
                        {"gender", gender_code(p.gender)},
                        {"relaxed_level", p.relaxed_level},
                        {"focused_level", p.focused_level},
                        {"level_jitter", p.level_jitter}});
  j["quiet_noise_std"] = spec.quiet_noise_std;
  j["noisy_noise_std"] = spec.noisy_noise_std;
  j["outlier_rate"] = spec.outlier_rate;
  j["outlier_magnitude"] = spec.outlier_magnitude;
  j["transition_center_range"] = {spec.transition_center_min, spec.transition_center_max};
  j["transition_steepness"] = spec.transition_steepness;
  j["settle_amplitude"] = spec.settle_amplitude;
  j["settle_time"] = spec.settle_time;
  return j;
}

/// Balanced, class-major session list; profiles are assigned round-robin
/// within each class.
inline SessionSet generate_dataset(const GenSpec& spec, bool noisy, std::uint64_t seed) {
  spec.validate();
  SessionSet set;
  set.sessions.reserve(spec.sessions_per_class * kClassCount);
  for (auto cls : kAllClasses) {
    for (std::size_t i = 0; i < spec.sessions_per_class; ++i) {
      const std::size_t k = class_index(cls) * spec.sessions_per_class + i;
      const auto& profile = spec.profiles[i % spec.profiles.size()];
      set.sessions.push_back(generate_session(cls, profile, spec, noisy, derive_seed(seed, k)));
    }
  }
  set.metadata["generator"] = "synthgen";
  set.metadata["master_seed"] = std::to_string(seed);
  set.metadata["noisy"] = noisy ? "true" : "false";
  set.metadata["sessions_per_class"] = std::to_string(spec.sessions_per_class);
  return set;
}

}  // namespace deepbrain
