// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>

#include "errors.hpp"
#include "model_config.hpp"

namespace deepbrain {

struct AdamState {
  ModelParams m;  // first moments, same layout as the parameters
  ModelParams v;  // second moments
  std::uint64_t t = 0;
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  static AdamState for_params(const ModelParams& params, double lr = 1e-4) {
    AdamState s;
    s.m = params.zeros_like();
    s.v = params.zeros_like();
    s.lr = lr;
    return s;
  }

  friend bool operator==(const AdamState&, const AdamState&) = default;
};

/// One bias-corrected Adam update, in place.
inline void adam_step(ModelParams& params, const GradientSet& grads, AdamState& state) {
  if (!params.same_layout(grads) || !params.same_layout(state.m) || !params.same_layout(state.v))
    throw ShapeError("adam_step: parameter, gradient and moment layouts differ");
  state.t += 1;
  const double t = static_cast<double>(state.t);
  const double c1 = 1.0 - std::pow(state.beta1, t);
  const double c2 = 1.0 - std::pow(state.beta2, t);
  for (std::size_t a = 0; a < params.arrays.size(); ++a) {
    auto& p = params.arrays[a].values;
    const auto& g = grads.arrays[a].values;
    auto& m = state.m.arrays[a].values;
    auto& v = state.v.arrays[a].values;
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * g[i];
      v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * g[i] * g[i];
      const double m_hat = m[i] / c1;
      const double v_hat = v[i] / c2;
      p[i] -= state.lr * m_hat / (std::sqrt(v_hat) + state.epsilon);
    }
  }
}

/// Rescales the gradient so its global L2 norm is at most `max_norm`.
/// Returns the norm before clipping.
inline double clip_global_norm(GradientSet& grads, double max_norm) {
  double sq = 0.0;
  for (const auto& a : grads.arrays)
    for (double g : a.values) sq += g * g;
  const double norm = std::sqrt(sq);
  if (norm > max_norm && norm > 0.0) {
    const double scale = max_norm / norm;
    for (auto& a : grads.arrays)
      for (double& g : a.values) g *= scale;
  }
  return norm;
}

}  // namespace deepbrain
