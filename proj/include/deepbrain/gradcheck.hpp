// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>

#include "backprop.hpp"
#include "model_config.hpp"
#include "network.hpp"
#include "rng.hpp"

namespace deepbrain {

/// Tiny model: embedding [2,2], two 3-unit LSTM layers (one for PlainLstm),
/// attention width 3, T = 5, batch 3; Mlp uses 3 hidden units.
struct GradFixture {
  ModelConfig config;
  ModelParams params;
  Tensor batch;
  Matrix labels;
  ForwardMode mode;  // training mode with a fixed dropout mask
};

inline GradFixture grad_fixture(ModelKind kind, std::uint64_t seed) {
  GradFixture f;
  f.config = ModelConfig::for_kind(kind);
  f.config.seq_len = 5;
  f.config.embed_widths = {2, 2};
  f.config.lstm_hidden = 3;
  f.config.attention_width = 3;
  f.config.mlp_hidden = 3;
  f.params = init_params(f.config, seed);
  f.batch = Tensor({3, 5, 1});
  Rng rng(derive_seed(seed, 1));
  for (auto& v : f.batch.values) v = rng.uniform();
  f.labels = Matrix::Zero(3, 4);
  f.labels(0, 1) = f.labels(1, 3) = f.labels(2, 0) = 1.0;
  f.mode = ForwardMode::train(derive_seed(seed, 2));
  return f;
}

/// BPTT against central differences on the fixture.
inline GradientComparison run_gradcheck(const GradFixture& f, double h) {
  const auto fwd = model_forward(f.config, f.params, f.batch, f.mode);
  const auto analytic = backward(f.config, f.params, *fwd.trace, f.batch, f.labels);
  const auto numeric = finite_diff_grad(f.config, f.params, f.batch, f.labels, f.mode, h);
  return compare_gradients(analytic, numeric);
}

}  // namespace deepbrain
