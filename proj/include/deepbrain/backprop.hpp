// SPDX-License-Identifier: Apache-2.0
#pragma once

// Loss and exact gradients: softmax cross-entropy through the head, dropout,
// attention and a fully unrolled BPTT over every LSTM layer and step.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>

#include "errors.hpp"
#include "model_config.hpp"
#include "network.hpp"
#include "tensor.hpp"

namespace deepbrain {

/// Mean over the batch of -sum_k y_k ln(max(p_k, 1e-15)).
inline double cross_entropy_loss(const Matrix& probs, const Matrix& one_hots) {
  if (probs.rows() != one_hots.rows() || probs.cols() != one_hots.cols() || probs.rows() == 0)
    throw ShapeError("cross_entropy_loss: probability and label shapes differ");
  double total = 0.0;
  for (Eigen::Index r = 0; r < probs.rows(); ++r)
    for (Eigen::Index c = 0; c < probs.cols(); ++c)
      if (one_hots(r, c) != 0.0) total -= one_hots(r, c) * std::log(std::max(probs(r, c), 1e-15));
  return total / static_cast<double>(probs.rows());
}

namespace detail {

inline void accumulate(ParamArray& g, const Matrix& m) {
  auto dst = g.mutable_matrix();
  if (dst.rows() == m.rows() && dst.cols() == m.cols())
    dst += m;
  else
    dst += Eigen::Map<const Matrix>(m.data(), dst.rows(), dst.cols());
}

/// Backward through one LSTM layer. `d_hidden` is dL/dh_t for every step
/// (time-major), `d_final_c` an extra gradient on the last cell state.
/// Returns dL/d(inputs), time-major.
inline Matrix lstm_layer_backward(const LstmLayerCache& cache, const LstmParams& p, Eigen::Index n,
                                  const Matrix& d_hidden, const Matrix* d_final_c,
                                  ParamArray& g_input, ParamArray& g_recurrent, ParamArray& g_bias) {
  const Eigen::Index H = p.hidden_size();
  const Eigen::Index T = cache.hidden.rows() / n;
  Matrix dz(T * n, 4 * H);
  Matrix dh_next = Matrix::Zero(n, H);
  Matrix dc_next = Matrix::Zero(n, H);
  if (d_final_c) dc_next = *d_final_c;

  for (Eigen::Index t = T - 1; t >= 0; --t) {
    const auto gates = cache.gates.middleRows(t * n, n).array();
    const auto i = gates.middleCols(0, H);
    const auto f = gates.middleCols(H, H);
    const auto o = gates.middleCols(2 * H, H);
    const auto m = gates.middleCols(3 * H, H);
    const Eigen::ArrayXXd tanh_c = cache.cells.middleRows(t * n, n).array().tanh();
    const Eigen::ArrayXXd c_prev = t > 0 ? Eigen::ArrayXXd(cache.cells.middleRows((t - 1) * n, n).array())
                                         : Eigen::ArrayXXd::Zero(n, H);

    const Eigen::ArrayXXd dh = d_hidden.middleRows(t * n, n).array() + dh_next.array();
    const Eigen::ArrayXXd dc = dc_next.array() + dh * o * (1.0 - tanh_c.square());

    auto dzt = dz.middleRows(t * n, n);
    dzt.middleCols(0, H) = (dc * m * i * (1.0 - i)).matrix();
    dzt.middleCols(H, H) = (dc * c_prev * f * (1.0 - f)).matrix();
    dzt.middleCols(2 * H, H) = (dh * tanh_c * o * (1.0 - o)).matrix();
    dzt.middleCols(3 * H, H) = (dc * i * (1.0 - m.square())).matrix();

    dh_next.noalias() = dzt * p.recurrent_weights.transpose();
    dc_next = (dc * f).matrix();
  }

  // Parameter gradients in bulk: the per-step previous hidden state is the
  // hidden sequence shifted down by one step with zeros at t = 0.
  accumulate(g_input, cache.inputs.transpose() * dz);
  if (T > 1)
    accumulate(g_recurrent,
               cache.hidden.topRows((T - 1) * n).transpose() * dz.bottomRows((T - 1) * n));
  accumulate(g_bias, dz.colwise().sum());
  return dz * p.input_weights.transpose();
}

}  // namespace detail

/// Exact gradient of cross_entropy_loss(model_forward(batch)) for the batch
/// and dropout mask recorded in `trace`.
inline GradientSet backward(const ModelConfig& config, const ModelParams& params,
                            const ForwardTrace& trace, const Tensor& batch, const Matrix& one_hots) {
  check_batch(config, batch);
  const auto n = static_cast<Eigen::Index>(batch.dim(0));
  const auto T = static_cast<Eigen::Index>(batch.dim(1));
  if (trace.kind != config.kind || trace.batch != n || trace.steps != T || trace.probs.rows() != n)
    throw ContractError("backward: trace does not belong to this batch/config");
  const Matrix expected_input =
      config.kind == ModelKind::Mlp ? Matrix(MatrixView(batch.values.data(), n, T)) : time_major_input(batch);
  if (expected_input != trace.input) throw ContractError("backward: trace was produced for a different batch");
  if (one_hots.rows() != n || one_hots.cols() != static_cast<Eigen::Index>(config.class_count))
    throw ShapeError("backward: one-hot labels must be [n x class_count]");

  GradientSet grads = params.zeros_like();

  // Softmax + mean cross-entropy.
  const Matrix d_logits = (trace.probs - one_hots) / static_cast<double>(n);
  const auto& w_out = params.at(names::out_weight);
  detail::accumulate(grads.at(names::out_weight), trace.head_dropped.transpose() * d_logits);
  detail::accumulate(grads.at(names::out_bias), d_logits.colwise().sum());
  Matrix d_head = d_logits * w_out.matrix().transpose();

  if (config.kind == ModelKind::Mlp) {
    const Matrix d_pre = (d_head.array() * (1.0 - trace.mlp_hidden.array().square())).matrix();
    detail::accumulate(grads.at(names::mlp_weight), trace.input.transpose() * d_pre);
    detail::accumulate(grads.at(names::mlp_bias), d_pre.colwise().sum());
    return grads;
  }

  if (trace.dropout_mask.size() > 0) d_head = (d_head.array() * trace.dropout_mask.array()).matrix();

  const Eigen::Index H = static_cast<Eigen::Index>(config.lstm_hidden);
  Matrix d_hidden = Matrix::Zero(T * n, H);
  Matrix d_final_c;
  d_hidden.bottomRows(n) += d_head.leftCols(H);

  if (config.has_attention()) {
    if (!trace.attention) throw ContractError("backward: attention cache missing");
    const auto& att = *trace.attention;
    const auto ap = attention_view(params);
    const auto& hs = trace.lstm.back().hidden;
    const Matrix d_ctx = d_head.rightCols(H);

    // Context = sum_t w_t h_t.
    Matrix d_weights(n, T);
    for (Eigen::Index t = 0; t < T; ++t) {
      const auto h_t = hs.middleRows(t * n, n);
      d_weights.col(t) = (h_t.array() * d_ctx.array()).rowwise().sum().matrix();
      d_hidden.middleRows(t * n, n) += (d_ctx.array().colwise() * att.weights.col(t).array()).matrix();
    }
    // Softmax over steps.
    const Eigen::VectorXd dot = (att.weights.array() * d_weights.array()).rowwise().sum();
    const Matrix d_scores = (att.weights.array() * (d_weights.colwise() - dot).array()).matrix();

    // Score e = u . v with u = tanh(pre).
    Matrix d_proj(T * n, ap.score.size());
    RowVector d_score = RowVector::Zero(ap.score.size());
    for (Eigen::Index t = 0; t < T; ++t) {
      const auto u_t = att.projected.middleRows(t * n, n);
      d_score.noalias() += d_scores.col(t).transpose() * u_t;
      d_proj.middleRows(t * n, n) = d_scores.col(t) * ap.score;
    }
    d_proj = (d_proj.array() * (1.0 - att.projected.array().square())).matrix();

    Matrix d_proj_sum = Matrix::Zero(n, ap.score.size());
    for (Eigen::Index t = 0; t < T; ++t) d_proj_sum += d_proj.middleRows(t * n, n);
    const Matrix final_c = trace.lstm.back().cells.bottomRows(n);

    detail::accumulate(grads.at(names::attn_hidden), hs.transpose() * d_proj);
    detail::accumulate(grads.at(names::attn_query), final_c.transpose() * d_proj_sum);
    detail::accumulate(grads.at(names::attn_bias), d_proj_sum.colwise().sum());
    detail::accumulate(grads.at(names::attn_score), d_score);
    d_hidden.noalias() += d_proj * ap.hidden_proj.transpose();
    d_final_c = d_proj_sum * ap.query_proj.transpose();
  }

  Matrix d_inputs;
  for (std::size_t l = config.lstm_layers; l-- > 0;) {
    const bool top = l + 1 == config.lstm_layers;
    d_inputs = detail::lstm_layer_backward(
        trace.lstm[l], lstm_view(params, l), n, d_hidden, top && d_final_c.size() > 0 ? &d_final_c : nullptr,
        grads.at(names::lstm_input_weight(l)), grads.at(names::lstm_recurrent_weight(l)),
        grads.at(names::lstm_bias(l)));
    d_hidden = std::move(d_inputs);
  }

  // Embedding stack, top down; d_hidden now holds dL/d(LSTM input).
  for (std::size_t k = config.embed_widths.size(); k-- > 0;) {
    const Matrix& out = trace.embeddings[k];
    const Matrix& in = k == 0 ? trace.input : trace.embeddings[k - 1];
    const Matrix d_pre = (d_hidden.array() * (1.0 - out.array().square())).matrix();
    detail::accumulate(grads.at(names::embed_weight(k)), in.transpose() * d_pre);
    detail::accumulate(grads.at(names::embed_bias(k)), d_pre.colwise().sum());
    if (k > 0) d_hidden = d_pre * params.at(names::embed_weight(k)).matrix().transpose();
  }
  return grads;
}

/// Loss under a fixed forward mode; with ForwardMode::train(seed) the dropout
/// mask is identical on every call.
inline double batch_loss(const ModelConfig& config, const ModelParams& params, const Tensor& batch,
                         const Matrix& one_hots, const ForwardMode& mode) {
  return cross_entropy_loss(model_forward(config, params, batch, mode).probs, one_hots);
}

/// Central differences, one scalar parameter at a time.
inline GradientSet finite_diff_grad(const ModelConfig& config, const ModelParams& params,
                                    const Tensor& batch, const Matrix& one_hots,
                                    const ForwardMode& mode, double h = 1e-5) {
  GradientSet g = params.zeros_like();
  ModelParams probe = params;
  for (std::size_t a = 0; a < probe.arrays.size(); ++a) {
    auto& values = probe.arrays[a].values;
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double orig = values[i];
      values[i] = orig + h;
      const double up = batch_loss(config, probe, batch, one_hots, mode);
      values[i] = orig - h;
      const double down = batch_loss(config, probe, batch, one_hots, mode);
      values[i] = orig;
      g.arrays[a].values[i] = (up - down) / (2.0 * h);
    }
  }
  return g;
}

struct GradientComparison {
  double max_relative_error = 0.0;
  std::string worst_param;
  std::size_t worst_index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
};

/// max |a - b| / max(|a|, |b|, 1e-8) over every scalar.
inline GradientComparison compare_gradients(const GradientSet& analytic, const GradientSet& numeric) {
  if (!analytic.same_layout(numeric)) throw ShapeError("compare_gradients: layouts differ");
  GradientComparison out;
  for (std::size_t a = 0; a < analytic.arrays.size(); ++a) {
    const auto& ga = analytic.arrays[a].values;
    const auto& gn = numeric.arrays[a].values;
    for (std::size_t i = 0; i < ga.size(); ++i) {
      const double denom = std::max({std::abs(ga[i]), std::abs(gn[i]), 1e-8});
      const double rel = std::abs(ga[i] - gn[i]) / denom;
      if (rel > out.max_relative_error || out.worst_param.empty()) {
        out = {rel, analytic.arrays[a].name, i, ga[i], gn[i]};
      }
    }
  }
  return out;
}

}  // namespace deepbrain
