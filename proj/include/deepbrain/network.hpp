// SPDX-License-Identifier: Apache-2.0
#pragma once

// Forward computation for every model kind.
//
// Sequences are held time-major: a sequence of T steps over a batch of n
// windows is a [T*n x K] matrix whose rows t*n .. t*n+n-1 belong to step t.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "model_config.hpp"
#include "rng.hpp"
#include "tensor.hpp"

namespace deepbrain {

enum class Activation { Identity, Tanh };

struct DenseParams {
  MatrixView weights;  // [in x out]
  RowVectorView bias;  // [out]
  Activation activation = Activation::Identity;
};

/// Four gates concatenated column-wise in Gate order (input, forget, output, modulation).
struct LstmParams {
  MatrixView input_weights;      // [in x 4H]
  MatrixView recurrent_weights;  // [H x 4H]
  RowVectorView bias;            // [4H]

  Eigen::Index hidden_size() const { return recurrent_weights.rows(); }
};

struct AttentionParams {
  MatrixView hidden_proj;  // [H x A], applied to every h_t
  MatrixView query_proj;   // [H x A], applied to the final cell state
  RowVectorView bias;      // [A]
  RowVectorView score;     // [A]
};

inline DenseParams dense_view(const ModelParams& p, std::string_view w, std::string_view b,
                              Activation act) {
  return {p.at(w).matrix(), p.at(b).row(), act};
}

inline LstmParams lstm_view(const ModelParams& p, std::size_t layer) {
  return {p.at(names::lstm_input_weight(layer)).matrix(),
          p.at(names::lstm_recurrent_weight(layer)).matrix(), p.at(names::lstm_bias(layer)).row()};
}

inline AttentionParams attention_view(const ModelParams& p) {
  return {p.at(names::attn_hidden).matrix(), p.at(names::attn_query).matrix(),
          p.at(names::attn_bias).row(), p.at(names::attn_score).row()};
}

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// ---------------------------------------------------------------- dense

inline Matrix dense_forward(const Matrix& x, const DenseParams& p) {
  if (x.cols() != p.weights.rows() || p.bias.size() != p.weights.cols())
    throw ShapeError("dense_forward: input width " + std::to_string(x.cols()) +
                     " does not match weights [" + std::to_string(p.weights.rows()) + " x " +
                     std::to_string(p.weights.cols()) + "]");
  Matrix y = x * p.weights;
  y.rowwise() += p.bias;
  if (p.activation == Activation::Tanh) y = y.array().tanh().matrix();
  return y;
}

// ---------------------------------------------------------------- softmax

/// Row-wise, max-subtracted.
inline Matrix softmax(const Matrix& x) {
  Matrix out(x.rows(), x.cols());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const double mx = x.row(r).maxCoeff();
    double sum = 0.0;
    for (Eigen::Index c = 0; c < x.cols(); ++c) sum += (out(r, c) = std::exp(x(r, c) - mx));
    out.row(r) /= sum;
  }
  return out;
}

// ---------------------------------------------------------------- LSTM

struct LstmCellResult {
  Matrix h;      // [n x H]
  Matrix c;      // [n x H]
  Matrix gates;  // [n x 4H], activated: sigmoid for i/f/o, tanh for the modulation block
};

inline LstmCellResult lstm_cell_forward(const Matrix& x, const Matrix& h_prev, const Matrix& c_prev,
                                        const LstmParams& p) {
  const Eigen::Index H = p.hidden_size();
  if (p.recurrent_weights.cols() != 4 * H || p.input_weights.cols() != 4 * H ||
      p.bias.size() != 4 * H || x.cols() != p.input_weights.rows() || h_prev.cols() != H ||
      c_prev.cols() != H || h_prev.rows() != x.rows() || c_prev.rows() != x.rows())
    throw ShapeError("lstm_cell_forward: inconsistent shapes");

  LstmCellResult r;
  r.gates.noalias() = x * p.input_weights;
  r.gates.noalias() += h_prev * p.recurrent_weights;
  r.gates.rowwise() += p.bias;
  auto sig = r.gates.leftCols(3 * H).array();
  sig = 1.0 / (1.0 + (-sig).exp());
  r.gates.rightCols(H) = r.gates.rightCols(H).array().tanh().matrix();

  const auto i = r.gates.middleCols(0, H).array();
  const auto f = r.gates.middleCols(H, H).array();
  const auto o = r.gates.middleCols(2 * H, H).array();
  const auto m = r.gates.middleCols(3 * H, H).array();
  r.c = (f * c_prev.array() + i * m).matrix();
  r.h = (o * r.c.array().tanh()).matrix();
  return r;
}

/// Cached per-layer activations, all time-major.
struct LstmLayerCache {
  Matrix inputs;  // [T*n x in]
  Matrix gates;   // [T*n x 4H]
  Matrix cells;   // [T*n x H]
  Matrix hidden;  // [T*n x H]
};

struct LstmLayerResult {
  Matrix hidden;   // [T*n x H]
  Matrix final_h;  // [n x H]
  Matrix final_c;  // [n x H]
  LstmLayerCache cache;
};

/// Runs the cell over all steps of a time-major input; h0 = c0 = 0 when omitted.
inline LstmLayerResult lstm_layer_forward(const Matrix& xs, Eigen::Index batch, const LstmParams& p,
                                          std::optional<Matrix> h0 = std::nullopt,
                                          std::optional<Matrix> c0 = std::nullopt) {
  if (batch <= 0 || xs.rows() % batch != 0 || xs.rows() == 0)
    throw ShapeError("lstm_layer_forward: rows must be a positive multiple of the batch size");
  const Eigen::Index T = xs.rows() / batch, H = p.hidden_size();
  Matrix h = h0 ? std::move(*h0) : Matrix::Zero(batch, H);
  Matrix c = c0 ? std::move(*c0) : Matrix::Zero(batch, H);

  LstmLayerResult out;
  out.cache.inputs = xs;
  out.cache.gates.resize(T * batch, 4 * H);
  out.cache.cells.resize(T * batch, H);
  out.cache.hidden.resize(T * batch, H);
  for (Eigen::Index t = 0; t < T; ++t) {
    auto step = lstm_cell_forward(xs.middleRows(t * batch, batch), h, c, p);
    out.cache.gates.middleRows(t * batch, batch) = step.gates;
    out.cache.cells.middleRows(t * batch, batch) = step.c;
    out.cache.hidden.middleRows(t * batch, batch) = step.h;
    h = std::move(step.h);
    c = std::move(step.c);
  }
  out.hidden = out.cache.hidden;
  out.final_h = std::move(h);
  out.final_c = std::move(c);
  return out;
}

// ---------------------------------------------------------------- attention

struct AttentionResult {
  Matrix context;    // [n x H]
  Matrix weights;    // [n x T], rows sum to 1
  Matrix scores;     // [n x T], before softmax
  Matrix projected;  // [T*n x A], tanh(h_t Wh + c_T Wc + b)
};

/// e_t = v . tanh(h_t Wh + c_T Wc + b); weights = softmax_t(e); context = sum_t w_t h_t.
inline AttentionResult attention_forward(const Matrix& hidden_seq, const Matrix& final_c,
                                         const AttentionParams& p) {
  const Eigen::Index n = final_c.rows(), H = final_c.cols(), A = p.score.size();
  if (n == 0 || hidden_seq.rows() % n != 0 || hidden_seq.cols() != H ||
      p.hidden_proj.rows() != H || p.query_proj.rows() != H || p.hidden_proj.cols() != A ||
      p.query_proj.cols() != A || p.bias.size() != A)
    throw ShapeError("attention_forward: inconsistent shapes");
  const Eigen::Index T = hidden_seq.rows() / n;

  AttentionResult r;
  Matrix query = final_c * p.query_proj;
  query.rowwise() += p.bias;
  r.projected.noalias() = hidden_seq * p.hidden_proj;
  for (Eigen::Index t = 0; t < T; ++t) r.projected.middleRows(t * n, n) += query;
  r.projected = r.projected.array().tanh().matrix();

  const Eigen::VectorXd e = r.projected * p.score.transpose();  // [T*n]
  r.scores.resize(n, T);
  for (Eigen::Index t = 0; t < T; ++t) r.scores.col(t) = e.segment(t * n, n);
  r.weights = softmax(r.scores);

  r.context = Matrix::Zero(n, H);
  for (Eigen::Index t = 0; t < T; ++t)
    r.context += (hidden_seq.middleRows(t * n, n).array().colwise() * r.weights.col(t).array()).matrix();
  return r;
}

// ---------------------------------------------------------------- dropout

struct ForwardMode {
  bool training = false;
  std::uint64_t dropout_seed = 0;

  static ForwardMode eval() { return {}; }
  static ForwardMode train(std::uint64_t seed) { return {true, seed}; }
};

struct DropoutResult {
  Matrix output;
  Matrix mask;  // scaled keep mask (0 or 1/(1-rate)); empty in eval mode
};

/// Inverted dropout. The mask is drawn row-major from Rng(mode.dropout_seed).
inline DropoutResult dropout_apply(const Matrix& x, double rate, const ForwardMode& mode) {
  if (!(rate >= 0.0 && rate < 1.0)) throw ArgumentError("dropout rate must lie in [0,1)");
  if (!mode.training) return {x, Matrix()};
  Matrix mask(x.rows(), x.cols());
  Rng rng(mode.dropout_seed);
  const double keep_scale = 1.0 / (1.0 - rate);
  for (Eigen::Index r = 0; r < x.rows(); ++r)
    for (Eigen::Index c = 0; c < x.cols(); ++c) mask(r, c) = rng.bernoulli(rate) ? 0.0 : keep_scale;
  return {(x.array() * mask.array()).matrix(), std::move(mask)};
}

// ---------------------------------------------------------------- model

/// Everything backward() needs. Produced only by training-mode forwards.
struct ForwardTrace {
  ModelKind kind = ModelKind::DeepBrain;
  Eigen::Index batch = 0;
  Eigen::Index steps = 0;
  Matrix input;                     // [T*n x 1] time-major (recurrent) or [n x T] (Mlp)
  std::vector<Matrix> embeddings;   // per embedding layer, [T*n x K_k] after tanh
  std::vector<LstmLayerCache> lstm; // per LSTM layer
  std::optional<AttentionResult> attention;
  Matrix head_input;                // [n x D] before dropout
  Matrix dropout_mask;              // [n x D]
  Matrix head_dropped;              // [n x D] after dropout
  Matrix mlp_hidden;                // [n x Hm]
  Matrix probs;                     // [n x C]
};

struct ForwardResult {
  Matrix probs;  // [n x C]
  std::optional<ForwardTrace> trace;
};

/// Converts an [n, T, 1] batch into a time-major [T*n x 1] column.
inline Matrix time_major_input(const Tensor& batch) {
  const std::size_t n = batch.dim(0), T = batch.dim(1);
  Matrix x(static_cast<Eigen::Index>(T * n), 1);
  for (std::size_t t = 0; t < T; ++t)
    for (std::size_t j = 0; j < n; ++j) x(static_cast<Eigen::Index>(t * n + j), 0) = batch.values[j * T + t];
  return x;
}

inline void check_batch(const ModelConfig& config, const Tensor& batch) {
  if (batch.rank() != 3 || batch.dim(1) != config.seq_len || batch.dim(2) != 1 || batch.dim(0) == 0)
    throw ShapeError("batch must have shape [n, " + std::to_string(config.seq_len) + ", 1]");
}

inline ForwardResult model_forward(const ModelConfig& config, const ModelParams& params,
                                   const Tensor& batch, const ForwardMode& mode) {
  check_batch(config, batch);
  const auto n = static_cast<Eigen::Index>(batch.dim(0));
  const auto T = static_cast<Eigen::Index>(batch.dim(1));

  ForwardTrace tr;
  tr.kind = config.kind;
  tr.batch = n;
  tr.steps = T;

  Matrix head;
  if (config.kind == ModelKind::Mlp) {
    tr.input = MatrixView(batch.values.data(), n, T);
    tr.mlp_hidden = dense_forward(tr.input, dense_view(params, names::mlp_weight, names::mlp_bias,
                                                       Activation::Tanh));
    head = tr.mlp_hidden;
    tr.head_input = head;
    tr.head_dropped = head;
  } else {
    tr.input = time_major_input(batch);
    Matrix x = tr.input;
    for (std::size_t k = 0; k < config.embed_widths.size(); ++k) {
      x = dense_forward(x, dense_view(params, names::embed_weight(k), names::embed_bias(k),
                                      Activation::Tanh));
      tr.embeddings.push_back(x);
    }
    LstmLayerResult top;
    for (std::size_t l = 0; l < config.lstm_layers; ++l) {
      top = lstm_layer_forward(l == 0 ? x : top.hidden, n, lstm_view(params, l));
      tr.lstm.push_back(top.cache);
    }
    if (config.has_attention()) {
      auto att = attention_forward(top.hidden, top.final_c, attention_view(params));
      head.resize(n, 2 * top.final_h.cols());
      head << top.final_h, att.context;
      tr.attention = std::move(att);
    } else {
      head = top.final_h;
    }
    tr.head_input = head;
    auto dropped = dropout_apply(head, config.dropout_rate, mode);
    tr.head_dropped = std::move(dropped.output);
    tr.dropout_mask = std::move(dropped.mask);
  }

  const Matrix logits = dense_forward(
      tr.head_dropped, dense_view(params, names::out_weight, names::out_bias, Activation::Identity));
  ForwardResult result;
  result.probs = softmax(logits);
  if (mode.training) {
    tr.probs = result.probs;
    result.trace = std::move(tr);
  }
  return result;
}

/// Eval-mode probabilities for a list of windows, processed in chunks.
inline Matrix predict_probs(const ModelConfig& config, const ModelParams& params,
                            std::span<const ProcessedWindow> windows, std::size_t chunk = 256) {
  Matrix out(static_cast<Eigen::Index>(windows.size()), static_cast<Eigen::Index>(config.class_count));
  for (std::size_t start = 0; start < windows.size(); start += chunk) {
    const std::size_t len = std::min(chunk, windows.size() - start);
    const auto probs =
        model_forward(config, params, batch_from_windows(windows.subspan(start, len)), ForwardMode::eval()).probs;
    out.middleRows(static_cast<Eigen::Index>(start), static_cast<Eigen::Index>(len)) = probs;
  }
  return out;
}

}  // namespace deepbrain
