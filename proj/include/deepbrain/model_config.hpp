// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "rng.hpp"
#include "signal_model.hpp"
#include "tensor.hpp"

namespace deepbrain {

enum class ModelKind { DeepBrain, StackedLstm, PlainLstm, Mlp };

inline std::string_view kind_name(ModelKind k) {
  switch (k) {
    case ModelKind::DeepBrain: return "deepbrain";
    case ModelKind::StackedLstm: return "stacked";
    case ModelKind::PlainLstm: return "lstm";
    case ModelKind::Mlp: return "mlp";
  }
  return "?";
}

inline ModelKind parse_kind(std::string_view name) {
  for (auto k : {ModelKind::DeepBrain, ModelKind::StackedLstm, ModelKind::PlainLstm, ModelKind::Mlp})
    if (kind_name(k) == name) return k;
  throw ArgumentError("unknown model kind: " + std::string(name));
}

/// Architecture description.
///
/// DeepBrain   : per-step dense embedding (tanh) -> stacked LSTM -> attention
///               -> [h_T | context] -> dropout -> dense -> softmax
/// StackedLstm : as DeepBrain without attention; the head sees h_T only
/// PlainLstm   : StackedLstm with a single LSTM layer
/// Mlp         : the seq_len features flattened -> dense(tanh) -> dense -> softmax
struct ModelConfig {
  ModelKind kind = ModelKind::DeepBrain;
  std::size_t seq_len = kWindowLength;
  std::vector<std::size_t> embed_widths = {16, 16};
  std::size_t lstm_layers = 2;
  std::size_t lstm_hidden = 32;
  std::size_t attention_width = 32;
  std::size_t mlp_hidden = 30;
  double dropout_rate = 0.2;
  std::size_t class_count = kClassCount;

  static ModelConfig for_kind(ModelKind kind) {
    ModelConfig c;
    c.kind = kind;
    if (kind == ModelKind::PlainLstm) c.lstm_layers = 1;
    return c;
  }

  bool recurrent() const { return kind != ModelKind::Mlp; }
  bool has_attention() const { return kind == ModelKind::DeepBrain; }

  /// Width of the vector entering the output layer.
  std::size_t head_width() const {
    if (kind == ModelKind::Mlp) return mlp_hidden;
    return has_attention() ? 2 * lstm_hidden : lstm_hidden;
  }

  std::size_t lstm_input_width(std::size_t layer) const {
    if (layer > 0) return lstm_hidden;
    return embed_widths.empty() ? 1 : embed_widths.back();
  }

  void validate() const {
    if (seq_len == 0) throw ArgumentError("seq_len must be >= 1");
    if (class_count < 2) throw ArgumentError("class_count must be >= 2");
    if (!(dropout_rate >= 0.0 && dropout_rate < 1.0))
      throw ArgumentError("dropout_rate must lie in [0,1)");
    if (kind == ModelKind::Mlp) {
      if (mlp_hidden == 0) throw ArgumentError("mlp_hidden must be >= 1");
      return;
    }
    for (auto w : embed_widths)
      if (w == 0) throw ArgumentError("embedding widths must be >= 1");
    if (lstm_layers == 0 || lstm_hidden == 0) throw ArgumentError("LSTM sizes must be >= 1");
    if (kind == ModelKind::PlainLstm && lstm_layers != 1)
      throw ArgumentError("PlainLstm uses exactly one LSTM layer");
    if (has_attention() && attention_width == 0) throw ArgumentError("attention_width must be >= 1");
  }

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

/// One named, shaped parameter array (row-major).
struct ParamArray {
  std::string name;
  std::vector<std::size_t> shape;
  std::vector<double> values;

  std::size_t rows() const { return shape.size() == 2 ? shape[0] : 1; }
  std::size_t cols() const { return shape.back(); }

  MatrixView matrix() const {
    return MatrixView(values.data(), static_cast<Eigen::Index>(rows()),
                      static_cast<Eigen::Index>(cols()));
  }
  RowVectorView row() const {
    return RowVectorView(values.data(), static_cast<Eigen::Index>(values.size()));
  }
  Eigen::Map<Matrix> mutable_matrix() {
    return Eigen::Map<Matrix>(values.data(), static_cast<Eigen::Index>(rows()),
                              static_cast<Eigen::Index>(cols()));
  }

  friend bool operator==(const ParamArray&, const ParamArray&) = default;
};

/// Ordered, named parameter arrays. The same layout doubles as the gradient
/// and Adam moment containers.
struct ModelParams {
  std::vector<ParamArray> arrays;

  const ParamArray& at(std::string_view name) const {
    for (const auto& a : arrays)
      if (a.name == name) return a;
    throw ShapeError("missing parameter: " + std::string(name));
  }
  ParamArray& at(std::string_view name) {
    return const_cast<ParamArray&>(std::as_const(*this).at(name));
  }
  bool contains(std::string_view name) const {
    for (const auto& a : arrays)
      if (a.name == name) return true;
    return false;
  }

  std::size_t scalar_count() const {
    std::size_t n = 0;
    for (const auto& a : arrays) n += a.values.size();
    return n;
  }

  /// Same names and shapes, all values zero.
  ModelParams zeros_like() const {
    ModelParams z = *this;
    for (auto& a : z.arrays) std::fill(a.values.begin(), a.values.end(), 0.0);
    return z;
  }

  bool same_layout(const ModelParams& other) const {
    if (arrays.size() != other.arrays.size()) return false;
    for (std::size_t i = 0; i < arrays.size(); ++i)
      if (arrays[i].name != other.arrays[i].name || arrays[i].shape != other.arrays[i].shape ||
          arrays[i].values.size() != other.arrays[i].values.size())
        return false;
    return true;
  }

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

using GradientSet = ModelParams;

namespace names {
inline std::string embed_weight(std::size_t k) { return "embed" + std::to_string(k) + ".weight"; }
inline std::string embed_bias(std::size_t k) { return "embed" + std::to_string(k) + ".bias"; }
inline std::string lstm_input_weight(std::size_t l) { return "lstm" + std::to_string(l) + ".input_weight"; }
inline std::string lstm_recurrent_weight(std::size_t l) {
  return "lstm" + std::to_string(l) + ".recurrent_weight";
}
inline std::string lstm_bias(std::size_t l) { return "lstm" + std::to_string(l) + ".bias"; }
inline constexpr std::string_view attn_hidden = "attention.hidden_weight";
inline constexpr std::string_view attn_query = "attention.query_weight";
inline constexpr std::string_view attn_bias = "attention.bias";
inline constexpr std::string_view attn_score = "attention.score";
inline constexpr std::string_view mlp_weight = "mlp.weight";
inline constexpr std::string_view mlp_bias = "mlp.bias";
inline constexpr std::string_view out_weight = "output.weight";
inline constexpr std::string_view out_bias = "output.bias";
}  // namespace names

/// LSTM gate blocks inside the concatenated [.. x 4H] weights, in column order.
enum class Gate : std::size_t { Input = 0, Forget = 1, Output = 2, Modulation = 3 };

/// All-zero parameters in the canonical layout for `config`.
inline ModelParams zero_params(const ModelConfig& config) {
  config.validate();
  ModelParams p;
  auto add = [&](std::string name, std::vector<std::size_t> shape) {
    const auto n = Tensor::element_count(shape);
    p.arrays.push_back({std::move(name), std::move(shape), std::vector<double>(n, 0.0)});
  };
  if (config.kind == ModelKind::Mlp) {
    add(std::string(names::mlp_weight), {config.seq_len, config.mlp_hidden});
    add(std::string(names::mlp_bias), {config.mlp_hidden});
  } else {
    std::size_t in = 1;
    for (std::size_t k = 0; k < config.embed_widths.size(); ++k) {
      add(names::embed_weight(k), {in, config.embed_widths[k]});
      add(names::embed_bias(k), {config.embed_widths[k]});
      in = config.embed_widths[k];
    }
    const std::size_t h = config.lstm_hidden;
    for (std::size_t l = 0; l < config.lstm_layers; ++l) {
      add(names::lstm_input_weight(l), {config.lstm_input_width(l), 4 * h});
      add(names::lstm_recurrent_weight(l), {h, 4 * h});
      add(names::lstm_bias(l), {4 * h});
    }
    if (config.has_attention()) {
      add(std::string(names::attn_hidden), {h, config.attention_width});
      add(std::string(names::attn_query), {h, config.attention_width});
      add(std::string(names::attn_bias), {config.attention_width});
      add(std::string(names::attn_score), {config.attention_width});
    }
  }
  add(std::string(names::out_weight), {config.head_width(), config.class_count});
  add(std::string(names::out_bias), {config.class_count});
  return p;
}

/// Weights ~ U[-1/sqrt(fan_in), 1/sqrt(fan_in)] drawn in layout order from
/// Rng(seed); biases zero except the LSTM forget block, which starts at 1.
inline ModelParams init_params(const ModelConfig& config, std::uint64_t seed) {
  ModelParams p = zero_params(config);
  Rng rng(seed);
  for (auto& a : p.arrays) {
    const bool is_bias = a.name.ends_with(".bias");
    if (is_bias) {
      if (a.name.starts_with("lstm")) {
        const std::size_t h = a.values.size() / 4;
        const std::size_t f = static_cast<std::size_t>(Gate::Forget) * h;
        std::fill(a.values.begin() + static_cast<std::ptrdiff_t>(f),
                  a.values.begin() + static_cast<std::ptrdiff_t>(f + h), 1.0);
      }
      continue;
    }
    const double fan_in = static_cast<double>(a.shape[0]);
    const double bound = 1.0 / std::sqrt(fan_in);
    for (auto& v : a.values) v = rng.uniform(-bound, bound);
  }
  return p;
}

}  // namespace deepbrain
