// SPDX-License-Identifier: Apache-2.0
#pragma once

// Checkpoint file: a single JSON document
//   {"format_version":1, "model_config":{...}, "preprocess_config":{...},
//    "params":[{"name":..., "shape":[...], "values":[...]}, ...],
//    "provenance":{"seed":..., "epochs":..., "best_epoch":..., "final_loss":...,
//                  "loss_history":[...], "valid_accuracy_history":[...], "dataset_hash":hex}}
// Doubles are written in shortest round-trip form, so save -> load -> save is
// byte-identical.

#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "errors.hpp"
#include "model_config.hpp"
#include "preprocess.hpp"
#include "signal_model.hpp"

namespace deepbrain {

inline constexpr int kCheckpointFormatVersion = 1;

struct Provenance {
  std::uint64_t seed = 0;
  std::size_t epochs = 0;      // epochs trained
  std::size_t best_epoch = 0;  // 1-based epoch the parameters come from
  double final_loss = 0.0;
  std::vector<double> loss_history;
  std::vector<double> valid_accuracy_history;
  std::string dataset_hash;

  friend bool operator==(const Provenance&, const Provenance&) = default;
};

struct Checkpoint {
  int format_version = kCheckpointFormatVersion;
  ModelConfig model_config;
  PreprocessConfig preprocess_config;
  ModelParams params;
  Provenance provenance;

  friend bool operator==(const Checkpoint&, const Checkpoint&) = default;
};

using Json = nlohmann::ordered_json;

inline Json to_json(const ModelConfig& c) {
  return Json{{"kind", kind_name(c.kind)},
              {"seq_len", c.seq_len},
              {"embed_widths", c.embed_widths},
              {"lstm_layers", c.lstm_layers},
              {"lstm_hidden", c.lstm_hidden},
              {"attention_width", c.attention_width},
              {"mlp_hidden", c.mlp_hidden},
              {"dropout_rate", c.dropout_rate},
              {"class_count", c.class_count},
              {"class_order", {"relaxed", "relaxed_to_focused", "focused_to_relaxed", "focused"}}};
}

inline ModelConfig model_config_from_json(const Json& j) {
  ModelConfig c;
  c.kind = parse_kind(j.at("kind").get<std::string>());
  c.seq_len = j.at("seq_len").get<std::size_t>();
  c.embed_widths = j.at("embed_widths").get<std::vector<std::size_t>>();
  c.lstm_layers = j.at("lstm_layers").get<std::size_t>();
  c.lstm_hidden = j.at("lstm_hidden").get<std::size_t>();
  c.attention_width = j.at("attention_width").get<std::size_t>();
  c.mlp_hidden = j.at("mlp_hidden").get<std::size_t>();
  c.dropout_rate = j.at("dropout_rate").get<double>();
  c.class_count = j.at("class_count").get<std::size_t>();
  if (j.contains("class_order")) {
    const auto order = j.at("class_order").get<std::vector<std::string>>();
    for (std::size_t i = 0; i < order.size(); ++i)
      if (i >= kClassCount || order[i] != class_name(class_from_index(i)))
        throw DataError("checkpoint class order does not match the canonical order");
  }
  c.validate();
  return c;
}

inline Json to_json(const PreprocessConfig& c) {
  return Json{{"outlier_z_threshold", c.outlier_z_threshold},
              {"baseline_window", c.baseline_window},
              {"downsample_factor", c.downsample_factor},
              {"normalization_epsilon", c.normalization_epsilon},
              {"normalization", c.normalization == Normalization::FixedRange ? "fixed_range" : "per_series"},
              {"range_min", c.range_min},
              {"range_max", c.range_max}};
}

inline PreprocessConfig preprocess_config_from_json(const Json& j) {
  PreprocessConfig c;
  c.outlier_z_threshold = j.at("outlier_z_threshold").get<double>();
  c.baseline_window = j.at("baseline_window").get<std::size_t>();
  c.downsample_factor = j.at("downsample_factor").get<std::size_t>();
  c.normalization_epsilon = j.at("normalization_epsilon").get<double>();
  const auto mode = j.at("normalization").get<std::string>();
  if (mode == "fixed_range")
    c.normalization = Normalization::FixedRange;
  else if (mode == "per_series")
    c.normalization = Normalization::PerSeries;
  else
    throw DataError("unknown normalization mode: " + mode);
  c.range_min = j.at("range_min").get<double>();
  c.range_max = j.at("range_max").get<double>();
  c.validate();
  return c;
}

inline Json to_json(const ModelParams& p) {
  Json arr = Json::array();
  for (const auto& a : p.arrays) arr.push_back(Json{{"name", a.name}, {"shape", a.shape}, {"values", a.values}});
  return arr;
}

inline Json to_json(const Checkpoint& c) {
  const auto& pv = c.provenance;
  return Json{{"format_version", c.format_version},
              {"model_config", to_json(c.model_config)},
              {"preprocess_config", to_json(c.preprocess_config)},
              {"params", to_json(c.params)},
              {"provenance",
               {{"seed", pv.seed},
                {"epochs", pv.epochs},
                {"best_epoch", pv.best_epoch},
                {"final_loss", pv.final_loss},
                {"loss_history", pv.loss_history},
                {"valid_accuracy_history", pv.valid_accuracy_history},
                {"dataset_hash", pv.dataset_hash}}}};
}

inline Checkpoint checkpoint_from_json(const Json& j) {
  try {
    Checkpoint c;
    c.format_version = j.at("format_version").get<int>();
    if (c.format_version != kCheckpointFormatVersion)
      throw DataError("unsupported checkpoint format_version " + std::to_string(c.format_version));
    c.model_config = model_config_from_json(j.at("model_config"));
    c.preprocess_config = preprocess_config_from_json(j.at("preprocess_config"));

    const ModelParams expected = zero_params(c.model_config);
    for (const auto& a : j.at("params")) {
      ParamArray p{a.at("name").get<std::string>(), a.at("shape").get<std::vector<std::size_t>>(),
                   a.at("values").get<std::vector<double>>()};
      c.params.arrays.push_back(std::move(p));
    }
    if (!c.params.same_layout(expected))
      throw DataError("checkpoint parameters do not match the model configuration");

    const auto& pv = j.at("provenance");
    c.provenance.seed = pv.at("seed").get<std::uint64_t>();
    c.provenance.epochs = pv.at("epochs").get<std::size_t>();
    c.provenance.best_epoch = pv.value("best_epoch", std::size_t{0});
    c.provenance.final_loss = pv.value("final_loss", 0.0);
    c.provenance.loss_history = pv.at("loss_history").get<std::vector<double>>();
    c.provenance.valid_accuracy_history =
        pv.value("valid_accuracy_history", std::vector<double>{});
    c.provenance.dataset_hash = pv.at("dataset_hash").get<std::string>();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed checkpoint: ") + e.what());
  } catch (const ArgumentError& e) {
    throw DataError(std::string("invalid checkpoint configuration: ") + e.what());
  }
}

inline std::string dump_checkpoint(const Checkpoint& c) { return to_json(c).dump() + "\n"; }

inline void save_checkpoint(const std::string& path, const Checkpoint& c) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open for writing: " + path);
  out << dump_checkpoint(c);
}

inline Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint: " + path);
  Json j;
  try {
    j = Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError(std::string("checkpoint is not valid JSON: ") + e.what());
  }
  return checkpoint_from_json(j);
}

/// FNV-1a over features and labels, as 16 hex digits.
inline std::string dataset_hash(const Dataset& data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](const void* p, std::size_t n) {
    const auto* b = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) h = (h ^ b[i]) * 0x100000001b3ULL;
  };
  for (const auto& w : data.windows) {
    const auto f = w.features();
    mix(f.data(), f.size() * sizeof(double));
    const auto label = static_cast<unsigned char>(w.label());
    mix(&label, 1);
  }
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << h;
  return os.str();
}

}  // namespace deepbrain
