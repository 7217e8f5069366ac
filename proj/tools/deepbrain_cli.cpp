// SPDX-License-Identifier: Apache-2.0
//
// deepbrain: command-line front end for the EEG state pipeline.
//
// Exit codes: 0 success, 1 usage, 2 data error, 3 numeric/training failure.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include <deepbrain/deepbrain.hpp>

namespace fs = std::filesystem;
using namespace deepbrain;
using Json = nlohmann::ordered_json;

namespace {

constexpr const char* kToolVersion = "1.0.0";

enum ExitCode { kOk = 0, kUsage = 1, kDataError = 2, kNumericError = 3 };

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string file_hash(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open: " + path);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::istreambuf_iterator<char> it(in), end; it != end; ++it)
    h = (h ^ static_cast<unsigned char>(*it)) * 0x100000001b3ULL;
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << h;
  return os.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open for writing: " + path.string());
  out << text;
}

/// Resolved configuration, seeds and input hashes written beside every artifact.
void write_manifest(const fs::path& path, const std::string& command, Json config,
                    const std::vector<std::uint64_t>& seeds, const std::vector<std::string>& inputs,
                    const std::vector<std::string>& outputs) {
  Json m;
  m["tool"] = "deepbrain";
  m["version"] = kToolVersion;
  m["command"] = command;
  m["config"] = std::move(config);
  m["seeds"] = seeds;
  Json in = Json::object();
  for (const auto& p : inputs) in[p] = file_hash(p);
  m["inputs"] = in;
  m["outputs"] = outputs;
  write_text(path, m.dump(2) + "\n");
}

fs::path manifest_for(const std::string& output) { return output + ".manifest.json"; }

Dataset load_windows(const std::string& path, const PreprocessConfig& pc) {
  return preprocess_all(load_sessions(path), pc);
}

// ------------------------------------------------------------------ gen

struct GenArgs {
  std::size_t classes_per = 200;
  bool noisy = false;
  std::uint64_t seed = 1;
  std::string out;
  double settle = 0.0;
};

int cmd_gen(const GenArgs& a) {
  GenSpec spec;
  spec.sessions_per_class = a.classes_per;
  spec.settle_amplitude = a.settle;
  const auto set = generate_dataset(spec, a.noisy, a.seed);
  save_sessions(a.out, set);
  Json cfg = gen_spec_to_json(spec);
  cfg["noisy"] = a.noisy;
  write_manifest(manifest_for(a.out), "gen", cfg, {a.seed}, {}, {a.out});
  std::cerr << "wrote " << set.size() << " sessions to " << a.out << "\n";
  return kOk;
}

// ------------------------------------------------------------------ train

struct TrainArgs {
  std::string data;
  std::string valid;
  std::string model = "deepbrain";
  std::size_t epochs = 120;
  std::size_t batch = 64;
  std::uint64_t seed = 1;
  double lr = 1e-4;
  double clip = 0.0;
  double valid_fraction = 0.1;
  std::string out;
  bool per_series = false;
};

int cmd_train(const TrainArgs& a) {
  ModelConfig mc;
  try {
    mc = ModelConfig::for_kind(parse_kind(a.model));
  } catch (const ArgumentError& e) {
    throw UsageError(e.what());
  }
  PreprocessConfig pc;
  if (a.per_series) pc.normalization = Normalization::PerSeries;

  Dataset train = load_windows(a.data, pc);
  Dataset valid;
  if (!a.valid.empty()) {
    valid = load_windows(a.valid, pc);
  } else {
    auto parts = split_dataset(train, 1.0 - a.valid_fraction, derive_seed(a.seed, 1));
    train = std::move(parts.first);
    valid = std::move(parts.second);
  }

  TrainConfig tc;
  tc.epochs = a.epochs;
  tc.batch_size = a.batch;
  tc.seed = a.seed;
  tc.lr = a.lr;
  if (a.clip > 0.0) tc.clip_norm = a.clip;
  tc.preprocess = pc;

  const auto result = train_model(mc, tc, train, valid, [](const EpochRecord& r) {
    std::cerr << "epoch " << r.epoch << " loss " << fmt_num(r.train_loss) << " valid_acc "
              << fmt_num(r.valid_accuracy) << "\n";
  });
  save_checkpoint(a.out, result.checkpoint);

  std::ostringstream hist;
  hist << "epoch,train_loss,valid_accuracy,optimizer_steps\n";
  for (const auto& r : result.history)
    hist << r.epoch << ',' << fmt_num(r.train_loss) << ',' << fmt_num(r.valid_accuracy) << ','
         << r.optimizer_steps << '\n';
  const std::string hist_path = a.out + ".history.csv";
  write_text(hist_path, hist.str());

  Json cfg;
  cfg["model_config"] = to_json(mc);
  cfg["preprocess_config"] = to_json(pc);
  cfg["epochs"] = a.epochs;
  cfg["batch_size"] = a.batch;
  cfg["lr"] = a.lr;
  cfg["clip_norm"] = a.clip > 0.0 ? Json(a.clip) : Json(nullptr);
  cfg["valid_fraction"] = a.valid.empty() ? Json(a.valid_fraction) : Json(nullptr);
  std::vector<std::string> inputs = {a.data};
  if (!a.valid.empty()) inputs.push_back(a.valid);
  write_manifest(manifest_for(a.out), "train", cfg, {a.seed}, inputs, {a.out, hist_path});
  std::cerr << "best epoch " << result.checkpoint.provenance.best_epoch << ", "
            << result.optimizer_steps << " optimizer steps\n";
  return kOk;
}

// ------------------------------------------------------------------ eval

struct EvalArgs {
  std::string checkpoint;
  std::string data;
  std::string predictions;
  std::string out_dir;
};

/// CSV: label,relaxed,relaxed_to_focused,focused_to_relaxed,focused
void load_predictions(const std::string& path, Matrix& probs, std::vector<LabelClass>& labels) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open predictions: " + path);
  std::string line;
  std::vector<std::array<double, kClassCount>> rows;
  bool header = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (header) {
      header = false;
      if (line.rfind("label", 0) == 0) continue;
    }
    std::stringstream ss(line);
    std::string cell;
    std::getline(ss, cell, ',');
    labels.push_back(parse_class(cell));
    std::array<double, kClassCount> p{};
    for (auto& v : p) {
      if (!std::getline(ss, cell, ',')) throw DataError("predictions row has fewer than 4 probabilities");
      try {
        v = std::stod(cell);
      } catch (const std::exception&) {
        throw DataError("bad probability value: " + cell);
      }
    }
    rows.push_back(p);
  }
  if (rows.empty()) throw DataError("predictions file is empty");
  probs.resize(static_cast<Eigen::Index>(rows.size()), kClassCount);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t k = 0; k < kClassCount; ++k)
      probs(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i][k];
}

int cmd_eval(const EvalArgs& a) {
  if (a.predictions.empty() == (a.checkpoint.empty() || a.data.empty()))
    throw UsageError("eval needs either --predictions, or --checkpoint with --data");
  Matrix probs;
  std::vector<LabelClass> labels;
  std::string method = "predictions";
  std::vector<std::string> inputs;
  if (!a.predictions.empty()) {
    load_predictions(a.predictions, probs, labels);
    inputs = {a.predictions};
  } else {
    const auto ck = load_checkpoint(a.checkpoint);
    const auto data = load_windows(a.data, ck.preprocess_config);
    probs = predict_probs(ck.model_config, ck.params, data.windows);
    labels = labels_of(data);
    method = std::string(kind_name(ck.model_config.kind));
    inputs = {a.checkpoint, a.data};
  }

  fs::create_directories(a.out_dir);
  const fs::path dir(a.out_dir);
  const auto report = evaluate_probabilities(probs, labels);
  write_text(dir / "metrics.json", metrics_to_json(report).dump(2) + "\n");

  ComparisonRow row;
  row.accuracy = report.accuracy;
  row.precision = report.weighted_precision;
  row.recall = report.weighted_recall;
  row.f1 = report.weighted_f1;
  row.auc = report.micro_auc;
  std::ostringstream csv;
  csv << kComparisonHeader << '\n'
      << method << ',' << fmt_num(row.accuracy) << ',' << fmt_num(row.precision) << ','
      << fmt_num(row.recall) << ',' << fmt_num(row.f1) << ',' << fmt_num(row.auc) << '\n';
  write_text(dir / "metrics.csv", csv.str());

  std::vector<std::string> outputs = {"metrics.json", "metrics.csv"};
  std::vector<SvgSeries> series;
  for (auto cls : kAllClasses) {
    std::vector<double> scores(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i)
      scores[i] = probs(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(class_index(cls)));
    try {
      const auto curve = roc_curve(scores, labels, cls);
      std::ostringstream roc;
      write_roc_csv(roc, curve);
      const std::string name = "roc_" + std::string(class_name(cls)) + ".csv";
      write_text(dir / name, roc.str());
      outputs.push_back(name);
      series.push_back(roc_series(std::string(class_name(cls)), curve));
    } catch (const DegenerateInputError&) {
      std::cerr << "skipping ROC for " << class_name(cls) << ": class absent or universal\n";
    }
  }
  write_text(dir / "roc.svg", render_svg_lines("ROC (" + method + ")", "false positive rate",
                                               "true positive rate", series));
  outputs.push_back("roc.svg");
  write_manifest(dir / "manifest.json", "eval", Json{{"method", method}}, {}, inputs, outputs);
  std::cout << metrics_to_json(report).dump(2) << "\n";
  return kOk;
}

// ------------------------------------------------------------------ compare

struct CompareArgs {
  std::string models = "deepbrain,stacked,lstm,mlp";
  std::string seeds = "1,2,3";
  std::string conditions = "quiet,noisy";
  std::size_t classes_per = 200;
  std::size_t epochs = 120;
  std::string out_dir;
};

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

int cmd_compare(const CompareArgs& a) {
  std::vector<ModelKind> kinds;
  std::vector<std::uint64_t> seeds;
  std::vector<bool> conditions;
  try {
    for (const auto& m : split_list(a.models)) kinds.push_back(parse_kind(m));
    for (const auto& s : split_list(a.seeds)) seeds.push_back(std::stoull(s));
  } catch (const std::exception& e) {
    throw UsageError(e.what());
  }
  for (const auto& c : split_list(a.conditions)) {
    if (c != "quiet" && c != "noisy") throw UsageError("unknown condition: " + c);
    conditions.push_back(c == "noisy");
  }

  BenchmarkConfig cfg;
  cfg.gen.sessions_per_class = a.classes_per;
  cfg.epochs = a.epochs;
  const auto rows = compare_models(kinds, conditions, seeds, cfg, [](const RunOutcome& r) {
    std::cerr << (r.noisy ? "noisy " : "quiet ") << kind_name(r.kind) << " seed " << r.seed << " accuracy "
              << fmt_num(r.test_metrics.accuracy) << "\n";
  });

  fs::create_directories(a.out_dir);
  const fs::path dir(a.out_dir);
  std::vector<std::string> outputs;
  Json doc = Json::array();
  for (bool noisy : conditions) {
    const std::string cond = noisy ? "noisy" : "quiet";
    std::vector<ComparisonRow> subset;
    for (const auto& r : rows)
      if (r.condition == cond) {
        subset.push_back(r);
        doc.push_back({{"condition", cond},
                       {"method", kind_name(r.kind)},
                       {"accuracy", r.accuracy},
                       {"precision", r.precision},
                       {"recall", r.recall},
                       {"f1", r.f1},
                       {"auc", r.auc},
                       {"seed_accuracies", r.seed_accuracies}});
      }
    std::ostringstream csv;
    write_comparison_csv(csv, subset);
    write_text(dir / (cond + ".csv"), csv.str());
    outputs.push_back(cond + ".csv");
  }
  write_text(dir / "comparison.json", doc.dump(2) + "\n");
  outputs.push_back("comparison.json");

  Json config;
  config["models"] = split_list(a.models);
  config["conditions"] = split_list(a.conditions);
  config["gen_spec"] = gen_spec_to_json(cfg.gen);
  config["preprocess_config"] = to_json(cfg.preprocess);
  config["epochs"] = cfg.epochs;
  config["batch_size"] = cfg.batch_size;
  config["train_fraction"] = cfg.train_fraction;
  config["valid_fraction"] = cfg.valid_fraction;
  config["aggregation"] = "mean over seeds";
  write_manifest(dir / "manifest.json", "compare", config, seeds, {}, outputs);
  return kOk;
}

// ------------------------------------------------------------------ similarity

struct SimilarityArgs {
  std::string data;
  std::size_t samples = 200;
  std::uint64_t seed = 1;
  std::string out;
};

int cmd_similarity(const SimilarityArgs& a) {
  const auto sessions = load_sessions(a.data);
  const auto m = similarity_matrix(sessions, a.samples, a.seed);
  std::ostringstream csv;
  write_similarity_csv(csv, m);
  write_text(a.out, csv.str());
  write_manifest(manifest_for(a.out), "similarity", Json{{"samples_per_pair", a.samples}}, {a.seed}, {a.data},
                 {a.out});
  std::cout << csv.str();
  return kOk;
}

// ------------------------------------------------------------------ infer

struct InferArgs {
  std::string checkpoint;
  std::string input;
  std::string log;
  std::size_t stride = 30;
  std::size_t smoothing = 3;
  std::vector<std::string> maps;
};

int cmd_infer(const InferArgs& a) {
  StreamConfig sc;
  sc.stride = a.stride;
  sc.smoothing = a.smoothing;
  for (const auto& m : a.maps) {
    const auto eq = m.find('=');
    if (eq == std::string::npos) throw UsageError("--map expects class=command, got " + m);
    try {
      sc.commands.set(parse_class(m.substr(0, eq)), m.substr(eq + 1));
    } catch (const DataError& e) {
      throw UsageError(e.what());
    }
  }
  try {
    sc.validate();
  } catch (const ArgumentError& e) {
    throw UsageError(e.what());
  }
  const auto ck = load_checkpoint(a.checkpoint);

  std::ifstream file;
  std::istream* in = &std::cin;
  if (!a.input.empty() && a.input != "-") {
    file.open(a.input);
    if (!file) throw DataError("cannot open input: " + a.input);
    in = &file;
  }
  std::ofstream log_file;
  std::ostream* out = &std::cout;
  if (!a.log.empty()) {
    log_file.open(a.log, std::ios::binary);
    if (!log_file) throw DataError("cannot open log for writing: " + a.log);
    out = &log_file;
  }

  const auto summary = run_stream(*in, ck, sc, [&](const StreamLogEntry& e) { *out << to_jsonl(e) << '\n'; });
  out->flush();
  std::cerr << "samples " << summary.samples << ", windows processed " << summary.windows
            << ", commands " << summary.commands << ", malformed lines skipped " << summary.malformed << "\n";

  if (!a.log.empty()) {
    Json cfg{{"stride", sc.stride}, {"smoothing", sc.smoothing}, {"commands", sc.commands.commands}};
    std::vector<std::string> inputs = {a.checkpoint};
    if (!a.input.empty() && a.input != "-") inputs.push_back(a.input);
    write_manifest(manifest_for(a.log), "infer", cfg, {}, inputs, {a.log});
  }
  return kOk;
}

// ------------------------------------------------------------------ gradcheck

struct GradcheckArgs {
  std::string model = "deepbrain";
  double h = 1e-3;
  double tolerance = 1e-4;
  std::uint64_t seed = 7;
};

int cmd_gradcheck(const GradcheckArgs& a) {
  ModelKind kind;
  try {
    kind = parse_kind(a.model);
  } catch (const ArgumentError& e) {
    throw UsageError(e.what());
  }
  const auto f = grad_fixture(kind, a.seed);
  const auto cmp = run_gradcheck(f, a.h);
  const bool pass = cmp.max_relative_error < a.tolerance;
  std::cout << "model " << kind_name(kind) << "\n"
            << "parameters " << f.params.scalar_count() << "\n"
            << "h " << fmt_num(a.h) << "\n"
            << "max_relative_error " << fmt_num(cmp.max_relative_error) << "\n"
            << "worst_parameter " << cmp.worst_param << "[" << cmp.worst_index << "] analytic "
            << fmt_num(cmp.analytic) << " numeric " << fmt_num(cmp.numeric) << "\n"
            << (pass ? "PASS" : "FAIL") << " (tolerance " << fmt_num(a.tolerance) << ")\n";
  return pass ? kOk : kNumericError;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"EEG mental-state pipeline: data generation, training, evaluation and streaming inference"};
  app.require_subcommand(1);

  GenArgs gen;
  auto* g = app.add_subcommand("gen", "Generate a synthetic session dataset (JSONL)");
  g->add_option("--classes-per", gen.classes_per, "Sessions per class")->check(CLI::PositiveNumber);
  g->add_flag("--noisy", gen.noisy, "Noisy-environment condition");
  g->add_option("--seed", gen.seed, "Master seed");
  g->add_option("--settle", gen.settle, "Plateau onset drift amplitude (0 = flat plateaus)");
  g->add_option("--out", gen.out, "Output JSONL path")->required();

  TrainArgs train;
  auto* t = app.add_subcommand("train", "Train a model and write a checkpoint");
  t->add_option("--data", train.data, "Training sessions (JSONL)")->required();
  t->add_option("--valid", train.valid, "Validation sessions (JSONL); default: hold out part of --data");
  t->add_option("--valid-fraction", train.valid_fraction, "Held-out fraction when --valid is absent");
  t->add_option("--model", train.model, "deepbrain | stacked | lstm | mlp");
  t->add_option("--epochs", train.epochs)->check(CLI::PositiveNumber);
  t->add_option("--batch", train.batch, "Minibatch size")->check(CLI::PositiveNumber);
  t->add_option("--seed", train.seed);
  t->add_option("--lr", train.lr, "Adam learning rate");
  t->add_option("--clip", train.clip, "Global gradient-norm clip (0 = off)");
  t->add_flag("--per-series", train.per_series, "Per-series min-max normalisation instead of fixed range");
  t->add_option("--out", train.out, "Checkpoint path")->required();

  EvalArgs eval;
  auto* e = app.add_subcommand("eval", "Evaluate a checkpoint or a predictions file");
  e->add_option("--checkpoint", eval.checkpoint);
  e->add_option("--data", eval.data, "Sessions (JSONL)");
  e->add_option("--predictions", eval.predictions,
                "CSV: label,relaxed,relaxed_to_focused,focused_to_relaxed,focused");
  e->add_option("--out-dir", eval.out_dir)->required();

  CompareArgs compare;
  auto* c = app.add_subcommand("compare", "Train and compare model kinds on quiet and noisy data");
  c->add_option("--models", compare.models, "Comma-separated model kinds");
  c->add_option("--seeds", compare.seeds, "Comma-separated seeds; results are means");
  c->add_option("--conditions", compare.conditions, "quiet,noisy");
  c->add_option("--classes-per", compare.classes_per)->check(CLI::PositiveNumber);
  c->add_option("--epochs", compare.epochs)->check(CLI::PositiveNumber);
  c->add_option("--out-dir", compare.out_dir)->required();

  SimilarityArgs sim;
  auto* s = app.add_subcommand("similarity", "Spearman self/cross similarity matrix");
  s->add_option("--data", sim.data)->required();
  s->add_option("--samples", sim.samples, "Sampled session pairs per class pair")->check(CLI::PositiveNumber);
  s->add_option("--seed", sim.seed);
  s->add_option("--out", sim.out, "Output CSV")->required();

  InferArgs infer;
  auto* i = app.add_subcommand("infer", "Streaming inference over one sample per line");
  i->add_option("--checkpoint", infer.checkpoint)->required();
  i->add_option("--input", infer.input, "Input file (default: standard input)");
  i->add_option("--log", infer.log, "JSONL log path (default: standard output)");
  i->add_option("--stride", infer.stride);
  i->add_option("--smoothing", infer.smoothing, "Majority-vote window (odd)");
  i->add_option("--map", infer.maps, "Override a command: class=command (repeatable)");

  GradcheckArgs gc;
  auto* gcmd = app.add_subcommand("gradcheck", "Compare BPTT gradients with central differences");
  gcmd->add_option("--model", gc.model);
  gcmd->add_option("--step", gc.h, "Finite-difference step h");
  gcmd->add_option("--tolerance", gc.tolerance);
  gcmd->add_option("--seed", gc.seed);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int rc = app.exit(err);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (g->parsed()) return cmd_gen(gen);
    if (t->parsed()) return cmd_train(train);
    if (e->parsed()) return cmd_eval(eval);
    if (c->parsed()) return cmd_compare(compare);
    if (s->parsed()) return cmd_similarity(sim);
    if (i->parsed()) return cmd_infer(infer);
    if (gcmd->parsed()) return cmd_gradcheck(gc);
  } catch (const UsageError& err) {
    std::cerr << "usage error: " << err.what() << "\n";
    return kUsage;
  } catch (const ArgumentError& err) {
    std::cerr << "usage error: " << err.what() << "\n";
    return kUsage;
  } catch (const TrainingError& err) {
    std::cerr << "training failed: " << err.what() << "\n";
    return kNumericError;
  } catch (const deepbrain::Error& err) {
    std::cerr << "data error: " << err.what() << "\n";
    return kDataError;
  } catch (const fs::filesystem_error& err) {
    std::cerr << "data error: " << err.what() << "\n";
    return kDataError;
  }
  return kUsage;
}
