// Copyright 2026 The tsseg Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "tsseg/pipeline.hpp"

namespace tsseg::cli {
namespace {

namespace fs = std::filesystem;

// Directory layout shared with the common MS-TCN dataset releases.
struct Layout {
  fs::path root;
  fs::path features() const { return root / "features"; }
  fs::path ground_truth() const { return root / "groundTruth"; }
  fs::path mapping() const { return root / "mapping.txt"; }
  fs::path splits() const { return root / "splits"; }
  fs::path timestamps() const { return root / "timestamps"; }
};

std::vector<std::string> read_bundle(const Layout& layout, const std::string& split) {
  fs::path path = split;
  if (!fs::exists(path)) path = layout.splits() / split;
  std::ifstream in(path);
  if (!in) throw Error("cannot open split file '" + path.string() + "'");
  std::vector<std::string> names;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (line.empty()) continue;
    if (line.size() > 4 && line.ends_with(".txt")) line.resize(line.size() - 4);
    names.push_back(line);
  }
  if (names.empty()) throw Error("split file '" + path.string() + "' lists no videos");
  return names;
}

std::vector<std::string> video_names(const Layout& layout, const std::string& split) {
  if (!split.empty()) return read_bundle(layout, split);
  std::vector<std::string> names;
  if (!fs::is_directory(layout.features())) {
    throw Error("no features directory under '" + layout.root.string() + "'");
  }
  for (const auto& entry : fs::directory_iterator(layout.features())) {
    if (entry.path().extension() == ".tsf") names.push_back(entry.path().stem().string());
  }
  std::sort(names.begin(), names.end());
  if (names.empty()) throw Error("no .tsf files in '" + layout.features().string() + "'");
  return names;
}

struct LoadOptions {
  bool features = true;
  bool labels = false;
  bool timestamps = false;
  fs::path timestamp_dir;
};

std::vector<Sample> load_samples(const Layout& layout, const std::vector<std::string>& names,
                                 const ActionVocab& vocab, const LoadOptions& opts) {
  std::vector<Sample> samples;
  for (const auto& name : names) {
    Sample s;
    s.name = name;
    if (opts.features) s.features = load_features(layout.features() / (name + ".tsf"));
    if (opts.labels) {
      s.labels = load_labels(layout.ground_truth() / (name + ".txt"), vocab);
      if (opts.features && static_cast<int>(s.labels.size()) != s.features.length()) {
        throw Error("video '" + name + "': " + std::to_string(s.labels.size()) +
                    " labels for " + std::to_string(s.features.length()) + " frames");
      }
    }
    if (opts.timestamps) {
      const fs::path path = opts.timestamp_dir / (name + ".txt");
      s.timestamps = load_timestamps(path, vocab);
      const int length = opts.features ? s.features.length() : static_cast<int>(s.labels.size());
      try {
        validate_timestamps(s.timestamps, length, vocab.size());
      } catch (const Error& e) {
        throw Error(path.string() + ": " + e.what());
      }
    }
    samples.push_back(std::move(s));
  }
  return samples;
}

int env_threads() {
  if (const char* v = std::getenv("TSSEG_THREADS")) {
    const int n = std::atoi(v);
    if (n >= 1) return n;
  }
  return 1;
}

void write_bundle(const fs::path& path, const std::vector<std::string>& names) {
  std::ofstream out(path);
  for (const auto& n : names) out << n << ".txt\n";
  if (!out) throw Error("write failed for '" + path.string() + "'");
}

// ---------------------------------------------------------------------------

struct SynthArgs {
  std::string out;
  SyntheticSpec spec;
  int test_videos = -1;
  std::uint64_t seed = 0;
};

void cmd_synth(const SynthArgs& a, std::ostream& out) {
  const auto corpus = generate_synthetic(a.spec, a.seed);
  const Layout layout{a.out};
  fs::create_directories(layout.features());
  fs::create_directories(layout.ground_truth());
  fs::create_directories(layout.splits());

  std::vector<std::string> names;
  for (int c = 0; c < a.spec.num_classes; ++c) names.push_back("action_" + std::to_string(c));
  const ActionVocab vocab(names);
  save_vocab(layout.mapping(), vocab);

  const int test = a.test_videos >= 0 ? a.test_videos : a.spec.videos / 4;
  if (test > a.spec.videos) throw Error("--test-videos exceeds --videos");
  std::vector<std::string> train_names, test_names;
  for (std::size_t i = 0; i < corpus.videos.size(); ++i) {
    const auto& v = corpus.videos[i];
    save_features(layout.features() / (v.name + ".tsf"), v.features);
    save_labels(layout.ground_truth() / (v.name + ".txt"), v.labels, vocab);
    (static_cast<int>(i) < a.spec.videos - test ? train_names : test_names).push_back(v.name);
  }
  write_bundle(layout.splits() / "train.split1.bundle", train_names);
  write_bundle(layout.splits() / "test.split1.bundle", test_names);
  out << "wrote " << corpus.videos.size() << " videos to " << a.out << "\n";
}

struct AnnotateArgs {
  std::string data;
  std::string split;
  std::string strategy = "random";
  std::string out;
  std::uint64_t seed = 0;
};

void cmd_annotate(const AnnotateArgs& a, std::ostream& out) {
  std::optional<SamplingStrategy> strategy;
  std::optional<double> fraction;
  if (a.strategy == "random") strategy = SamplingStrategy::kRandom;
  else if (a.strategy == "center") strategy = SamplingStrategy::kCenter;
  else if (a.strategy == "start") strategy = SamplingStrategy::kStart;
  else if (a.strategy.starts_with("fraction:")) {
    const std::string value = a.strategy.substr(9);
    char* end = nullptr;
    const double f = std::strtod(value.c_str(), &end);
    if (value.empty() || *end != '\0' || !(f > 0.0 && f <= 1.0)) {
      throw Error("fraction must be a number in (0, 1], got '" + value + "'");
    }
    fraction = f;
  } else {
    throw Error("unknown strategy '" + a.strategy + "' (random, center, start, fraction:<p>)");
  }

  const Layout layout{a.data};
  const auto vocab = load_vocab(layout.mapping());
  const fs::path dir = a.out.empty() ? layout.timestamps() : fs::path(a.out);
  fs::create_directories(dir);
  const auto names = a.split.empty() ? std::vector<std::string>{} : read_bundle(layout, a.split);
  std::vector<std::string> all = names;
  if (all.empty()) {
    for (const auto& entry : fs::directory_iterator(layout.ground_truth())) {
      if (entry.path().extension() == ".txt") all.push_back(entry.path().stem().string());
    }
    std::sort(all.begin(), all.end());
  }
  for (std::size_t i = 0; i < all.size(); ++i) {
    const auto labels = load_labels(layout.ground_truth() / (all[i] + ".txt"), vocab);
    const std::uint64_t seed = a.seed * 0x100000001b3ULL + i;
    const TimestampSet ts = fraction ? sample_timestamps_fraction(labels, *fraction, seed)
                                     : sample_timestamps(labels, *strategy, seed);
    save_timestamps(dir / (all[i] + ".txt"), ts, vocab);
  }
  out << "annotated " << all.size() << " videos in " << dir.string() << "\n";
}

struct TrainArgs {
  std::string data;
  std::string split = "train.split1.bundle";
  std::string validation;
  std::string timestamps;
  std::string model_out = "model.tsm";
  std::string log;
  ModelConfig model;
  TrainConfig train;
  std::string mode = "timestamps";
  std::string boundary = "fb";
  int checkpoint_every = 0;
};

fs::path epoch_checkpoint_path(const fs::path& base, int epoch) {
  char suffix[32];
  std::snprintf(suffix, sizeof(suffix), "_epoch%03d", epoch);
  return base.parent_path() / (base.stem().string() + suffix + base.extension().string());
}

void cmd_train(TrainArgs a, std::ostream& out) {
  a.train.supervision = parse_supervision(a.mode);
  a.train.boundary_method = parse_boundary_method(a.boundary);
  a.train.validate();
  if (a.checkpoint_every < 0) throw Error("--checkpoint-every must be >= 0");

  const Layout layout{a.data};
  const auto vocab = load_vocab(layout.mapping());
  LoadOptions opts;
  opts.labels = a.train.supervision == Supervision::kFull;
  opts.timestamp_dir = a.timestamps.empty() ? layout.timestamps() : fs::path(a.timestamps);
  opts.timestamps = a.train.supervision != Supervision::kFull || fs::is_directory(opts.timestamp_dir);
  const auto data = load_samples(layout, video_names(layout, a.split), vocab, opts);

  std::vector<Sample> validation;
  if (!a.validation.empty()) {
    validation = load_samples(layout, read_bundle(layout, a.validation), vocab,
                              LoadOptions{true, true, false, {}});
  }

  a.model.input_dim = data.front().features.dim();
  a.model.num_classes = vocab.size();

  const fs::path model_path = a.model_out;
  const fs::path log_path = a.log.empty() ? fs::path(a.model_out + ".log") : fs::path(a.log);
  if (model_path.has_parent_path()) fs::create_directories(model_path.parent_path());
  std::ofstream log(log_path);
  if (!log) throw Error("cannot open '" + log_path.string() + "' for writing");

  const auto result = train(data, a.model, a.train, validation,
                            [&](const EpochLog& entry, const ModelState& model) {
                              const std::string line = format_epoch_log(entry);
                              out << line << "\n" << std::flush;
                              log << line << "\n" << std::flush;
                              if (a.checkpoint_every > 0 && entry.epoch % a.checkpoint_every == 0) {
                                save_checkpoint(epoch_checkpoint_path(model_path, entry.epoch), model);
                              }
                            });
  save_checkpoint(model_path, result.model);
}

struct EvalArgs {
  std::string data;
  std::string split = "test.split1.bundle";
  std::string model;
  std::string pred;
  std::string write_pred;
  bool header = false;
};

void cmd_eval(const EvalArgs& a, std::ostream& out) {
  if (a.model.empty() == a.pred.empty()) throw Error("give exactly one of --model and --pred");
  const Layout layout{a.data};
  const auto vocab = load_vocab(layout.mapping());
  const auto names = video_names(layout, a.split);
  const bool from_model = !a.model.empty();
  const auto samples = load_samples(layout, names, vocab, LoadOptions{from_model, true, false, {}});

  std::optional<ModelState> model;
  if (from_model) model = load_checkpoint(a.model);
  if (!a.write_pred.empty()) fs::create_directories(a.write_pred);

  MetricsAccumulator acc;
  for (const auto& s : samples) {
    FrameLabels pred;
    if (model) {
      pred = infer(*model, s.features);
    } else {
      pred = load_labels(fs::path(a.pred) / (s.name + ".txt"), vocab);
    }
    if (!a.write_pred.empty()) save_labels(fs::path(a.write_pred) / (s.name + ".txt"), pred, vocab);
    try {
      acc.add(pred, s.labels);
    } catch (const Error& e) {
      throw Error("video '" + s.name + "': " + e.what());
    }
  }
  if (a.header) out << report_header() << "\n";
  out << format_report(acc.result()) << "\n";
}

struct BoundaryArgs {
  std::string data;
  std::string split;
  std::string timestamps;
  std::string model;
  std::string method = "fb";
  std::string out;
  bool normalize = false;
};

void cmd_boundaries(const BoundaryArgs& a, std::ostream& out) {
  const auto method = parse_boundary_method(a.method);
  const Layout layout{a.data};
  const auto vocab = load_vocab(layout.mapping());
  LoadOptions opts;
  opts.timestamps = true;
  opts.timestamp_dir = a.timestamps.empty() ? layout.timestamps() : fs::path(a.timestamps);
  const auto samples = load_samples(layout, video_names(layout, a.split), vocab, opts);
  const auto model = load_checkpoint(a.model);
  fs::create_directories(a.out);
  for (const auto& s : samples) {
    const auto pl = generate_pseudo_labels(forward(model, s.features), s.timestamps, method, a.normalize);
    save_labels(fs::path(a.out) / (s.name + ".txt"), pl.labels, vocab);
    const fs::path sidecar = fs::path(a.out) / (s.name + ".boundaries");
    std::ofstream side(sidecar);
    for (std::size_t i = 0; i < pl.boundaries.size(); ++i) side << i << ' ' << pl.boundaries[i] << '\n';
    if (!side) throw Error("write failed for '" + sidecar.string() + "'");
  }
  out << "wrote pseudo-labels for " << samples.size() << " videos to " << a.out << "\n";
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Temporal action segmentation from timestamp supervision", "tsseg"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every command");

  SynthArgs synth;
  auto* s = app.add_subcommand("synth", "Generate a synthetic corpus");
  s->add_option("--out", synth.out, "Output directory")->required();
  s->add_option("--videos", synth.spec.videos, "Number of videos")->capture_default_str();
  s->add_option("--classes", synth.spec.num_classes, "Number of action classes")->capture_default_str();
  s->add_option("--length", synth.spec.mean_length, "Mean frames per video")->capture_default_str();
  s->add_option("--jitter", synth.spec.length_jitter, "Relative length jitter")->capture_default_str();
  s->add_option("--dim", synth.spec.dim, "Feature dimension")->capture_default_str();
  s->add_option("--sigma", synth.spec.sigma, "Feature noise scale")->capture_default_str();
  s->add_option("--rho", synth.spec.noise_correlation, "Lag-one noise correlation")->capture_default_str();
  s->add_option("--min-segments", synth.spec.min_segments)->capture_default_str();
  s->add_option("--max-segments", synth.spec.max_segments)->capture_default_str();
  s->add_option("--test-videos", synth.test_videos, "Videos in the test split (default videos/4)");
  s->add_option("--seed", synth.seed)->capture_default_str();

  AnnotateArgs ann;
  auto* an = app.add_subcommand("annotate", "Simulate timestamp annotations from ground truth");
  an->add_option("--data", ann.data, "Corpus directory")->required();
  an->add_option("--strategy", ann.strategy, "random, center, start or fraction:<p>")->capture_default_str();
  an->add_option("--split", ann.split, "Bundle file to annotate (default: every video)");
  an->add_option("--out", ann.out, "Output directory (default <data>/timestamps)");
  an->add_option("--seed", ann.seed)->capture_default_str();

  TrainArgs tr;
  auto* t = app.add_subcommand("train", "Train a model");
  t->add_option("--data", tr.data, "Corpus directory")->required();
  t->add_option("--split", tr.split, "Training bundle")->capture_default_str();
  t->add_option("--validation", tr.validation, "Bundle scored after every epoch");
  t->add_option("--timestamps", tr.timestamps, "Timestamp directory (default <data>/timestamps)");
  t->add_option("--out", tr.model_out, "Checkpoint path")->capture_default_str();
  t->add_option("--log", tr.log, "Training log path (default <out>.log)");
  t->add_option("--mode", tr.mode, "timestamps, full, naive or uniform")->capture_default_str();
  t->add_option("--boundary", tr.boundary, "fb, s2s_features or s2s_prob")->capture_default_str();
  t->add_flag("--normalize-features", tr.train.normalize_features,
              "L2-normalise features before boundary search");
  t->add_option("--alpha", tr.train.weights.alpha, "Smoothing loss weight")->capture_default_str();
  t->add_option("--beta", tr.train.weights.beta, "Confidence loss weight")->capture_default_str();
  t->add_option("--tau", tr.train.weights.tau, "Smoothing clip")->capture_default_str();
  t->add_option("--epochs", tr.train.epochs)->capture_default_str();
  t->add_option("--warmup", tr.train.warmup_epochs, "Epochs of timestamp-only classification")
      ->capture_default_str();
  t->add_option("--lr", tr.train.lr)->capture_default_str();
  t->add_option("--batch", tr.train.batch_size)->capture_default_str();
  t->add_option("--stages", tr.model.num_stages)->capture_default_str();
  t->add_option("--layers", tr.model.layers_per_stage)->capture_default_str();
  t->add_option("--channels", tr.model.channels)->capture_default_str();
  t->add_option("--seed", tr.train.seed)->capture_default_str();
  tr.train.threads = env_threads();
  t->add_option("--threads", tr.train.threads, "Worker threads (default $TSSEG_THREADS or 1)");
  t->add_option("--checkpoint-every", tr.checkpoint_every, "Also save every k epochs (0 = never)")
      ->capture_default_str();

  EvalArgs ev;
  auto* e = app.add_subcommand("eval", "Score a model or stored predictions");
  e->add_option("--data", ev.data, "Corpus directory")->required();
  e->add_option("--split", ev.split, "Bundle to score; empty scores every video")->capture_default_str();
  e->add_option("--model", ev.model, "Checkpoint to run");
  e->add_option("--pred", ev.pred, "Directory of predicted label files");
  e->add_option("--write-pred", ev.write_pred, "Save model predictions here");
  e->add_flag("--header", ev.header, "Print a column header");

  BoundaryArgs bd;
  auto* b = app.add_subcommand("boundaries", "Write pseudo-labels and boundaries for a checkpoint");
  b->add_option("--data", bd.data, "Corpus directory")->required();
  b->add_option("--model", bd.model, "Checkpoint")->required();
  b->add_option("--out", bd.out, "Output directory")->required();
  b->add_option("--split", bd.split, "Bundle (default: every video)");
  b->add_option("--timestamps", bd.timestamps, "Timestamp directory (default <data>/timestamps)");
  b->add_option("--method", bd.method, "fb, s2s_features or s2s_prob")->capture_default_str();
  b->add_flag("--normalize-features", bd.normalize);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& ex) {
    return app.exit(ex, out, err);
  }

  try {
    if (s->parsed()) cmd_synth(synth, out);
    else if (an->parsed()) cmd_annotate(ann, out);
    else if (t->parsed()) cmd_train(tr, out);
    else if (e->parsed()) cmd_eval(ev, out);
    else if (b->parsed()) cmd_boundaries(bd, out);
  } catch (const std::exception& ex) {
    err << "tsseg: error: " << ex.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace tsseg::cli
