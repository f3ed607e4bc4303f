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

#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "tsseg/pipeline.hpp"

namespace tsseg {
namespace {

std::vector<Sample> make_corpus(int videos, double sigma, std::uint64_t seed, int length = 60,
                                int classes = 4, int dim = 6) {
  SyntheticSpec spec;
  spec.videos = videos;
  spec.num_classes = classes;
  spec.mean_length = length;
  spec.dim = dim;
  spec.sigma = sigma;
  spec.min_segments = 3;
  spec.max_segments = 5;
  const auto corpus = generate_synthetic(spec, seed);
  std::vector<Sample> out;
  for (std::size_t i = 0; i < corpus.videos.size(); ++i) {
    const auto& v = corpus.videos[i];
    out.push_back({v.name, v.features, v.labels,
                   sample_timestamps(v.labels, SamplingStrategy::kRandom, seed * 1000 + i)});
  }
  return out;
}

ModelConfig small_model(int dim = 6, int classes = 4) {
  ModelConfig c;
  c.num_stages = 2;
  c.layers_per_stage = 3;
  c.channels = 8;
  c.input_dim = dim;
  c.num_classes = classes;
  return c;
}

TrainConfig quick(Supervision mode, int epochs, int warmup) {
  TrainConfig c;
  c.supervision = mode;
  c.epochs = epochs;
  c.warmup_epochs = warmup;
  c.lr = 0.005;
  c.batch_size = 2;
  c.seed = 17;
  return c;
}

double train_accuracy(const ModelState& model, const std::vector<Sample>& data) {
  return evaluate(model, data).acc;
}

TEST(Names, RoundTrip) {
  for (auto m : {Supervision::kTimestamps, Supervision::kFull, Supervision::kNaive, Supervision::kUniform}) {
    EXPECT_EQ(parse_supervision(to_string(m)), m);
  }
  for (auto b : {BoundaryMethod::kForwardBackward, BoundaryMethod::kStampToStampFeatures,
                 BoundaryMethod::kStampToStampProb}) {
    EXPECT_EQ(parse_boundary_method(to_string(b)), b);
  }
  EXPECT_THROW(parse_supervision("weak"), Error);
  EXPECT_THROW(parse_boundary_method("dp"), Error);
}

TEST(Config, DefaultsAndValidation) {
  TrainConfig c;
  EXPECT_EQ(c.epochs, 50);
  EXPECT_EQ(c.warmup_epochs, 30);
  EXPECT_DOUBLE_EQ(c.lr, 0.0005);
  EXPECT_EQ(c.batch_size, 8);
  EXPECT_NO_THROW(c.validate());
  c.warmup_epochs = 51;
  EXPECT_THROW(c.validate(), Error);
  c = TrainConfig{};
  c.batch_size = 0;
  EXPECT_THROW(c.validate(), Error);
}

TEST(Infer, ArgmaxWithSmallestIndexTies) {
  Matrix p(3, 3);
  p << 0.1, 0.7, 0.2, 0.5, 0.5, 0.0, 0.2, 0.3, 0.5;
  EXPECT_EQ(argmax_labels(p), (FrameLabels{1, 0, 2}));
  const auto data = make_corpus(1, 0.1, 3);
  const auto model = init_model(small_model(), 1);
  EXPECT_EQ(infer(model, data[0].features).size(), data[0].labels.size());
}

TEST(PseudoLabels, AlwaysAgreeWithTimestamps) {
  std::mt19937_64 rng(5);
  const auto model = init_model(small_model(), 2);
  for (int trial = 0; trial < 30; ++trial) {
    const int length = std::uniform_int_distribution<int>(2, 50)(rng);
    const FeatureSequence f{oracle::random_matrix(rng, length, 6)};
    const auto out = forward(model, f);
    const int n = std::uniform_int_distribution<int>(1, std::min(length, 6))(rng);
    TimestampSet ts = oracle::random_timestamps(rng, length, n, 4);
    for (std::size_t i = 1; i < ts.size(); ++i) {
      if (ts[i].label == ts[i - 1].label) ts[i].label = (ts[i].label + 1) % 4;
    }
    for (auto method : {BoundaryMethod::kForwardBackward, BoundaryMethod::kStampToStampFeatures,
                        BoundaryMethod::kStampToStampProb}) {
      for (bool normalize : {false, true}) {
        const auto pl = generate_pseudo_labels(out, ts, method, normalize);
        ASSERT_EQ(static_cast<int>(pl.labels.size()), length);
        EXPECT_EQ(pl.boundaries.size(), ts.size() - 1);
        for (const auto& t : ts) EXPECT_EQ(pl.labels[t.frame], t.label);
      }
    }
  }
}

TEST(PseudoLabels, SingleTimestampLabelsWholeVideo) {
  std::mt19937_64 rng(6);
  const auto model = init_model(small_model(), 2);
  const auto out = forward(model, FeatureSequence{oracle::random_matrix(rng, 12, 6)});
  const auto pl = generate_pseudo_labels(out, {{4, 3}}, BoundaryMethod::kForwardBackward);
  EXPECT_TRUE(pl.boundaries.empty());
  EXPECT_EQ(pl.labels, FrameLabels(12, 3));
}

TEST(VideoStep, WarmupGradientComesFromAnnotatedFramesOnly) {
  auto data = make_corpus(1, 0.2, 8);
  const auto model = init_model(small_model(), 4);
  auto config = quick(Supervision::kTimestamps, 4, 2);
  config.weights = {0.0, 0.0, 4.0};
  const auto step = compute_video_step(model, data[0], config, 1);
  ASSERT_TRUE(step.masked);
  ASSERT_EQ(step.mask.size(), data[0].timestamps.size());

  // Rebuild the same gradient from per-stage probability gradients that are
  // zero everywhere except the annotated rows.
  const auto trace = forward_traced(model, data[0].features);
  std::vector<Matrix> grads;
  for (const auto& p : trace.outputs().probs) {
    Matrix g = Matrix::Zero(p.rows(), p.cols());
    cls_loss(p, step.target, std::span<const int>(step.mask), &g);
    for (int t = 0; t < g.rows(); ++t) {
      const bool annotated = std::find(step.mask.begin(), step.mask.end(), t) != step.mask.end();
      if (!annotated) EXPECT_TRUE(g.row(t).isZero());
    }
    grads.push_back(g);
  }
  EXPECT_LT((backward(model, trace, grads) - step.grad).cwiseAbs().maxCoeff(), 1e-12);

  // After warmup the full pseudo-label target is used.
  const auto later = compute_video_step(model, data[0], config, 3);
  EXPECT_FALSE(later.masked);
  EXPECT_EQ(later.target.size(), data[0].labels.size());
}

TEST(VideoStep, FullModeIgnoresMissingTimestamps) {
  auto data = make_corpus(1, 0.2, 8);
  data[0].timestamps.clear();
  const auto model = init_model(small_model(), 4);
  const auto step = compute_video_step(model, data[0], quick(Supervision::kFull, 1, 0), 1);
  EXPECT_EQ(step.target, data[0].labels);
  EXPECT_TRUE(std::isfinite(step.loss));
}

TEST(Train, RejectsMissingSupervision) {
  auto data = make_corpus(2, 0.2, 8);
  data[1].timestamps.clear();
  EXPECT_THROW(train(data, small_model(), quick(Supervision::kTimestamps, 1, 1)), Error);
  data = make_corpus(2, 0.2, 8);
  data[0].labels.clear();
  EXPECT_THROW(train(data, small_model(), quick(Supervision::kFull, 1, 0)), Error);
  EXPECT_THROW(train({}, small_model(), quick(Supervision::kFull, 1, 0)), Error);
}

TEST(Train, SeparableFullSupervisionConverges) {
  const auto data = make_corpus(6, 0.0, 21);
  const auto result = train(data, small_model(), quick(Supervision::kFull, 30, 0));
  ASSERT_EQ(result.log.size(), 30u);
  for (int e = 1; e < 5; ++e) EXPECT_LT(result.log[e].mean_loss, result.log[e - 1].mean_loss);
  EXPECT_GE(train_accuracy(result.model, data), 99.0);
}

TEST(Train, TimestampsMatchFullOnSeparableCorpus) {
  const auto data = make_corpus(6, 0.0, 21);
  const auto full = train(data, small_model(), quick(Supervision::kFull, 30, 0));
  const auto ts = train(data, small_model(), quick(Supervision::kTimestamps, 30, 15));
  EXPECT_NEAR(train_accuracy(ts.model, data), train_accuracy(full.model, data), 1.0);
}

TEST(Train, UniformEqualsFullWhenCentresAreMidpoints) {
  // Equal odd-length segments annotated at their centres: every midpoint
  // between neighbouring timestamps is the true change point.
  std::mt19937_64 rng(4);
  std::vector<Sample> data;
  const Matrix means = oracle::random_matrix(rng, 4, 6);
  for (int v = 0; v < 4; ++v) {
    SegmentList segs;
    int label = v % 4;
    for (int s = 0; s < 4; ++s) {
      segs.push_back({label, s * 11, (s + 1) * 11});
      label = (label + 1 + v % 3) % 4;
      if (label == segs.back().label) label = (label + 1) % 4;
    }
    const FrameLabels labels = labels_from_segments(segs);
    Matrix f(labels.size(), 6);
    for (std::size_t t = 0; t < labels.size(); ++t) f.row(t) = means.row(labels[t]);
    data.push_back({"v" + std::to_string(v), FeatureSequence{f}, labels,
                    sample_timestamps(labels, SamplingStrategy::kCenter, 0)});
  }
  for (const auto& s : data) {
    EXPECT_EQ(labels_from_boundaries(s.timestamps,
                                     uniform_boundaries(s.timestamps, s.features.length()),
                                     s.features.length()),
              s.labels);
  }
  const auto full = train(data, small_model(), quick(Supervision::kFull, 3, 0));
  const auto uniform = train(data, small_model(), quick(Supervision::kUniform, 3, 0));
  EXPECT_EQ(full.model.params, uniform.model.params);
}

TEST(Train, WarmupCoveringAllEpochsIsNaive) {
  const auto data = make_corpus(4, 0.2, 9);
  const auto ts = train(data, small_model(), quick(Supervision::kTimestamps, 3, 3));
  const auto naive = train(data, small_model(), quick(Supervision::kNaive, 3, 0));
  EXPECT_EQ(ts.model.params, naive.model.params);
}

TEST(Train, DeterministicAcrossRunsAndThreads) {
  const auto data = make_corpus(5, 0.2, 10);
  auto config = quick(Supervision::kTimestamps, 4, 2);
  const auto a = train(data, small_model(), config, data);
  const auto b = train(data, small_model(), config, data);
  config.threads = 3;
  const auto c = train(data, small_model(), config, data);
  EXPECT_EQ(a.model.params, b.model.params);
  EXPECT_EQ(a.model.params, c.model.params);
  ASSERT_EQ(a.log.size(), c.log.size());
  for (std::size_t e = 0; e < a.log.size(); ++e) {
    EXPECT_EQ(format_epoch_log(a.log[e]), format_epoch_log(c.log[e]));
    EXPECT_TRUE(a.log[e].validation.has_value());
  }
}

TEST(Train, CallbackSeesEveryEpoch) {
  const auto data = make_corpus(2, 0.2, 10);
  std::vector<int> seen;
  train(data, small_model(), quick(Supervision::kNaive, 3, 0), {},
        [&](const EpochLog& e, const ModelState& m) {
          seen.push_back(e.epoch);
          EXPECT_GT(m.adam.step, 0u);
        });
  EXPECT_EQ(seen, (std::vector<int>{1, 2, 3}));
}

TEST(Evaluate, MemorisedVideoScoresPerfectly) {
  const auto data = make_corpus(1, 0.0, 12);
  const auto result = train(data, small_model(), quick(Supervision::kFull, 60, 0));
  const auto r = evaluate(result.model, data);
  EXPECT_EQ(format_report(r), "100.0\t100.0\t100.0\t100.0\t100.0");
  EXPECT_EQ(format_report(evaluate(result.model, data)), format_report(r));
}

TEST(Evaluate, UntrainedModelIsNearChance) {
  double total = 0.0;
  const int seeds = 8;
  for (int s = 0; s < seeds; ++s) {
    const auto data = make_corpus(4, 0.25, 30 + s, 80, 5, 6);
    total += evaluate(init_model(small_model(6, 5), 100 + s), data).acc;
  }
  EXPECT_NEAR(total / seeds, 20.0, 15.0);
}

TEST(EpochLog, Format) {
  EpochLog e{3, 0.25, std::nullopt};
  EXPECT_EQ(format_epoch_log(e), "3\t0.250000");
  e.validation = MetricsReport{90.0, 80.0, 70.0, 60.0, 50.0};
  EXPECT_EQ(format_epoch_log(e), "3\t0.250000\t90.0\t80.0\t70.0\t60.0\t50.0");
}

}  // namespace
}  // namespace tsseg
