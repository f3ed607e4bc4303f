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

#include <benchmark/benchmark.h>

#include <random>

#include "tsseg/pipeline.hpp"

namespace {

using namespace tsseg;

Matrix gaussian(int rows, int cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = g(rng);
  return m;
}

ModelConfig model_config(int channels) {
  ModelConfig c;
  c.num_stages = 4;
  c.layers_per_stage = 10;
  c.channels = channels;
  c.input_dim = 64;
  c.num_classes = 19;
  return c;
}

void BM_Forward(benchmark::State& state) {
  const auto model = init_model(model_config(static_cast<int>(state.range(1))), 1);
  const FeatureSequence f{gaussian(static_cast<int>(state.range(0)), 64, 2)};
  for (auto _ : state) benchmark::DoNotOptimize(forward(model, f));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Forward)->Args({1000, 32})->Args({1000, 64})->Args({4000, 64})->Unit(benchmark::kMillisecond);

void BM_LossAndGrad(benchmark::State& state) {
  const auto model = init_model(model_config(64), 1);
  const int length = static_cast<int>(state.range(0));
  const FeatureSequence f{gaussian(length, 64, 2)};
  FrameLabels target(length);
  for (int t = 0; t < length; ++t) target[t] = (t / 100) % 19;
  TimestampSet ts;
  for (int t = 50; t < length; t += 100) ts.push_back({t, (t / 100) % 19});
  for (auto _ : state) {
    benchmark::DoNotOptimize(loss_and_grad(model, f, target, std::nullopt, &ts, LossWeights{}));
  }
  state.SetItemsProcessed(state.iterations() * length);
}
BENCHMARK(BM_LossAndGrad)->Arg(1000)->Arg(4000)->Unit(benchmark::kMillisecond);

void BM_ForwardBackwardBoundaries(benchmark::State& state) {
  const int length = static_cast<int>(state.range(0));
  const int segments = static_cast<int>(state.range(1));
  const Matrix h = gaussian(length, 64, 3);
  TimestampSet ts;
  for (int i = 0; i < segments; ++i) ts.push_back({(2 * i + 1) * length / (2 * segments), i % 7});
  for (auto _ : state) benchmark::DoNotOptimize(fb_boundaries(h, ts, length));
}
BENCHMARK(BM_ForwardBackwardBoundaries)->Args({1000, 10})->Args({5000, 20})->Unit(benchmark::kMillisecond);

void BM_Metrics(benchmark::State& state) {
  const int length = static_cast<int>(state.range(0));
  std::mt19937_64 rng(4);
  FrameLabels gt(length), pred(length);
  for (int t = 0; t < length; ++t) {
    gt[t] = (t / 150) % 11;
    pred[t] = std::uniform_int_distribution<int>(0, 49)(rng) == 0 ? (gt[t] + 1) % 11 : gt[t];
  }
  for (auto _ : state) benchmark::DoNotOptimize(report(pred, gt));
}
BENCHMARK(BM_Metrics)->Arg(5000)->Arg(20000);

}  // namespace

BENCHMARK_MAIN();
