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

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tsseg/change.hpp"
#include "tsseg/data.hpp"
#include "tsseg/loss.hpp"
#include "tsseg/metrics.hpp"
#include "tsseg/net.hpp"

namespace tsseg {

enum class Supervision { kTimestamps, kFull, kNaive, kUniform };
enum class BoundaryMethod { kForwardBackward, kStampToStampFeatures, kStampToStampProb };

Supervision parse_supervision(const std::string& name);
BoundaryMethod parse_boundary_method(const std::string& name);
std::string to_string(Supervision mode);
std::string to_string(BoundaryMethod method);

struct TrainConfig {
  int epochs = 50;
  // Epochs during which the classification loss only sees annotated frames.
  int warmup_epochs = 30;
  double lr = 0.0005;
  int batch_size = 8;
  LossWeights weights;
  Supervision supervision = Supervision::kTimestamps;
  BoundaryMethod boundary_method = BoundaryMethod::kForwardBackward;
  // L2-normalise the penultimate features per frame before boundary search.
  bool normalize_features = false;
  std::uint64_t seed = 0;
  // Worker threads for per-video forward/backward inside a batch.
  int threads = 1;

  void validate() const;
};

// A training or evaluation video. `labels` may be empty when only timestamps
// are known, `timestamps` may be empty in fully supervised runs.
struct Sample {
  std::string name;
  FeatureSequence features;
  FrameLabels labels;
  TimestampSet timestamps;
};

struct EpochLog {
  int epoch = 0;
  double mean_loss = 0.0;
  std::optional<MetricsReport> validation;
};

// "epoch\tmean_loss[\tacc\tedit\tf1_10\tf1_25\tf1_50]".
std::string format_epoch_log(const EpochLog& entry);

struct TrainResult {
  ModelState model;
  std::vector<EpochLog> log;
};

using EpochCallback = std::function<void(const EpochLog&, const ModelState&)>;

// Frame labels derived from the model output and the timestamps: every frame
// between a timestamp and an estimated boundary takes the timestamp's class.
// A single timestamp labels the whole video.
struct PseudoLabels {
  BoundaryEstimate boundaries;
  FrameLabels labels;
};
PseudoLabels generate_pseudo_labels(const StageOutputs& outputs, const TimestampSet& timestamps,
                                    BoundaryMethod method, bool normalize_features = false);

// Loss, gradient and target of one video at a given (1-based) epoch.
struct VideoStep {
  double loss = 0.0;
  Vector grad;
  FrameLabels target;           // empty for masked steps
  std::vector<int> mask;        // annotated frames for masked steps
  bool masked = false;
};
VideoStep compute_video_step(const ModelState& model, const Sample& sample,
                             const TrainConfig& config, int epoch,
                             const FrameLabels* fixed_target = nullptr);

TrainResult train(std::span<const Sample> data, const ModelConfig& model_config,
                  const TrainConfig& config, std::span<const Sample> validation = {},
                  const EpochCallback& on_epoch = {});

// Arg-max of the final stage, smallest class on ties.
FrameLabels argmax_labels(const Matrix& probs);
FrameLabels infer(const ModelState& model, const FeatureSequence& features);

MetricsReport evaluate(const ModelState& model, std::span<const Sample> data);

}  // namespace tsseg
