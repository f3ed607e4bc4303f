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

#include "tsseg/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <future>
#include <numeric>
#include <random>

namespace tsseg {
namespace {

bool needs_timestamps(Supervision mode) { return mode != Supervision::kFull; }

void check_sample(const Sample& sample, const ModelConfig& model_config, Supervision mode) {
  const auto where = [&] { return " (video '" + sample.name + "')"; };
  if (sample.features.dim() != model_config.input_dim) {
    throw Error("feature dimension mismatch" + where());
  }
  const int length = sample.features.length();
  if (length < 1) throw Error("empty video" + where());
  if (!sample.labels.empty() && static_cast<int>(sample.labels.size()) != length) {
    throw Error("label count does not match frame count" + where());
  }
  if (mode == Supervision::kFull && sample.labels.empty()) {
    throw Error("full supervision needs frame labels" + where());
  }
  if (needs_timestamps(mode) && sample.timestamps.empty()) {
    throw Error(to_string(mode) + " supervision needs timestamps" + where());
  }
  if (!sample.timestamps.empty()) {
    validate_timestamps(sample.timestamps, length, model_config.num_classes);
  }
}

FrameLabels uniform_target(const Sample& sample) {
  const int length = sample.features.length();
  return labels_from_boundaries(sample.timestamps, uniform_boundaries(sample.timestamps, length),
                                length);
}

}  // namespace

Supervision parse_supervision(const std::string& name) {
  if (name == "timestamps") return Supervision::kTimestamps;
  if (name == "full") return Supervision::kFull;
  if (name == "naive") return Supervision::kNaive;
  if (name == "uniform") return Supervision::kUniform;
  throw Error("unknown supervision mode '" + name + "'");
}

BoundaryMethod parse_boundary_method(const std::string& name) {
  if (name == "fb") return BoundaryMethod::kForwardBackward;
  if (name == "s2s_features") return BoundaryMethod::kStampToStampFeatures;
  if (name == "s2s_prob") return BoundaryMethod::kStampToStampProb;
  throw Error("unknown boundary method '" + name + "'");
}

std::string to_string(Supervision mode) {
  switch (mode) {
    case Supervision::kTimestamps: return "timestamps";
    case Supervision::kFull: return "full";
    case Supervision::kNaive: return "naive";
    case Supervision::kUniform: return "uniform";
  }
  return "?";
}

std::string to_string(BoundaryMethod method) {
  switch (method) {
    case BoundaryMethod::kForwardBackward: return "fb";
    case BoundaryMethod::kStampToStampFeatures: return "s2s_features";
    case BoundaryMethod::kStampToStampProb: return "s2s_prob";
  }
  return "?";
}

void TrainConfig::validate() const {
  if (epochs < 0) throw Error("epochs must be >= 0");
  if (warmup_epochs < 0 || warmup_epochs > epochs) {
    throw Error("warmup epochs must lie in [0, epochs]");
  }
  if (!(lr > 0.0) || !std::isfinite(lr)) throw Error("learning rate must be > 0");
  if (batch_size < 1) throw Error("batch size must be >= 1");
  if (threads < 1) throw Error("thread count must be >= 1");
  weights.validate();
}

std::string format_epoch_log(const EpochLog& entry) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%d\t%.6f", entry.epoch, entry.mean_loss);
  std::string line = buf;
  if (entry.validation) line += "\t" + format_report(*entry.validation);
  return line;
}

PseudoLabels generate_pseudo_labels(const StageOutputs& outputs, const TimestampSet& timestamps,
                                    BoundaryMethod method, bool normalize_features) {
  const int length = static_cast<int>(outputs.penultimate.rows());
  PseudoLabels result;
  if (timestamps.size() >= 2) {
    switch (method) {
      case BoundaryMethod::kForwardBackward:
        result.boundaries = normalize_features
                                ? fb_boundaries(l2_normalize_rows(outputs.penultimate), timestamps, length)
                                : fb_boundaries(outputs.penultimate, timestamps, length);
        break;
      case BoundaryMethod::kStampToStampFeatures:
        result.boundaries = normalize_features
                                ? s2s_boundaries(l2_normalize_rows(outputs.penultimate), timestamps)
                                : s2s_boundaries(outputs.penultimate, timestamps);
        break;
      case BoundaryMethod::kStampToStampProb:
        result.boundaries = s2s_prob_boundaries(outputs.probs.back(), timestamps);
        break;
    }
  }
  result.labels = labels_from_boundaries(timestamps, result.boundaries, length);
  return result;
}

VideoStep compute_video_step(const ModelState& model, const Sample& sample,
                             const TrainConfig& config, int epoch,
                             const FrameLabels* fixed_target) {
  const ForwardTrace trace = forward_traced(model, sample.features);
  const int length = sample.features.length();
  VideoStep step;

  switch (config.supervision) {
    case Supervision::kFull:
      step.target = sample.labels;
      break;
    case Supervision::kNaive:
      step.masked = true;
      break;
    case Supervision::kTimestamps:
      if (epoch <= config.warmup_epochs) {
        step.masked = true;
      } else {
        step.target = generate_pseudo_labels(trace.outputs(), sample.timestamps,
                                             config.boundary_method, config.normalize_features)
                          .labels;
      }
      break;
    case Supervision::kUniform:
      step.target = fixed_target ? *fixed_target : uniform_target(sample);
      break;
  }
  if (step.masked) {
    step.target.assign(length, 0);
    for (const auto& ts : sample.timestamps) {
      step.target[ts.frame] = ts.label;
      step.mask.push_back(ts.frame);
    }
  }

  const TimestampSet* timestamps = sample.timestamps.empty() ? nullptr : &sample.timestamps;
  FrameMask mask = std::nullopt;
  if (step.masked) mask = std::span<const int>(step.mask);
  LossAndGrad lg;
  try {
    lg = loss_and_grad(model, trace, step.target, mask, timestamps, config.weights);
  } catch (const Error& e) {
    throw Error("video '" + sample.name + "': " + e.what());
  }
  step.loss = lg.loss;
  step.grad = std::move(lg.grad);
  return step;
}

TrainResult train(std::span<const Sample> data, const ModelConfig& model_config,
                  const TrainConfig& config, std::span<const Sample> validation,
                  const EpochCallback& on_epoch) {
  config.validate();
  model_config.validate();
  if (data.empty()) throw Error("training set is empty");
  for (const auto& sample : data) check_sample(sample, model_config, config.supervision);
  for (const auto& sample : validation) {
    if (sample.labels.empty()) throw Error("validation video '" + sample.name + "' has no labels");
  }

  TrainResult result;
  result.model = init_model(model_config, config.seed);

  std::vector<FrameLabels> fixed_targets;
  if (config.supervision == Supervision::kUniform) {
    for (const auto& sample : data) fixed_targets.push_back(uniform_target(sample));
  }

  std::mt19937_64 shuffle_rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double loss_sum = 0.0;
    for (std::size_t begin = 0; begin < order.size(); begin += config.batch_size) {
      const std::size_t end = std::min(order.size(), begin + config.batch_size);
      std::vector<VideoStep> steps(end - begin);
      auto run = [&](std::size_t k) {
        const std::size_t v = order[begin + k];
        const FrameLabels* fixed = fixed_targets.empty() ? nullptr : &fixed_targets[v];
        steps[k] = compute_video_step(result.model, data[v], config, epoch, fixed);
      };
      if (config.threads > 1 && steps.size() > 1) {
        const std::size_t workers = std::min<std::size_t>(config.threads, steps.size());
        std::vector<std::future<void>> jobs;
        for (std::size_t w = 0; w < workers; ++w) {
          jobs.push_back(std::async(std::launch::async, [&, w] {
            for (std::size_t k = w; k < steps.size(); k += workers) run(k);
          }));
        }
        for (auto& job : jobs) job.get();
      } else {
        for (std::size_t k = 0; k < steps.size(); ++k) run(k);
      }

      // Summed in batch order so the result does not depend on scheduling.
      Vector grad = Vector::Zero(result.model.params.size());
      for (const auto& step : steps) {
        grad += step.grad;
        loss_sum += step.loss;
      }
      try {
        adam_step(result.model, grad, config.lr);
      } catch (const Error& e) {
        throw Error("epoch " + std::to_string(epoch) + ", batch starting at " +
                    std::to_string(begin) + ": " + e.what());
      }
    }
    if (!std::isfinite(loss_sum)) {
      throw Error("training diverged at epoch " + std::to_string(epoch));
    }

    EpochLog entry;
    entry.epoch = epoch;
    entry.mean_loss = loss_sum / static_cast<double>(data.size());
    if (!validation.empty()) entry.validation = evaluate(result.model, validation);
    result.log.push_back(entry);
    if (on_epoch) on_epoch(entry, result.model);
  }
  return result;
}

FrameLabels argmax_labels(const Matrix& probs) {
  FrameLabels labels(probs.rows());
  for (Eigen::Index t = 0; t < probs.rows(); ++t) {
    Eigen::Index best = 0;
    for (Eigen::Index c = 1; c < probs.cols(); ++c) {
      if (probs(t, c) > probs(t, best)) best = c;
    }
    labels[t] = static_cast<int>(best);
  }
  return labels;
}

FrameLabels infer(const ModelState& model, const FeatureSequence& features) {
  return argmax_labels(forward(model, features).probs.back());
}

MetricsReport evaluate(const ModelState& model, std::span<const Sample> data) {
  MetricsAccumulator acc;
  for (const auto& sample : data) {
    if (sample.labels.empty()) throw Error("video '" + sample.name + "' has no ground truth");
    acc.add(infer(model, sample.features), sample.labels);
  }
  return acc.result();
}

}  // namespace tsseg
