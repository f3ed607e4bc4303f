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

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "tsseg/data.hpp"
#include "tsseg/loss.hpp"
#include "tsseg/types.hpp"

namespace tsseg {

// Multi-stage temporal convolutional network. Each stage projects its input
// with a 1x1 convolution, applies `layers_per_stage` dilated residual layers
// (dilation 2^l, ReLU, 1x1, residual add), then a 1x1 classifier and a
// softmax. Stage 1 runs two such branches with different kernel sizes on the
// input features and sums their activations before the classifier; every
// later stage consumes the previous stage's probabilities.
struct ModelConfig {
  int num_stages = 4;
  int layers_per_stage = 10;
  int channels = 64;
  std::array<int, 2> first_stage_kernels = {5, 3};
  int later_kernel = 3;
  int input_dim = 0;
  int num_classes = 0;

  void validate() const;
  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

// Location of one convolution inside the flat parameter vector. The weight is
// `taps` consecutive row-major (in x out) matrices, tap 0 being the leftmost
// frame offset; the bias (out values) follows directly.
struct ConvSlot {
  Eigen::Index offset = 0;
  int taps = 1;
  int in = 0;
  int out = 0;
  int dilation = 1;

  Eigen::Index weight_size() const { return static_cast<Eigen::Index>(taps) * in * out; }
  Eigen::Index bias_offset() const { return offset + weight_size(); }
  Eigen::Index size() const { return weight_size() + out; }
};

struct BranchLayout {
  ConvSlot input;
  std::vector<ConvSlot> dilated;
  std::vector<ConvSlot> pointwise;
};

struct StageLayout {
  std::vector<BranchLayout> branches;
  ConvSlot classifier;
};

// Parameter traversal order: stage-major; within a stage each branch's input
// projection, then per layer the dilated and pointwise convolutions, then the
// classifier; each convolution stores weight before bias.
struct ParameterLayout {
  std::vector<StageLayout> stages;
  Eigen::Index size = 0;
};

ParameterLayout make_layout(const ModelConfig& config);

struct AdamState {
  Vector first_moment;
  Vector second_moment;
  std::uint64_t step = 0;
};

struct ModelState {
  ModelConfig config;
  ParameterLayout layout;
  Vector params;
  AdamState adam;
};

struct StageOutputs {
  std::vector<Matrix> probs;  // one T x C matrix per stage
  Matrix penultimate;         // T x F, final stage before its classifier
};

// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights, zero biases.
ModelState init_model(const ModelConfig& config, std::uint64_t seed);

// Activations of one forward pass, kept for the backward pass.
class ForwardTrace {
 public:
  const StageOutputs& outputs() const { return outputs_; }
  int length() const { return static_cast<int>(outputs_.penultimate.rows()); }
  // Smallest |x| over all ReLU inputs; gradient checks use it to stay away
  // from the kink.
  double relu_margin() const;

 private:
  friend ForwardTrace forward_traced(const ModelState&, const FeatureSequence&);
  friend Vector backward(const ModelState&, const ForwardTrace&, std::span<const Matrix>);

  struct Branch {
    std::vector<Matrix> residual;    // L+1 entries, residual[0] is the input projection
    std::vector<Matrix> activation;  // L pre-ReLU dilated outputs
  };
  struct Stage {
    std::vector<Branch> branches;
    Matrix features;  // summed branch outputs
  };
  Matrix input_;
  std::vector<Stage> stages_;
  StageOutputs outputs_;
};

StageOutputs forward(const ModelState& model, const FeatureSequence& features);
ForwardTrace forward_traced(const ModelState& model, const FeatureSequence& features);

// Gradient of the parameters given dL/dprobs for every stage.
Vector backward(const ModelState& model, const ForwardTrace& trace,
                std::span<const Matrix> prob_grads);

struct LossAndGrad {
  double loss = 0.0;
  Vector grad;
};

// Sum over stages of total_loss(stage probs, ...) and its exact gradient.
// Throws Error naming the stage if a stage loss is not finite.
LossAndGrad loss_and_grad(const ModelState& model, const FeatureSequence& features,
                          std::span<const int> target, FrameMask mask,
                          const TimestampSet* timestamps, const LossWeights& weights);
LossAndGrad loss_and_grad(const ModelState& model, const ForwardTrace& trace,
                          std::span<const int> target, FrameMask mask,
                          const TimestampSet* timestamps, const LossWeights& weights);

struct AdamOptions {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// In-place Adam update; increments the step counter.
void adam_step(ModelState& model, const Vector& grads, double lr, const AdamOptions& options = {});

// Checkpoint: "TSM1", eight u32 config fields (stages, layers, channels,
// kernel a, kernel b, later kernel, input dim, classes), parameters as f32 in
// layout order, first then second Adam moments as f32, u64 step. All little
// endian.
void write_checkpoint(std::ostream& out, const ModelState& model);
ModelState read_checkpoint(std::istream& in);
void save_checkpoint(const std::filesystem::path& path, const ModelState& model);
ModelState load_checkpoint(const std::filesystem::path& path);

}  // namespace tsseg
