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

#include "tsseg/net.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

namespace tsseg {
namespace {

using ConstWeight = Eigen::Map<const Matrix>;
using WeightRef = Eigen::Map<Matrix>;

ConstWeight tap_weight(const Vector& params, const ConvSlot& slot, int tap) {
  return ConstWeight(params.data() + slot.offset + static_cast<Eigen::Index>(tap) * slot.in * slot.out,
                     slot.in, slot.out);
}

WeightRef tap_weight(Vector& params, const ConvSlot& slot, int tap) {
  return WeightRef(params.data() + slot.offset + static_cast<Eigen::Index>(tap) * slot.in * slot.out,
                   slot.in, slot.out);
}

auto bias(const Vector& params, const ConvSlot& slot) {
  return params.segment(slot.bias_offset(), slot.out).transpose();
}

// Frame offset of `tap` relative to the output frame ("same" zero padding).
int tap_shift(const ConvSlot& slot, int tap) { return (tap - (slot.taps - 1) / 2) * slot.dilation; }

// y = conv(x) + bias, zero padded so that y has as many frames as x.
Matrix conv_forward(const Vector& params, const ConvSlot& slot, const Matrix& x) {
  const Eigen::Index length = x.rows();
  Matrix y = bias(params, slot).replicate(length, 1);
  for (int k = 0; k < slot.taps; ++k) {
    const int shift = tap_shift(slot, k);
    const Eigen::Index n = length - std::abs(shift);
    if (n <= 0) continue;
    const Eigen::Index out_start = shift >= 0 ? 0 : -shift;
    const Eigen::Index in_start = shift >= 0 ? shift : 0;
    y.middleRows(out_start, n).noalias() += x.middleRows(in_start, n) * tap_weight(params, slot, k);
  }
  return y;
}

// Accumulates parameter gradients into `grad` and, when dx is non-null, the
// input gradient into *dx.
void conv_backward(const Vector& params, const ConvSlot& slot, const Matrix& x, const Matrix& dy,
                   Vector& grad, Matrix* dx) {
  const Eigen::Index length = x.rows();
  grad.segment(slot.bias_offset(), slot.out) += dy.colwise().sum().transpose();
  for (int k = 0; k < slot.taps; ++k) {
    const int shift = tap_shift(slot, k);
    const Eigen::Index n = length - std::abs(shift);
    if (n <= 0) continue;
    const Eigen::Index out_start = shift >= 0 ? 0 : -shift;
    const Eigen::Index in_start = shift >= 0 ? shift : 0;
    tap_weight(grad, slot, k).noalias() +=
        x.middleRows(in_start, n).transpose() * dy.middleRows(out_start, n);
    if (dx) {
      dx->middleRows(in_start, n).noalias() +=
          dy.middleRows(out_start, n) * tap_weight(params, slot, k).transpose();
    }
  }
}

Matrix softmax_rows(const Matrix& logits) {
  Matrix probs(logits.rows(), logits.cols());
  for (Eigen::Index t = 0; t < logits.rows(); ++t) {
    const double peak = logits.row(t).maxCoeff();
    probs.row(t) = (logits.row(t).array() - peak).exp();
    probs.row(t) /= probs.row(t).sum();
  }
  return probs;
}

ConvSlot take_slot(Eigen::Index& cursor, int taps, int in, int out, int dilation) {
  ConvSlot slot{cursor, taps, in, out, dilation};
  cursor += slot.size();
  return slot;
}

}  // namespace

void ModelConfig::validate() const {
  auto positive = [](int v, const char* what) {
    if (v < 1) throw Error(std::string(what) + " must be >= 1, got " + std::to_string(v));
  };
  auto odd = [](int v, const char* what) {
    if (v < 1 || v % 2 == 0) {
      throw Error(std::string(what) + " must be a positive odd number, got " + std::to_string(v));
    }
  };
  positive(num_stages, "num_stages");
  positive(layers_per_stage, "layers_per_stage");
  positive(channels, "channels");
  positive(input_dim, "input_dim");
  if (num_classes < 2) throw Error("num_classes must be >= 2, got " + std::to_string(num_classes));
  odd(first_stage_kernels[0], "first stage kernel");
  odd(first_stage_kernels[1], "first stage kernel");
  odd(later_kernel, "later kernel");
  if (layers_per_stage > 30) throw Error("layers_per_stage must be <= 30");
}

ParameterLayout make_layout(const ModelConfig& config) {
  config.validate();
  ParameterLayout layout;
  Eigen::Index cursor = 0;
  const int width = config.channels;
  for (int s = 0; s < config.num_stages; ++s) {
    StageLayout stage;
    const int in = s == 0 ? config.input_dim : config.num_classes;
    std::vector<int> kernels;
    if (s == 0) {
      kernels = {config.first_stage_kernels[0], config.first_stage_kernels[1]};
    } else {
      kernels = {config.later_kernel};
    }
    for (int kernel : kernels) {
      BranchLayout branch;
      branch.input = take_slot(cursor, 1, in, width, 1);
      for (int l = 0; l < config.layers_per_stage; ++l) {
        branch.dilated.push_back(take_slot(cursor, kernel, width, width, 1 << l));
        branch.pointwise.push_back(take_slot(cursor, 1, width, width, 1));
      }
      stage.branches.push_back(std::move(branch));
    }
    stage.classifier = take_slot(cursor, 1, width, config.num_classes, 1);
    layout.stages.push_back(std::move(stage));
  }
  layout.size = cursor;
  return layout;
}

ModelState init_model(const ModelConfig& config, std::uint64_t seed) {
  ModelState model;
  model.config = config;
  model.layout = make_layout(config);
  model.params = Vector::Zero(model.layout.size);
  model.adam.first_moment = Vector::Zero(model.layout.size);
  model.adam.second_moment = Vector::Zero(model.layout.size);

  std::mt19937_64 rng(seed);
  auto fill = [&](const ConvSlot& slot) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(slot.taps * slot.in));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (Eigen::Index i = 0; i < slot.weight_size(); ++i) model.params[slot.offset + i] = dist(rng);
  };
  for (const auto& stage : model.layout.stages) {
    for (const auto& branch : stage.branches) {
      fill(branch.input);
      for (std::size_t l = 0; l < branch.dilated.size(); ++l) {
        fill(branch.dilated[l]);
        fill(branch.pointwise[l]);
      }
    }
    fill(stage.classifier);
  }
  return model;
}

ForwardTrace forward_traced(const ModelState& model, const FeatureSequence& features) {
  const ModelConfig& config = model.config;
  if (features.dim() != config.input_dim) {
    throw Error("feature dimension " + std::to_string(features.dim()) +
                " does not match model input dimension " + std::to_string(config.input_dim));
  }
  if (features.length() < 1) throw Error("cannot run the model on an empty sequence");

  ForwardTrace trace;
  trace.input_ = features.frames;
  const Matrix* stage_input = &trace.input_;
  for (const auto& stage_layout : model.layout.stages) {
    ForwardTrace::Stage stage;
    for (const auto& branch_layout : stage_layout.branches) {
      ForwardTrace::Branch branch;
      branch.residual.push_back(conv_forward(model.params, branch_layout.input, *stage_input));
      for (std::size_t l = 0; l < branch_layout.dilated.size(); ++l) {
        const Matrix& x = branch.residual.back();
        Matrix pre = conv_forward(model.params, branch_layout.dilated[l], x);
        Matrix next = x + conv_forward(model.params, branch_layout.pointwise[l],
                                       pre.cwiseMax(0.0).eval());
        branch.activation.push_back(std::move(pre));
        branch.residual.push_back(std::move(next));
      }
      if (stage.branches.empty()) {
        stage.features = branch.residual.back();
      } else {
        stage.features += branch.residual.back();
      }
      stage.branches.push_back(std::move(branch));
    }
    trace.outputs_.probs.push_back(
        softmax_rows(conv_forward(model.params, stage_layout.classifier, stage.features)));
    trace.stages_.push_back(std::move(stage));
    stage_input = &trace.outputs_.probs.back();
  }
  trace.outputs_.penultimate = trace.stages_.back().features;
  return trace;
}

double ForwardTrace::relu_margin() const {
  double margin = std::numeric_limits<double>::infinity();
  for (const auto& stage : stages_) {
    for (const auto& branch : stage.branches) {
      for (const auto& pre : branch.activation) margin = std::min(margin, pre.cwiseAbs().minCoeff());
    }
  }
  return margin;
}

StageOutputs forward(const ModelState& model, const FeatureSequence& features) {
  return forward_traced(model, features).outputs();
}

Vector backward(const ModelState& model, const ForwardTrace& trace,
                std::span<const Matrix> prob_grads) {
  const auto& stages = model.layout.stages;
  if (prob_grads.size() != stages.size()) throw Error("need one probability gradient per stage");
  Vector grad = Vector::Zero(model.params.size());

  Matrix carry;  // gradient reaching this stage's probabilities from the next stage
  for (int s = static_cast<int>(stages.size()) - 1; s >= 0; --s) {
    const auto& stage_layout = stages[s];
    const auto& stage = trace.stages_[s];
    const Matrix& probs = trace.outputs_.probs[s];

    Matrix dprobs = prob_grads[s];
    if (carry.size() != 0) dprobs += carry;
    // Softmax Jacobian: dz = p * (dp - <dp, p>).
    const Eigen::VectorXd inner = (dprobs.array() * probs.array()).rowwise().sum();
    Matrix dlogits = probs.array() * (dprobs.colwise() - inner).array();

    Matrix dfeatures = Matrix::Zero(stage.features.rows(), stage.features.cols());
    conv_backward(model.params, stage_layout.classifier, stage.features, dlogits, grad,
                  &dfeatures);

    const Matrix& stage_input = s == 0 ? trace.input_ : trace.outputs_.probs[s - 1];
    Matrix dinput = Matrix::Zero(stage_input.rows(), stage_input.cols());
    for (std::size_t b = 0; b < stage_layout.branches.size(); ++b) {
      const auto& branch_layout = stage_layout.branches[b];
      const auto& branch = stage.branches[b];
      Matrix dres = dfeatures;
      for (int l = static_cast<int>(branch_layout.dilated.size()) - 1; l >= 0; --l) {
        const Matrix& pre = branch.activation[l];
        const Matrix relu = pre.cwiseMax(0.0);
        Matrix drelu = Matrix::Zero(pre.rows(), pre.cols());
        conv_backward(model.params, branch_layout.pointwise[l], relu, dres, grad, &drelu);
        drelu = (pre.array() > 0.0).select(drelu, 0.0);
        // dres already carries the identity path of the residual connection.
        conv_backward(model.params, branch_layout.dilated[l], branch.residual[l], drelu, grad,
                      &dres);
      }
      conv_backward(model.params, branch_layout.input, stage_input, dres, grad,
                    s == 0 ? nullptr : &dinput);
    }
    if (s > 0) carry = std::move(dinput);
  }
  return grad;
}

LossAndGrad loss_and_grad(const ModelState& model, const ForwardTrace& trace,
                          std::span<const int> target, FrameMask mask,
                          const TimestampSet* timestamps, const LossWeights& weights) {
  const auto& probs = trace.outputs().probs;
  if (mask) {
    for (int t : *mask) {
      if (t < 0 || t >= trace.length()) throw Error("mask frame " + std::to_string(t) + " out of range");
    }
  }
  LossAndGrad result;
  std::vector<Matrix> prob_grads;
  prob_grads.reserve(probs.size());
  for (std::size_t s = 0; s < probs.size(); ++s) {
    Matrix g = Matrix::Zero(probs[s].rows(), probs[s].cols());
    const double stage_loss = total_loss(probs[s], target, mask, timestamps, weights, &g);
    if (!std::isfinite(stage_loss)) {
      throw Error("non-finite loss at stage " + std::to_string(s + 1));
    }
    result.loss += stage_loss;
    prob_grads.push_back(std::move(g));
  }
  result.grad = backward(model, trace, prob_grads);
  return result;
}

LossAndGrad loss_and_grad(const ModelState& model, const FeatureSequence& features,
                          std::span<const int> target, FrameMask mask,
                          const TimestampSet* timestamps, const LossWeights& weights) {
  return loss_and_grad(model, forward_traced(model, features), target, mask, timestamps, weights);
}

void adam_step(ModelState& model, const Vector& grads, double lr, const AdamOptions& options) {
  if (grads.size() != model.params.size()) throw Error("gradient size does not match parameters");
  if (!grads.allFinite()) throw Error("non-finite gradient passed to adam_step");
  AdamState& adam = model.adam;
  ++adam.step;
  const double t = static_cast<double>(adam.step);
  const double correction1 = 1.0 - std::pow(options.beta1, t);
  const double correction2 = 1.0 - std::pow(options.beta2, t);
  adam.first_moment = options.beta1 * adam.first_moment + (1.0 - options.beta1) * grads;
  adam.second_moment =
      options.beta2 * adam.second_moment + (1.0 - options.beta2) * grads.cwiseProduct(grads);
  const Vector update = (adam.first_moment / correction1).array() /
                        ((adam.second_moment / correction2).array().sqrt() + options.epsilon);
  if (!update.allFinite()) throw Error("non-finite Adam update at step " + std::to_string(adam.step));
  model.params -= lr * update;
}

}  // namespace tsseg
