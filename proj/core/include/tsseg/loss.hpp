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

#include <optional>
#include <span>

#include "tsseg/data.hpp"
#include "tsseg/types.hpp"

namespace tsseg {

// Every log of a probability is taken as log(max(p, kProbFloor)).
inline constexpr double kProbFloor = 1e-8;

struct LossWeights {
  double alpha = 0.15;   // smoothing
  double beta = 0.075;   // confidence
  double tau = 4.0;      // truncation of the log-probability step
  void validate() const;
};

// Frames that receive the classification loss. std::nullopt means "all frames".
using FrameMask = std::optional<std::span<const int>>;

// All losses take a T x C matrix of probabilities. When `grad` is non-null it
// must be T x C; `scale` times the derivative with respect to the
// probabilities is added to it.

// Mean cross entropy over the masked frames (0 for an empty mask).
double cls_loss(const Matrix& probs, std::span<const int> target, FrameMask mask = std::nullopt,
                Matrix* grad = nullptr, double scale = 1.0);

// Truncated squared log-probability differences between neighbouring frames,
// divided by T*C. Differentiable everywhere except at the truncation point.
double tmse_loss(const Matrix& probs, double tau, Matrix* grad = nullptr, double scale = 1.0);

// Penalises growth of the annotated class's log-probability when moving away
// from its timestamp. For timestamp i the window covers the frame steps
// (t-1, t) with t in (t_{i-1}, t_{i+1}], where t_0 = t_1 and t_{N+1} = t_N; a
// step right of t_i (t > t_i) is penalised when the probability rises, a step
// left of it (t <= t_i) when the probability rises towards t-1. The sum is
// divided by max(1, 2 (t_N - t_1)), the number of steps visited.
double conf_loss(const Matrix& probs, const TimestampSet& timestamps, Matrix* grad = nullptr,
                 double scale = 1.0);

// Count of window steps where conf_loss would be positive.
int count_monotonicity_violations(const Matrix& probs, const TimestampSet& timestamps);

// cls + alpha * tmse + beta * conf. The confidence term is skipped when
// `timestamps` is null; an empty `target` skips the classification term.
double total_loss(const Matrix& probs, std::span<const int> target, FrameMask mask,
                  const TimestampSet* timestamps, const LossWeights& weights,
                  Matrix* grad = nullptr, double scale = 1.0);

}  // namespace tsseg
