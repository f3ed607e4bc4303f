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

#include "tsseg/loss.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace tsseg {
namespace {

double clamped_log(double p) { return std::log(std::max(p, kProbFloor)); }

// d/dp of clamped_log.
double clamped_log_slope(double p) { return p > kProbFloor ? 1.0 / p : 0.0; }

void check_grad_shape(const Matrix& probs, const Matrix* grad) {
  if (grad && (grad->rows() != probs.rows() || grad->cols() != probs.cols())) {
    throw Error("gradient buffer shape does not match probabilities");
  }
}

// Visits every penalised step of the confidence loss as (t, class, sign): the
// hinge argument is sign * (log p[t][class] - log p[t-1][class]).
template <typename Fn>
void for_each_conf_step(const TimestampSet& timestamps, Fn&& fn) {
  const int n = static_cast<int>(timestamps.size());
  for (int i = 0; i < n; ++i) {
    const int here = timestamps[i].frame;
    const int lo = timestamps[std::max(i - 1, 0)].frame;
    const int hi = timestamps[std::min(i + 1, n - 1)].frame;
    const int label = timestamps[i].label;
    for (int t = std::max(lo + 1, 1); t <= hi; ++t) fn(t, label, t > here ? 1.0 : -1.0);
  }
}

}  // namespace

void LossWeights::validate() const {
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw Error("alpha must be finite and >= 0");
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw Error("beta must be finite and >= 0");
  if (!(tau > 0.0) || !std::isfinite(tau)) throw Error("tau must be finite and > 0");
}

double cls_loss(const Matrix& probs, std::span<const int> target, FrameMask mask, Matrix* grad,
                double scale) {
  check_grad_shape(probs, grad);
  const auto length = probs.rows();
  const auto classes = probs.cols();
  if (static_cast<Eigen::Index>(target.size()) != length) {
    throw Error("target length " + std::to_string(target.size()) + " != " +
                std::to_string(length) + " frames");
  }
  auto term = [&](int t, double weight) {
    const int y = target[t];
    if (y < 0 || y >= classes) throw Error("target class " + std::to_string(y) + " out of range");
    const double p = probs(t, y);
    if (grad) (*grad)(t, y) -= scale * weight * clamped_log_slope(p);
    return -clamped_log(p);
  };

  double sum = 0.0;
  if (!mask) {
    if (length == 0) return 0.0;
    const double weight = 1.0 / static_cast<double>(length);
    for (int t = 0; t < length; ++t) sum += term(t, weight);
    return sum * weight;
  }
  if (mask->empty()) return 0.0;
  const double weight = 1.0 / static_cast<double>(mask->size());
  for (int t : *mask) {
    if (t < 0 || t >= length) throw Error("mask frame " + std::to_string(t) + " out of range");
    sum += term(t, weight);
  }
  return sum * weight;
}

double tmse_loss(const Matrix& probs, double tau, Matrix* grad, double scale) {
  check_grad_shape(probs, grad);
  const auto length = probs.rows();
  const auto classes = probs.cols();
  if (length < 2) return 0.0;
  const double norm = 1.0 / static_cast<double>(length * classes);
  double sum = 0.0;
  for (Eigen::Index t = 1; t < length; ++t) {
    for (Eigen::Index a = 0; a < classes; ++a) {
      const double diff = clamped_log(probs(t, a)) - clamped_log(probs(t - 1, a));
      if (std::abs(diff) >= tau) {
        sum += tau * tau;
        continue;
      }
      sum += diff * diff;
      if (grad) {
        const double g = scale * norm * 2.0 * diff;
        (*grad)(t, a) += g * clamped_log_slope(probs(t, a));
        (*grad)(t - 1, a) -= g * clamped_log_slope(probs(t - 1, a));
      }
    }
  }
  return sum * norm;
}

double conf_loss(const Matrix& probs, const TimestampSet& timestamps, Matrix* grad,
                 double scale) {
  check_grad_shape(probs, grad);
  if (timestamps.empty()) return 0.0;
  validate_timestamps(timestamps, static_cast<int>(probs.rows()), static_cast<int>(probs.cols()));
  const double norm =
      1.0 / std::max(1.0, 2.0 * (timestamps.back().frame - timestamps.front().frame));
  double sum = 0.0;
  for_each_conf_step(timestamps, [&](int t, int a, double sign) {
    const double rise = sign * (clamped_log(probs(t, a)) - clamped_log(probs(t - 1, a)));
    if (rise <= 0.0) return;
    sum += rise;
    if (grad) {
      const double g = scale * norm * sign;
      (*grad)(t, a) += g * clamped_log_slope(probs(t, a));
      (*grad)(t - 1, a) -= g * clamped_log_slope(probs(t - 1, a));
    }
  });
  return sum * norm;
}

int count_monotonicity_violations(const Matrix& probs, const TimestampSet& timestamps) {
  if (timestamps.empty()) return 0;
  validate_timestamps(timestamps, static_cast<int>(probs.rows()), static_cast<int>(probs.cols()));
  int count = 0;
  for_each_conf_step(timestamps, [&](int t, int a, double sign) {
    if (sign * (clamped_log(probs(t, a)) - clamped_log(probs(t - 1, a))) > 0.0) ++count;
  });
  return count;
}

double total_loss(const Matrix& probs, std::span<const int> target, FrameMask mask,
                  const TimestampSet* timestamps, const LossWeights& weights, Matrix* grad,
                  double scale) {
  weights.validate();
  double loss = 0.0;
  if (!target.empty()) loss += cls_loss(probs, target, mask, grad, scale);
  if (weights.alpha != 0.0) {
    loss += weights.alpha * tmse_loss(probs, weights.tau, grad, scale * weights.alpha);
  }
  if (timestamps && weights.beta != 0.0) {
    loss += weights.beta * conf_loss(probs, *timestamps, grad, scale * weights.beta);
  }
  return loss;
}

}  // namespace tsseg
