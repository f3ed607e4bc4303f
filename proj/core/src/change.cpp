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

#include "tsseg/change.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace tsseg {
namespace {

void check_pair(int left, int right, int length) {
  if (left >= right) {
    throw Error("boundary search needs left < right, got " + std::to_string(left) + " >= " +
                std::to_string(right));
  }
  if (left < 0 || right >= length) {
    throw Error("boundary search range [" + std::to_string(left) + ", " + std::to_string(right) +
                "] outside [0, " + std::to_string(length) + ")");
  }
}

// Index of the first score within tolerance of the best one.
int first_near_best(const std::vector<double>& scores, bool minimise) {
  double best = scores.front();
  for (double s : scores) best = minimise ? std::min(best, s) : std::max(best, s);
  const double slack = kBoundaryTieTolerance * (1.0 + std::abs(best));
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (minimise ? scores[i] <= best + slack : scores[i] >= best - slack) {
      return static_cast<int>(i);
    }
  }
  return 0;
}

}  // namespace

int min_split_energy(const Matrix& features, int span_begin, int first_candidate,
                     int last_candidate, int span_end) {
  if (!(span_begin <= first_candidate && first_candidate <= last_candidate &&
        last_candidate < span_end && span_end < features.rows() && span_begin >= 0)) {
    throw Error("invalid split range");
  }
  const auto dim = features.cols();
  const int candidates = last_candidate - first_candidate + 1;

  // Row sums of the left run [span_begin, t] and right run [t + 1, span_end].
  Matrix left_sums(candidates, dim), right_sums(candidates, dim);
  Eigen::RowVectorXd running = features.middleRows(span_begin, first_candidate - span_begin + 1)
                                   .colwise()
                                   .sum();
  for (int c = 0; c < candidates; ++c) {
    if (c > 0) running += features.row(first_candidate + c);
    left_sums.row(c) = running;
  }
  running = features.middleRows(last_candidate + 1, span_end - last_candidate).colwise().sum();
  for (int c = candidates - 1; c >= 0; --c) {
    if (c < candidates - 1) running += features.row(first_candidate + c + 1);
    right_sums.row(c) = running;
  }

  std::vector<double> energy(candidates, 0.0);
  for (int c = 0; c < candidates; ++c) {
    const int split = first_candidate + c;
    const Eigen::RowVectorXd left_mean = left_sums.row(c) / double(split - span_begin + 1);
    const Eigen::RowVectorXd right_mean = right_sums.row(c) / double(span_end - split);
    double e = 0.0;
    for (int t = span_begin; t <= split; ++t) e += (features.row(t) - left_mean).norm();
    for (int t = split + 1; t <= span_end; ++t) e += (features.row(t) - right_mean).norm();
    energy[c] = e;
  }
  return first_candidate + first_near_best(energy, /*minimise=*/true);
}

int s2s_boundary(const Matrix& features, int left, int right) {
  check_pair(left, right, static_cast<int>(features.rows()));
  return min_split_energy(features, left, left, right - 1, right);
}

int s2s_boundary_prob(const Matrix& probs, int left_class, int left, int right_class, int right) {
  check_pair(left, right, static_cast<int>(probs.rows()));
  if (left_class < 0 || left_class >= probs.cols() || right_class < 0 ||
      right_class >= probs.cols()) {
    throw Error("boundary search class out of range");
  }
  const int candidates = right - left;
  std::vector<double> left_sum(candidates), right_sum(candidates);
  double running = 0.0;
  for (int c = 0; c < candidates; ++c) left_sum[c] = running += probs(left + c, left_class);
  running = 0.0;
  for (int c = candidates - 1; c >= 0; --c) right_sum[c] = running += probs(left + c + 1, right_class);

  std::vector<double> score(candidates);
  for (int c = 0; c < candidates; ++c) {
    score[c] = left_sum[c] / (c + 1) + right_sum[c] / (candidates - c);
  }
  return left + first_near_best(score, /*minimise=*/false);
}

ForwardBackwardEstimate fb_boundaries_detailed(const Matrix& features,
                                               const TimestampSet& timestamps, int length) {
  if (features.rows() != length) throw Error("feature length does not match video length");
  if (timestamps.empty()) throw Error("timestamp set is empty");
  validate_timestamps(timestamps, length, std::numeric_limits<int>::max());
  ForwardBackwardEstimate est;
  const int gaps = static_cast<int>(timestamps.size()) - 1;
  if (gaps < 1) return est;

  est.forward.resize(gaps);
  for (int i = 0; i < gaps; ++i) {
    const int begin = i == 0 ? 0 : est.forward[i - 1] + 1;
    const int right = timestamps[i + 1].frame;
    est.forward[i] = min_split_energy(features, begin, timestamps[i].frame, right - 1, right);
  }
  est.backward.resize(gaps);
  for (int i = gaps - 1; i >= 0; --i) {
    const int end = i == gaps - 1 ? length - 1 : est.backward[i + 1];
    const int left = timestamps[i].frame;
    est.backward[i] = min_split_energy(features, left, left, timestamps[i + 1].frame - 1, end);
  }
  est.combined.resize(gaps);
  for (int i = 0; i < gaps; ++i) est.combined[i] = (est.forward[i] + est.backward[i]) / 2;
  return est;
}

BoundaryEstimate fb_boundaries(const Matrix& features, const TimestampSet& timestamps,
                               int length) {
  return fb_boundaries_detailed(features, timestamps, length).combined;
}

BoundaryEstimate s2s_boundaries(const Matrix& features, const TimestampSet& timestamps) {
  BoundaryEstimate out;
  for (std::size_t i = 0; i + 1 < timestamps.size(); ++i) {
    out.push_back(s2s_boundary(features, timestamps[i].frame, timestamps[i + 1].frame));
  }
  return out;
}

BoundaryEstimate s2s_prob_boundaries(const Matrix& probs, const TimestampSet& timestamps) {
  BoundaryEstimate out;
  for (std::size_t i = 0; i + 1 < timestamps.size(); ++i) {
    out.push_back(s2s_boundary_prob(probs, timestamps[i].label, timestamps[i].frame,
                                    timestamps[i + 1].label, timestamps[i + 1].frame));
  }
  return out;
}

BoundaryEstimate uniform_boundaries(const TimestampSet& timestamps, int length) {
  if (timestamps.empty()) throw Error("timestamp set is empty");
  validate_timestamps(timestamps, length, std::numeric_limits<int>::max());
  BoundaryEstimate out;
  for (std::size_t i = 0; i + 1 < timestamps.size(); ++i) {
    out.push_back((timestamps[i].frame + timestamps[i + 1].frame) / 2);
  }
  return out;
}

FrameLabels labels_from_boundaries(const TimestampSet& timestamps,
                                   const BoundaryEstimate& boundaries, int length) {
  if (timestamps.empty()) throw Error("timestamp set is empty");
  validate_timestamps(timestamps, length, std::numeric_limits<int>::max());
  if (boundaries.size() + 1 != timestamps.size()) {
    throw Error("expected " + std::to_string(timestamps.size() - 1) + " boundaries, got " +
                std::to_string(boundaries.size()));
  }
  for (std::size_t i = 0; i < boundaries.size(); ++i) {
    if (boundaries[i] < timestamps[i].frame || boundaries[i] >= timestamps[i + 1].frame) {
      throw Error("boundary " + std::to_string(i) + " at frame " + std::to_string(boundaries[i]) +
                  " is not between its timestamps");
    }
  }
  FrameLabels labels(length);
  int start = 0;
  for (std::size_t i = 0; i < timestamps.size(); ++i) {
    const int end = i < boundaries.size() ? boundaries[i] + 1 : length;
    std::fill(labels.begin() + start, labels.begin() + end, timestamps[i].label);
    start = end;
  }
  return labels;
}

Matrix l2_normalize_rows(const Matrix& features) {
  Matrix out = features;
  for (Eigen::Index t = 0; t < out.rows(); ++t) {
    const double norm = out.row(t).norm();
    if (norm > 0.0) out.row(t) /= norm;
  }
  return out;
}

}  // namespace tsseg
