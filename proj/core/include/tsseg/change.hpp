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

#include <vector>

#include "tsseg/data.hpp"
#include "tsseg/types.hpp"

namespace tsseg {

// boundaries[i] is the last frame carrying the label of timestamp i, so
// timestamps[i].frame <= boundaries[i] < timestamps[i + 1].frame.
using BoundaryEstimate = std::vector<int>;

// Candidates whose score is within this relative distance of the optimum
// count as tied; ties go to the smallest frame.
inline constexpr double kBoundaryTieTolerance = 1e-10;

// Splits the frames [span_begin, span_end] of H into a left run ending at t
// and a right run starting at t + 1, for t in [first_candidate,
// last_candidate], and returns the t minimising the summed Euclidean distance
// of every frame to the mean of its run.
int min_split_energy(const Matrix& features, int span_begin, int first_candidate,
                     int last_candidate, int span_end);

// Split between two consecutive timestamps at `left` and `right`, considering
// only the frames between them (inclusive). Returns t in [left, right).
int s2s_boundary(const Matrix& features, int left, int right);

// Returns t in [left, right) maximising mean(probs[left..t][left_class]) +
// mean(probs[t+1..right][right_class]).
int s2s_boundary_prob(const Matrix& probs, int left_class, int left, int right_class, int right);

struct ForwardBackwardEstimate {
  BoundaryEstimate forward;
  BoundaryEstimate backward;
  BoundaryEstimate combined;  // floor of the average of the two passes
};

// The forward pass grows each left run back to the previous forward estimate
// (the video start for the first gap); the backward pass grows each right run
// up to the next backward estimate (the last frame for the final gap).
ForwardBackwardEstimate fb_boundaries_detailed(const Matrix& features,
                                               const TimestampSet& timestamps, int length);
BoundaryEstimate fb_boundaries(const Matrix& features, const TimestampSet& timestamps, int length);

// s2s_boundary / s2s_boundary_prob applied to every consecutive pair.
BoundaryEstimate s2s_boundaries(const Matrix& features, const TimestampSet& timestamps);
BoundaryEstimate s2s_prob_boundaries(const Matrix& probs, const TimestampSet& timestamps);

// Midpoint floor((t_i + t_{i+1}) / 2) of every consecutive pair.
BoundaryEstimate uniform_boundaries(const TimestampSet& timestamps, int length);

// Frames up to boundaries[0] take the first timestamp's class, frames after
// boundaries[i-1] up to boundaries[i] the class of timestamp i, and the rest
// the last timestamp's class.
FrameLabels labels_from_boundaries(const TimestampSet& timestamps,
                                   const BoundaryEstimate& boundaries, int length);

Matrix l2_normalize_rows(const Matrix& features);

}  // namespace tsseg
