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
#include <span>
#include <string>

#include "tsseg/data.hpp"

namespace tsseg {

struct MetricsReport {
  double acc = 0.0;
  double edit = 0.0;
  double f1_10 = 0.0;
  double f1_25 = 0.0;
  double f1_50 = 0.0;
};

struct SegmentCounts {
  long tp = 0;
  long fp = 0;
  long fn = 0;
};

inline constexpr std::array<double, 3> kOverlapThresholds = {10.0, 25.0, 50.0};

// Percentage of frames with pred == gt.
double frame_accuracy(std::span<const int> pred, std::span<const int> gt);

// 100 * (1 - Levenshtein(segment classes) / max(#segments)).
double edit_score(std::span<const int> pred, std::span<const int> gt);

// Each predicted segment, in order, claims the unclaimed same-class ground
// truth segment of highest IoU; it is a true positive when that IoU reaches
// k / 100 and the claimed segment was still free, otherwise a false positive.
SegmentCounts segment_counts(std::span<const int> pred, std::span<const int> gt, double k);
double f1_from_counts(const SegmentCounts& counts);
double f1_at(std::span<const int> pred, std::span<const int> gt, double k);

MetricsReport report(std::span<const int> pred, std::span<const int> gt);

// Corpus aggregation: accuracy over pooled frames, edit averaged over videos,
// F1 from TP/FP/FN pooled over videos.
class MetricsAccumulator {
 public:
  void add(std::span<const int> pred, std::span<const int> gt);
  MetricsReport result() const;
  int videos() const { return videos_; }

 private:
  long frames_ = 0;
  long correct_ = 0;
  double edit_sum_ = 0.0;
  int videos_ = 0;
  std::array<SegmentCounts, kOverlapThresholds.size()> counts_{};
};

// "acc\tedit\tf1_10\tf1_25\tf1_50" with one decimal.
std::string format_report(const MetricsReport& report);
std::string report_header();

}  // namespace tsseg
