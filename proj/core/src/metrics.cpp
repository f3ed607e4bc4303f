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

#include "tsseg/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <vector>

namespace tsseg {
namespace {

void check_lengths(std::span<const int> pred, std::span<const int> gt) {
  if (pred.size() != gt.size()) {
    throw Error("prediction has " + std::to_string(pred.size()) + " frames, ground truth " +
                std::to_string(gt.size()));
  }
  if (gt.empty()) throw Error("cannot score an empty sequence");
}

int levenshtein(const SegmentList& a, const SegmentList& b) {
  std::vector<int> row(b.size() + 1), next(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = static_cast<int>(j);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    next[0] = static_cast<int>(i);
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const int substitute = row[j - 1] + (a[i - 1].label == b[j - 1].label ? 0 : 1);
      next[j] = std::min({row[j] + 1, next[j - 1] + 1, substitute});
    }
    std::swap(row, next);
  }
  return row[b.size()];
}

}  // namespace

double frame_accuracy(std::span<const int> pred, std::span<const int> gt) {
  check_lengths(pred, gt);
  long correct = 0;
  for (std::size_t t = 0; t < gt.size(); ++t) correct += pred[t] == gt[t];
  return 100.0 * static_cast<double>(correct) / static_cast<double>(gt.size());
}

double edit_score(std::span<const int> pred, std::span<const int> gt) {
  const SegmentList p = segments_from_labels(pred);
  const SegmentList g = segments_from_labels(gt);
  const double norm = static_cast<double>(std::max(p.size(), g.size()));
  return 100.0 * (1.0 - levenshtein(p, g) / norm);
}

SegmentCounts segment_counts(std::span<const int> pred, std::span<const int> gt, double k) {
  if (!(k > 0.0 && k < 100.0)) throw Error("overlap threshold must lie in (0, 100)");
  const SegmentList p = segments_from_labels(pred);
  const SegmentList g = segments_from_labels(gt);
  const double threshold = k / 100.0;
  std::vector<bool> claimed(g.size(), false);
  SegmentCounts counts;
  for (const Segment& ps : p) {
    double best = -1.0;
    std::size_t best_index = 0;
    for (std::size_t j = 0; j < g.size(); ++j) {
      if (g[j].label != ps.label || claimed[j]) continue;
      const int inter = std::min(ps.end, g[j].end) - std::max(ps.start, g[j].start);
      const int uni = std::max(ps.end, g[j].end) - std::min(ps.start, g[j].start);
      const double iou = inter > 0 ? static_cast<double>(inter) / uni : 0.0;
      if (iou > best) {
        best = iou;
        best_index = j;
      }
    }
    if (best >= threshold) {
      claimed[best_index] = true;
      ++counts.tp;
    } else {
      ++counts.fp;
    }
  }
  counts.fn = static_cast<long>(std::count(claimed.begin(), claimed.end(), false));
  return counts;
}

double f1_from_counts(const SegmentCounts& c) {
  const double precision = c.tp + c.fp > 0 ? static_cast<double>(c.tp) / (c.tp + c.fp) : 0.0;
  const double recall = c.tp + c.fn > 0 ? static_cast<double>(c.tp) / (c.tp + c.fn) : 0.0;
  if (precision + recall == 0.0) return 0.0;
  return 200.0 * precision * recall / (precision + recall);
}

double f1_at(std::span<const int> pred, std::span<const int> gt, double k) {
  return f1_from_counts(segment_counts(pred, gt, k));
}

MetricsReport report(std::span<const int> pred, std::span<const int> gt) {
  MetricsAccumulator acc;
  acc.add(pred, gt);
  return acc.result();
}

void MetricsAccumulator::add(std::span<const int> pred, std::span<const int> gt) {
  check_lengths(pred, gt);
  for (std::size_t t = 0; t < gt.size(); ++t) correct_ += pred[t] == gt[t];
  frames_ += static_cast<long>(gt.size());
  edit_sum_ += edit_score(pred, gt);
  for (std::size_t i = 0; i < kOverlapThresholds.size(); ++i) {
    const SegmentCounts c = segment_counts(pred, gt, kOverlapThresholds[i]);
    counts_[i].tp += c.tp;
    counts_[i].fp += c.fp;
    counts_[i].fn += c.fn;
  }
  ++videos_;
}

MetricsReport MetricsAccumulator::result() const {
  if (videos_ == 0) throw Error("no videos were scored");
  MetricsReport r;
  r.acc = 100.0 * static_cast<double>(correct_) / static_cast<double>(frames_);
  r.edit = edit_sum_ / videos_;
  r.f1_10 = f1_from_counts(counts_[0]);
  r.f1_25 = f1_from_counts(counts_[1]);
  r.f1_50 = f1_from_counts(counts_[2]);
  return r;
}

std::string format_report(const MetricsReport& r) {
  char buf[128];
  std::snprintf(buf, sizeof(buf), "%.1f\t%.1f\t%.1f\t%.1f\t%.1f", r.acc, r.edit, r.f1_10, r.f1_25,
                r.f1_50);
  return buf;
}

std::string report_header() { return "acc\tedit\tf1_10\tf1_25\tf1_50"; }

}  // namespace tsseg
