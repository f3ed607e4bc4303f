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

#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "tsseg/metrics.hpp"

namespace tsseg {
namespace {

using Labels = std::vector<int>;

TEST(Accuracy, Examples) {
  EXPECT_EQ(frame_accuracy(Labels{0, 1, 2}, Labels{0, 1, 2}), 100.0);
  EXPECT_EQ(frame_accuracy(Labels{0, 0}, Labels{1, 1}), 0.0);
  EXPECT_EQ(frame_accuracy(Labels{0, 0, 1, 1}, Labels{0, 1, 1, 1}), 75.0);
  EXPECT_THROW(frame_accuracy(Labels{0}, Labels{0, 1}), Error);
}

TEST(Edit, Examples) {
  EXPECT_EQ(edit_score(Labels{0, 0, 1}, Labels{0, 0, 1}), 100.0);
  EXPECT_EQ(edit_score(Labels{0, 0, 0, 0}, Labels{0, 0, 1, 1}), 50.0);
  // Segment order matters, lengths do not.
  EXPECT_EQ(edit_score(Labels{0, 1, 1, 1, 1}, Labels{0, 0, 0, 0, 1}), 100.0);
  EXPECT_EQ(edit_score(Labels{1, 0}, Labels{0, 1}), 0.0);
}

TEST(F1, HandComputedExample) {
  Labels pred(10, 0);
  Labels gt = {0, 0, 0, 0, 1, 1, 1, 1, 1, 1};
  EXPECT_NEAR(f1_at(pred, gt, 10), 200.0 / 3.0, 1e-12);
  EXPECT_NEAR(f1_at(pred, gt, 25), 200.0 / 3.0, 1e-12);
  EXPECT_EQ(f1_at(pred, gt, 50), 0.0);
  const auto c = segment_counts(pred, gt, 50);
  EXPECT_EQ(c.tp, 0);
  EXPECT_EQ(c.fp, 1);
  EXPECT_EQ(c.fn, 2);
}

TEST(F1, NoSharedClassesScoresZero) {
  EXPECT_EQ(f1_at(Labels{0, 0, 1}, Labels{2, 2, 3}, 10), 0.0);
  EXPECT_EQ(f1_from_counts({}), 0.0);
}

TEST(F1, AsymmetricOnWitness) {
  // Greedy matching lets the first prediction claim the segment the second needs.
  const Labels a = {0, 0, 0, 0, 1, 0};
  const Labels b = {0, 1, 0, 0, 0, 0};
  EXPECT_NEAR(f1_at(a, b, 10), 100.0 / 3.0, 1e-12);
  EXPECT_NEAR(f1_at(b, a, 10), 200.0 / 3.0, 1e-12);
}

TEST(F1, RejectsBadThreshold) {
  EXPECT_THROW(f1_at(Labels{0}, Labels{0}, 0.0), Error);
  EXPECT_THROW(f1_at(Labels{0}, Labels{0}, 100.0), Error);
}

TEST(Metrics, MatchIndependentOracles) {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 200; ++trial) {
    const int length = std::uniform_int_distribution<int>(1, 80)(rng);
    const int classes = std::uniform_int_distribution<int>(2, 5)(rng);
    const Labels gt = oracle::random_labels(rng, length, classes, 12);
    const Labels pred = oracle::random_labels(rng, length, classes, 12);
    EXPECT_EQ(edit_score(pred, gt), oracle::edit(pred, gt));
    double previous = 101.0;
    for (double k : {5.0, 10.0, 25.0, 33.3, 50.0, 75.0, 90.0}) {
      const auto c = segment_counts(pred, gt, k);
      const auto o = oracle::match(pred, gt, k);
      EXPECT_EQ(c.tp, o.tp);
      EXPECT_EQ(c.fp, o.fp);
      EXPECT_EQ(c.fn, o.fn);
      const double f = f1_at(pred, gt, k);
      EXPECT_EQ(f, oracle::f1(o));
      EXPECT_LE(f, previous);
      previous = f;
    }
  }
}

TEST(Metrics, Properties) {
  std::mt19937_64 rng(78);
  for (int trial = 0; trial < 100; ++trial) {
    const int length = std::uniform_int_distribution<int>(1, 60)(rng);
    const Labels a = oracle::random_labels(rng, length, 4, 10);
    const Labels b = oracle::random_labels(rng, length, 4, 10);
    const auto self = report(a, a);
    for (double v : {self.acc, self.edit, self.f1_10, self.f1_25, self.f1_50}) EXPECT_EQ(v, 100.0);
    EXPECT_EQ(frame_accuracy(a, b), frame_accuracy(b, a));
    EXPECT_EQ(edit_score(a, b), edit_score(b, a));

    Labels perm = {0, 1, 2, 3};
    std::shuffle(perm.begin(), perm.end(), rng);
    Labels pa = a, pb = b;
    for (auto& x : pa) x = perm[x];
    for (auto& x : pb) x = perm[x];
    const auto r = report(a, b);
    const auto pr = report(pa, pb);
    EXPECT_EQ(r.acc, pr.acc);
    EXPECT_EQ(r.edit, pr.edit);
    EXPECT_EQ(r.f1_10, pr.f1_10);
    EXPECT_EQ(r.f1_50, pr.f1_50);
    for (double v : {r.acc, r.edit, r.f1_10, r.f1_25, r.f1_50}) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 100.0);
    }
  }
}

TEST(Accumulator, PoolsFramesAndCounts) {
  MetricsAccumulator acc;
  const Labels perfect = {0, 0, 1, 1, 1, 1};
  const Labels wrong_pred = {2, 2};
  const Labels wrong_gt = {1, 1};
  acc.add(perfect, perfect);
  acc.add(wrong_pred, wrong_gt);
  const auto r = acc.result();
  EXPECT_EQ(acc.videos(), 2);
  EXPECT_EQ(r.acc, 75.0);
  EXPECT_EQ(r.edit, 50.0);
  // TP 2, FP 1, FN 1 pooled.
  EXPECT_NEAR(r.f1_50, 200.0 * (2.0 / 3) * (2.0 / 3) / (4.0 / 3), 1e-12);
}

TEST(Accumulator, MatchesOraclesAndIsOrderFree) {
  std::mt19937_64 rng(79);
  std::vector<std::pair<Labels, Labels>> corpus;
  for (int v = 0; v < 12; ++v) {
    const int length = std::uniform_int_distribution<int>(5, 50)(rng);
    corpus.emplace_back(oracle::random_labels(rng, length, 3, 9), oracle::random_labels(rng, length, 3, 9));
  }
  MetricsAccumulator forward_order, reverse_order;
  long frames = 0, correct = 0;
  double edits = 0.0;
  oracle::Counts pooled;
  for (const auto& [p, g] : corpus) {
    forward_order.add(p, g);
    frames += static_cast<long>(p.size());
    for (std::size_t t = 0; t < p.size(); ++t) correct += p[t] == g[t];
    edits += oracle::edit(p, g);
    const auto c = oracle::match(p, g, 25);
    pooled.tp += c.tp;
    pooled.fp += c.fp;
    pooled.fn += c.fn;
  }
  for (auto it = corpus.rbegin(); it != corpus.rend(); ++it) reverse_order.add(it->first, it->second);
  const auto r = forward_order.result();
  EXPECT_NEAR(r.acc, 100.0 * correct / frames, 1e-12);
  EXPECT_NEAR(r.edit, edits / corpus.size(), 1e-12);
  EXPECT_NEAR(r.f1_25, oracle::f1(pooled), 1e-12);
  EXPECT_EQ(format_report(r), format_report(reverse_order.result()));
}

TEST(Format, TabSeparatedOneDecimal) {
  MetricsReport r{100.0, 66.666, 50.04, 0.0, 12.35};
  EXPECT_EQ(format_report(r), "100.0\t66.7\t50.0\t0.0\t12.3");
  EXPECT_EQ(report_header(), "acc\tedit\tf1_10\tf1_25\tf1_50");
}

}  // namespace
}  // namespace tsseg
