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

#include <numeric>
#include <random>

#include "oracles.hpp"
#include "tsseg/change.hpp"

namespace tsseg {
namespace {

Matrix column(std::initializer_list<double> values) {
  Matrix m(values.size(), 1);
  int i = 0;
  for (double v : values) m(i++, 0) = v;
  return m;
}

TEST(StampToStamp, SeparableStep) {
  EXPECT_EQ(s2s_boundary(column({0, 0, 0, 1, 1}), 0, 4), 2);
}

TEST(StampToStamp, AllEqualTiesGoLeft) {
  EXPECT_EQ(s2s_boundary(column({0.1, 0.1, 0.1, 0.1, 0.1}), 0, 4), 0);
  EXPECT_EQ(s2s_boundary(Matrix::Constant(7, 3, 0.3), 1, 6), 1);
}

TEST(StampToStamp, AdjacentTimestampsHaveOneCandidate) {
  std::mt19937_64 rng(1);
  EXPECT_EQ(s2s_boundary(oracle::random_matrix(rng, 5, 2), 2, 3), 2);
}

TEST(StampToStamp, RejectsBadRanges) {
  const Matrix h = Matrix::Zero(5, 1);
  EXPECT_THROW(s2s_boundary(h, 3, 3), Error);
  EXPECT_THROW(s2s_boundary(h, 4, 2), Error);
  EXPECT_THROW(s2s_boundary(h, 0, 5), Error);
}

TEST(StampToStamp, MatchesBruteForce) {
  std::mt19937_64 rng(12);
  const Matrix h = oracle::random_matrix(rng, 12, 3);
  EXPECT_EQ(s2s_boundary(h, 1, 10), oracle::s2s(h, 1, 10));
  for (int trial = 0; trial < 300; ++trial) {
    const int length = std::uniform_int_distribution<int>(2, 40)(rng);
    const int dim = std::uniform_int_distribution<int>(1, 4)(rng);
    const Matrix m = oracle::random_matrix(rng, length, dim);
    const int left = std::uniform_int_distribution<int>(0, length - 2)(rng);
    const int right = std::uniform_int_distribution<int>(left + 1, length - 1)(rng);
    ASSERT_EQ(s2s_boundary(m, left, right), oracle::s2s(m, left, right));
  }
}

TEST(StampToStamp, InvariantToFeaturePermutation) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const Matrix h = oracle::random_matrix(rng, 30, 4);
    std::vector<int> perm(4);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    Matrix permuted(30, 4);
    for (int d = 0; d < 4; ++d) permuted.col(d) = h.col(perm[d]);
    const TimestampSet ts = oracle::random_timestamps(rng, 30, 4, 3);
    EXPECT_EQ(fb_boundaries(h, ts, 30), fb_boundaries(permuted, ts, 30));
    EXPECT_EQ(s2s_boundaries(h, ts), s2s_boundaries(permuted, ts));
  }
}

TEST(StampToStampProb, StepAndTie) {
  Matrix probs = Matrix::Zero(5, 2);
  probs.col(0) << 1, 1, 1, 0, 0;
  probs.col(1) << 0, 0, 0, 1, 1;
  EXPECT_EQ(s2s_boundary_prob(probs, 0, 0, 1, 4), 2);
  EXPECT_EQ(s2s_boundary_prob(Matrix::Constant(5, 2, 0.5), 0, 0, 1, 4), 0);
  EXPECT_THROW(s2s_boundary_prob(probs, 0, 2, 1, 2), Error);
  EXPECT_THROW(s2s_boundary_prob(probs, 0, 0, 2, 4), Error);
}

TEST(StampToStampProb, MatchesBruteForce) {
  std::mt19937_64 rng(44);
  const Matrix p = oracle::random_probs(rng, 10, 4);
  EXPECT_EQ(s2s_boundary_prob(p, 1, 0, 3, 9), oracle::s2s_prob(p, 1, 0, 3, 9));
  for (int trial = 0; trial < 300; ++trial) {
    const int length = std::uniform_int_distribution<int>(2, 40)(rng);
    const int classes = std::uniform_int_distribution<int>(2, 5)(rng);
    const Matrix m = oracle::random_probs(rng, length, classes);
    const int left = std::uniform_int_distribution<int>(0, length - 2)(rng);
    const int right = std::uniform_int_distribution<int>(left + 1, length - 1)(rng);
    const int lc = std::uniform_int_distribution<int>(0, classes - 1)(rng);
    const int rc = std::uniform_int_distribution<int>(0, classes - 1)(rng);
    ASSERT_EQ(s2s_boundary_prob(m, lc, left, rc, right), oracle::s2s_prob(m, lc, left, rc, right));
  }
}

TEST(ForwardBackward, SymmetricSeparableCase) {
  const Matrix h = column({0, 0, 0, 0, 5, 5, 5, 5});
  const TimestampSet ts = {{0, 0}, {7, 1}};
  const auto est = fb_boundaries_detailed(h, ts, 8);
  EXPECT_EQ(est.forward, (BoundaryEstimate{3}));
  EXPECT_EQ(est.backward, (BoundaryEstimate{3}));
  EXPECT_EQ(est.combined, (BoundaryEstimate{3}));
}

TEST(ForwardBackward, AllEqualFeaturesCollapseOntoTimestamps) {
  const Matrix h = Matrix::Constant(20, 2, 0.7);
  const TimestampSet ts = {{2, 0}, {6, 1}, {11, 0}, {17, 2}};
  const auto est = fb_boundaries_detailed(h, ts, 20);
  EXPECT_EQ(est.forward, (BoundaryEstimate{2, 6, 11}));
  EXPECT_EQ(est.backward, (BoundaryEstimate{2, 6, 11}));
  EXPECT_EQ(est.combined, (BoundaryEstimate{2, 6, 11}));
}

TEST(ForwardBackward, SingleTimestampGivesNoBoundaries) {
  EXPECT_TRUE(fb_boundaries(Matrix::Zero(5, 1), {{2, 0}}, 5).empty());
}

TEST(ForwardBackward, PassesMatchRecursiveOracle) {
  std::mt19937_64 rng(30);
  {
    const Matrix h = oracle::random_matrix(rng, 30, 2);
    const TimestampSet ts = oracle::random_timestamps(rng, 30, 4, 3);
    const auto est = fb_boundaries_detailed(h, ts, 30);
    const auto ref = oracle::fb(h, ts, 30);
    EXPECT_EQ(est.forward, ref.fw);
    EXPECT_EQ(est.backward, ref.bw);
    EXPECT_EQ(est.combined, ref.combined);
  }
  for (int trial = 0; trial < 200; ++trial) {
    const int length = std::uniform_int_distribution<int>(2, 40)(rng);
    const int n = std::uniform_int_distribution<int>(2, std::min(5, length))(rng);
    const Matrix h = oracle::random_matrix(rng, length, std::uniform_int_distribution<int>(1, 4)(rng));
    const TimestampSet ts = oracle::random_timestamps(rng, length, n, 4);
    const auto est = fb_boundaries_detailed(h, ts, length);
    const auto ref = oracle::fb(h, ts, length);
    ASSERT_EQ(est.forward, ref.fw);
    ASSERT_EQ(est.backward, ref.bw);
    ASSERT_EQ(est.combined, ref.combined);
    for (std::size_t i = 0; i + 1 < ts.size(); ++i) {
      EXPECT_LE(ts[i].frame, est.combined[i]);
      EXPECT_LT(est.combined[i], ts[i + 1].frame);
      if (i > 0) EXPECT_LT(est.combined[i - 1], est.combined[i]);
    }
  }
}

TEST(ForwardBackward, RecoversNoiselessChangePoints) {
  SyntheticSpec spec;
  spec.sigma = 0.0;
  spec.videos = 10;
  spec.mean_length = 120;
  const SyntheticCorpus corpus = generate_synthetic(spec, 17);
  for (const auto& video : corpus.videos) {
    for (auto strategy : {SamplingStrategy::kRandom, SamplingStrategy::kStart,
                          SamplingStrategy::kCenter}) {
      const TimestampSet ts = sample_timestamps(video.labels, strategy, 5);
      const int length = video.features.length();
      const auto boundaries = fb_boundaries(video.features.frames, ts, length);
      EXPECT_EQ(labels_from_boundaries(ts, boundaries, length), video.labels);
    }
  }
}

TEST(Labels, ExpandsAroundBoundaries) {
  EXPECT_EQ(labels_from_boundaries({{1, 0}, {5, 1}}, {3}, 7), (FrameLabels{0, 0, 0, 0, 1, 1, 1}));
  EXPECT_EQ(labels_from_boundaries({{4, 0}}, {}, 6), FrameLabels(6, 0));
}

TEST(Labels, RejectsInconsistentBoundaries) {
  EXPECT_THROW(labels_from_boundaries({{1, 0}, {5, 1}}, {5}, 7), Error);
  EXPECT_THROW(labels_from_boundaries({{1, 0}, {5, 1}}, {0}, 7), Error);
  EXPECT_THROW(labels_from_boundaries({{1, 0}, {5, 1}}, {}, 7), Error);
}

TEST(Labels, PropertyAgreesWithTimestampsAndChangesOnlyAfterBoundaries) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 200; ++trial) {
    const int length = std::uniform_int_distribution<int>(1, 60)(rng);
    const int n = std::uniform_int_distribution<int>(1, std::min(6, length))(rng);
    const TimestampSet ts = oracle::random_timestamps(rng, length, n, 4);
    BoundaryEstimate b;
    for (std::size_t i = 0; i + 1 < ts.size(); ++i) {
      b.push_back(std::uniform_int_distribution<int>(ts[i].frame, ts[i + 1].frame - 1)(rng));
    }
    const FrameLabels labels = labels_from_boundaries(ts, b, length);
    ASSERT_EQ(static_cast<int>(labels.size()), length);
    for (const auto& t : ts) EXPECT_EQ(labels[t.frame], t.label);
    for (int t = 1; t < length; ++t) {
      if (labels[t] != labels[t - 1]) {
        EXPECT_NE(std::find(b.begin(), b.end(), t - 1), b.end());
      }
    }
  }
}

TEST(Uniform, Midpoints) {
  EXPECT_EQ(uniform_boundaries({{2, 0}, {8, 1}}, 10), (BoundaryEstimate{5}));
  EXPECT_EQ(uniform_boundaries({{3, 0}, {4, 1}}, 10), (BoundaryEstimate{3}));
  EXPECT_EQ(uniform_boundaries({{0, 0}, {10, 1}, {20, 0}}, 21), (BoundaryEstimate{5, 15}));
}

}  // namespace
}  // namespace tsseg
