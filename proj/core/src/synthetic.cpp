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

#include <cmath>
#include <cstdio>
#include <random>

#include "tsseg/data.hpp"

namespace tsseg {
namespace {

void check_spec(const SyntheticSpec& spec) {
  if (spec.num_classes < 2) {
    throw Error("synthetic corpus needs at least 2 classes so neighbouring segments differ");
  }
  if (spec.videos < 1) throw Error("synthetic corpus needs at least one video");
  if (spec.dim < 1) throw Error("feature dimension must be >= 1");
  if (!(spec.sigma >= 0.0) || !std::isfinite(spec.sigma)) throw Error("sigma must be >= 0");
  if (!(spec.separation > 0.0)) throw Error("class separation must be > 0");
  if (!(spec.noise_correlation >= 0.0 && spec.noise_correlation < 1.0)) {
    throw Error("noise correlation must lie in [0, 1)");
  }
  if (spec.min_segments < 1 || spec.max_segments < spec.min_segments) {
    throw Error("invalid segment-count range [" + std::to_string(spec.min_segments) + ", " +
                std::to_string(spec.max_segments) + "]");
  }
  if (spec.mean_length < 1) throw Error("mean length must be >= 1");
  if (!(spec.length_jitter >= 0.0 && spec.length_jitter < 1.0)) {
    throw Error("length jitter must lie in [0, 1)");
  }
}

Matrix make_class_means(const SyntheticSpec& spec, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix means(spec.num_classes, spec.dim);
  for (Eigen::Index i = 0; i < means.size(); ++i) means.data()[i] = gauss(rng);

  if (spec.dim >= spec.num_classes) {
    // Orthonormal rows scaled so every pair sits exactly `separation` apart.
    for (int c = 0; c < spec.num_classes; ++c) {
      for (int k = 0; k < c; ++k) means.row(c) -= means.row(c).dot(means.row(k)) * means.row(k);
      means.row(c).normalize();
    }
    means *= spec.separation / std::sqrt(2.0);
  } else {
    means *= spec.separation / std::sqrt(2.0 * spec.dim);
  }
  return means;
}

}  // namespace

SyntheticCorpus generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed) {
  check_spec(spec);
  std::mt19937_64 rng(seed);
  SyntheticCorpus corpus;
  corpus.class_means = make_class_means(spec, rng);

  std::uniform_int_distribution<int> segment_count(spec.min_segments, spec.max_segments);
  std::uniform_real_distribution<double> length_scale(1.0 - spec.length_jitter,
                                                      1.0 + spec.length_jitter);
  std::uniform_real_distribution<double> weight(0.5, 1.5);
  std::normal_distribution<double> noise(0.0, 1.0);

  for (int v = 0; v < spec.videos; ++v) {
    const int segments = segment_count(rng);
    const int length =
        std::max(segments, static_cast<int>(std::lround(spec.mean_length * length_scale(rng))));

    std::vector<double> weights(segments);
    double total = 0.0;
    for (auto& w : weights) total += (w = weight(rng));
    std::vector<int> lengths(segments, 1);
    int assigned = segments;
    for (int s = 0; s < segments; ++s) {
      const int extra = static_cast<int>(std::floor((length - segments) * weights[s] / total));
      lengths[s] += extra;
      assigned += extra;
    }
    for (int s = 0; assigned < length; s = (s + 1) % segments, ++assigned) ++lengths[s];

    Video video;
    char name[32];
    std::snprintf(name, sizeof(name), "video_%03d", v);
    video.name = name;
    video.labels.reserve(length);
    int previous = -1;
    for (int s = 0; s < segments; ++s) {
      int label;
      if (previous < 0) {
        label = std::uniform_int_distribution<int>(0, spec.num_classes - 1)(rng);
      } else {
        label = std::uniform_int_distribution<int>(0, spec.num_classes - 2)(rng);
        if (label >= previous) ++label;
      }
      video.labels.insert(video.labels.end(), lengths[s], label);
      previous = label;
    }

    video.features.frames.resize(length, spec.dim);
    const double rho = spec.noise_correlation;
    const double innovation = std::sqrt(1.0 - rho * rho);
    Eigen::RowVectorXd state(spec.dim);
    for (int d = 0; d < spec.dim; ++d) state(d) = noise(rng);
    for (int t = 0; t < length; ++t) {
      if (t > 0) {
        for (int d = 0; d < spec.dim; ++d) state(d) = rho * state(d) + innovation * noise(rng);
      }
      video.features.frames.row(t) = corpus.class_means.row(video.labels[t]) + spec.sigma * state;
    }
    corpus.videos.push_back(std::move(video));
  }
  return corpus;
}

}  // namespace tsseg
