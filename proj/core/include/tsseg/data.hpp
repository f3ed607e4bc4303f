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

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "tsseg/types.hpp"

namespace tsseg {

// Ordered action names; the position of a name is its class index.
class ActionVocab {
 public:
  ActionVocab() = default;
  // Throws Error if a name is empty or repeated.
  explicit ActionVocab(std::vector<std::string> names);

  int size() const { return static_cast<int>(names_.size()); }
  const std::string& name(int index) const;
  std::optional<int> find(std::string_view name) const;
  const std::vector<std::string>& names() const { return names_; }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, int> index_;
};

// Per-frame input features, one row per frame.
struct FeatureSequence {
  Matrix frames;

  int length() const { return static_cast<int>(frames.rows()); }
  int dim() const { return static_cast<int>(frames.cols()); }
};

// One class index per frame.
using FrameLabels = std::vector<int>;

struct Timestamp {
  int frame = 0;
  int label = 0;
  friend bool operator==(const Timestamp&, const Timestamp&) = default;
};

// Sparse annotation, sorted by strictly increasing frame.
using TimestampSet = std::vector<Timestamp>;

// Half-open run [start, end) of a single class.
struct Segment {
  int label = 0;
  int start = 0;
  int end = 0;
  int length() const { return end - start; }
  friend bool operator==(const Segment&, const Segment&) = default;
};

using SegmentList = std::vector<Segment>;

// ---------------------------------------------------------------------------
// File formats. Text files are UTF-8 with LF line endings. Every parser
// reports the offending line (1-based) in its error message.

ActionVocab parse_vocab(std::istream& in);
ActionVocab load_vocab(const std::filesystem::path& path);
void save_vocab(const std::filesystem::path& path, const ActionVocab& vocab);

// Binary little-endian: "TSF1", u32 T, u32 D, then T*D f32 values frame-major.
FeatureSequence read_features(std::istream& in);
void write_features(std::ostream& out, const FeatureSequence& features);
FeatureSequence load_features(const std::filesystem::path& path);
void save_features(const std::filesystem::path& path, const FeatureSequence& features);

// One action name per line; line t is the label of frame t.
FrameLabels parse_labels(std::istream& in, const ActionVocab& vocab);
FrameLabels load_labels(const std::filesystem::path& path, const ActionVocab& vocab);
void save_labels(const std::filesystem::path& path, std::span<const int> labels,
                 const ActionVocab& vocab);

// Lines "<frame> <name>", ascending by frame.
TimestampSet parse_timestamps(std::istream& in, const ActionVocab& vocab);
TimestampSet load_timestamps(const std::filesystem::path& path, const ActionVocab& vocab);
void save_timestamps(const std::filesystem::path& path, const TimestampSet& timestamps,
                     const ActionVocab& vocab);

// Checks frame order and ranges. With `require_distinct_neighbors` consecutive
// entries must also differ in class (one-per-segment sampling).
void validate_timestamps(const TimestampSet& timestamps, int length, int num_classes,
                         bool require_distinct_neighbors = false);

// ---------------------------------------------------------------------------
// Segments and annotation sampling.

SegmentList segments_from_labels(std::span<const int> labels);
FrameLabels labels_from_segments(const SegmentList& segments);

enum class SamplingStrategy { kRandom, kCenter, kStart };

// One timestamp per segment: the first frame (kStart), the left median
// floor((start + end - 1) / 2) (kCenter), or a uniform frame (kRandom).
TimestampSet sample_timestamps(std::span<const int> labels, SamplingStrategy strategy,
                               std::uint64_t seed);

// ceil(fraction * T) distinct frames drawn uniformly without replacement,
// sorted. Segments may receive zero, one or several timestamps.
TimestampSet sample_timestamps_fraction(std::span<const int> labels, double fraction,
                                        std::uint64_t seed);

// ---------------------------------------------------------------------------
// Synthetic corpus.

struct SyntheticSpec {
  int videos = 10;
  int num_classes = 5;
  int mean_length = 300;
  // Video lengths are uniform in mean_length * [1 - jitter, 1 + jitter].
  double length_jitter = 0.2;
  int dim = 16;
  double sigma = 0.1;
  // Lag-one correlation of the per-frame noise (AR(1)); the marginal of every
  // frame stays N(0, sigma^2). 0 gives independent noise.
  double noise_correlation = 0.0;
  int min_segments = 3;
  int max_segments = 8;
  // Distance between any two class means (exact when dim >= num_classes).
  double separation = 1.0;
};

struct Video {
  std::string name;
  FeatureSequence features;
  FrameLabels labels;
};

struct SyntheticCorpus {
  std::vector<Video> videos;
  // num_classes x dim, row c is the mean feature of class c.
  Matrix class_means;
};

// Each video is a random run of segments with no two neighbours sharing a
// class; frame features are the class mean plus N(0, sigma^2) noise.
// Deterministic given the seed.
SyntheticCorpus generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed);

}  // namespace tsseg
