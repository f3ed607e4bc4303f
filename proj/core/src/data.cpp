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

#include "tsseg/data.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

namespace tsseg {
namespace {

constexpr std::array<char, 4> kFeatureMagic = {'T', 'S', 'F', '1'};

std::string at_line(std::size_t line) { return " at line " + std::to_string(line); }

// Reads all lines, strips a trailing CR and drops trailing blank lines.
std::vector<std::string> read_lines(std::istream& in) {
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  return lines;
}

std::ifstream open_for_read(const std::filesystem::path& path,
                            std::ios::openmode mode = std::ios::in) {
  std::ifstream in(path, mode);
  if (!in) throw Error("cannot open '" + path.string() + "' for reading");
  return in;
}

std::ofstream open_for_write(const std::filesystem::path& path,
                             std::ios::openmode mode = std::ios::out) {
  std::ofstream out(path, mode | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  return out;
}

void finish_write(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw Error("write failed for '" + path.string() + "'");
}

template <typename Fn>
auto with_path_context(const std::filesystem::path& path, Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    throw Error(path.string() + ": " + e.what());
  }
}

bool parse_int(std::string_view text, long long& value) {
  if (text.empty()) return false;
  std::size_t i = 0;
  bool negative = false;
  if (text[0] == '-') {
    negative = true;
    i = 1;
    if (text.size() == 1) return false;
  }
  long long v = 0;
  for (; i < text.size(); ++i) {
    if (text[i] < '0' || text[i] > '9') return false;
    v = v * 10 + (text[i] - '0');
    if (v > (1LL << 40)) return false;
  }
  value = negative ? -v : v;
  return true;
}

std::uint32_t load_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void store_u32(std::uint32_t v, unsigned char* p) {
  p[0] = static_cast<unsigned char>(v);
  p[1] = static_cast<unsigned char>(v >> 8);
  p[2] = static_cast<unsigned char>(v >> 16);
  p[3] = static_cast<unsigned char>(v >> 24);
}

}  // namespace

// ---------------------------------------------------------------------------
// ActionVocab

ActionVocab::ActionVocab(std::vector<std::string> names) : names_(std::move(names)) {
  for (int i = 0; i < size(); ++i) {
    if (names_[i].empty()) throw Error("empty action name for class " + std::to_string(i));
    if (!index_.emplace(names_[i], i).second) {
      throw Error("duplicate action name '" + names_[i] + "'");
    }
  }
}

const std::string& ActionVocab::name(int index) const {
  if (index < 0 || index >= size()) {
    throw Error("class index " + std::to_string(index) + " out of range [0, " +
                std::to_string(size()) + ")");
  }
  return names_[index];
}

std::optional<int> ActionVocab::find(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

ActionVocab parse_vocab(std::istream& in) {
  struct Entry {
    long long index;
    std::string name;
    std::size_t line;
  };
  std::vector<Entry> entries;
  const auto lines = read_lines(in);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string& line = lines[i];
    const std::size_t lineno = i + 1;
    const auto space = line.find(' ');
    long long index = 0;
    if (space == std::string::npos || !parse_int(std::string_view(line).substr(0, space), index) ||
        index < 0) {
      throw Error("malformed vocabulary line '" + line + "'" + at_line(lineno));
    }
    std::string name = line.substr(space + 1);
    if (name.empty()) throw Error("empty action name" + at_line(lineno));
    entries.push_back({index, std::move(name), lineno});
  }
  if (entries.empty()) throw Error("empty vocabulary");

  std::vector<std::size_t> order(entries.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return entries[a].index < entries[b].index; });
  std::vector<std::string> names;
  std::unordered_map<std::string, std::size_t> seen_names;
  for (std::size_t k = 0; k < order.size(); ++k) {
    const Entry& e = entries[order[k]];
    if (k > 0 && entries[order[k - 1]].index == e.index) {
      throw Error("duplicate class index " + std::to_string(e.index) + at_line(e.line));
    }
    if (e.index != static_cast<long long>(k)) {
      throw Error("gap in class indices: index " + std::to_string(k) + " missing" +
                  at_line(e.line));
    }
    if (auto [it, fresh] = seen_names.emplace(e.name, e.line); !fresh) {
      throw Error("duplicate action name '" + e.name + "'" + at_line(std::max(e.line, it->second)));
    }
    names.push_back(e.name);
  }
  return ActionVocab(std::move(names));
}

ActionVocab load_vocab(const std::filesystem::path& path) {
  auto in = open_for_read(path);
  return with_path_context(path, [&] { return parse_vocab(in); });
}

void save_vocab(const std::filesystem::path& path, const ActionVocab& vocab) {
  auto out = open_for_write(path);
  for (int i = 0; i < vocab.size(); ++i) out << i << ' ' << vocab.name(i) << '\n';
  finish_write(out, path);
}

// ---------------------------------------------------------------------------
// Features

FeatureSequence read_features(std::istream& in) {
  unsigned char header[12];
  in.read(reinterpret_cast<char*>(header), sizeof(header));
  if (in.gcount() < 4 || !std::equal(kFeatureMagic.begin(), kFeatureMagic.end(), header)) {
    throw Error("bad magic: not a TSF1 feature file");
  }
  if (in.gcount() != sizeof(header)) throw Error("truncated header");
  const std::uint32_t length = load_u32(header + 4);
  const std::uint32_t dim = load_u32(header + 8);
  if (length == 0 || dim == 0) {
    throw Error("invalid feature shape " + std::to_string(length) + "x" + std::to_string(dim));
  }
  const std::size_t count = static_cast<std::size_t>(length) * dim;
  std::vector<unsigned char> payload(count * 4);
  in.read(reinterpret_cast<char*>(payload.data()), static_cast<std::streamsize>(payload.size()));
  const auto got = static_cast<std::size_t>(in.gcount());
  if (got != payload.size()) {
    throw Error("truncated payload: expected " + std::to_string(payload.size()) +
                " bytes, got " + std::to_string(got));
  }
  FeatureSequence seq;
  seq.frames.resize(length, dim);
  for (std::uint32_t t = 0; t < length; ++t) {
    for (std::uint32_t d = 0; d < dim; ++d) {
      const std::size_t k = static_cast<std::size_t>(t) * dim + d;
      const float value = std::bit_cast<float>(load_u32(payload.data() + 4 * k));
      if (!std::isfinite(value)) {
        throw Error("non-finite value at frame " + std::to_string(t) + ", dim " +
                    std::to_string(d));
      }
      seq.frames(t, d) = value;
    }
  }
  return seq;
}

void write_features(std::ostream& out, const FeatureSequence& features) {
  if (features.length() < 1 || features.dim() < 1) throw Error("cannot write empty features");
  unsigned char header[12];
  std::copy(kFeatureMagic.begin(), kFeatureMagic.end(), header);
  store_u32(static_cast<std::uint32_t>(features.length()), header + 4);
  store_u32(static_cast<std::uint32_t>(features.dim()), header + 8);
  out.write(reinterpret_cast<const char*>(header), sizeof(header));
  std::vector<unsigned char> payload(static_cast<std::size_t>(features.frames.size()) * 4);
  std::size_t k = 0;
  for (int t = 0; t < features.length(); ++t) {
    for (int d = 0; d < features.dim(); ++d, ++k) {
      store_u32(std::bit_cast<std::uint32_t>(static_cast<float>(features.frames(t, d))),
                payload.data() + 4 * k);
    }
  }
  out.write(reinterpret_cast<const char*>(payload.data()),
            static_cast<std::streamsize>(payload.size()));
}

FeatureSequence load_features(const std::filesystem::path& path) {
  auto in = open_for_read(path, std::ios::in | std::ios::binary);
  return with_path_context(path, [&] { return read_features(in); });
}

void save_features(const std::filesystem::path& path, const FeatureSequence& features) {
  auto out = open_for_write(path, std::ios::out | std::ios::binary);
  write_features(out, features);
  finish_write(out, path);
}

// ---------------------------------------------------------------------------
// Labels and timestamps

FrameLabels parse_labels(std::istream& in, const ActionVocab& vocab) {
  const auto lines = read_lines(in);
  if (lines.empty()) throw Error("empty label file");
  FrameLabels labels;
  labels.reserve(lines.size());
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto index = vocab.find(lines[i]);
    if (!index) throw Error("unknown action '" + lines[i] + "'" + at_line(i + 1));
    labels.push_back(*index);
  }
  return labels;
}

FrameLabels load_labels(const std::filesystem::path& path, const ActionVocab& vocab) {
  auto in = open_for_read(path);
  return with_path_context(path, [&] { return parse_labels(in, vocab); });
}

void save_labels(const std::filesystem::path& path, std::span<const int> labels,
                 const ActionVocab& vocab) {
  auto out = open_for_write(path);
  for (int label : labels) out << vocab.name(label) << '\n';
  finish_write(out, path);
}

TimestampSet parse_timestamps(std::istream& in, const ActionVocab& vocab) {
  TimestampSet timestamps;
  const auto lines = read_lines(in);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string& line = lines[i];
    const auto space = line.find(' ');
    long long frame = 0;
    if (space == std::string::npos || !parse_int(std::string_view(line).substr(0, space), frame) ||
        frame < 0) {
      throw Error("malformed timestamp line '" + line + "'" + at_line(i + 1));
    }
    const std::string name = line.substr(space + 1);
    const auto label = vocab.find(name);
    if (!label) throw Error("unknown action '" + name + "'" + at_line(i + 1));
    if (!timestamps.empty() && timestamps.back().frame >= frame) {
      throw Error("timestamps not strictly increasing" + at_line(i + 1));
    }
    timestamps.push_back({static_cast<int>(frame), *label});
  }
  if (timestamps.empty()) throw Error("empty timestamp file");
  return timestamps;
}

TimestampSet load_timestamps(const std::filesystem::path& path, const ActionVocab& vocab) {
  auto in = open_for_read(path);
  return with_path_context(path, [&] { return parse_timestamps(in, vocab); });
}

void save_timestamps(const std::filesystem::path& path, const TimestampSet& timestamps,
                     const ActionVocab& vocab) {
  auto out = open_for_write(path);
  for (const auto& ts : timestamps) out << ts.frame << ' ' << vocab.name(ts.label) << '\n';
  finish_write(out, path);
}

void validate_timestamps(const TimestampSet& timestamps, int length, int num_classes,
                         bool require_distinct_neighbors) {
  if (timestamps.empty()) throw Error("timestamp set is empty");
  for (std::size_t i = 0; i < timestamps.size(); ++i) {
    const auto& ts = timestamps[i];
    if (ts.frame < 0 || ts.frame >= length) {
      throw Error("timestamp frame " + std::to_string(ts.frame) + " outside [0, " +
                  std::to_string(length) + ")");
    }
    if (ts.label < 0 || ts.label >= num_classes) {
      throw Error("timestamp class " + std::to_string(ts.label) + " out of range");
    }
    if (i > 0) {
      if (timestamps[i - 1].frame >= ts.frame) throw Error("timestamps not strictly increasing");
      if (require_distinct_neighbors && timestamps[i - 1].label == ts.label) {
        throw Error("consecutive timestamps share class " + std::to_string(ts.label));
      }
    }
  }
}

// ---------------------------------------------------------------------------
// Segments and sampling

SegmentList segments_from_labels(std::span<const int> labels) {
  if (labels.empty()) throw Error("cannot segment an empty label sequence");
  SegmentList segments;
  int start = 0;
  const int length = static_cast<int>(labels.size());
  for (int t = 1; t <= length; ++t) {
    if (t == length || labels[t] != labels[start]) {
      segments.push_back({labels[start], start, t});
      start = t;
    }
  }
  return segments;
}

FrameLabels labels_from_segments(const SegmentList& segments) {
  FrameLabels labels;
  for (const auto& seg : segments) labels.insert(labels.end(), seg.length(), seg.label);
  return labels;
}

TimestampSet sample_timestamps(std::span<const int> labels, SamplingStrategy strategy,
                               std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  TimestampSet timestamps;
  for (const auto& seg : segments_from_labels(labels)) {
    int frame = seg.start;
    switch (strategy) {
      case SamplingStrategy::kStart:
        break;
      case SamplingStrategy::kCenter:
        frame = (seg.start + seg.end - 1) / 2;
        break;
      case SamplingStrategy::kRandom:
        frame = std::uniform_int_distribution<int>(seg.start, seg.end - 1)(rng);
        break;
    }
    timestamps.push_back({frame, seg.label});
  }
  return timestamps;
}

TimestampSet sample_timestamps_fraction(std::span<const int> labels, double fraction,
                                        std::uint64_t seed) {
  if (labels.empty()) throw Error("cannot sample from an empty label sequence");
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw Error("fraction must lie in (0, 1], got " + std::to_string(fraction));
  }
  const int length = static_cast<int>(labels.size());
  // The small slack keeps products such as 0.07 * 100 from rounding up.
  const int count =
      std::clamp(static_cast<int>(std::ceil(fraction * length - 1e-9)), 1, length);

  std::mt19937_64 rng(seed);
  std::vector<int> frames(length);
  std::iota(frames.begin(), frames.end(), 0);
  for (int i = 0; i < count; ++i) {
    const int j = std::uniform_int_distribution<int>(i, length - 1)(rng);
    std::swap(frames[i], frames[j]);
  }
  frames.resize(count);
  std::sort(frames.begin(), frames.end());

  TimestampSet timestamps;
  timestamps.reserve(count);
  for (int frame : frames) timestamps.push_back({frame, labels[frame]});
  return timestamps;
}

}  // namespace tsseg
