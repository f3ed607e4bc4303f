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

#include <array>
#include <bit>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "tsseg/net.hpp"

namespace tsseg {
namespace {

constexpr std::array<char, 4> kCheckpointMagic = {'T', 'S', 'M', '1'};

void put_u32(std::ostream& out, std::uint32_t v) {
  const unsigned char bytes[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                                  static_cast<unsigned char>(v >> 16),
                                  static_cast<unsigned char>(v >> 24)};
  out.write(reinterpret_cast<const char*>(bytes), 4);
}

void put_u64(std::ostream& out, std::uint64_t v) {
  put_u32(out, static_cast<std::uint32_t>(v));
  put_u32(out, static_cast<std::uint32_t>(v >> 32));
}

std::uint32_t get_u32(std::istream& in, const char* what) {
  unsigned char bytes[4];
  in.read(reinterpret_cast<char*>(bytes), 4);
  if (in.gcount() != 4) throw Error(std::string("truncated checkpoint while reading ") + what);
  return static_cast<std::uint32_t>(bytes[0]) | (static_cast<std::uint32_t>(bytes[1]) << 8) |
         (static_cast<std::uint32_t>(bytes[2]) << 16) |
         (static_cast<std::uint32_t>(bytes[3]) << 24);
}

void put_floats(std::ostream& out, const Vector& values) {
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(values[i])));
  }
}

Vector get_floats(std::istream& in, Eigen::Index count, const char* what) {
  Vector values(count);
  for (Eigen::Index i = 0; i < count; ++i) {
    const float v = std::bit_cast<float>(get_u32(in, what));
    if (!std::isfinite(v)) throw Error(std::string("non-finite value in checkpoint ") + what);
    values[i] = v;
  }
  return values;
}

}  // namespace

void write_checkpoint(std::ostream& out, const ModelState& model) {
  const ModelConfig& c = model.config;
  out.write(kCheckpointMagic.data(), kCheckpointMagic.size());
  for (int field : {c.num_stages, c.layers_per_stage, c.channels, c.first_stage_kernels[0],
                    c.first_stage_kernels[1], c.later_kernel, c.input_dim, c.num_classes}) {
    put_u32(out, static_cast<std::uint32_t>(field));
  }
  put_floats(out, model.params);
  put_floats(out, model.adam.first_moment);
  put_floats(out, model.adam.second_moment);
  put_u64(out, model.adam.step);
}

ModelState read_checkpoint(std::istream& in) {
  std::array<char, 4> magic{};
  in.read(magic.data(), magic.size());
  if (in.gcount() != 4 || magic != kCheckpointMagic) throw Error("bad magic: not a TSM1 checkpoint");
  ModelConfig c;
  auto field = [&](const char* what) {
    const std::uint32_t v = get_u32(in, what);
    if (v > (1u << 24)) throw Error(std::string("implausible checkpoint field ") + what);
    return static_cast<int>(v);
  };
  c.num_stages = field("num_stages");
  c.layers_per_stage = field("layers_per_stage");
  c.channels = field("channels");
  c.first_stage_kernels[0] = field("first stage kernel");
  c.first_stage_kernels[1] = field("first stage kernel");
  c.later_kernel = field("later_kernel");
  c.input_dim = field("input_dim");
  c.num_classes = field("num_classes");

  ModelState model;
  model.config = c;
  model.layout = make_layout(c);
  model.params = get_floats(in, model.layout.size, "parameters");
  model.adam.first_moment = get_floats(in, model.layout.size, "first moments");
  model.adam.second_moment = get_floats(in, model.layout.size, "second moments");
  const std::uint64_t low = get_u32(in, "step counter");
  const std::uint64_t high = get_u32(in, "step counter");
  model.adam.step = low | (high << 32);
  return model;
}

void save_checkpoint(const std::filesystem::path& path, const ModelState& model) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  write_checkpoint(out, model);
  out.flush();
  if (!out) throw Error("write failed for '" + path.string() + "'");
}

ModelState load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "' for reading");
  try {
    return read_checkpoint(in);
  } catch (const Error& e) {
    throw Error(path.string() + ": " + e.what());
  }
}

}  // namespace tsseg
