// Copyright 2026 The Triformer Authors. All Rights Reserved.
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

#include "model/checkpoint.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>

#include "tensor/error.hpp"

namespace triformer {

namespace {

constexpr std::array<char, 5> kMagic{'T', 'R', 'I', 'F', '1'};
constexpr std::uint64_t kMaxRank = 8;
constexpr std::uint64_t kMaxName = 1u << 16;

template <typename UInt>
void put_le(std::ostream& out, UInt v) {
  std::array<char, sizeof(UInt)> bytes{};
  for (std::size_t i = 0; i < sizeof(UInt); ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(bytes.data(), bytes.size());
}

template <typename UInt>
UInt get_le(std::istream& in, const char* what) {
  std::array<unsigned char, sizeof(UInt)> bytes{};
  in.read(reinterpret_cast<char*>(bytes.data()), bytes.size());
  if (!in) throw IoError(std::string("checkpoint truncated while reading ") + what);
  UInt v = 0;
  for (std::size_t i = 0; i < sizeof(UInt); ++i) v |= static_cast<UInt>(bytes[i]) << (8 * i);
  return v;
}

}  // namespace

const Tensor* Checkpoint::find(const std::string& name) const {
  for (const auto& [n, t] : tensors) {
    if (n == name) return &t;
  }
  return nullptr;
}

void write_checkpoint(std::ostream& out, const Checkpoint& checkpoint) {
  out.write(kMagic.data(), kMagic.size());
  put_le<std::uint64_t>(out, checkpoint.config_text.size());
  out.write(checkpoint.config_text.data(), static_cast<std::streamsize>(checkpoint.config_text.size()));
  for (const auto& [name, tensor] : checkpoint.tensors) {
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(tensor.rank()));
    for (std::size_t d : tensor.shape()) put_le<std::uint64_t>(out, d);
    for (double v : tensor.data()) put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v));
  }
  if (!out) throw IoError("failed to write checkpoint");
}

Checkpoint read_checkpoint(std::istream& in) {
  std::array<char, 5> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) throw IoError("not a checkpoint file (bad magic)");
  Checkpoint ck;
  const auto config_len = get_le<std::uint64_t>(in, "config length");
  if (config_len > (1u << 24)) throw IoError("checkpoint config block is implausibly large");
  ck.config_text.resize(config_len);
  in.read(ck.config_text.data(), static_cast<std::streamsize>(config_len));
  if (!in) throw IoError("checkpoint truncated in config block");

  while (in.peek() != std::char_traits<char>::eof()) {
    const auto name_len = get_le<std::uint32_t>(in, "name length");
    if (name_len == 0 || name_len > kMaxName) throw IoError("checkpoint record has a bad name length");
    std::string name(name_len, '\0');
    in.read(name.data(), name_len);
    if (!in) throw IoError("checkpoint truncated in record name");
    const auto rank = get_le<std::uint32_t>(in, "rank");
    if (rank > kMaxRank) throw IoError("checkpoint record '" + name + "' has rank " + std::to_string(rank));
    Shape shape(rank);
    for (auto& d : shape) {
      d = get_le<std::uint64_t>(in, "dimension");
      if (d == 0 || d > (1ull << 32)) throw IoError("checkpoint record '" + name + "' has a bad dimension");
    }
    Tensor t(shape);
    for (double& v : t.data()) v = std::bit_cast<double>(get_le<std::uint64_t>(in, "payload"));
    ck.tensors.emplace_back(std::move(name), std::move(t));
  }
  return ck;
}

void save_checkpoint(const std::string& path, const Checkpoint& checkpoint) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  write_checkpoint(out, checkpoint);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint '" + path + "'");
  return read_checkpoint(in);
}

}  // namespace triformer
