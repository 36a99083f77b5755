// Copyright (c) 2026 The embfuse Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "embfuse/binary_io.h"

#include <fstream>
#include <iterator>

#include "embfuse/errors.h"

namespace embfuse {

std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::uint8_t b : bytes) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  return h;
}

void ByteWriter::put_bytes(std::string_view raw) {
  buf_.insert(buf_.end(), raw.begin(), raw.end());
}

void ByteReader::require(std::size_t n) {
  if (n > remaining()) {
    throw FormatError(what_ + ": truncated (needed " + std::to_string(n) +
                      " bytes at offset " + std::to_string(pos_) + ", " +
                      std::to_string(remaining()) + " left)");
  }
}

std::string ByteReader::get_bytes(std::size_t n) {
  require(n);
  std::string out(bytes_.begin() + pos_, bytes_.begin() + pos_ + n);
  pos_ += n;
  return out;
}

std::uint64_t ByteReader::get_le(int n) {
  require(static_cast<std::size_t>(n));
  std::uint64_t v = 0;
  for (int i = 0; i < n; ++i) {
    v |= static_cast<std::uint64_t>(bytes_[pos_ + i]) << (8 * i);
  }
  pos_ += n;
  return v;
}

void ByteReader::verify_checksum() {
  const std::uint64_t expected = fnv1a64(bytes_.first(pos_));
  const std::uint64_t stored = get_u64();
  if (stored != expected) throw FormatError(what_ + ": checksum mismatch");
  if (remaining() != 0) {
    throw FormatError(what_ + ": " + std::to_string(remaining()) +
                      " trailing bytes after checksum");
  }
}

std::vector<std::uint8_t> read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path);
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in),
                                   std::istreambuf_iterator<char>());
}

void write_file_bytes(const std::string& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot open " + path + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw FormatError("write failed: " + path);
}

}  // namespace embfuse
