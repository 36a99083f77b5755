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

#include "embfuse/embedding_store.h"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <set>
#include <sstream>
#include <utility>

#include "embfuse/binary_io.h"
#include "embfuse/errors.h"

namespace embfuse {

namespace {

constexpr char kStoreMagic[] = "EMBS";
constexpr std::uint32_t kStoreVersion = 1;
constexpr std::size_t kStoreHeaderBytes = 4 + 4 + 4 + 8;

std::size_t RecordBytes(std::size_t n_dim) { return 4 + 4 + 1 + 2 + 8 * n_dim; }

std::string RecordTag(const UtterancePair& r) {
  return "record (speaker " + std::to_string(r.speaker_id) + ", utterance " +
         std::to_string(r.utterance_id) + ")";
}

void CheckEmbedding(const Vec& v, std::size_t n_dim, const UtterancePair& r,
                    const char* which) {
  if (v.size() != n_dim) {
    throw FormatError(RecordTag(r) + ": " + which + " embedding has length " +
                      std::to_string(v.size()) + ", store n_dim is " +
                      std::to_string(n_dim));
  }
  if (!all_finite(v.span())) {
    throw FormatError(RecordTag(r) + ": non-finite " + which + " embedding");
  }
  if (norm2(v) == 0.0) {
    throw FormatError(RecordTag(r) + ": zero-norm " + which + " embedding");
  }
}

template <typename T>
T ParseNumber(std::string_view field, const std::string& context) {
  T value{};
  const char* first = field.data();
  const char* last = field.data() + field.size();
  while (first < last && (*first == ' ' || *first == '\t')) ++first;
  while (last > first && (last[-1] == ' ' || last[-1] == '\t' || last[-1] == '\r')) --last;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || first == last) {
    throw FormatError(context + ": cannot parse '" + std::string(field) + "'");
  }
  return value;
}

std::vector<std::string_view> Split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

Vec ParseEmbedding(std::string_view field, const std::string& context) {
  std::vector<double> values;
  for (std::string_view item : Split(field, ';')) {
    values.push_back(static_cast<float>(ParseNumber<double>(item, context)));
  }
  return Vec(std::move(values));
}

}  // namespace

std::string_view noise_type_name(NoiseType t) {
  switch (t) {
    case NoiseType::kNoise:
      return "noise";
    case NoiseType::kMusic:
      return "music";
    case NoiseType::kBabble:
      return "babble";
    case NoiseType::kSynthetic:
      return "synthetic";
  }
  return "unknown";
}

std::optional<NoiseType> parse_noise_type(std::string_view s) {
  for (std::uint8_t code = 0; code <= 3; ++code) {
    const auto t = static_cast<NoiseType>(code);
    if (s == noise_type_name(t) || s == std::to_string(code)) return t;
  }
  return std::nullopt;
}

void EmbeddingStore::Validate() const {
  if (n_dim == 0) throw FormatError("store: n_dim must be positive");
  std::set<std::pair<std::uint32_t, std::uint32_t>> keys;
  for (const auto& r : records) {
    if (static_cast<std::uint8_t>(r.noise_type) > 3) {
      throw FormatError(RecordTag(r) + ": unknown noise type");
    }
    if (r.snr_db < kMinSnrDb || r.snr_db > kMaxSnrDb) {
      throw FormatError(RecordTag(r) + ": snr_db " + std::to_string(r.snr_db) +
                        " outside [-60, 60]");
    }
    CheckEmbedding(r.noisy, n_dim, r, "noisy");
    CheckEmbedding(r.enhanced, n_dim, r, "enhanced");
    if (!keys.emplace(r.speaker_id, r.utterance_id).second) {
      throw FormatError(RecordTag(r) + ": duplicate key");
    }
  }
}

std::size_t EmbeddingStore::speaker_count() const {
  std::set<std::uint32_t> speakers;
  for (const auto& r : records) speakers.insert(r.speaker_id);
  return speakers.size();
}

void quantize_to_f32(EmbeddingStore* store) {
  for (auto& r : store->records) {
    for (double& v : r.noisy) v = static_cast<float>(v);
    for (double& v : r.enhanced) v = static_cast<float>(v);
  }
}

std::vector<std::uint8_t> encode_store(const EmbeddingStore& store) {
  store.Validate();
  ByteWriter w;
  w.put_bytes(std::string_view(kStoreMagic, 4));
  w.put_u32(kStoreVersion);
  w.put_u32(static_cast<std::uint32_t>(store.n_dim));
  w.put_u64(store.records.size());
  for (const auto& r : store.records) {
    w.put_u32(r.speaker_id);
    w.put_u32(r.utterance_id);
    w.put_u8(static_cast<std::uint8_t>(r.noise_type));
    w.put_i16(r.snr_db);
    for (double v : r.noisy) w.put_f32(static_cast<float>(v));
    for (double v : r.enhanced) w.put_f32(static_cast<float>(v));
  }
  w.put_checksum();
  return w.bytes();
}

EmbeddingStore decode_store(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes, "store file");
  if (r.get_bytes(4) != std::string_view(kStoreMagic, 4)) {
    throw FormatError("store file: bad magic (expected EMBS)");
  }
  const std::uint32_t version = r.get_u32();
  if (version != kStoreVersion) {
    throw FormatError("store file: unsupported version " + std::to_string(version));
  }
  EmbeddingStore store;
  store.n_dim = r.get_u32();
  if (store.n_dim == 0) throw FormatError("store file: n_dim is zero");
  const std::uint64_t count = r.get_u64();

  const std::size_t per_record = RecordBytes(store.n_dim);
  const std::size_t body = bytes.size() - kStoreHeaderBytes;
  if (body < 8 || (body - 8) % per_record != 0 || (body - 8) / per_record != count) {
    throw FormatError("store file: record count " + std::to_string(count) +
                      " inconsistent with file length " + std::to_string(bytes.size()));
  }

  store.records.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    UtterancePair rec;
    rec.speaker_id = r.get_u32();
    rec.utterance_id = r.get_u32();
    const std::uint8_t nt = r.get_u8();
    if (nt > 3) throw FormatError("store file: unknown noise type code " + std::to_string(nt));
    rec.noise_type = static_cast<NoiseType>(nt);
    rec.snr_db = r.get_i16();
    std::vector<double> noisy(store.n_dim);
    std::vector<double> enhanced(store.n_dim);
    for (double& v : noisy) v = r.get_f32();
    for (double& v : enhanced) v = r.get_f32();
    try {
      rec.noisy = Vec(std::move(noisy));
      rec.enhanced = Vec(std::move(enhanced));
    } catch (const NumericalError&) {
      throw FormatError("store file: " + RecordTag(rec) + ": non-finite embedding");
    }
    store.records.push_back(std::move(rec));
  }
  r.verify_checksum();
  store.Validate();
  return store;
}

void write_store(const EmbeddingStore& store, const std::string& path) {
  write_file_bytes(path, encode_store(store));
}

EmbeddingStore read_store(const std::string& path) {
  const auto bytes = read_file_bytes(path);
  return decode_store(bytes);
}

EmbeddingStore parse_store_csv(std::istream& in) {
  EmbeddingStore store;
  std::string line;
  if (!std::getline(in, line)) throw FormatError("csv: missing header row");
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::string ctx = "csv line " + std::to_string(line_no);
    const auto fields = Split(line, ',');
    if (fields.size() != 6) {
      throw FormatError(ctx + ": expected 6 fields, got " + std::to_string(fields.size()));
    }
    UtterancePair rec;
    rec.speaker_id = ParseNumber<std::uint32_t>(fields[0], ctx);
    rec.utterance_id = ParseNumber<std::uint32_t>(fields[1], ctx);
    const auto nt = parse_noise_type(fields[2]);
    if (!nt) throw FormatError(ctx + ": unknown noise type '" + std::string(fields[2]) + "'");
    rec.noise_type = *nt;
    const int snr = ParseNumber<int>(fields[3], ctx);
    if (snr < kMinSnrDb || snr > kMaxSnrDb) {
      throw FormatError(ctx + ": snr_db out of range");
    }
    rec.snr_db = static_cast<std::int16_t>(snr);
    try {
      rec.noisy = ParseEmbedding(fields[4], ctx);
      rec.enhanced = ParseEmbedding(fields[5], ctx);
    } catch (const NumericalError&) {
      throw FormatError(ctx + ": non-finite embedding value");
    }
    if (store.n_dim == 0) store.n_dim = rec.noisy.size();
    store.records.push_back(std::move(rec));
  }
  if (store.n_dim == 0) throw FormatError("csv: no records, n_dim unknown");
  store.Validate();
  return store;
}

EmbeddingStore read_store_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path);
  return parse_store_csv(in);
}

void write_store_csv(const EmbeddingStore& store, std::ostream& out) {
  out << "speaker_id,utterance_id,noise_type,snr_db,noisy,enhanced\n";
  const auto old_precision = out.precision(std::numeric_limits<float>::max_digits10);
  auto put = [&out](const Vec& v) {
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i) out << ';';
      out << static_cast<float>(v[i]);
    }
  };
  for (const auto& r : store.records) {
    out << r.speaker_id << ',' << r.utterance_id << ',' << noise_type_name(r.noise_type)
        << ',' << r.snr_db << ',';
    put(r.noisy);
    out << ',';
    put(r.enhanced);
    out << '\n';
  }
  out.precision(old_precision);
}

UtteranceIndex::UtteranceIndex(const EmbeddingStore& store) {
  for (std::size_t i = 0; i < store.records.size(); ++i) {
    auto [it, inserted] = index_.emplace(store.records[i].utterance_id, i);
    if (!inserted) it->second = kAmbiguous;
  }
}

bool UtteranceIndex::contains(std::uint32_t utterance_id) const {
  return index_.count(utterance_id) > 0;
}

std::size_t UtteranceIndex::at(std::uint32_t utterance_id) const {
  const auto it = index_.find(utterance_id);
  if (it == index_.end()) {
    throw FormatError("utterance id " + std::to_string(utterance_id) + " not in store");
  }
  if (it->second == kAmbiguous) {
    throw FormatError("utterance id " + std::to_string(utterance_id) +
                      " is shared by several records");
  }
  return it->second;
}

}  // namespace embfuse
