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

#ifndef EMBFUSE_EMBEDDING_STORE_H_
#define EMBFUSE_EMBEDDING_STORE_H_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "embfuse/tensor.h"

namespace embfuse {

enum class NoiseType : std::uint8_t {
  kNoise = 0,
  kMusic = 1,
  kBabble = 2,
  kSynthetic = 3,
};

std::string_view noise_type_name(NoiseType t);
// Accepts the names above or their numeric codes.
std::optional<NoiseType> parse_noise_type(std::string_view s);

// Noisy and enhanced embeddings of one utterance under one noise condition.
struct UtterancePair {
  std::uint32_t speaker_id = 0;
  std::uint32_t utterance_id = 0;
  NoiseType noise_type = NoiseType::kSynthetic;
  std::int16_t snr_db = 0;
  Vec noisy;
  Vec enhanced;

  bool operator==(const UtterancePair& other) const = default;
};

inline constexpr int kMinSnrDb = -60;
inline constexpr int kMaxSnrDb = 60;

struct EmbeddingStore {
  std::size_t n_dim = 0;
  std::vector<UtterancePair> records;

  // Throws FormatError when a record has the wrong length, a non-finite or
  // zero-norm embedding, an SNR outside [-60, 60], or a repeated
  // (speaker_id, utterance_id) key.
  void Validate() const;

  std::size_t speaker_count() const;

  bool operator==(const EmbeddingStore& other) const = default;
};

// Rounds every embedding entry to the nearest float, i.e. to exactly what
// the binary format can hold.
void quantize_to_f32(EmbeddingStore* store);

// Binary store, little-endian:
//   "EMBS" | u32 version=1 | u32 n_dim | u64 record_count |
//   record_count x (u32 speaker_id | u32 utterance_id | u8 noise_type |
//                   i16 snr_db | n_dim x f32 noisy | n_dim x f32 enhanced) |
//   u64 fnv1a64 of all preceding bytes
std::vector<std::uint8_t> encode_store(const EmbeddingStore& store);
EmbeddingStore decode_store(std::span<const std::uint8_t> bytes);
void write_store(const EmbeddingStore& store, const std::string& path);
EmbeddingStore read_store(const std::string& path);

// CSV interop. Header row
//   speaker_id,utterance_id,noise_type,snr_db,noisy,enhanced
// then one record per line; the two embedding fields hold semicolon-separated
// floats. noise_type is a name (noise|music|babble|synthetic) or its code.
// Values are rounded to float on import, matching the binary store.
EmbeddingStore parse_store_csv(std::istream& in);
EmbeddingStore read_store_csv(const std::string& path);
void write_store_csv(const EmbeddingStore& store, std::ostream& out);

// Looks records up by utterance_id. Trial lists refer to utterances by this
// id alone, so an id shared by several records cannot be resolved.
class UtteranceIndex {
 public:
  explicit UtteranceIndex(const EmbeddingStore& store);

  // Throws FormatError for unknown or ambiguous ids.
  std::size_t at(std::uint32_t utterance_id) const;
  bool contains(std::uint32_t utterance_id) const;

 private:
  static constexpr std::size_t kAmbiguous = static_cast<std::size_t>(-1);
  std::unordered_map<std::uint32_t, std::size_t> index_;
};

}  // namespace embfuse

#endif  // EMBFUSE_EMBEDDING_STORE_H_
