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

#ifndef EMBFUSE_TRIALS_H_
#define EMBFUSE_TRIALS_H_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "embfuse/embedding_store.h"
#include "embfuse/tensor.h"

namespace embfuse {

// Record indices into an EmbeddingStore. The anchor and positive share a
// speaker and are distinct records; the negative has another speaker.
struct Triplet {
  std::size_t anchor = 0;
  std::size_t positive = 0;
  std::size_t negative = 0;

  bool operator==(const Triplet& other) const = default;
};

// Uniform random triplet mining. Anchors are drawn uniformly over the records
// whose speaker has at least two records, positives uniformly over the
// anchor speaker's other records, and negatives uniformly over records of
// every other speaker. Noise conditions are not matched.
class TripletSampler {
 public:
  // Throws FormatError if the store has fewer than two speakers or no
  // speaker with two records.
  explicit TripletSampler(const EmbeddingStore& store);

  std::vector<Triplet> Sample(std::size_t batch_size, Rng& rng) const;

 private:
  std::vector<std::uint32_t> speaker_of_;              // per record
  std::vector<std::vector<std::size_t>> by_speaker_;   // dense speaker slot -> records
  std::vector<std::size_t> slot_of_;                   // per record
  std::vector<std::size_t> anchors_;
};

std::vector<Triplet> sample_triplets(const EmbeddingStore& store,
                                     std::size_t batch_size, Rng& rng);

enum class TrialLabel : std::uint8_t { kNontarget = 0, kTarget = 1 };

struct Trial {
  TrialLabel label = TrialLabel::kNontarget;
  std::uint32_t enroll_utterance = 0;
  std::uint32_t test_utterance = 0;

  bool operator==(const Trial& other) const = default;
};

struct TrialList {
  std::vector<Trial> trials;

  std::size_t target_count() const;
  std::size_t nontarget_count() const;

  bool operator==(const TrialList& other) const = default;
};

// Text format: one trial per line, "1|0 <enroll_utt_id> <test_utt_id>".
TrialList parse_trials(std::istream& in);
TrialList read_trials(const std::string& path);
void write_trials(const TrialList& list, std::ostream& out);
void write_trials(const TrialList& list, const std::string& path);

// Throws FormatError if an id cannot be resolved in the store or if either
// label class is empty.
void validate_trials(const TrialList& list, const EmbeddingStore& store);

// Draws n_target distinct same-speaker pairs and n_nontarget distinct
// cross-speaker pairs uniformly, each as an unordered pair of records with a
// random enroll/test orientation, and returns them shuffled. Utterance ids
// must be unique within the store. Throws ConfigError when a request exceeds
// the number of available pairs.
TrialList build_trials(const EmbeddingStore& store, std::size_t n_target,
                       std::size_t n_nontarget, Rng& rng);

// build_trials run separately inside every (noise_type, snr_db) condition,
// so enroll and test sides always share a condition. Conditions are visited
// in ascending (noise_type, snr_db) order.
TrialList build_condition_trials(const EmbeddingStore& store,
                                 std::size_t n_target_per_condition,
                                 std::size_t n_nontarget_per_condition, Rng& rng);

}  // namespace embfuse

#endif  // EMBFUSE_TRIALS_H_
