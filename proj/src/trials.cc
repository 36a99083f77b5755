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

#include "embfuse/trials.h"

#include <algorithm>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <tuple>
#include <utility>

#include "embfuse/errors.h"

namespace embfuse {

namespace {

using RecordPair = std::pair<std::size_t, std::size_t>;

std::map<std::uint32_t, std::vector<std::size_t>> GroupBySpeaker(
    const EmbeddingStore& store) {
  std::map<std::uint32_t, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < store.records.size(); ++i) {
    groups[store.records[i].speaker_id].push_back(i);
  }
  return groups;
}

std::size_t PairCount(std::size_t k) { return k < 2 ? 0 : k * (k - 1) / 2; }

// Picks `n` items of `pool` uniformly without replacement.
template <typename T>
std::vector<T> PartialShuffle(std::vector<T> pool, std::size_t n, Rng& rng) {
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = i + rng.index(pool.size() - i);
    std::swap(pool[i], pool[j]);
  }
  pool.resize(n);
  return pool;
}

template <typename T>
void Shuffle(std::vector<T>* v, Rng& rng) {
  if (v->size() < 2) return;
  for (std::size_t i = v->size() - 1; i > 0; --i) {
    std::swap((*v)[i], (*v)[rng.index(i + 1)]);
  }
}

// q-th unordered pair (i < j) of k items, row-major over i.
RecordPair UnrankPair(std::size_t q, std::size_t k) {
  std::size_t i = 0;
  while (q >= k - 1 - i) {
    q -= k - 1 - i;
    ++i;
  }
  return {i, i + 1 + q};
}

std::vector<RecordPair> SampleTargetPairs(
    const std::vector<std::vector<std::size_t>>& groups, std::size_t capacity,
    std::size_t n, Rng& rng) {
  if (2 * n >= capacity) {
    std::vector<RecordPair> all;
    all.reserve(capacity);
    for (const auto& g : groups) {
      for (std::size_t i = 0; i < g.size(); ++i) {
        for (std::size_t j = i + 1; j < g.size(); ++j) all.emplace_back(g[i], g[j]);
      }
    }
    return PartialShuffle(std::move(all), n, rng);
  }
  std::vector<std::size_t> prefix;  // prefix[s] = pairs in groups before s
  std::size_t running = 0;
  for (const auto& g : groups) {
    prefix.push_back(running);
    running += PairCount(g.size());
  }
  std::set<RecordPair> seen;
  std::vector<RecordPair> out;
  while (out.size() < n) {
    const std::size_t r = rng.index(capacity);
    const auto it = std::upper_bound(prefix.begin(), prefix.end(), r);
    const std::size_t s = static_cast<std::size_t>(it - prefix.begin()) - 1;
    const auto local = UnrankPair(r - prefix[s], groups[s].size());
    const RecordPair p{groups[s][local.first], groups[s][local.second]};
    if (seen.insert(p).second) out.push_back(p);
  }
  return out;
}

std::vector<RecordPair> SampleNontargetPairs(const EmbeddingStore& store,
                                             std::size_t capacity, std::size_t n,
                                             Rng& rng) {
  const auto& recs = store.records;
  if (2 * n >= capacity) {
    std::vector<RecordPair> all;
    all.reserve(capacity);
    for (std::size_t a = 0; a < recs.size(); ++a) {
      for (std::size_t b = a + 1; b < recs.size(); ++b) {
        if (recs[a].speaker_id != recs[b].speaker_id) all.emplace_back(a, b);
      }
    }
    return PartialShuffle(std::move(all), n, rng);
  }
  std::set<RecordPair> seen;
  std::vector<RecordPair> out;
  while (out.size() < n) {
    std::size_t a = rng.index(recs.size());
    std::size_t b = rng.index(recs.size());
    if (recs[a].speaker_id == recs[b].speaker_id) continue;
    if (a > b) std::swap(a, b);
    if (seen.insert({a, b}).second) out.emplace_back(a, b);
  }
  return out;
}

}  // namespace

TripletSampler::TripletSampler(const EmbeddingStore& store) {
  std::map<std::uint32_t, std::size_t> slots;
  speaker_of_.reserve(store.records.size());
  slot_of_.reserve(store.records.size());
  for (std::size_t i = 0; i < store.records.size(); ++i) {
    const std::uint32_t spk = store.records[i].speaker_id;
    auto [it, inserted] = slots.emplace(spk, by_speaker_.size());
    if (inserted) by_speaker_.emplace_back();
    by_speaker_[it->second].push_back(i);
    speaker_of_.push_back(spk);
    slot_of_.push_back(it->second);
  }
  if (by_speaker_.size() < 2) {
    throw FormatError("triplet sampling needs at least two speakers, store has " +
                      std::to_string(by_speaker_.size()));
  }
  for (std::size_t i = 0; i < store.records.size(); ++i) {
    if (by_speaker_[slot_of_[i]].size() >= 2) anchors_.push_back(i);
  }
  if (anchors_.empty()) {
    throw FormatError("triplet sampling needs a speaker with at least two utterances");
  }
}

std::vector<Triplet> TripletSampler::Sample(std::size_t batch_size, Rng& rng) const {
  std::vector<Triplet> out;
  out.reserve(batch_size);
  const std::size_t n_records = speaker_of_.size();
  for (std::size_t b = 0; b < batch_size; ++b) {
    Triplet t;
    t.anchor = anchors_[rng.index(anchors_.size())];
    const auto& same = by_speaker_[slot_of_[t.anchor]];
    // Skip over the anchor's own slot so the positive is uniform over the rest.
    const auto anchor_pos = static_cast<std::size_t>(
        std::find(same.begin(), same.end(), t.anchor) - same.begin());
    std::size_t k = rng.index(same.size() - 1);
    if (k >= anchor_pos) ++k;
    t.positive = same[k];
    do {
      t.negative = rng.index(n_records);
    } while (speaker_of_[t.negative] == speaker_of_[t.anchor]);
    out.push_back(t);
  }
  return out;
}

std::vector<Triplet> sample_triplets(const EmbeddingStore& store,
                                     std::size_t batch_size, Rng& rng) {
  return TripletSampler(store).Sample(batch_size, rng);
}

std::size_t TrialList::target_count() const {
  return static_cast<std::size_t>(std::count_if(
      trials.begin(), trials.end(),
      [](const Trial& t) { return t.label == TrialLabel::kTarget; }));
}

std::size_t TrialList::nontarget_count() const {
  return trials.size() - target_count();
}

TrialList parse_trials(std::istream& in) {
  TrialList list;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream fields(line);
    std::string label;
    long long enroll = -1;
    long long test = -1;
    std::string extra;
    if (!(fields >> label >> enroll >> test) || (fields >> extra) ||
        (label != "0" && label != "1") || enroll < 0 || test < 0 ||
        enroll > UINT32_MAX || test > UINT32_MAX) {
      throw FormatError("trial list line " + std::to_string(line_no) +
                        ": expected '1|0 <enroll_id> <test_id>'");
    }
    list.trials.push_back({label == "1" ? TrialLabel::kTarget : TrialLabel::kNontarget,
                           static_cast<std::uint32_t>(enroll),
                           static_cast<std::uint32_t>(test)});
  }
  return list;
}

TrialList read_trials(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path);
  return parse_trials(in);
}

void write_trials(const TrialList& list, std::ostream& out) {
  for (const auto& t : list.trials) {
    out << (t.label == TrialLabel::kTarget ? '1' : '0') << ' ' << t.enroll_utterance
        << ' ' << t.test_utterance << '\n';
  }
}

void write_trials(const TrialList& list, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw FormatError("cannot open " + path + " for writing");
  write_trials(list, out);
  if (!out) throw FormatError("write failed: " + path);
}

void validate_trials(const TrialList& list, const EmbeddingStore& store) {
  const UtteranceIndex index(store);
  for (const auto& t : list.trials) {
    index.at(t.enroll_utterance);
    index.at(t.test_utterance);
  }
  if (list.target_count() == 0 || list.nontarget_count() == 0) {
    throw FormatError("trial list needs at least one target and one nontarget trial");
  }
}

TrialList build_trials(const EmbeddingStore& store, std::size_t n_target,
                       std::size_t n_nontarget, Rng& rng) {
  {
    std::set<std::uint32_t> ids;
    for (const auto& r : store.records) {
      if (!ids.insert(r.utterance_id).second) {
        throw FormatError("build_trials: utterance id " + std::to_string(r.utterance_id) +
                          " is not unique in the store");
      }
    }
  }
  std::vector<std::vector<std::size_t>> groups;
  for (auto& [spk, recs] : GroupBySpeaker(store)) groups.push_back(std::move(recs));

  std::size_t target_capacity = 0;
  for (const auto& g : groups) target_capacity += PairCount(g.size());
  const std::size_t nontarget_capacity =
      PairCount(store.records.size()) - target_capacity;
  if (n_target > target_capacity) {
    throw ConfigError("build_trials: " + std::to_string(n_target) +
                      " target trials requested, only " +
                      std::to_string(target_capacity) + " same-speaker pairs exist");
  }
  if (n_nontarget > nontarget_capacity) {
    throw ConfigError("build_trials: " + std::to_string(n_nontarget) +
                      " nontarget trials requested, only " +
                      std::to_string(nontarget_capacity) + " cross-speaker pairs exist");
  }

  const auto targets = SampleTargetPairs(groups, target_capacity, n_target, rng);
  const auto nontargets = SampleNontargetPairs(store, nontarget_capacity, n_nontarget, rng);

  TrialList list;
  list.trials.reserve(n_target + n_nontarget);
  auto emit = [&](const RecordPair& p, TrialLabel label) {
    std::size_t enroll = p.first;
    std::size_t test = p.second;
    if (rng.index(2) == 1) std::swap(enroll, test);
    list.trials.push_back({label, store.records[enroll].utterance_id,
                           store.records[test].utterance_id});
  };
  for (const auto& p : targets) emit(p, TrialLabel::kTarget);
  for (const auto& p : nontargets) emit(p, TrialLabel::kNontarget);
  Shuffle(&list.trials, rng);
  return list;
}

TrialList build_condition_trials(const EmbeddingStore& store,
                                 std::size_t n_target_per_condition,
                                 std::size_t n_nontarget_per_condition, Rng& rng) {
  std::map<std::pair<NoiseType, std::int16_t>, EmbeddingStore> conditions;
  for (const auto& r : store.records) {
    auto& sub = conditions[{r.noise_type, r.snr_db}];
    sub.n_dim = store.n_dim;
    sub.records.push_back(r);
  }
  TrialList all;
  for (const auto& [key, sub] : conditions) {
    const TrialList part =
        build_trials(sub, n_target_per_condition, n_nontarget_per_condition, rng);
    all.trials.insert(all.trials.end(), part.trials.begin(), part.trials.end());
  }
  return all;
}

}  // namespace embfuse
