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

#ifndef EMBFUSE_METRICS_H_
#define EMBFUSE_METRICS_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "embfuse/embedding_store.h"
#include "embfuse/fusion_net.h"
#include "embfuse/trials.h"

namespace embfuse {

// Which embedding of each utterance a trial is scored on.
enum class ScoreMode { kNoisy, kEnhanced, kFused };

std::string_view score_mode_name(ScoreMode mode);
std::optional<ScoreMode> parse_score_mode(std::string_view s);

// Similarity scores (higher means more likely the same speaker) with labels.
struct ScoreSet {
  std::vector<double> scores;
  std::vector<TrialLabel> labels;

  void push_back(double score, TrialLabel label) {
    scores.push_back(score);
    labels.push_back(label);
  }
  std::size_t size() const { return scores.size(); }

  // Throws FormatError unless lengths match, both classes are present and all
  // scores are finite.
  void Validate() const;
};

// Cosine similarity per trial. Fused mode runs both sides through the same
// model. Throws FormatError on unknown ids, DimensionError on an n_dim clash,
// DegenerateInputError when a compared embedding has zero norm, and
// ConfigError if fused mode is requested without a model.
ScoreSet score_trials(const EmbeddingStore& store, const TrialList& trials,
                      const FusionModel* model, ScoreMode mode);

struct DetPoint {
  double threshold;
  double far;  // accepted nontargets / nontargets
  double frr;  // rejected targets / targets
};

// One point per distinct score (accept iff score >= threshold) in ascending
// threshold order, followed by a closing point at +infinity with
// (far, frr) = (0, 1).
std::vector<DetPoint> det_curve(const ScoreSet& s);

struct EerResult {
  double eer;        // fraction in [0, 1]
  double threshold;  // interpolated operating threshold
};

// Walks the DET points until far - frr first stops being positive. An exact
// zero gives eer = far there; otherwise far and frr are interpolated linearly
// between the two bracketing points at the zero of far - frr and
// eer = (far + frr) / 2.
EerResult compute_eer(const ScoreSet& s);

// EER of one (condition, mode) stratum.
struct ConditionEer {
  NoiseType noise_type;
  std::int16_t snr_db;
  ScoreMode mode;
  double eer;
  double threshold;
  std::size_t targets;
  std::size_t nontargets;
};

struct EvalReport {
  std::vector<ScoreMode> modes;
  // Sorted by (noise_type, snr_db descending), then mode order.
  std::vector<ConditionEer> rows;
  // Conditions skipped because one label class was empty.
  std::vector<std::pair<NoiseType, std::int16_t>> skipped;

  const ConditionEer* find(NoiseType noise_type, std::int16_t snr_db,
                           ScoreMode mode) const;
};

// Scores the trials once per mode and computes the EER per condition, where a
// trial belongs to the (noise_type, snr_db) of its test-side utterance.
EvalReport evaluate_conditions(const EmbeddingStore& store, const TrialList& trials,
                               const FusionModel* model,
                               const std::vector<ScoreMode>& modes);

// Table of EER percent (rows: condition, columns: modes) followed by one
// machine-readable line per row:
//   eer noise_type=<t> snr_db=<s> mode=<m> eer_percent=<x> threshold=<y>
//       targets=<n> nontargets=<k>
std::string format_report(const EvalReport& report);

}  // namespace embfuse

#endif  // EMBFUSE_METRICS_H_
