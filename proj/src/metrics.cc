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

#include "embfuse/metrics.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

#include "embfuse/errors.h"
#include "embfuse/objective.h"

namespace embfuse {

namespace {

std::string Fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

std::string Threshold(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

}  // namespace

std::string_view score_mode_name(ScoreMode mode) {
  switch (mode) {
    case ScoreMode::kNoisy:
      return "noisy";
    case ScoreMode::kEnhanced:
      return "enhanced";
    case ScoreMode::kFused:
      return "fused";
  }
  return "unknown";
}

std::optional<ScoreMode> parse_score_mode(std::string_view s) {
  for (ScoreMode m : {ScoreMode::kNoisy, ScoreMode::kEnhanced, ScoreMode::kFused}) {
    if (s == score_mode_name(m)) return m;
  }
  return std::nullopt;
}

void ScoreSet::Validate() const {
  if (scores.size() != labels.size()) {
    throw FormatError("score set: scores and labels differ in length");
  }
  if (!all_finite(scores)) throw FormatError("score set: non-finite score");
  const auto targets = std::count(labels.begin(), labels.end(), TrialLabel::kTarget);
  if (targets == 0 || targets == static_cast<std::ptrdiff_t>(labels.size())) {
    throw FormatError("score set: needs at least one target and one nontarget");
  }
}

ScoreSet score_trials(const EmbeddingStore& store, const TrialList& trials,
                      const FusionModel* model, ScoreMode mode) {
  if (mode == ScoreMode::kFused) {
    if (model == nullptr) throw ConfigError("fused scoring requires a model");
    if (model->params.n_dim != store.n_dim) {
      throw DimensionError("model n_dim " + std::to_string(model->params.n_dim) +
                           " does not match store n_dim " + std::to_string(store.n_dim));
    }
  }
  const UtteranceIndex index(store);
  std::vector<std::optional<Vec>> fused(mode == ScoreMode::kFused ? store.records.size() : 0);
  auto embedding = [&](std::size_t i) -> const Vec& {
    const UtterancePair& r = store.records[i];
    switch (mode) {
      case ScoreMode::kNoisy:
        return r.noisy;
      case ScoreMode::kEnhanced:
        return r.enhanced;
      case ScoreMode::kFused:
        break;
    }
    if (!fused[i]) fused[i] = fuse(*model, r.noisy, r.enhanced);
    return *fused[i];
  };

  ScoreSet out;
  out.scores.reserve(trials.trials.size());
  out.labels.reserve(trials.trials.size());
  for (const Trial& t : trials.trials) {
    const Vec& a = embedding(index.at(t.enroll_utterance));
    const Vec& b = embedding(index.at(t.test_utterance));
    out.push_back(cosine_similarity(a, b), t.label);
  }
  return out;
}

std::vector<DetPoint> det_curve(const ScoreSet& s) {
  s.Validate();
  std::vector<std::size_t> order(s.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return s.scores[a] < s.scores[b];
  });
  const auto n_target = static_cast<std::size_t>(
      std::count(s.labels.begin(), s.labels.end(), TrialLabel::kTarget));
  const std::size_t n_nontarget = s.size() - n_target;

  std::vector<DetPoint> points;
  // Counts of scores strictly below the current threshold.
  std::size_t targets_below = 0;
  std::size_t nontargets_below = 0;
  std::size_t i = 0;
  while (i < order.size()) {
    const double threshold = s.scores[order[i]];
    points.push_back({threshold,
                      static_cast<double>(n_nontarget - nontargets_below) / n_nontarget,
                      static_cast<double>(targets_below) / n_target});
    while (i < order.size() && s.scores[order[i]] == threshold) {
      if (s.labels[order[i]] == TrialLabel::kTarget) {
        ++targets_below;
      } else {
        ++nontargets_below;
      }
      ++i;
    }
  }
  points.push_back({std::numeric_limits<double>::infinity(), 0.0, 1.0});
  return points;
}

EerResult compute_eer(const ScoreSet& s) {
  const std::vector<DetPoint> points = det_curve(s);
  // points.front() has far = 1, frr = 0 and points.back() far = 0, frr = 1,
  // so far - frr changes sign somewhere in between.
  for (std::size_t k = 1; k < points.size(); ++k) {
    const DetPoint& hi = points[k];
    const double diff_hi = hi.far - hi.frr;
    if (diff_hi > 0.0) continue;
    if (diff_hi == 0.0) return {hi.far, hi.threshold};
    const DetPoint& lo = points[k - 1];
    const double diff_lo = lo.far - lo.frr;
    const double t = diff_lo / (diff_lo - diff_hi);
    const double far = lo.far + t * (hi.far - lo.far);
    const double frr = lo.frr + t * (hi.frr - lo.frr);
    const double threshold = std::isinf(hi.threshold)
                                 ? lo.threshold
                                 : lo.threshold + t * (hi.threshold - lo.threshold);
    return {0.5 * (far + frr), threshold};
  }
  return {points.front().far, points.front().threshold};  // unreachable
}

const ConditionEer* EvalReport::find(NoiseType noise_type, std::int16_t snr_db,
                                     ScoreMode mode) const {
  for (const auto& row : rows) {
    if (row.noise_type == noise_type && row.snr_db == snr_db && row.mode == mode) {
      return &row;
    }
  }
  return nullptr;
}

EvalReport evaluate_conditions(const EmbeddingStore& store, const TrialList& trials,
                               const FusionModel* model,
                               const std::vector<ScoreMode>& modes) {
  validate_trials(trials, store);
  const UtteranceIndex index(store);

  // (noise_type, -snr) so that conditions come out from cleanest to noisiest.
  using Key = std::pair<NoiseType, int>;
  std::map<Key, std::vector<std::size_t>> strata;
  for (std::size_t i = 0; i < trials.trials.size(); ++i) {
    const auto& rec = store.records[index.at(trials.trials[i].test_utterance)];
    strata[{rec.noise_type, -static_cast<int>(rec.snr_db)}].push_back(i);
  }

  EvalReport report;
  report.modes = modes;
  std::vector<ScoreSet> by_mode;
  for (ScoreMode m : modes) by_mode.push_back(score_trials(store, trials, model, m));

  for (const auto& [key, members] : strata) {
    const auto snr = static_cast<std::int16_t>(-key.second);
    std::size_t targets = 0;
    for (std::size_t i : members) {
      if (trials.trials[i].label == TrialLabel::kTarget) ++targets;
    }
    if (targets == 0 || targets == members.size()) {
      report.skipped.emplace_back(key.first, snr);
      continue;
    }
    for (std::size_t m = 0; m < modes.size(); ++m) {
      ScoreSet sub;
      for (std::size_t i : members) sub.push_back(by_mode[m].scores[i], by_mode[m].labels[i]);
      const EerResult r = compute_eer(sub);
      report.rows.push_back({key.first, snr, modes[m], r.eer, r.threshold, targets,
                             members.size() - targets});
    }
  }
  return report;
}

std::string format_report(const EvalReport& report) {
  std::ostringstream out;
  char buf[128];
  std::snprintf(buf, sizeof(buf), "%-10s %6s", "type", "snr");
  out << buf;
  for (ScoreMode m : report.modes) {
    std::snprintf(buf, sizeof(buf), " %9s", std::string(score_mode_name(m)).c_str());
    out << buf;
  }
  out << "   (EER %)\n";
  for (std::size_t i = 0; i < report.rows.size(); i += report.modes.size()) {
    const ConditionEer& first = report.rows[i];
    std::snprintf(buf, sizeof(buf), "%-10s %6d",
                  std::string(noise_type_name(first.noise_type)).c_str(), first.snr_db);
    out << buf;
    for (std::size_t m = 0; m < report.modes.size(); ++m) {
      std::snprintf(buf, sizeof(buf), " %9.2f", 100.0 * report.rows[i + m].eer);
      out << buf;
    }
    out << '\n';
  }
  for (const auto& [type, snr] : report.skipped) {
    out << "# skipped " << noise_type_name(type) << ' ' << snr
        << " dB: trials of a single class\n";
  }
  for (const ConditionEer& row : report.rows) {
    out << "eer noise_type=" << noise_type_name(row.noise_type) << " snr_db=" << row.snr_db
        << " mode=" << score_mode_name(row.mode) << " eer_percent=" << Fixed(100.0 * row.eer, 4)
        << " threshold=" << Threshold(row.threshold) << " targets=" << row.targets
        << " nontargets=" << row.nontargets << '\n';
  }
  return out.str();
}

}  // namespace embfuse
