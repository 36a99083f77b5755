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

#include "embfuse/synth.h"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "embfuse/errors.h"

namespace embfuse {

double default_noise_scale(int snr_db) {
  return std::clamp(0.05 * std::pow(10.0, -snr_db / 20.0), 0.0, 3.0);
}

double default_enhance_residual(int snr_db) { return 0.25 * default_noise_scale(snr_db); }

double default_enhance_distortion(int /*snr_db*/) { return 0.4; }

void SynthCfg::Validate() const {
  if (n_speakers == 0 || utts_per_speaker == 0 || n_dim == 0) {
    throw ConfigError("synth: n_speakers, utts_per_speaker and n_dim must be positive");
  }
  if (snr_grid.empty()) throw ConfigError("synth: snr_grid is empty");
  if (!noise_scale_fn || !enhance_residual_fn || !enhance_distortion_fn) {
    throw ConfigError("synth: missing SNR map");
  }
  if (!(clean_spread >= 0.0)) throw ConfigError("synth: clean_spread must be >= 0");
  const std::uint64_t total_utts =
      static_cast<std::uint64_t>(n_speakers) * utts_per_speaker * snr_grid.size();
  if (total_utts > UINT32_MAX ||
      static_cast<std::uint64_t>(first_speaker_id) + n_speakers > UINT32_MAX) {
    throw ConfigError("synth: ids would overflow 32 bits");
  }

  std::set<int> grid;
  for (int s : snr_grid) {
    if (s < kMinSnrDb || s > kMaxSnrDb) {
      throw ConfigError("synth: snr " + std::to_string(s) + " outside [-60, 60]");
    }
    if (!grid.insert(s).second) throw ConfigError("synth: repeated snr " + std::to_string(s));
  }
  double previous = 0.0;
  bool first = true;
  for (int s : grid) {  // ascending
    const double noise = noise_scale_fn(s);
    const double residual = enhance_residual_fn(s);
    const double distortion = enhance_distortion_fn(s);
    if (!(noise >= 0.0) || !(residual >= 0.0) || !std::isfinite(noise) ||
        !std::isfinite(residual) || !std::isfinite(distortion)) {
      throw ConfigError("synth: SNR maps must be finite and non-negative");
    }
    if (!first && !(noise < previous)) {
      throw ConfigError("synth: noise scale must strictly decrease with snr");
    }
    if (s <= -10 && !(residual < noise)) {
      throw ConfigError("synth: enhancement residual must be below the noise scale at " +
                        std::to_string(s) + " dB");
    }
    if (!(distortion > 0.0)) throw ConfigError("synth: enhancement distortion must be > 0");
    previous = noise;
    first = false;
  }
}

EmbeddingStore synth_generate(const SynthCfg& cfg, std::vector<Vec>* clean_out) {
  cfg.Validate();
  Rng speaker_rng(cfg.seed);
  const std::size_t n = cfg.n_dim;

  std::vector<Vec> centroids;
  std::vector<Vec> distortions;
  for (std::size_t s = 0; s < cfg.n_speakers; ++s) {
    centroids.push_back(speaker_rng.unit_vec(n));
    distortions.push_back(speaker_rng.unit_vec(n));
  }
  const std::uint64_t derived = speaker_rng.next_u64();
  Rng rng(cfg.utterance_seed.value_or(derived));

  EmbeddingStore store;
  store.n_dim = n;
  store.records.reserve(cfg.n_speakers * cfg.utts_per_speaker * cfg.snr_grid.size());
  if (clean_out) clean_out->clear();

  std::uint32_t next_utt = 0;
  for (std::size_t s = 0; s < cfg.n_speakers; ++s) {
    for (std::size_t u = 0; u < cfg.utts_per_speaker; ++u) {
      Vec clean = centroids[s];
      clean += cfg.clean_spread * rng.gaussian_vec(n);
      clean = normalized(clean);
      for (const std::int16_t snr : cfg.snr_grid) {
        UtterancePair rec;
        rec.speaker_id = cfg.first_speaker_id + static_cast<std::uint32_t>(s);
        rec.utterance_id = next_utt++;
        rec.noise_type = cfg.noise_type;
        rec.snr_db = snr;

        Vec noisy = clean;
        noisy += cfg.noise_scale_fn(snr) * rng.gaussian_vec(n);
        rec.noisy = normalized(noisy);

        Vec enhanced = clean;
        enhanced += cfg.enhance_residual_fn(snr) * rng.gaussian_vec(n);
        enhanced += cfg.enhance_distortion_fn(snr) * distortions[s];
        rec.enhanced = normalized(enhanced);

        store.records.push_back(std::move(rec));
        if (clean_out) clean_out->push_back(clean);
      }
    }
  }
  quantize_to_f32(&store);
  return store;
}

}  // namespace embfuse
