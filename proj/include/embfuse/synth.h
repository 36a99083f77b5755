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

#ifndef EMBFUSE_SYNTH_H_
#define EMBFUSE_SYNTH_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "embfuse/embedding_store.h"
#include "embfuse/tensor.h"

namespace embfuse {

// Maps an SNR in dB to a non-negative perturbation scale.
using SnrMap = std::function<double(int snr_db)>;

// clip(0.05 * 10^(-snr/20), 0, 3)
double default_noise_scale(int snr_db);
// 0.25 * default_noise_scale(snr)
double default_enhance_residual(int snr_db);
// 0.4
double default_enhance_distortion(int snr_db);

// Parameters of the synthetic paired-embedding generator.
//
// For every speaker a centroid c and a distortion direction b are drawn
// uniformly on the unit sphere. Every utterance of that speaker gets one clean
// embedding
//   clean = normalize(c + clean_spread * g1)
// which is then rendered once per SNR s of the grid as
//   noisy    = normalize(clean + noise_scale(s) * g2)
//   enhanced = normalize(clean + enhance_residual(s) * g3 + enhance_distortion(s) * b)
// with fresh standard Gaussian vectors g1, g2, g3. The enhancer thus removes
// most of the noise but pulls every utterance toward a speaker-specific
// artifact direction.
struct SynthCfg {
  std::size_t n_speakers = 50;
  std::size_t utts_per_speaker = 20;
  std::size_t n_dim = 64;
  std::vector<std::int16_t> snr_grid = {0, -5, -10, -15, -20};
  // Drives the speaker draws (centroids, distortion directions).
  std::uint64_t seed = 42;
  // Drives the utterance draws. When unset it is taken from the speaker
  // stream, so one seed fixes the whole store; setting it yields fresh
  // utterances of the same speakers.
  std::optional<std::uint64_t> utterance_seed;
  NoiseType noise_type = NoiseType::kSynthetic;
  std::uint32_t first_speaker_id = 0;
  double clean_spread = 0.3;
  SnrMap noise_scale_fn = default_noise_scale;
  SnrMap enhance_residual_fn = default_enhance_residual;
  SnrMap enhance_distortion_fn = default_enhance_distortion;

  // Throws ConfigError on empty sizes or grid, out-of-range or repeated SNRs,
  // a noise scale that is not strictly decreasing over the grid, a residual
  // not below the noise scale at grid SNRs <= -10 dB, or a non-positive
  // distortion.
  void Validate() const;
};

// Record layout: speakers in order, utterances in order, then the grid in
// configured order. utterance_id = (speaker * utts_per_speaker + utt) *
// grid_size + grid_index, unique across the store. Embeddings are rounded to
// float so the in-memory store equals what write_store persists.
// If clean_out is given it receives the clean embedding behind each record.
EmbeddingStore synth_generate(const SynthCfg& cfg, std::vector<Vec>* clean_out = nullptr);

}  // namespace embfuse

#endif  // EMBFUSE_SYNTH_H_
