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

#ifndef EMBFUSE_TRAINER_H_
#define EMBFUSE_TRAINER_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>

#include "embfuse/adamw.h"
#include "embfuse/embedding_store.h"
#include "embfuse/fusion_net.h"
#include "embfuse/objective.h"
#include "embfuse/trials.h"

namespace embfuse {

struct TrainOptions {
  std::size_t n_epochs = 10;
  std::size_t batch_size = 32;
  double lr = 1e-3;
  double margin_alpha = 0.25;
  double weight_decay = 1e-2;
  std::uint64_t seed = 42;
  bool normalize_inputs = true;
  // 0 means ceil(record_count / batch_size).
  std::size_t steps_per_epoch = 0;
  // Workers for the batch gradient. With more than one the per-worker sums
  // are merged in worker order, which is reproducible for a fixed thread
  // count but not bit-identical to the single-threaded sum.
  std::size_t threads = 1;

  void Validate() const;
};

struct EpochStats {
  std::size_t epoch = 0;  // 1-based
  double mean_loss = 0.0;
  std::size_t skipped_steps = 0;
};

// Forward pass of the three branches through one parameter set, the triplet
// loss on the fused outputs, and backpropagation of its gradient from all
// three branches into `accum`. Returns the loss and counts the triplet.
double accumulate_triplet(const FusionModel& model, const UtterancePair& anchor,
                          const UtterancePair& positive, const UtterancePair& negative,
                          const TripletLossCfg& cfg, GradAccum* accum);

// Sums the gradient of a batch of triplets into `accum` and returns the summed
// loss. Throws NumericalError on a non-finite loss.
double accumulate_batch(const FusionModel& model, const EmbeddingStore& store,
                        std::span<const Triplet> batch, const TripletLossCfg& cfg,
                        std::size_t threads, GradAccum* accum);

// Trains from init_params(seed). The RNG seeded with `seed` first initializes
// the weights and then drives triplet sampling. A batch whose triplets all
// have an inactive hinge carries no gradient and is skipped: neither the
// parameters nor the optimizer state change.
FusionModel train_fusion(const EmbeddingStore& store, const TrainOptions& opt,
                         const std::function<void(const EpochStats&)>& on_epoch = {});

}  // namespace embfuse

#endif  // EMBFUSE_TRAINER_H_
