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

#include "embfuse/trainer.h"

#include <algorithm>
#include <cmath>
#include <string>
#include <thread>
#include <vector>

#include "embfuse/errors.h"

namespace embfuse {

void TrainOptions::Validate() const {
  if (n_epochs == 0) throw ConfigError("n_epochs must be positive");
  if (batch_size == 0) throw ConfigError("batch_size must be positive");
  if (threads == 0) throw ConfigError("threads must be positive");
  TripletLossCfg{margin_alpha}.Validate();
  AdamWConfig adam;
  adam.lr = lr;
  adam.weight_decay = weight_decay;
  adam.Validate();
}

double accumulate_triplet(const FusionModel& model, const UtterancePair& anchor,
                          const UtterancePair& positive, const UtterancePair& negative,
                          const TripletLossCfg& cfg, GradAccum* accum) {
  const FusionParams& p = model.params;
  const bool norm = model.normalize_inputs;
  const ForwardTrace ta = fuse_forward(p, anchor.noisy, anchor.enhanced, norm);
  const ForwardTrace tp = fuse_forward(p, positive.noisy, positive.enhanced, norm);
  const ForwardTrace tn = fuse_forward(p, negative.noisy, negative.enhanced, norm);

  const TripletGrad g = triplet_loss_grad(ta.output(), tp.output(), tn.output(), cfg);
  ++accum->triplet_count;
  if (g.loss > 0.0) {
    fuse_backward(p, ta, g.anchor, accum);
    fuse_backward(p, tp, g.positive, accum);
    fuse_backward(p, tn, g.negative, accum);
  }
  return g.loss;
}

double accumulate_batch(const FusionModel& model, const EmbeddingStore& store,
                        std::span<const Triplet> batch, const TripletLossCfg& cfg,
                        std::size_t threads, GradAccum* accum) {
  auto run = [&](std::span<const Triplet> part, GradAccum* into) {
    double loss = 0.0;
    for (const Triplet& t : part) {
      loss += accumulate_triplet(model, store.records[t.anchor], store.records[t.positive],
                                 store.records[t.negative], cfg, into);
    }
    return loss;
  };

  double loss = 0.0;
  const std::size_t workers = std::min(threads, batch.size());
  if (workers <= 1) {
    loss = run(batch, accum);
  } else {
    std::vector<GradAccum> partial(workers, GradAccum(model.params.n_dim));
    std::vector<double> losses(workers, 0.0);
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    const std::size_t chunk = (batch.size() + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
      const std::size_t begin = std::min(batch.size(), w * chunk);
      const std::size_t end = std::min(batch.size(), begin + chunk);
      pool.emplace_back([&, w, begin, end] {
        try {
          losses[w] = run(batch.subspan(begin, end - begin), &partial[w]);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (std::size_t w = 0; w < workers; ++w) {
      if (errors[w]) std::rethrow_exception(errors[w]);
      accum->Merge(partial[w]);
      loss += losses[w];
    }
  }
  if (!std::isfinite(loss)) throw NumericalError("non-finite triplet loss");
  return loss;
}

FusionModel train_fusion(const EmbeddingStore& store, const TrainOptions& opt,
                         const std::function<void(const EpochStats&)>& on_epoch) {
  opt.Validate();
  store.Validate();
  const TripletSampler sampler(store);
  const TripletLossCfg loss_cfg{opt.margin_alpha};
  AdamWConfig adam_cfg;
  adam_cfg.lr = opt.lr;
  adam_cfg.weight_decay = opt.weight_decay;

  Rng rng(opt.seed);
  FusionModel model;
  model.params = init_params(store.n_dim, rng);
  model.normalize_inputs = opt.normalize_inputs;
  AdamWState adam(store.n_dim, adam_cfg);

  const std::size_t steps =
      opt.steps_per_epoch > 0
          ? opt.steps_per_epoch
          : std::max<std::size_t>(1, (store.records.size() + opt.batch_size - 1) /
                                         opt.batch_size);
  GradAccum grads(store.n_dim);
  for (std::size_t epoch = 1; epoch <= opt.n_epochs; ++epoch) {
    EpochStats stats;
    stats.epoch = epoch;
    double loss_sum = 0.0;
    std::size_t triplets = 0;
    for (std::size_t step = 0; step < steps; ++step) {
      const std::vector<Triplet> batch = sampler.Sample(opt.batch_size, rng);
      grads.Clear();
      const double batch_loss =
          accumulate_batch(model, store, batch, loss_cfg, opt.threads, &grads);
      loss_sum += batch_loss;
      triplets += batch.size();
      if (batch_loss > 0.0) {
        adam.Step(grads, &model.params);
      } else {
        ++stats.skipped_steps;
      }
    }
    stats.mean_loss = loss_sum / static_cast<double>(triplets);
    if (on_epoch) on_epoch(stats);
  }
  model.params.Validate();
  return model;
}

}  // namespace embfuse
