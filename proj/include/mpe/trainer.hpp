#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "mpe/rng.hpp"
#include "mpe/store.hpp"
#include "mpe/vocab.hpp"

namespace mpe {

struct TrainingInstance {
  Index object;
  Index slot;
  Index current;
  Index next;      // observed next location l_j
  Index negative;  // sampled unobserved next location l_m
};

// Uniform draw over [0, next_vocab_size) rejection-resampled until the result
// is outside `excluded` (which must be sorted ascending).
Index sample_negative(Rng& rng, Index next_vocab_size, std::span<const Index> excluded);

// The per-instance MAP objective: log sigmoid(z) minus reg times the squared
// norms of the five touched rows (masked-off components excluded). This is
// the function whose gradient ascent step sgd_step realizes.
double instance_objective(const EmbeddingStore& store, const ComponentMask& mask,
                          const TrainingInstance& inst, double reg);

// One simultaneous five-row update with step size lr: all gradients are
// evaluated at the pre-step parameter values, then applied together.
void sgd_step(EmbeddingStore& store, const ComponentMask& mask,
              const TrainingInstance& inst, double lr, double reg);

// Monitoring objective over the full quadruple list with fresh negatives; the
// regularizer covers each touched row once.
double objective(const EmbeddingStore& store, const ComponentMask& mask,
                 const IndexedTrainingSet& set, int negatives, double reg,
                 NegativeMode mode, Rng& rng);

using EpochCallback = std::function<void(int epoch, double objective)>;

struct TrainResult {
  EmbeddingStore store;
  std::vector<double> epoch_objectives;
  uint64_t sgd_steps = 0;
};

// The full training loop: seeded init, per-epoch reshuffle, M negatives per
// quadruple, per-epoch objective + callback, optional relative early stop.
TrainResult train(const IndexedTrainingSet& set, const ComponentMask& mask,
                  const Hyperparams& hp, const EpochCallback& callback = nullptr);

// Ablation for experiments: current-role and next-role rows of the same
// location token share one parameter vector. Returns a store whose Lc and Ln
// matrices are materialized views of the shared matrix, so prediction code
// works unchanged.
TrainResult train_tied(const IndexedTrainingSet& set, const ComponentMask& mask,
                       const Hyperparams& hp);

}  // namespace mpe
