#include "mpe/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "mpe/errors.hpp"

namespace mpe {

namespace {

void validate_hyperparams(const Hyperparams& hp) {
  if (hp.dim < 1) throw DataError("dimensionality must be >= 1");
  if (hp.negatives < 1) throw DataError("negatives per instance must be >= 1");
  if (!(hp.lr > 0)) throw DataError("learning rate must be positive");
  if (hp.reg < 0) throw DataError("regularization must be non-negative");
  if (hp.epochs < 1) throw DataError("iteration count must be >= 1");
  if (hp.early_stop_rel_tol < 0) throw DataError("early-stop tolerance must be non-negative");
}

double squared_norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return s;
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (size_t d = 0; d < a.size(); ++d) {
    double diff = a[d] - b[d];
    s += diff * diff;
  }
  return s;
}

[[noreturn]] void throw_non_finite(const EmbeddingStore& store, const ComponentMask& mask,
                                   const TrainingInstance& inst) {
  auto bad = [](std::span<const double> row) {
    return std::any_of(row.begin(), row.end(),
                       [](double v) { return !std::isfinite(v); });
  };
  std::string which = "distance computation (parameter magnitudes exploded)";
  if (mask.use_object && bad(store.objects.row(inst.object)))
    which = "object row " + std::to_string(inst.object);
  else if (mask.use_time && bad(store.slots.row(inst.slot)))
    which = "time-slot row " + std::to_string(inst.slot);
  else if (bad(store.currents.row(inst.current)))
    which = "current-location row " + std::to_string(inst.current);
  else if (bad(store.nexts.row(inst.next)))
    which = "next-location row " + std::to_string(inst.next);
  else if (bad(store.nexts.row(inst.negative)))
    which = "next-location row " + std::to_string(inst.negative);
  throw NumericalError("non-finite value in " + which +
                       " (learning rate likely too large)");
}

// Exclusion set for one quadruple under the given sampling mode. The
// context-excluded vector comes from the prebuilt index; the true-only vector
// is a single element. Both are sorted.
std::span<const Index> exclusion_for(const IndexedTrainingSet& set, const Quadruple& q,
                                     NegativeMode mode, std::vector<Index>& scratch) {
  if (mode == NegativeMode::ContextExcluded)
    return set.contexts.nexts_of(q.object, q.slot, q.current);
  scratch.assign(1, q.next);
  return scratch;
}

}  // namespace

Index sample_negative(Rng& rng, Index next_vocab_size, std::span<const Index> excluded) {
  if (next_vocab_size < 1) throw DataError("empty next-location vocabulary");
  if (static_cast<size_t>(next_vocab_size) <= excluded.size())
    throw DataError("every next location is excluded; cannot sample a negative");
  while (true) {
    Index draw = static_cast<Index>(rng.next_below(static_cast<size_t>(next_vocab_size)));
    if (!std::binary_search(excluded.begin(), excluded.end(), draw)) return draw;
  }
}

double instance_objective(const EmbeddingStore& store, const ComponentMask& mask,
                          const TrainingInstance& inst, double reg) {
  std::vector<double> v(static_cast<size_t>(store.dim()));
  conditional_vector(store, mask, inst.object, inst.slot, inst.current, v);
  double z = squared_distance(store.nexts.row(inst.negative), v) -
             squared_distance(store.nexts.row(inst.next), v);
  double penalty = squared_norm(store.currents.row(inst.current)) +
                   squared_norm(store.nexts.row(inst.next)) +
                   squared_norm(store.nexts.row(inst.negative));
  if (mask.use_object) penalty += squared_norm(store.objects.row(inst.object));
  if (mask.use_time) penalty += squared_norm(store.slots.row(inst.slot));
  return log_sigmoid(z) - reg * penalty;
}

void sgd_step(EmbeddingStore& store, const ComponentMask& mask,
              const TrainingInstance& inst, double lr, double reg) {
  const size_t dim = static_cast<size_t>(store.dim());
  std::vector<double> v(dim);
  conditional_vector(store, mask, inst.object, inst.slot, inst.current, v);

  // Snapshots so all five updates see pre-step values even when rows alias.
  std::vector<double> pos(store.nexts.row(inst.next).begin(),
                          store.nexts.row(inst.next).end());
  std::vector<double> neg(store.nexts.row(inst.negative).begin(),
                          store.nexts.row(inst.negative).end());

  double z = squared_distance(neg, v) - squared_distance(pos, v);
  if (!std::isfinite(z)) throw_non_finite(store, mask, inst);
  double g = 1.0 - sigmoid(z);

  auto update_context = [&](std::span<double> row) {
    for (size_t d = 0; d < dim; ++d)
      row[d] += 2.0 * lr * (g * (pos[d] - neg[d]) - reg * row[d]);
  };
  if (mask.use_object) update_context(store.objects.row(inst.object));
  if (mask.use_time) update_context(store.slots.row(inst.slot));
  update_context(store.currents.row(inst.current));

  auto ln_pos = store.nexts.row(inst.next);
  auto ln_neg = store.nexts.row(inst.negative);
  for (size_t d = 0; d < dim; ++d) {
    ln_pos[d] += 2.0 * lr * (g * (v[d] - pos[d]) - reg * pos[d]);
    ln_neg[d] += 2.0 * lr * (g * (neg[d] - v[d]) - reg * neg[d]);
  }
}

double objective(const EmbeddingStore& store, const ComponentMask& mask,
                 const IndexedTrainingSet& set, int negatives, double reg,
                 NegativeMode mode, Rng& rng) {
  const size_t dim = static_cast<size_t>(store.dim());
  std::vector<double> v(dim);
  std::vector<char> touched_obj(static_cast<size_t>(store.objects.rows()), 0);
  std::vector<char> touched_slot(static_cast<size_t>(store.slots.rows()), 0);
  std::vector<char> touched_cur(static_cast<size_t>(store.currents.rows()), 0);
  std::vector<char> touched_next(static_cast<size_t>(store.nexts.rows()), 0);
  std::vector<Index> scratch;

  double total = 0.0;
  for (const Quadruple& q : set.quadruples) {
    conditional_vector(store, mask, q.object, q.slot, q.current, v);
    double dist_pos = squared_distance(store.nexts.row(q.next), v);
    auto excluded = exclusion_for(set, q, mode, scratch);
    for (int k = 0; k < negatives; ++k) {
      Index m = sample_negative(rng, store.nexts.rows(), excluded);
      double z = squared_distance(store.nexts.row(m), v) - dist_pos;
      total += log_sigmoid(z);
      touched_next[static_cast<size_t>(m)] = 1;
    }
    if (mask.use_object) touched_obj[static_cast<size_t>(q.object)] = 1;
    if (mask.use_time) touched_slot[static_cast<size_t>(q.slot)] = 1;
    touched_cur[static_cast<size_t>(q.current)] = 1;
    touched_next[static_cast<size_t>(q.next)] = 1;
  }
  if (reg > 0) {
    auto penalize = [&](const Matrix& m, const std::vector<char>& touched) {
      for (Index r = 0; r < m.rows(); ++r)
        if (touched[static_cast<size_t>(r)]) total -= reg * squared_norm(m.row(r));
    };
    penalize(store.objects, touched_obj);
    penalize(store.slots, touched_slot);
    penalize(store.currents, touched_cur);
    penalize(store.nexts, touched_next);
  }
  return total;
}

TrainResult train(const IndexedTrainingSet& set, const ComponentMask& mask,
                  const Hyperparams& hp, const EpochCallback& callback) {
  validate_hyperparams(hp);
  if (set.quadruples.empty()) throw DataError("training set is empty");

  TrainResult result;
  result.store = init_store(set.vocab, hp.dim, hp.seed);
  Rng rng_shuffle(derive_seed(hp.seed, "shuffle"));
  Rng rng_neg(derive_seed(hp.seed, "negatives"));
  Rng rng_obj(derive_seed(hp.seed, "objective"));

  std::vector<size_t> order(set.quadruples.size());
  std::iota(order.begin(), order.end(), size_t{0});
  std::vector<Index> scratch;

  for (int epoch = 1; epoch <= hp.epochs; ++epoch) {
    rng_shuffle.shuffle(order);
    for (size_t idx : order) {
      const Quadruple& q = set.quadruples[idx];
      auto excluded = exclusion_for(set, q, hp.negative_mode, scratch);
      for (int k = 0; k < hp.negatives; ++k) {
        TrainingInstance inst{q.object, q.slot, q.current, q.next,
                              sample_negative(rng_neg, set.vocab.nexts.size(), excluded)};
        sgd_step(result.store, mask, inst, hp.lr, hp.reg);
        ++result.sgd_steps;
      }
    }
    if (!result.store.all_finite())
      throw NumericalError("non-finite embeddings after epoch " + std::to_string(epoch));
    double ell = objective(result.store, mask, set, hp.negatives, hp.reg,
                           hp.negative_mode, rng_obj);
    result.epoch_objectives.push_back(ell);
    if (callback) callback(epoch, ell);
    if (hp.early_stop_rel_tol > 0 && result.epoch_objectives.size() >= 2) {
      double prev = result.epoch_objectives[result.epoch_objectives.size() - 2];
      if (std::abs(ell - prev) < hp.early_stop_rel_tol * std::abs(prev)) break;
    }
  }
  return result;
}

TrainResult train_tied(const IndexedTrainingSet& set, const ComponentMask& mask,
                       const Hyperparams& hp) {
  validate_hyperparams(hp);
  if (set.quadruples.empty()) throw DataError("training set is empty");

  // One shared row per location token, spanning both roles.
  TokenIndexer shared;
  std::vector<Index> cur2shared(static_cast<size_t>(set.vocab.currents.size()));
  std::vector<Index> next2shared(static_cast<size_t>(set.vocab.nexts.size()));
  for (Index i = 0; i < set.vocab.currents.size(); ++i)
    cur2shared[static_cast<size_t>(i)] = shared.add(set.vocab.currents.token(i));
  for (Index j = 0; j < set.vocab.nexts.size(); ++j)
    next2shared[static_cast<size_t>(j)] = shared.add(set.vocab.nexts.token(j));

  const size_t dim = static_cast<size_t>(hp.dim);
  Matrix objects(set.vocab.objects.size(), hp.dim);
  Matrix slots(set.vocab.slots.size(), hp.dim);
  Matrix locs(shared.size(), hp.dim);
  {
    Rng rng(derive_seed(hp.seed, "init"));
    for (Matrix* m : {&objects, &slots, &locs})
      for (double& x : m->data()) x = rng.next_gaussian(0.0, 0.1);
  }

  Rng rng_shuffle(derive_seed(hp.seed, "shuffle"));
  Rng rng_neg(derive_seed(hp.seed, "negatives"));
  Rng rng_obj(derive_seed(hp.seed, "objective"));

  std::vector<size_t> order(set.quadruples.size());
  std::iota(order.begin(), order.end(), size_t{0});
  std::vector<Index> scratch;
  std::vector<double> v(dim);

  auto cond_vec = [&](const Quadruple& q) {
    auto lc = locs.row(cur2shared[static_cast<size_t>(q.current)]);
    std::copy(lc.begin(), lc.end(), v.begin());
    if (mask.use_object) {
      auto o = objects.row(q.object);
      for (size_t d = 0; d < dim; ++d) v[d] += o[d];
    }
    if (mask.use_time) {
      auto t = slots.row(q.slot);
      for (size_t d = 0; d < dim; ++d) v[d] += t[d];
    }
  };

  auto tied_step = [&](const Quadruple& q, Index negative) {
    Index li = cur2shared[static_cast<size_t>(q.current)];
    Index lj = next2shared[static_cast<size_t>(q.next)];
    Index lm = next2shared[static_cast<size_t>(negative)];
    cond_vec(q);
    std::vector<double> pos(locs.row(lj).begin(), locs.row(lj).end());
    std::vector<double> neg(locs.row(lm).begin(), locs.row(lm).end());
    double z = squared_distance(neg, v) - squared_distance(pos, v);
    if (!std::isfinite(z))
      throw NumericalError("non-finite value in tied location update");
    double g = 1.0 - sigmoid(z);

    // Accumulate per shared row: the z-gradient of every role the row plays
    // plus one regularization term per role occurrence, all from snapshots.
    Index rows[3] = {li, lj, lm};
    std::vector<double> delta(3 * dim, 0.0);
    auto add_role = [&](int slot_idx, auto&& grad_of) {
      for (size_t d = 0; d < dim; ++d) delta[slot_idx * dim + d] += grad_of(d);
    };
    // role li (context): g * 2(pos - neg)
    add_role(0, [&](size_t d) { return 2.0 * (g * (pos[d] - neg[d]) - hp.reg * locs.row(li)[d]); });
    // role lj (positive): g * 2(v - pos)
    add_role(1, [&](size_t d) { return 2.0 * (g * (v[d] - pos[d]) - hp.reg * pos[d]); });
    // role lm (negative): g * 2(neg - v)
    add_role(2, [&](size_t d) { return 2.0 * (g * (neg[d] - v[d]) - hp.reg * neg[d]); });

    if (mask.use_object) {
      auto row = objects.row(q.object);
      for (size_t d = 0; d < dim; ++d)
        row[d] += 2.0 * hp.lr * (g * (pos[d] - neg[d]) - hp.reg * row[d]);
    }
    if (mask.use_time) {
      auto row = slots.row(q.slot);
      for (size_t d = 0; d < dim; ++d)
        row[d] += 2.0 * hp.lr * (g * (pos[d] - neg[d]) - hp.reg * row[d]);
    }
    for (int r = 0; r < 3; ++r) {
      auto row = locs.row(rows[r]);
      for (size_t d = 0; d < dim; ++d) row[d] += hp.lr * delta[r * dim + d];
    }
  };

  auto tied_objective = [&]() {
    double total = 0.0;
    std::vector<char> touched_obj(static_cast<size_t>(objects.rows()), 0);
    std::vector<char> touched_slot(static_cast<size_t>(slots.rows()), 0);
    std::vector<char> touched_loc(static_cast<size_t>(locs.rows()), 0);
    for (const Quadruple& q : set.quadruples) {
      cond_vec(q);
      double dist_pos =
          squared_distance(locs.row(next2shared[static_cast<size_t>(q.next)]), v);
      auto excluded = exclusion_for(set, q, hp.negative_mode, scratch);
      for (int k = 0; k < hp.negatives; ++k) {
        Index m = sample_negative(rng_obj, set.vocab.nexts.size(), excluded);
        double z = squared_distance(locs.row(next2shared[static_cast<size_t>(m)]), v) - dist_pos;
        total += log_sigmoid(z);
        touched_loc[static_cast<size_t>(next2shared[static_cast<size_t>(m)])] = 1;
      }
      if (mask.use_object) touched_obj[static_cast<size_t>(q.object)] = 1;
      if (mask.use_time) touched_slot[static_cast<size_t>(q.slot)] = 1;
      touched_loc[static_cast<size_t>(cur2shared[static_cast<size_t>(q.current)])] = 1;
      touched_loc[static_cast<size_t>(next2shared[static_cast<size_t>(q.next)])] = 1;
    }
    if (hp.reg > 0) {
      for (Index r = 0; r < objects.rows(); ++r)
        if (touched_obj[static_cast<size_t>(r)]) total -= hp.reg * squared_norm(objects.row(r));
      for (Index r = 0; r < slots.rows(); ++r)
        if (touched_slot[static_cast<size_t>(r)]) total -= hp.reg * squared_norm(slots.row(r));
      for (Index r = 0; r < locs.rows(); ++r)
        if (touched_loc[static_cast<size_t>(r)]) total -= hp.reg * squared_norm(locs.row(r));
    }
    return total;
  };

  TrainResult result;
  for (int epoch = 1; epoch <= hp.epochs; ++epoch) {
    rng_shuffle.shuffle(order);
    for (size_t idx : order) {
      const Quadruple& q = set.quadruples[idx];
      auto excluded = exclusion_for(set, q, hp.negative_mode, scratch);
      for (int k = 0; k < hp.negatives; ++k) {
        tied_step(q, sample_negative(rng_neg, set.vocab.nexts.size(), excluded));
        ++result.sgd_steps;
      }
    }
    result.epoch_objectives.push_back(tied_objective());
    if (hp.early_stop_rel_tol > 0 && result.epoch_objectives.size() >= 2) {
      double prev = result.epoch_objectives[result.epoch_objectives.size() - 2];
      if (std::abs(result.epoch_objectives.back() - prev) <
          hp.early_stop_rel_tol * std::abs(prev))
        break;
    }
  }

  // Materialize role matrices so the regular predictor works on the result.
  result.store.objects = std::move(objects);
  result.store.slots = std::move(slots);
  result.store.currents = Matrix(set.vocab.currents.size(), hp.dim);
  result.store.nexts = Matrix(set.vocab.nexts.size(), hp.dim);
  for (Index i = 0; i < set.vocab.currents.size(); ++i) {
    auto src = locs.row(cur2shared[static_cast<size_t>(i)]);
    auto dst = result.store.currents.row(i);
    std::copy(src.begin(), src.end(), dst.begin());
  }
  for (Index j = 0; j < set.vocab.nexts.size(); ++j) {
    auto src = locs.row(next2shared[static_cast<size_t>(j)]);
    auto dst = result.store.nexts.row(j);
    std::copy(src.begin(), src.end(), dst.begin());
  }
  return result;
}

}  // namespace mpe
