#include "mpe/store.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mpe/errors.hpp"
#include "mpe/rng.hpp"

namespace mpe {

bool EmbeddingStore::all_finite() const {
  auto ok = [](const Matrix& m) {
    return std::all_of(m.data().begin(), m.data().end(),
                       [](double v) { return std::isfinite(v); });
  };
  return ok(objects) && ok(slots) && ok(currents) && ok(nexts);
}

EmbeddingStore init_store(const Vocabulary& vocab, Index dim, uint64_t seed) {
  if (dim <= 0) throw DataError("embedding dimension must be positive");
  if (vocab.objects.size() == 0 || vocab.slots.size() == 0 ||
      vocab.currents.size() == 0 || vocab.nexts.size() == 0)
    throw DataError("cannot initialize embeddings for an empty vocabulary");
  EmbeddingStore store;
  store.objects = Matrix(vocab.objects.size(), dim);
  store.slots = Matrix(vocab.slots.size(), dim);
  store.currents = Matrix(vocab.currents.size(), dim);
  store.nexts = Matrix(vocab.nexts.size(), dim);
  Rng rng(derive_seed(seed, "init"));
  for (Matrix* m : {&store.objects, &store.slots, &store.currents, &store.nexts})
    for (double& v : m->data()) v = rng.next_gaussian(0.0, 0.1);
  return store;
}

void conditional_vector(const EmbeddingStore& store, const ComponentMask& mask,
                        Index object, Index slot, Index current,
                        std::span<double> out) {
  if (current < 0 || current >= store.currents.rows())
    throw DataError("current-location index out of range");
  if (mask.use_object && (object < 0 || object >= store.objects.rows()))
    throw DataError("object index out of range");
  if (mask.use_time && (slot < 0 || slot >= store.slots.rows()))
    throw DataError("time-slot index out of range");
  auto lc = store.currents.row(current);
  std::copy(lc.begin(), lc.end(), out.begin());
  if (mask.use_object) {
    auto o = store.objects.row(object);
    for (size_t d = 0; d < out.size(); ++d) out[d] += o[d];
  }
  if (mask.use_time) {
    auto t = store.slots.row(slot);
    for (size_t d = 0; d < out.size(); ++d) out[d] += t[d];
  }
}

double score_next(const EmbeddingStore& store, std::span<const double> v, Index next) {
  if (next < 0 || next >= store.nexts.rows())
    throw DataError("next-location index out of range");
  auto ln = store.nexts.row(next);
  double dist = 0.0;
  for (size_t d = 0; d < v.size(); ++d) {
    double diff = ln[d] - v[d];
    dist += diff * diff;
  }
  return -dist;
}

std::vector<double> probability(const EmbeddingStore& store, const ComponentMask& mask,
                                Index object, Index slot, Index current,
                                std::span<const Index> candidates) {
  if (candidates.empty()) throw DataError("empty candidate set");
  std::vector<double> v(static_cast<size_t>(store.dim()));
  conditional_vector(store, mask, object, slot, current, v);
  std::vector<double> scores(candidates.size());
  double best = -std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < candidates.size(); ++i) {
    scores[i] = score_next(store, v, candidates[i]);
    best = std::max(best, scores[i]);
  }
  double denom = 0.0;
  for (double& s : scores) {
    s = std::exp(s - best);
    denom += s;
  }
  for (double& s : scores) s /= denom;
  return scores;
}

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

double log_sigmoid(double x) {
  // log(1/(1+e^-x)) = -log1p(e^-x) for x >= 0, x - log1p(e^x) otherwise.
  if (x >= 0) return -std::log1p(std::exp(-x));
  return x - std::log1p(std::exp(x));
}

}  // namespace mpe
