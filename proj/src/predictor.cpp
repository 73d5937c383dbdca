#include "mpe/predictor.hpp"

#include <algorithm>
#include <numeric>

#include "mpe/errors.hpp"

namespace mpe {

const char* backoff_name(Backoff b) {
  switch (b) {
    case Backoff::None: return "none";
    case Backoff::UnseenObject: return "unseen_object";
    case Backoff::UnseenTime: return "unseen_time";
    case Backoff::UnseenCurrent: return "unseen_current";
    case Backoff::EmptyCandidates: return "empty_candidates";
  }
  return "none";
}

namespace {

void sort_and_truncate(std::vector<ScoredToken>& items, int k) {
  std::sort(items.begin(), items.end(), [](const ScoredToken& a, const ScoredToken& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.token < b.token;
  });
  if (items.size() > static_cast<size_t>(k)) items.resize(static_cast<size_t>(k));
}

RankedPrediction popularity_ranking(const MpeModel& model, int k, Backoff flag) {
  RankedPrediction out;
  out.backoff = flag;
  out.items.reserve(static_cast<size_t>(model.vocab.nexts.size()));
  for (Index j = 0; j < model.vocab.nexts.size(); ++j)
    out.items.push_back({model.vocab.nexts.token(j),
                         static_cast<double>(model.next_counts[static_cast<size_t>(j)])});
  sort_and_truncate(out.items, k);
  return out;
}

}  // namespace

RankedPrediction rank_next(const MpeModel& model, const CandidateIndex& candidates,
                           const Query& query, int k) {
  if (k < 1) throw DataError("k must be >= 1");

  Index cur = model.vocab.currents.lookup(query.current);
  if (cur < 0) return popularity_ranking(model, k, Backoff::UnseenCurrent);

  std::vector<Index> full_row;
  std::span<const Index> cands;
  if (model.full_vocab) {
    full_row.resize(static_cast<size_t>(model.vocab.nexts.size()));
    std::iota(full_row.begin(), full_row.end(), Index{0});
    cands = full_row;
  } else {
    cands = candidates.candidates(cur);
  }
  if (cands.empty()) return popularity_ranking(model, k, Backoff::EmptyCandidates);

  RankedPrediction out;
  Index obj = model.vocab.objects.lookup(query.object);
  Index slot = model.vocab.slots.lookup(query.slot);
  if (model.mask.use_object && obj < 0) out.backoff = Backoff::UnseenObject;
  else if (model.mask.use_time && slot < 0) out.backoff = Backoff::UnseenTime;

  const size_t dim = static_cast<size_t>(model.store.dim());
  std::vector<double> v(dim, 0.0);
  {
    auto lc = model.store.currents.row(cur);
    std::copy(lc.begin(), lc.end(), v.begin());
    if (model.mask.use_object && obj >= 0) {
      auto o = model.store.objects.row(obj);
      for (size_t d = 0; d < dim; ++d) v[d] += o[d];
    }
    if (model.mask.use_time && slot >= 0) {
      auto t = model.store.slots.row(slot);
      for (size_t d = 0; d < dim; ++d) v[d] += t[d];
    }
  }

  out.items.reserve(cands.size());
  for (Index c : cands)
    out.items.push_back({model.vocab.nexts.token(c), score_next(model.store, v, c)});
  sort_and_truncate(out.items, k);
  return out;
}

std::vector<RankedPrediction> predict_batch(const MpeModel& model,
                                            const CandidateIndex& candidates,
                                            const std::vector<Query>& queries, int k) {
  std::vector<RankedPrediction> out;
  out.reserve(queries.size());
  for (size_t i = 0; i < queries.size(); ++i) {
    try {
      out.push_back(rank_next(model, candidates, queries[i], k));
    } catch (const DataError& e) {
      throw DataError("query " + std::to_string(i) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace mpe
