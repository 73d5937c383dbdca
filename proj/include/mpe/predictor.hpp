#pragma once

#include <string>
#include <vector>

#include "mpe/store.hpp"
#include "mpe/vocab.hpp"

namespace mpe {

enum class Backoff {
  None,
  UnseenObject,     // object token absent: its component contributed zero
  UnseenTime,       // slot token absent: its component contributed zero
  UnseenCurrent,    // current location absent: popularity ranking used
  EmptyCandidates,  // current location known but has no observed successors
};

const char* backoff_name(Backoff b);

struct Query {
  std::string object;
  std::string slot;
  std::string current;
};

struct ScoredToken {
  std::string token;
  double score;
};

struct RankedPrediction {
  std::vector<ScoredToken> items;  // score desc, token asc on ties
  Backoff backoff = Backoff::None;
};

// Everything rank_next needs besides the candidate index: trained embeddings,
// the mask they were trained under, vocabularies, and the training popularity
// of each next location (for backoff ranking).
struct MpeModel {
  EmbeddingStore store;
  ComponentMask mask;
  Vocabulary vocab;
  std::vector<int64_t> next_counts;
  bool full_vocab = false;  // rank the whole next vocabulary instead of candidates(l_i)
};

// Rank candidate successors of the query's current location, most probable
// first. Unseen object/time fall back to a zero component; an unseen current
// location (or an empty candidate row) falls back to global popularity.
RankedPrediction rank_next(const MpeModel& model, const CandidateIndex& candidates,
                           const Query& query, int k);

std::vector<RankedPrediction> predict_batch(const MpeModel& model,
                                            const CandidateIndex& candidates,
                                            const std::vector<Query>& queries, int k);

// Common interface for everything the evaluation harness can score.
struct Ranker {
  virtual ~Ranker() = default;
  virtual RankedPrediction rank(const Query& query, int k) const = 0;
};

class MpePredictor final : public Ranker {
 public:
  MpePredictor(const MpeModel* model, const CandidateIndex* candidates)
      : model_(model), candidates_(candidates) {}
  RankedPrediction rank(const Query& query, int k) const override {
    return rank_next(*model_, *candidates_, query, k);
  }

 private:
  const MpeModel* model_;
  const CandidateIndex* candidates_;
};

}  // namespace mpe
