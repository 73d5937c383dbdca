#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "mpe/trajectory.hpp"

namespace mpe {

using Index = int32_t;

// Bidirectional token <-> dense index map. Indices are assigned in first-seen
// order, so a deterministic input order yields a deterministic vocabulary.
class TokenIndexer {
 public:
  Index add(const std::string& token);           // inserts if absent
  Index lookup(const std::string& token) const;  // -1 if absent
  const std::string& token(Index i) const;
  Index size() const { return static_cast<Index>(tokens_.size()); }
  const std::vector<std::string>& tokens() const { return tokens_; }

 private:
  std::unordered_map<std::string, Index> map_;
  std::vector<std::string> tokens_;
};

// Four independent vocabularies: objects, time slots, current locations and
// next locations get separate index spaces even when tokens coincide.
struct Vocabulary {
  TokenIndexer objects;
  TokenIndexer slots;
  TokenIndexer currents;
  TokenIndexer nexts;
};

struct Quadruple {
  Index object;
  Index slot;
  Index current;
  Index next;
  bool operator==(const Quadruple&) const = default;
};

// current-location index -> sorted unique next-location indices seen in
// training. The ranking candidate set for a query is the row of its current
// location.
class CandidateIndex {
 public:
  void add(Index current, Index next);
  void finalize();  // sort + dedupe every row
  const std::vector<Index>& candidates(Index current) const;
  bool has(Index current) const;

 private:
  std::unordered_map<Index, std::vector<Index>> rows_;
  std::vector<Index> empty_;
};

// (object, slot, current) -> sorted unique next indices. Used to exclude all
// positives of a context when sampling negatives.
class ContextIndex {
 public:
  void add(const Quadruple& q);
  void finalize();
  const std::vector<Index>& nexts_of(Index object, Index slot, Index current) const;

 private:
  static uint64_t key(Index object, Index slot, Index current);
  std::unordered_map<uint64_t, std::vector<Index>> rows_;
  std::vector<Index> empty_;
};

struct IndexedTrainingSet {
  Vocabulary vocab;
  std::vector<Quadruple> quadruples;
  CandidateIndex candidates;
  ContextIndex contexts;
  std::vector<int64_t> next_counts;  // per next-index frequency in training
};

// Builds the vocabulary from training quadruples in input order, indexes the
// data, and precomputes the candidate/context structures.
IndexedTrainingSet build_vocab_and_index(const std::vector<TokenQuadruple>& train);

}  // namespace mpe
