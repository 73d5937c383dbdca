#include "mpe/vocab.hpp"

#include <algorithm>

#include "mpe/errors.hpp"

namespace mpe {

Index TokenIndexer::add(const std::string& token) {
  auto [it, inserted] = map_.try_emplace(token, static_cast<Index>(tokens_.size()));
  if (inserted) tokens_.push_back(token);
  return it->second;
}

Index TokenIndexer::lookup(const std::string& token) const {
  auto it = map_.find(token);
  return it == map_.end() ? -1 : it->second;
}

const std::string& TokenIndexer::token(Index i) const {
  if (i < 0 || i >= size()) throw DataError("token index out of range");
  return tokens_[static_cast<size_t>(i)];
}

void CandidateIndex::add(Index current, Index next) {
  rows_[current].push_back(next);
}

void CandidateIndex::finalize() {
  for (auto& [cur, row] : rows_) {
    std::sort(row.begin(), row.end());
    row.erase(std::unique(row.begin(), row.end()), row.end());
  }
}

const std::vector<Index>& CandidateIndex::candidates(Index current) const {
  auto it = rows_.find(current);
  return it == rows_.end() ? empty_ : it->second;
}

bool CandidateIndex::has(Index current) const { return rows_.count(current) > 0; }

uint64_t ContextIndex::key(Index object, Index slot, Index current) {
  // 21 bits per field is ample: vocabularies are bounded far below 2^21.
  return (static_cast<uint64_t>(static_cast<uint32_t>(object)) << 42) |
         (static_cast<uint64_t>(static_cast<uint32_t>(slot) & 0x1FFFFF) << 21) |
         (static_cast<uint64_t>(static_cast<uint32_t>(current) & 0x1FFFFF));
}

void ContextIndex::add(const Quadruple& q) {
  rows_[key(q.object, q.slot, q.current)].push_back(q.next);
}

void ContextIndex::finalize() {
  for (auto& [k, row] : rows_) {
    std::sort(row.begin(), row.end());
    row.erase(std::unique(row.begin(), row.end()), row.end());
  }
}

const std::vector<Index>& ContextIndex::nexts_of(Index object, Index slot,
                                                 Index current) const {
  auto it = rows_.find(key(object, slot, current));
  return it == rows_.end() ? empty_ : it->second;
}

IndexedTrainingSet build_vocab_and_index(const std::vector<TokenQuadruple>& train) {
  if (train.empty()) throw DataError("training set is empty");
  IndexedTrainingSet set;
  set.quadruples.reserve(train.size());
  for (const auto& t : train) {
    Quadruple q;
    q.object = set.vocab.objects.add(t.object);
    q.slot = set.vocab.slots.add(t.slot);
    q.current = set.vocab.currents.add(t.current);
    q.next = set.vocab.nexts.add(t.next);
    set.quadruples.push_back(q);
    set.candidates.add(q.current, q.next);
    set.contexts.add(q);
  }
  set.candidates.finalize();
  set.contexts.finalize();
  set.next_counts.assign(static_cast<size_t>(set.vocab.nexts.size()), 0);
  for (const auto& q : set.quadruples) ++set.next_counts[static_cast<size_t>(q.next)];
  return set;
}

}  // namespace mpe
