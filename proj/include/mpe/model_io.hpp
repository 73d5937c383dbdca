#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mpe/store.hpp"
#include "mpe/trajectory.hpp"
#include "mpe/vocab.hpp"

namespace mpe {

struct SavedModel {
  EmbeddingStore store;
  ComponentMask mask;
  Vocabulary vocab;
};

// Versioned binary model file: magic, version, D, vocab sizes, mask, the four
// token lists, then the four matrices row-major as little-endian 64-bit
// floats. Byte-for-byte deterministic.
void write_model_file(const std::string& path, const EmbeddingStore& store,
                      const ComponentMask& mask, const Vocabulary& vocab);
SavedModel read_model_file(const std::string& path);

// Token-level (current, next) transition counts: enough to rebuild the
// candidate sets and the popularity table next to a saved model.
using TransitionCounts = std::map<std::pair<std::string, std::string>, int64_t>;

TransitionCounts count_transitions(const std::vector<TokenQuadruple>& quadruples);
void write_transitions_tsv(std::ostream& out, const TransitionCounts& counts);
TransitionCounts read_transitions_tsv(std::istream& in);

// Indexes the token-level table against a model's vocabularies.
void rebuild_candidates(const TransitionCounts& counts, const Vocabulary& vocab,
                        CandidateIndex* candidates, std::vector<int64_t>* next_counts);

enum class EmbeddingKind { Object, Time, LocCurrent, LocNext };

std::optional<EmbeddingKind> parse_embedding_kind(const std::string& name);

// TSV export: kind, token, v_0..v_{D-1}; all kinds unless `only` is given.
void write_embeddings_tsv(std::ostream& out, const EmbeddingStore& store,
                          const Vocabulary& vocab,
                          std::optional<EmbeddingKind> only = std::nullopt);

}  // namespace mpe
