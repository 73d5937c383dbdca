#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mpe/vocab.hpp"

namespace mpe {

// Dense row-major matrix of doubles. Rows are embedding vectors.
class Matrix {
 public:
  Matrix() = default;
  Matrix(Index rows, Index cols) : rows_(rows), cols_(cols),
      data_(static_cast<size_t>(rows) * static_cast<size_t>(cols), 0.0) {}

  std::span<double> row(Index r) {
    return {data_.data() + static_cast<size_t>(r) * cols_, static_cast<size_t>(cols_)};
  }
  std::span<const double> row(Index r) const {
    return {data_.data() + static_cast<size_t>(r) * cols_, static_cast<size_t>(cols_)};
  }
  Index rows() const { return rows_; }
  Index cols() const { return cols_; }
  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

 private:
  Index rows_ = 0;
  Index cols_ = 0;
  std::vector<double> data_;
};

// Which conditional components participate in V. Masked-off components are
// never read and never updated; they contribute a zero vector.
struct ComponentMask {
  bool use_object = true;
  bool use_time = true;
};

enum class NegativeMode {
  ContextExcluded,  // exclude every next location observed with (o, t, lc)
  TrueOnly,         // exclude only the quadruple's own next location
};

struct Hyperparams {
  Index dim = 100;
  int negatives = 1;
  double lr = 1e-3;
  double reg = 1e-3;
  int epochs = 10;
  uint64_t seed = 1;
  double early_stop_rel_tol = 0.0;  // 0 disables early stopping
  NegativeMode negative_mode = NegativeMode::ContextExcluded;
};

struct EmbeddingStore {
  Matrix objects;   // one row per object
  Matrix slots;     // one row per time slot
  Matrix currents;  // one row per current location
  Matrix nexts;     // one row per next location
  Index dim() const { return nexts.cols(); }
  bool all_finite() const;
};

// Allocates the four matrices and fills every entry with N(0, 0.01) draws
// (standard deviation 0.1) from a stream derived from `seed`.
EmbeddingStore init_store(const Vocabulary& vocab, Index dim, uint64_t seed);

// out = [object row if masked in] + [slot row if masked in] + current row.
void conditional_vector(const EmbeddingStore& store, const ComponentMask& mask,
                        Index object, Index slot, Index current,
                        std::span<double> out);

// Negated squared Euclidean distance between the next-location row and V.
double score_next(const EmbeddingStore& store, std::span<const double> v, Index next);

// Softmax of scores over the candidate set, in candidate order. Stable under
// large score magnitudes (max-score subtraction).
std::vector<double> probability(const EmbeddingStore& store, const ComponentMask& mask,
                                Index object, Index slot, Index current,
                                std::span<const Index> candidates);

double sigmoid(double x);
double log_sigmoid(double x);

}  // namespace mpe
