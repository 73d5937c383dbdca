#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "mpe/predictor.hpp"
#include "mpe/trajectory.hpp"

namespace mpe {

// Count tables for the Markov and Bayes baselines, keyed by token (composite
// keys joined with a unit separator). std::map keeps serialization order
// deterministic.
struct CountsModel {
  double alpha = 1.0;
  int64_t total = 0;  // number of training quadruples

  std::map<std::string, int64_t> obj_trans;          // o, l_i, l_j
  std::map<std::string, int64_t> obj_trans_total;    // o, l_i
  std::map<std::string, int64_t> global_trans;       // l_i, l_j
  std::map<std::string, int64_t> global_trans_total; // l_i
  std::map<std::string, int64_t> obj_next;           // o, l_j
  std::map<std::string, int64_t> time_next;          // t, l_j
  std::map<std::string, int64_t> next_count;         // l_j
  std::map<std::string, std::vector<std::string>> candidates;  // l_i -> sorted l_j

  int64_t n_objects = 0;
  int64_t n_slots = 0;
  int64_t n_currents = 0;
  int64_t n_nexts = 0;

  static std::string key(const std::string& a, const std::string& b);
  static std::string key(const std::string& a, const std::string& b, const std::string& c);
  int64_t get(const std::map<std::string, int64_t>& table, const std::string& k) const;
};

CountsModel fit_counts(const std::vector<TokenQuadruple>& train, double alpha = 1.0);

// Per-object first-order Markov ranking with additive smoothing; falls back
// to global transition counts when the object has never left l_i.
RankedPrediction markov_rank(const CountsModel& model, const Query& query, int k);

// Independent-factor Bayes ranking: each candidate scored by the product of
// four additively smoothed factors, computed in log space.
RankedPrediction bayes_rank(const CountsModel& model, const Query& query, int k);

class MarkovRanker final : public Ranker {
 public:
  explicit MarkovRanker(const CountsModel* model) : model_(model) {}
  RankedPrediction rank(const Query& query, int k) const override {
    return markov_rank(*model_, query, k);
  }

 private:
  const CountsModel* model_;
};

class BayesRanker final : public Ranker {
 public:
  explicit BayesRanker(const CountsModel* model) : model_(model) {}
  RankedPrediction rank(const Query& query, int k) const override {
    return bayes_rank(*model_, query, k);
  }

 private:
  const CountsModel* model_;
};

void write_counts_tsv(std::ostream& out, const CountsModel& model);
CountsModel read_counts_tsv(std::istream& in);

}  // namespace mpe
