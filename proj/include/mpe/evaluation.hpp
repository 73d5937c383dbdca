#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "mpe/predictor.hpp"
#include "mpe/store.hpp"
#include "mpe/trajectory.hpp"

namespace mpe {

// Fraction of test items whose truth appears within the top-k entries.
double accuracy_at_k(const std::vector<RankedPrediction>& lists,
                     const std::vector<std::string>& truths, int k);

// Mean over test items of 1/w, with w the 1-based rank of the truth when it
// appears within the top k, else 0.
double average_precision_at_k(const std::vector<RankedPrediction>& lists,
                              const std::vector<std::string>& truths, int k);

struct MetricSet {
  std::vector<int> ks;
  std::vector<double> accuracy;  // aligned with ks
  std::vector<double> ap;
};

MetricSet compute_metrics(const std::vector<RankedPrediction>& lists,
                          const std::vector<std::string>& truths,
                          const std::vector<int>& ks);

struct ModelReport {
  std::string model;
  std::vector<MetricSet> per_run;
  MetricSet mean;
  std::map<std::string, int64_t> backoffs;  // flag name -> query count
  size_t test_size = 0;
};

struct ExperimentConfig {
  SplitRatios split;
  uint64_t split_seed = 1;  // the split is fixed across runs
  Hyperparams hyperparams;  // run r trains with seed = hyperparams.seed + r
  std::vector<std::string> models;  // mpe, mpe-object, mpe-time, mpe-plain, mm, bayes
  int runs = 1;
  std::vector<int> ks = {1, 2, 3};
  double alpha = 1.0;  // baseline smoothing
  bool full_vocab = false;
};

// Recognized model names and their masks. Throws DataError on unknown names.
ComponentMask mask_for_model(const std::string& name);
bool is_embedding_model(const std::string& name);

// Split once, then train/evaluate every requested model. Stochastic models
// get `runs` seeds; count models are fitted once.
std::vector<ModelReport> run_experiment(const std::vector<TokenQuadruple>& quadruples,
                                        const ExperimentConfig& config);

void write_report_tsv(std::ostream& out, const std::vector<ModelReport>& reports);
std::string format_report_table(const std::vector<ModelReport>& reports);

}  // namespace mpe
