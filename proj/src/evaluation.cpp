#include "mpe/evaluation.hpp"

#include <algorithm>
#include <cstdio>
#include <memory>
#include <ostream>
#include <sstream>

#include "mpe/baselines.hpp"
#include "mpe/errors.hpp"
#include "mpe/trainer.hpp"

namespace mpe {

namespace {

// 1-based rank of the truth within the top-k prefix, or 0 when absent.
int rank_of_truth(const RankedPrediction& list, const std::string& truth, int k) {
  size_t limit = std::min(list.items.size(), static_cast<size_t>(k));
  for (size_t i = 0; i < limit; ++i)
    if (list.items[i].token == truth) return static_cast<int>(i) + 1;
  return 0;
}

void check_aligned(const std::vector<RankedPrediction>& lists,
                   const std::vector<std::string>& truths, int k) {
  if (lists.size() != truths.size())
    throw DataError("ranked lists and truths differ in length");
  if (k < 1) throw DataError("k must be >= 1");
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

}  // namespace

double accuracy_at_k(const std::vector<RankedPrediction>& lists,
                     const std::vector<std::string>& truths, int k) {
  check_aligned(lists, truths, k);
  if (lists.empty()) return 0.0;
  size_t hits = 0;
  for (size_t i = 0; i < lists.size(); ++i)
    if (rank_of_truth(lists[i], truths[i], k) > 0) ++hits;
  return static_cast<double>(hits) / static_cast<double>(lists.size());
}

double average_precision_at_k(const std::vector<RankedPrediction>& lists,
                              const std::vector<std::string>& truths, int k) {
  check_aligned(lists, truths, k);
  if (lists.empty()) return 0.0;
  double total = 0.0;
  for (size_t i = 0; i < lists.size(); ++i) {
    int w = rank_of_truth(lists[i], truths[i], k);
    if (w > 0) total += 1.0 / static_cast<double>(w);
  }
  return total / static_cast<double>(lists.size());
}

MetricSet compute_metrics(const std::vector<RankedPrediction>& lists,
                          const std::vector<std::string>& truths,
                          const std::vector<int>& ks) {
  MetricSet m;
  m.ks = ks;
  for (int k : ks) {
    m.accuracy.push_back(accuracy_at_k(lists, truths, k));
    m.ap.push_back(average_precision_at_k(lists, truths, k));
  }
  return m;
}

ComponentMask mask_for_model(const std::string& name) {
  if (name == "mpe") return {true, true};
  if (name == "mpe-object") return {true, false};
  if (name == "mpe-time") return {false, true};
  if (name == "mpe-plain") return {false, false};
  throw DataError("unknown embedding model '" + name + "'");
}

bool is_embedding_model(const std::string& name) {
  return name == "mpe" || name == "mpe-object" || name == "mpe-time" ||
         name == "mpe-plain";
}

std::vector<ModelReport> run_experiment(const std::vector<TokenQuadruple>& quadruples,
                                        const ExperimentConfig& config) {
  if (config.runs < 1) throw DataError("runs must be >= 1");
  if (config.models.empty()) throw DataError("no models requested");
  if (config.ks.empty()) throw DataError("no k values requested");
  for (const auto& name : config.models)
    if (!is_embedding_model(name) && name != "mm" && name != "bayes")
      throw DataError("unknown model '" + name + "'");

  SplitResult split = split_quadruples(quadruples, config.split, config.split_seed);
  IndexedTrainingSet indexed = build_vocab_and_index(split.train);

  std::vector<Query> queries;
  std::vector<std::string> truths;
  queries.reserve(split.test.size());
  for (const auto& q : split.test) {
    queries.push_back({q.object, q.slot, q.current});
    truths.push_back(q.next);
  }
  int max_k = *std::max_element(config.ks.begin(), config.ks.end());

  auto evaluate_ranker = [&](const Ranker& ranker, ModelReport& report,
                             bool record_backoffs) {
    std::vector<RankedPrediction> lists;
    lists.reserve(queries.size());
    for (const auto& q : queries) lists.push_back(ranker.rank(q, max_k));
    if (record_backoffs)
      for (const auto& p : lists)
        if (p.backoff != Backoff::None) ++report.backoffs[backoff_name(p.backoff)];
    report.per_run.push_back(compute_metrics(lists, truths, config.ks));
  };

  CountsModel counts;
  bool counts_fitted = false;

  std::vector<ModelReport> reports;
  for (const auto& name : config.models) {
    ModelReport report;
    report.model = name;
    report.test_size = split.test.size();

    if (is_embedding_model(name)) {
      ComponentMask mask = mask_for_model(name);
      for (int r = 1; r <= config.runs; ++r) {
        Hyperparams hp = config.hyperparams;
        hp.seed = config.hyperparams.seed + static_cast<uint64_t>(r);
        TrainResult trained = train(indexed, mask, hp);
        MpeModel model;
        model.store = std::move(trained.store);
        model.mask = mask;
        model.vocab = indexed.vocab;
        model.next_counts = indexed.next_counts;
        model.full_vocab = config.full_vocab;
        MpePredictor predictor(&model, &indexed.candidates);
        // Backoff pattern depends only on vocabulary membership, so the
        // first run's counts describe every run.
        evaluate_ranker(predictor, report, r == 1);
      }
    } else {
      if (!counts_fitted) {
        counts = fit_counts(split.train, config.alpha);
        counts_fitted = true;
      }
      if (name == "mm") {
        evaluate_ranker(MarkovRanker(&counts), report, true);
      } else {
        evaluate_ranker(BayesRanker(&counts), report, true);
      }
    }

    report.mean.ks = config.ks;
    report.mean.accuracy.assign(config.ks.size(), 0.0);
    report.mean.ap.assign(config.ks.size(), 0.0);
    for (const auto& run : report.per_run)
      for (size_t i = 0; i < config.ks.size(); ++i) {
        report.mean.accuracy[i] += run.accuracy[i];
        report.mean.ap[i] += run.ap[i];
      }
    for (size_t i = 0; i < config.ks.size(); ++i) {
      report.mean.accuracy[i] /= static_cast<double>(report.per_run.size());
      report.mean.ap[i] /= static_cast<double>(report.per_run.size());
    }
    reports.push_back(std::move(report));
  }
  return reports;
}

void write_report_tsv(std::ostream& out, const std::vector<ModelReport>& reports) {
  out << "# mpe-report v1\n";
  if (!reports.empty()) out << "# test_size\t" << reports.front().test_size << '\n';
  for (const auto& r : reports) {
    if (r.backoffs.empty()) continue;
    out << "# backoff\t" << r.model;
    for (const auto& [flag, count] : r.backoffs) out << '\t' << flag << '=' << count;
    out << '\n';
  }
  out << "model\trun";
  if (!reports.empty()) {
    for (int k : reports.front().mean.ks) out << "\tacc@" << k;
    for (int k : reports.front().mean.ks) out << "\tap@" << k;
  }
  out << '\n';
  auto row = [&](const std::string& model, const std::string& run, const MetricSet& m) {
    out << model << '\t' << run;
    for (double v : m.accuracy) out << '\t' << fmt(v);
    for (double v : m.ap) out << '\t' << fmt(v);
    out << '\n';
  };
  for (const auto& r : reports) {
    for (size_t i = 0; i < r.per_run.size(); ++i)
      row(r.model, std::to_string(i + 1), r.per_run[i]);
    row(r.model, "mean", r.mean);
  }
}

std::string format_report_table(const std::vector<ModelReport>& reports) {
  std::ostringstream out;
  if (reports.empty()) return "";
  size_t name_width = 5;
  for (const auto& r : reports) name_width = std::max(name_width, r.model.size());

  out << std::string(name_width, ' ');
  for (int k : reports.front().mean.ks) {
    char head[16];
    std::snprintf(head, sizeof(head), "%10s@%d", "acc", k);
    out << head;
  }
  for (int k : reports.front().mean.ks) {
    char head[16];
    std::snprintf(head, sizeof(head), "%10s@%d", "AP", k);
    out << head;
  }
  out << '\n';
  for (const auto& r : reports) {
    out << r.model << std::string(name_width - r.model.size(), ' ');
    char cell[32];
    for (double v : r.mean.accuracy) {
      std::snprintf(cell, sizeof(cell), "%12.4f", v);
      out << cell;
    }
    for (double v : r.mean.ap) {
      std::snprintf(cell, sizeof(cell), "%12.4f", v);
      out << cell;
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace mpe
