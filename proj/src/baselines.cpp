#include "mpe/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <set>

#include "mpe/errors.hpp"

namespace mpe {

namespace {
constexpr char kSep = '\x1f';

void sort_and_truncate(std::vector<ScoredToken>& items, int k) {
  std::sort(items.begin(), items.end(), [](const ScoredToken& a, const ScoredToken& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.token < b.token;
  });
  if (items.size() > static_cast<size_t>(k)) items.resize(static_cast<size_t>(k));
}

RankedPrediction popularity_ranking(const CountsModel& model, int k) {
  RankedPrediction out;
  out.backoff = Backoff::UnseenCurrent;
  out.items.reserve(model.next_count.size());
  for (const auto& [token, count] : model.next_count)
    out.items.push_back({token, static_cast<double>(count)});
  sort_and_truncate(out.items, k);
  return out;
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  size_t start = 0;
  while (true) {
    size_t tab = line.find('\t', start);
    if (tab == std::string::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
  return out;
}

}  // namespace

std::string CountsModel::key(const std::string& a, const std::string& b) {
  return a + kSep + b;
}

std::string CountsModel::key(const std::string& a, const std::string& b,
                             const std::string& c) {
  return a + kSep + b + kSep + c;
}

int64_t CountsModel::get(const std::map<std::string, int64_t>& table,
                         const std::string& k) const {
  auto it = table.find(k);
  return it == table.end() ? 0 : it->second;
}

CountsModel fit_counts(const std::vector<TokenQuadruple>& train, double alpha) {
  if (train.empty()) throw DataError("training set is empty");
  if (alpha < 0) throw DataError("smoothing alpha must be non-negative");
  CountsModel m;
  m.alpha = alpha;
  std::set<std::string> objects, slots;
  for (const auto& q : train) {
    ++m.obj_trans[CountsModel::key(q.object, q.current, q.next)];
    ++m.obj_trans_total[CountsModel::key(q.object, q.current)];
    ++m.global_trans[CountsModel::key(q.current, q.next)];
    ++m.global_trans_total[q.current];
    ++m.obj_next[CountsModel::key(q.object, q.next)];
    ++m.time_next[CountsModel::key(q.slot, q.next)];
    ++m.next_count[q.next];
    ++m.total;
    m.candidates[q.current].push_back(q.next);
    objects.insert(q.object);
    slots.insert(q.slot);
  }
  for (auto& [cur, row] : m.candidates) {
    std::sort(row.begin(), row.end());
    row.erase(std::unique(row.begin(), row.end()), row.end());
  }
  m.n_objects = static_cast<int64_t>(objects.size());
  m.n_slots = static_cast<int64_t>(slots.size());
  m.n_currents = static_cast<int64_t>(m.global_trans_total.size());
  m.n_nexts = static_cast<int64_t>(m.next_count.size());
  return m;
}

RankedPrediction markov_rank(const CountsModel& model, const Query& query, int k) {
  if (k < 1) throw DataError("k must be >= 1");
  auto row_it = model.candidates.find(query.current);
  if (row_it == model.candidates.end()) return popularity_ranking(model, k);
  const auto& cands = row_it->second;

  RankedPrediction out;
  double a = model.alpha;
  double n_cands = static_cast<double>(cands.size());
  int64_t obj_total = model.get(model.obj_trans_total,
                                CountsModel::key(query.object, query.current));
  out.items.reserve(cands.size());
  if (obj_total > 0) {
    double denom = static_cast<double>(obj_total) + a * n_cands;
    for (const auto& lj : cands) {
      double n = static_cast<double>(
          model.get(model.obj_trans, CountsModel::key(query.object, query.current, lj)));
      out.items.push_back({lj, (n + a) / denom});
    }
  } else {
    out.backoff = Backoff::UnseenObject;
    double denom = static_cast<double>(model.get(model.global_trans_total, query.current)) +
                   a * n_cands;
    for (const auto& lj : cands) {
      double n = static_cast<double>(
          model.get(model.global_trans, CountsModel::key(query.current, lj)));
      out.items.push_back({lj, (n + a) / denom});
    }
  }
  sort_and_truncate(out.items, k);
  return out;
}

RankedPrediction bayes_rank(const CountsModel& model, const Query& query, int k) {
  if (k < 1) throw DataError("k must be >= 1");
  auto row_it = model.candidates.find(query.current);
  if (row_it == model.candidates.end()) return popularity_ranking(model, k);
  const auto& cands = row_it->second;

  RankedPrediction out;
  double a = model.alpha;
  out.items.reserve(cands.size());
  for (const auto& lj : cands) {
    double n_lj = static_cast<double>(model.get(model.next_count, lj));
    double log_p =
        std::log(static_cast<double>(model.get(model.obj_next,
                                               CountsModel::key(query.object, lj))) + a) -
        std::log(n_lj + a * static_cast<double>(model.n_objects)) +
        std::log(static_cast<double>(model.get(model.global_trans,
                                               CountsModel::key(query.current, lj))) + a) -
        std::log(n_lj + a * static_cast<double>(model.n_currents)) +
        std::log(static_cast<double>(model.get(model.time_next,
                                               CountsModel::key(query.slot, lj))) + a) -
        std::log(n_lj + a * static_cast<double>(model.n_slots)) +
        std::log(n_lj + a) -
        std::log(static_cast<double>(model.total) + a * static_cast<double>(model.n_nexts));
    out.items.push_back({lj, log_p});
  }
  sort_and_truncate(out.items, k);
  return out;
}

void write_counts_tsv(std::ostream& out, const CountsModel& model) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", model.alpha);
  out << "mpe-counts\t1\n";
  out << "alpha\t" << buf << '\n';
  out << "transitions\t" << model.obj_trans.size() << '\n';
  for (const auto& [key, count] : model.obj_trans) {
    std::string row = key;
    std::replace(row.begin(), row.end(), kSep, '\t');
    out << row << '\t' << count << '\n';
  }
  out << "slots\t" << model.time_next.size() << '\n';
  for (const auto& [key, count] : model.time_next) {
    std::string row = key;
    std::replace(row.begin(), row.end(), kSep, '\t');
    out << row << '\t' << count << '\n';
  }
}

CountsModel read_counts_tsv(std::istream& in) {
  std::string line;
  auto next_line = [&]() {
    if (!std::getline(in, line)) throw DataError("truncated counts file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return split_tabs(line);
  };
  auto header = next_line();
  if (header.size() != 2 || header[0] != "mpe-counts" || header[1] != "1")
    throw DataError("not a counts file (bad header)");
  auto alpha_row = next_line();
  if (alpha_row.size() != 2 || alpha_row[0] != "alpha")
    throw DataError("counts file: missing alpha row");
  double alpha = std::stod(alpha_row[1]);

  auto trans_head = next_line();
  if (trans_head.size() != 2 || trans_head[0] != "transitions")
    throw DataError("counts file: missing transitions section");
  size_t n_trans = std::stoull(trans_head[1]);

  std::map<std::string, int64_t> obj_trans;
  for (size_t i = 0; i < n_trans; ++i) {
    auto row = next_line();
    if (row.size() != 4) throw DataError("counts file: bad transition row");
    obj_trans[CountsModel::key(row[0], row[1], row[2])] = std::stoll(row[3]);
  }
  auto slots_head = next_line();
  if (slots_head.size() != 2 || slots_head[0] != "slots")
    throw DataError("counts file: missing slots section");
  size_t n_slots = std::stoull(slots_head[1]);
  std::map<std::string, int64_t> time_next;
  for (size_t i = 0; i < n_slots; ++i) {
    auto row = next_line();
    if (row.size() != 3) throw DataError("counts file: bad slot row");
    time_next[CountsModel::key(row[0], row[1])] = std::stoll(row[2]);
  }

  // Rebuild the derived tables from the two primary ones.
  CountsModel m;
  m.alpha = alpha;
  m.obj_trans = std::move(obj_trans);
  m.time_next = std::move(time_next);
  std::set<std::string> objects, slots_seen;
  for (const auto& [key, count] : m.obj_trans) {
    size_t p1 = key.find(kSep);
    size_t p2 = key.find(kSep, p1 + 1);
    std::string o = key.substr(0, p1);
    std::string li = key.substr(p1 + 1, p2 - p1 - 1);
    std::string lj = key.substr(p2 + 1);
    m.obj_trans_total[CountsModel::key(o, li)] += count;
    m.global_trans[CountsModel::key(li, lj)] += count;
    m.global_trans_total[li] += count;
    m.obj_next[CountsModel::key(o, lj)] += count;
    m.next_count[lj] += count;
    m.total += count;
    objects.insert(o);
    auto& row = m.candidates[li];
    if (std::find(row.begin(), row.end(), lj) == row.end()) row.push_back(lj);
  }
  for (auto& [cur, row] : m.candidates) std::sort(row.begin(), row.end());
  for (const auto& [key, count] : m.time_next)
    slots_seen.insert(key.substr(0, key.find(kSep)));
  m.n_objects = static_cast<int64_t>(objects.size());
  m.n_slots = static_cast<int64_t>(slots_seen.size());
  m.n_currents = static_cast<int64_t>(m.global_trans_total.size());
  m.n_nexts = static_cast<int64_t>(m.next_count.size());
  return m;
}

}  // namespace mpe
