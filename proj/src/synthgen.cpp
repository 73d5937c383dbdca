#include "mpe/synthgen.hpp"

#include <algorithm>
#include <ostream>
#include <set>
#include <string>
#include <unordered_set>

#include <json.hpp>

#include "mpe/errors.hpp"
#include "mpe/rng.hpp"

namespace mpe {

namespace {

void validate(const SynthConfig& c) {
  if (c.n_locations < 2) throw DataError("need at least 2 locations");
  if (c.out_degree < 0 || c.out_degree >= c.n_locations)
    throw DataError("out_degree must be in [0, n_locations)");
  if (c.n_objects < 1) throw DataError("need at least 1 object");
  if (c.n_slots < 1 || 1440 % c.n_slots != 0)
    throw DataError("n_slots must divide 1440");
  if (c.records_per_object < 1) throw DataError("records_per_object must be >= 1");
  if (c.object_signal < 0 || c.object_signal > 1 || c.time_signal < 0 || c.time_signal > 1)
    throw DataError("signal strengths must lie in [0,1]");
}

}  // namespace

RoadGraph generate_graph(const SynthConfig& config) {
  validate(config);
  RoadGraph g;
  g.n = config.n_locations;
  g.targets.resize(static_cast<size_t>(g.n));
  g.weights.resize(static_cast<size_t>(g.n));
  Rng rng(derive_seed(config.seed, "graph"));
  for (int u = 0; u < g.n; ++u) {
    std::set<Index> succ;
    succ.insert(static_cast<Index>((u + 1) % g.n));
    std::set<Index> random_succ;
    while (static_cast<int>(random_succ.size()) < config.out_degree) {
      Index v = static_cast<Index>(rng.next_below(static_cast<size_t>(g.n)));
      if (v != u) random_succ.insert(v);
    }
    succ.insert(random_succ.begin(), random_succ.end());
    auto& targets = g.targets[static_cast<size_t>(u)];
    auto& weights = g.weights[static_cast<size_t>(u)];
    targets.assign(succ.begin(), succ.end());
    weights.reserve(targets.size());
    // Base weights vary mildly so that at large sigma the preference factors
    // (up to 1+sigma) dominate which successor an object favors, while sigma=0
    // walks still have a nontrivial stationary distribution.
    for (size_t i = 0; i < targets.size(); ++i)
      weights.push_back(0.9 + 0.2 * rng.next_unit());
  }
  return g;
}

TimeSlotting synth_slotting(const SynthConfig& config) {
  validate(config);
  TimeSlotting s;
  s.slot_minutes = 1440 / config.n_slots;
  s.window_start_minute = 0;
  s.window_end_minute = 1440;
  return s;
}

std::vector<Record> generate_trajectories(const RoadGraph& graph,
                                          const SynthConfig& config) {
  validate(config);
  if (graph.n < 1) throw DataError("empty graph");
  TimeSlotting slotting = synth_slotting(config);
  const int64_t slot_seconds = static_cast<int64_t>(slotting.slot_minutes) * 60;
  const int64_t stride = slot_seconds / 4;

  uint64_t pref_o_seed = derive_seed(config.seed, "pref_object");
  uint64_t pref_t_seed = derive_seed(config.seed, "pref_time");

  std::vector<Record> records;
  records.reserve(static_cast<size_t>(config.n_objects) *
                  static_cast<size_t>(config.records_per_object));
  std::vector<double> cumulative;
  for (int o = 0; o < config.n_objects; ++o) {
    Rng rng(derive_seed(config.seed, "walk", static_cast<uint64_t>(o)));
    std::string object = "o" + std::to_string(o);
    Index node = static_cast<Index>(rng.next_below(static_cast<size_t>(graph.n)));
    int64_t ts = 0;
    for (int step = 0; step < config.records_per_object; ++step) {
      records.push_back(Record{object, ts, "L" + std::to_string(node)});
      if (step + 1 == config.records_per_object) break;

      int slot = static_cast<int>((ts / 60 % 1440) / slotting.slot_minutes);
      const auto& targets = graph.targets[static_cast<size_t>(node)];
      const auto& weights = graph.weights[static_cast<size_t>(node)];
      cumulative.clear();
      double total = 0.0;
      uint64_t u = static_cast<uint64_t>(node);
      for (size_t e = 0; e < targets.size(); ++e) {
        uint64_t v = static_cast<uint64_t>(targets[e]);
        double w = weights[e];
        if (config.object_signal > 0)
          w *= 1.0 + config.object_signal *
                         hash_unit(pref_o_seed, static_cast<uint64_t>(o), u, v);
        if (config.time_signal > 0)
          w *= 1.0 + config.time_signal *
                         hash_unit(pref_t_seed, static_cast<uint64_t>(slot), u, v);
        total += w;
        cumulative.push_back(total);
      }
      double draw = rng.next_unit() * total;
      size_t pick = static_cast<size_t>(
          std::lower_bound(cumulative.begin(), cumulative.end(), draw) -
          cumulative.begin());
      if (pick >= targets.size()) pick = targets.size() - 1;
      node = targets[pick];
      ts += stride;
    }
  }
  return records;
}

double phantom_rate(const std::vector<TokenQuadruple>& quadruples) {
  std::unordered_set<std::string> transitions;
  for (const auto& q : quadruples) transitions.insert(q.current + '\x1f' + q.next);

  std::unordered_set<std::string> sequences;
  size_t shortcuts = 0;
  for (size_t i = 0; i + 1 < quadruples.size(); ++i) {
    const auto& a = quadruples[i];
    const auto& b = quadruples[i + 1];
    if (a.object != b.object || a.next != b.current) continue;
    std::string seq = a.current + '\x1f' + a.next + '\x1f' + b.next;
    if (!sequences.insert(seq).second) continue;
    if (transitions.count(a.current + '\x1f' + b.next)) ++shortcuts;
  }
  if (sequences.empty()) return 0.0;
  return static_cast<double>(shortcuts) / static_cast<double>(sequences.size());
}

void write_graph_json(std::ostream& out, const RoadGraph& graph,
                      const SynthConfig& config) {
  nlohmann::json j;
  j["config"] = {{"n_locations", config.n_locations},
                 {"out_degree", config.out_degree},
                 {"n_objects", config.n_objects},
                 {"n_slots", config.n_slots},
                 {"records_per_object", config.records_per_object},
                 {"seed", config.seed},
                 {"object_signal", config.object_signal},
                 {"time_signal", config.time_signal}};
  TimeSlotting s = synth_slotting(config);
  j["slotting"] = {{"slot_minutes", s.slot_minutes},
                   {"window_start_minute", s.window_start_minute},
                   {"window_end_minute", s.window_end_minute}};
  nlohmann::json edges = nlohmann::json::array();
  for (int u = 0; u < graph.n; ++u)
    for (size_t e = 0; e < graph.targets[static_cast<size_t>(u)].size(); ++e)
      edges.push_back({u, graph.targets[static_cast<size_t>(u)][e],
                       graph.weights[static_cast<size_t>(u)][e]});
  j["edges"] = std::move(edges);
  out << j.dump(2) << '\n';
}

}  // namespace mpe
