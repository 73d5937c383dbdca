#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "mpe/trajectory.hpp"
#include "mpe/vocab.hpp"

namespace mpe {

// Directed graph with positive edge weights; adjacency targets sorted.
struct RoadGraph {
  int n = 0;
  std::vector<std::vector<Index>> targets;
  std::vector<std::vector<double>> weights;  // aligned with targets
};

struct SynthConfig {
  int n_locations = 50;
  int out_degree = 3;
  int n_objects = 20;
  int n_slots = 10;  // full-day slots; must divide 1440
  int records_per_object = 1000;
  uint64_t seed = 1;
  double object_signal = 0.0;  // sigma_o in [0,1]
  double time_signal = 0.0;    // sigma_t in [0,1]
};

// Ring edge i -> (i+1 mod n) plus out_degree random distinct non-self
// successors per node; the union gives out-degree in [1, out_degree+1].
RoadGraph generate_graph(const SynthConfig& config);

// Slotting the generated timestamps are meant to be ingested with.
TimeSlotting synth_slotting(const SynthConfig& config);

// Weighted random walks, one per object. At node u in slot t the edge u->v is
// drawn with probability proportional to
//   weight(u,v) * (1 + sigma_o * pref_o(o,u,v)) * (1 + sigma_t * pref_t(t,u,v))
// with both preference factors hash-derived in [0,1). Deterministic per seed.
std::vector<Record> generate_trajectories(const RoadGraph& graph,
                                          const SynthConfig& config);

// Fraction of distinct observed sequences l_i -> l_j -> l_k whose shortcut
// l_i -> l_k is itself an observed transition. 0 when no sequences exist.
double phantom_rate(const std::vector<TokenQuadruple>& quadruples);

// Config + slotting + edge list, for oracle checks against generated data.
void write_graph_json(std::ostream& out, const RoadGraph& graph,
                      const SynthConfig& config);

}  // namespace mpe
