#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "wsnloc/graph.hpp"
#include "wsnloc/nbp.hpp"
#include "wsnloc/scenario.hpp"

namespace wsnloc {

/// Coarse confidence of a position estimate from the number of active
/// reference neighbors: 1, 2, or 3 for three or more. Zero references map to
/// 0, which marks an agent that cannot be activated yet.
constexpr int confidence(std::size_t n_refs) { return n_refs >= 3 ? 3 : static_cast<int>(n_refs); }

enum class LayeringMode {
  // threshold_init gates the first layer only; later layers follow the
  // adaptive highest-confidence rule.
  gate_first_layer,
  // Every layer must reach threshold_init; agents that never do are left
  // unassigned.
  gate_all_layers,
};

inline std::string_view to_string(LayeringMode m) {
  return m == LayeringMode::gate_first_layer ? "first-layer" : "all-layers";
}

inline LayeringMode layering_mode_from_string(std::string_view s) {
  if (s == "first-layer") return LayeringMode::gate_first_layer;
  if (s == "all-layers") return LayeringMode::gate_all_layers;
  throw ConfigError("unknown layering mode '" + std::string(s) + "'");
}

struct Layer {
  int index = 0;                  // 1-based
  int threshold = 0;              // confidence class that activated the layer (0 in flat mode)
  int confidence = 0;             // lowest member confidence, C_f(A_l)
  std::vector<NodeId> agents;     // ascending
  std::vector<NodeId> reference;  // R^l: anchors and all agents of layers < index, ascending
};

/// Partition of agents into ordered activation layers.
struct LayerAssignment {
  int threshold_init = 3;
  LayeringMode mode = LayeringMode::gate_first_layer;
  bool flat = false;  // threshold_init == 0: one layer fusing all neighbors
  std::vector<NodeId> anchors;
  std::vector<Layer> layers;
  std::vector<NodeId> unassignable;
  std::map<NodeId, std::vector<NodeId>> upper_refs;  // F_i^l at activation time
  std::map<NodeId, int> layer_of;                    // agents only

  std::size_t layer_count() const { return layers.size(); }

  const Layer& layer(int l) const {
    if (l < 1 || static_cast<std::size_t>(l) > layers.size()) {
      throw IntegrityError("layer " + std::to_string(l) + " does not exist");
    }
    return layers[static_cast<std::size_t>(l) - 1];
  }

  /// Confidence class of an assigned agent, from its upper-layer references.
  int agent_confidence(NodeId i) const {
    auto it = upper_refs.find(i);
    if (it == upper_refs.end()) throw IntegrityError("agent " + std::to_string(i.value) + " is not assigned");
    return confidence(it->second.size());
  }
};

/// Bootstrap-percolation layering. Starting from the anchor set, each step
/// computes F_i = S_i ∩ R for every inactive agent, buckets agents by
/// confidence and activates the highest nonempty bucket as the next layer.
///
/// threshold_init selects the first layer: all agents whose confidence is at
/// least threshold_init activate together (falling back to the highest
/// nonempty bucket if none qualifies, except in gate_all_layers mode).
/// threshold_init = 0 disables layering: a single layer holds every agent
/// with a neighbor and fuses all of S_i.
inline LayerAssignment assign_layers(const ConnectivityGraph& graph, const std::vector<NodeId>& anchors,
                                     int threshold_init, LayeringMode mode = LayeringMode::gate_first_layer) {
  if (anchors.empty()) throw ConfigError("layering needs at least one anchor");
  if (threshold_init < 0 || threshold_init > 3) throw ConfigError("threshold_init must be in 0..3");

  LayerAssignment out;
  out.threshold_init = threshold_init;
  out.mode = mode;
  out.flat = threshold_init == 0;
  out.anchors = anchors;
  std::sort(out.anchors.begin(), out.anchors.end());

  std::vector<char> active(graph.node_count(), 0);
  for (NodeId a : out.anchors) {
    if (!graph.contains(a)) throw IntegrityError("anchor " + std::to_string(a.value) + " not in graph");
    active[a.value - 1] = 1;
  }
  std::vector<NodeId> pending;
  for (NodeId id : graph.nodes()) {
    if (!active[id.value - 1]) pending.push_back(id);
  }

  if (out.flat) {
    Layer layer{1, 0, 0, {}, out.anchors};
    for (NodeId i : pending) {
      const auto& nbrs = graph.neighbors(i);
      if (nbrs.empty()) {
        out.unassignable.push_back(i);
        continue;
      }
      layer.agents.push_back(i);
      out.upper_refs[i] = nbrs;
      out.layer_of[i] = 1;
    }
    if (!layer.agents.empty()) out.layers.push_back(std::move(layer));
    return out;
  }

  std::vector<NodeId> reference = out.anchors;
  for (int l = 1; !pending.empty(); ++l) {
    std::vector<std::vector<NodeId>> refs(pending.size());
    int best = 0;
    for (std::size_t p = 0; p < pending.size(); ++p) {
      for (NodeId u : graph.neighbors(pending[p])) {
        if (active[u.value - 1]) refs[p].push_back(u);
      }
      best = std::max(best, confidence(refs[p].size()));
    }
    if (best == 0) break;

    int gate = best;
    bool grouped = false;
    if (l == 1 && best >= threshold_init) {
      gate = threshold_init;
      grouped = true;
    } else if (mode == LayeringMode::gate_all_layers && best < threshold_init) {
      break;
    }

    Layer layer{l, gate, 0, {}, reference};
    std::vector<NodeId> still_pending;
    for (std::size_t p = 0; p < pending.size(); ++p) {
      const int c = confidence(refs[p].size());
      const bool take = grouped ? c >= gate : c == gate;
      if (!take) {
        still_pending.push_back(pending[p]);
        continue;
      }
      layer.agents.push_back(pending[p]);
      out.upper_refs[pending[p]] = std::move(refs[p]);
      out.layer_of[pending[p]] = l;
    }
    layer.confidence = 3;
    for (NodeId i : layer.agents) {
      layer.confidence = std::min(layer.confidence, confidence(out.upper_refs[i].size()));
      active[i.value - 1] = 1;
      reference.insert(std::upper_bound(reference.begin(), reference.end(), i), i);
    }
    out.layers.push_back(std::move(layer));
    pending = std::move(still_pending);
  }
  out.unassignable = std::move(pending);
  return out;
}

/// Reference set agent i fuses on layer l: its upper-layer references when
/// there are at least three, otherwise those plus its same-layer neighbors.
/// In flat mode this is simply S_i.
inline std::vector<NodeId> candidate_refs(const ConnectivityGraph& graph, NodeId i, int l,
                                          const LayerAssignment& assignment) {
  auto layer_it = assignment.layer_of.find(i);
  if (layer_it == assignment.layer_of.end() || layer_it->second != l) {
    throw IntegrityError("agent " + std::to_string(i.value) + " is not on layer " + std::to_string(l));
  }
  const std::vector<NodeId>& upper = assignment.upper_refs.at(i);
  if (assignment.flat || upper.size() >= 3) return upper;
  std::vector<NodeId> out = upper;
  for (NodeId j : graph.neighbors(i)) {
    auto it = assignment.layer_of.find(j);
    if (it != assignment.layer_of.end() && it->second == l) out.push_back(j);
  }
  std::sort(out.begin(), out.end());
  return out;
}

struct LayerStats {
  int layer = 0;
  int threshold = 0;
  std::size_t agents = 0;
  std::size_t mul_messages = 0;
  std::size_t msl_messages = 0;
  int iterations = 0;
};

struct HierarchicalResult {
  RunResult run;
  std::vector<LayerStats> layers;
};

/// Layer-by-layer scheduler. Agents of layer l run T synchronous iterations
/// against their candidate reference sets while every earlier layer is frozen;
/// the layer's final beliefs then become references for the next layers.
/// Inactive agents never send. Unassignable agents keep their prior.
inline HierarchicalResult run_hierarchical_nbp(const Scenario& scenario, const ConnectivityGraph& graph,
                                               const MeasurementSet& measurements, const LayerAssignment& assignment,
                                               const RunConfig& cfg) {
  validate(cfg);
  if (graph.node_count() != scenario.node_count()) throw IntegrityError("graph does not match scenario");
  HierarchicalResult result;
  RunResult& run = result.run;
  run.beliefs = detail::prior_beliefs(scenario, cfg);
  run.unlocalized = assignment.unassignable;

  std::vector<int> layer_of(scenario.node_count(), 0);
  for (const auto& [id, l] : assignment.layer_of) layer_of[id.value - 1] = l;
  for (NodeId id : assignment.unassignable) layer_of[id.value - 1] = static_cast<int>(assignment.layers.size()) + 1;

  detail::LayerRunner runner(scenario, measurements, cfg, run.beliefs, run.traffic);
  int offset = 0;
  for (const Layer& layer : assignment.layers) {
    std::vector<std::vector<NodeId>> refs;
    refs.reserve(layer.agents.size());
    for (NodeId i : layer.agents) refs.push_back(candidate_refs(graph, i, layer.index, assignment));
    const std::size_t before = run.traffic.size();
    const auto outcome = runner.run(layer.agents, refs, layer_of, offset);
    offset += outcome.iterations;
    run.degenerate_fusions += outcome.degenerate;

    LayerStats stats{layer.index, layer.threshold, layer.agents.size(), 0, 0, outcome.iterations};
    for (std::size_t r = before; r < run.traffic.size(); ++r) {
      (run.traffic.records()[r].kind == MessageKind::mul ? stats.mul_messages : stats.msl_messages) += 1;
    }
    result.layers.push_back(stats);
  }
  run.iterations_run = offset;
  return result;
}

/// Counts traffic records that break the propagation rule: a message from a
/// lower layer, a same-layer message to an agent with three or more upper
/// references, or a mislabeled kind. Flat assignments only check direction.
inline std::size_t audit_propagation(const TrafficLog& log, const LayerAssignment& assignment) {
  std::size_t violations = 0;
  for (const TrafficRecord& r : log.records()) {
    if (r.sender_layer > r.receiver_layer) {
      ++violations;
      continue;
    }
    const MessageKind expected = r.sender_layer < r.receiver_layer ? MessageKind::mul : MessageKind::msl;
    if (r.kind != expected) {
      ++violations;
      continue;
    }
    if (r.kind == MessageKind::msl && !assignment.flat && assignment.agent_confidence(r.receiver) > 2) ++violations;
  }
  return violations;
}

}  // namespace wsnloc
