#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <string_view>
#include <thread>
#include <vector>

#include "wsnloc/graph.hpp"
#include "wsnloc/particles.hpp"
#include "wsnloc/scenario.hpp"

namespace wsnloc {

struct RunConfig {
  std::size_t particles = 200;  // K
  int iterations = 10;          // T, message exchanges (per layer for the hierarchical scheduler)
  double oversampling = 2.0;    // h, candidate pool is h*K before resampling
  std::uint64_t seed = 0;
  unsigned workers = 1;
  // Stop a layer early once the mean MMSE shift over one iteration drops
  // below this many meters. Disabled when unset.
  std::optional<double> early_stop_shift;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

inline void validate(const RunConfig& cfg) {
  if (cfg.particles < 1) throw ConfigError("K must be at least 1");
  if (cfg.iterations < 1) throw ConfigError("T must be at least 1");
  if (!(cfg.oversampling >= 1.0)) throw ConfigError("h must be at least 1");
  if (cfg.workers < 1) throw ConfigError("workers must be at least 1");
}

// ---------------------------------------------------------------------------
// Traffic accounting
// ---------------------------------------------------------------------------

/// Message from an upper layer or from the same layer. Messages from lower
/// layers are never sent, so there is no kind for them.
enum class MessageKind { mul, msl };

inline std::string_view to_string(MessageKind k) { return k == MessageKind::mul ? "MUL" : "MSL"; }

struct TrafficRecord {
  int iteration = 0;  // global exchange index, 1-based, continuing across layers
  NodeId sender;
  NodeId receiver;
  int sender_layer = 0;
  int receiver_layer = 0;
  MessageKind kind = MessageKind::mul;

  friend bool operator==(const TrafficRecord&, const TrafficRecord&) = default;
};

struct IterationTraffic {
  int iteration = 0;
  std::size_t directed_messages = 0;
  std::size_t links_active = 0;  // distinct undirected links carrying at least one message
};

class TrafficLog {
 public:
  void append(const TrafficRecord& r) { records_.push_back(r); }
  void append(std::span<const TrafficRecord> rs) { records_.insert(records_.end(), rs.begin(), rs.end()); }

  const std::vector<TrafficRecord>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }

  std::vector<IterationTraffic> per_iteration() const {
    std::map<int, std::pair<std::size_t, std::set<Edge>>> by_iter;
    for (const TrafficRecord& r : records_) {
      auto& slot = by_iter[r.iteration];
      ++slot.first;
      slot.second.insert(Edge::make(r.sender, r.receiver));
    }
    std::vector<IterationTraffic> out;
    for (const auto& [it, slot] : by_iter) out.push_back({it, slot.first, slot.second.size()});
    return out;
  }

  /// iteration,directed_messages,links_active
  void write_summary_csv(std::ostream& os) const {
    os << "iteration,directed_messages,links_active\n";
    for (const IterationTraffic& t : per_iteration()) {
      os << t.iteration << ',' << t.directed_messages << ',' << t.links_active << '\n';
    }
  }

  /// iteration,sender,receiver,sender_layer,receiver_layer,kind
  void write_records_csv(std::ostream& os) const {
    os << "iteration,sender,receiver,sender_layer,receiver_layer,kind\n";
    for (const TrafficRecord& r : records_) {
      os << r.iteration << ',' << r.sender.value << ',' << r.receiver.value << ',' << r.sender_layer << ','
         << r.receiver_layer << ',' << to_string(r.kind) << '\n';
    }
  }

 private:
  std::vector<TrafficRecord> records_;
};

// ---------------------------------------------------------------------------
// Message and marginal computation
// ---------------------------------------------------------------------------

/// Builds the Gaussian-mixture message a sender passes to a neighbor at
/// measured range `d_meas`. Each sender sample is pushed along a random
/// bearing by a noisy copy of the range. Weights divide the sender weight by
/// the previous reverse-direction message at the sample (`reverse == nullptr`
/// means the uniform message). The kernel variance follows the K^(-1/3) rule,
/// floored at sigma(d)^2 K^(-1/3) so anchor messages keep ranging spread.
inline MixtureMessage compute_message(const ParticleBelief& sender, const MixtureMessage* reverse, double d_meas,
                                      const NoiseModel& noise, std::size_t k_samples, std::uint64_t seed) {
  if (!(d_meas > 0.0)) throw InvalidMeasurementError("measured distance must be positive");
  if (sender.empty()) throw ConfigError("sender belief is empty");
  if (k_samples == 0) throw ConfigError("particle count must be at least 1");

  Rng rng(derive_seed(seed, tag(Stream::message)));
  std::uniform_real_distribution<double> bearing(0.0, 2.0 * std::numbers::pi);
  std::normal_distribution<double> unit(0.0, 1.0);
  const double sigma = noise.sigma(d_meas);

  MixtureMessage msg;
  msg.xs.resize(k_samples);
  msg.ys.resize(k_samples);
  msg.weights.resize(k_samples);
  std::optional<MixtureEvaluator> reverse_eval;
  if (reverse != nullptr) reverse_eval.emplace(*reverse);

  double total = 0.0;
  for (std::size_t k = 0; k < k_samples; ++k) {
    const std::size_t src = k % sender.size();
    const double theta = bearing(rng);
    const double range = d_meas + sigma * unit(rng);
    msg.xs[k] = sender.xs[src] + range * std::sin(theta);
    msg.ys[k] = sender.ys[src] + range * std::cos(theta);
    double w = sender.weights[src];
    if (reverse_eval) w /= (*reverse_eval)(sender.xs[src], sender.ys[src]);
    msg.weights[k] = w;
    total += w;
  }
  if (!(total > 0.0) || !std::isfinite(total)) throw DegenerateWeightsError("message weights collapsed");
  for (double& w : msg.weights) w /= total;

  const double shrink = std::pow(static_cast<double>(k_samples), -1.0 / 3.0);
  const Covariance2 cov = weighted_covariance(sender.xs, sender.ys, sender.weights);
  const double floor = std::max(sigma * sigma * shrink, kEntropyEpsilon);
  msg.bandwidth = std::max(shrink * 0.5 * cov.trace(), floor);
  return msg;
}

/// Draws floor(hK/|F|) candidates from each incoming message, weights each
/// candidate by prod_u m_u(x) / sum_u m_u(x), and resamples the pool down to K
/// equal-weight particles.
inline ParticleBelief fuse_marginal(std::span<const MixtureMessage> messages, std::size_t k_samples, double h,
                                    std::uint64_t seed) {
  if (messages.empty()) throw ConfigError("fusion needs at least one message");
  if (k_samples == 0) throw ConfigError("particle count must be at least 1");
  const auto per_message =
      static_cast<std::size_t>(std::floor(h * static_cast<double>(k_samples) / static_cast<double>(messages.size())));
  if (per_message < 1) throw ConfigError("h*K must be at least the number of fused messages");

  Rng rng(derive_seed(seed, tag(Stream::fusion)));
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::normal_distribution<double> unit(0.0, 1.0);

  ParticleBelief pool;
  pool.reserve(per_message * messages.size());
  std::vector<double> cumulative;
  for (const MixtureMessage& m : messages) {
    cumulative.resize(m.size());
    std::partial_sum(m.weights.begin(), m.weights.end(), cumulative.begin());
    const double spread = std::sqrt(m.bandwidth);
    for (std::size_t j = 0; j < per_message; ++j) {
      const double u = uniform(rng) * cumulative.back();
      auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
      const auto c = static_cast<std::size_t>(std::min<std::ptrdiff_t>(it - cumulative.begin(), m.size() - 1));
      const double x = m.xs[c] + spread * unit(rng);
      const double y = m.ys[c] + spread * unit(rng);
      pool.push_back({x, y}, 0.0);
    }
  }

  std::vector<MixtureEvaluator> evals;
  evals.reserve(messages.size());
  for (const MixtureMessage& m : messages) evals.emplace_back(m);

  std::vector<double> log_w(pool.size());
  bool any_supported = false;
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < pool.size(); ++c) {
    double log_prod = 0.0;
    double sum = 0.0;
    bool floored = false;
    for (const MixtureEvaluator& eval : evals) {
      const double d = eval(pool.xs[c], pool.ys[c]);
      floored = floored || d <= kDensityFloor;
      log_prod += std::log(d);
      sum += d;
    }
    any_supported = any_supported || !floored;
    log_w[c] = log_prod - std::log(sum);
    best = std::max(best, log_w[c]);
  }
  if (!any_supported) throw DegenerateWeightsError("fused messages have no common support");
  for (std::size_t c = 0; c < pool.size(); ++c) pool.weights[c] = std::exp(log_w[c] - best);
  return resample(pool, k_samples, seed);
}

// ---------------------------------------------------------------------------
// Run engine shared by standard, tree-restricted and hierarchical NBP
// ---------------------------------------------------------------------------

struct RunResult {
  std::vector<ParticleBelief> beliefs;  // indexed by NodeId - 1
  TrafficLog traffic;
  std::vector<NodeId> unlocalized;   // agents that never received a message
  std::size_t degenerate_fusions = 0;  // fusions that kept the previous belief
  int iterations_run = 0;

  const ParticleBelief& belief(NodeId id) const { return beliefs.at(id.value - 1); }
  Point estimate(NodeId id) const { return mmse_estimate(belief(id)); }

  std::uint64_t fingerprint() const {
    Fnv1a h;
    for (const ParticleBelief& b : beliefs) h.add(b.fingerprint());
    return h.value();
  }
};

namespace detail {

template <typename Fn>
void parallel_for(std::size_t n, unsigned workers, Fn&& fn) {
  if (workers <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  const std::size_t threads = std::min<std::size_t>(workers, n);
  std::vector<std::jthread> pool;
  pool.reserve(threads);
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      for (std::size_t i = t; i < n; i += threads) fn(i);
    });
  }
}

/// Synchronous message passing over one group of simultaneously active
/// agents. Nodes outside the group are frozen senders. Messages of
/// iteration t are computed from iteration t-1 beliefs only.
class LayerRunner {
 public:
  LayerRunner(const Scenario& scenario, const MeasurementSet& measurements, const RunConfig& cfg,
              std::vector<ParticleBelief>& beliefs, TrafficLog& traffic)
      : scenario_(scenario), measurements_(measurements), cfg_(cfg), beliefs_(beliefs), traffic_(traffic) {}

  struct Outcome {
    int iterations = 0;
    std::size_t degenerate = 0;
  };

  /// `agents` ascending; `refs[i]` ascending reference list of agents[i];
  /// `layer_of` maps NodeId-1 to its layer (anchors 0).
  Outcome run(const std::vector<NodeId>& agents, const std::vector<std::vector<NodeId>>& refs,
              const std::vector<int>& layer_of, int iteration_offset) {
    using Key = std::pair<std::uint32_t, std::uint32_t>;  // (sender, receiver)
    std::map<Key, MixtureMessage> previous;
    Outcome outcome;
    const std::size_t n = agents.size();
    for (int t = 1; t <= cfg_.iterations; ++t) {
      const int global_iter = iteration_offset + t;
      std::vector<ParticleBelief> next(n);
      std::vector<std::vector<MixtureMessage>> sent(n);
      std::vector<char> degenerate(n, 0);

      parallel_for(n, cfg_.workers, [&](std::size_t a) {
        const NodeId i = agents[a];
        std::vector<MixtureMessage>& incoming = sent[a];
        incoming.reserve(refs[a].size());
        for (NodeId u : refs[a]) {
          auto rev = previous.find({i.value, u.value});
          const MixtureMessage* reverse = rev == previous.end() ? nullptr : &rev->second;
          const std::uint64_t seed = derive_seed(cfg_.seed, tag(Stream::message), global_iter, u.value, i.value);
          incoming.push_back(compute_message(beliefs_[u.value - 1], reverse, measurements_.at(u, i),
                                             scenario_.noise(), cfg_.particles, seed));
        }
        const std::uint64_t seed = derive_seed(cfg_.seed, tag(Stream::fusion), global_iter, i.value);
        try {
          next[a] = fuse_marginal(incoming, cfg_.particles, cfg_.oversampling, seed);
        } catch (const DegenerateWeightsError&) {
          next[a] = beliefs_[i.value - 1];
          degenerate[a] = 1;
        }
      });

      double shift = 0.0;
      std::map<Key, MixtureMessage> current;
      for (std::size_t a = 0; a < n; ++a) {
        const NodeId i = agents[a];
        for (std::size_t r = 0; r < refs[a].size(); ++r) {
          const NodeId u = refs[a][r];
          const int su = layer_of[u.value - 1];
          const int ri = layer_of[i.value - 1];
          traffic_.append(TrafficRecord{global_iter, u, i, su, ri, su < ri ? MessageKind::mul : MessageKind::msl});
          current.emplace(Key{u.value, i.value}, std::move(sent[a][r]));
        }
        shift += distance(mmse_estimate(beliefs_[i.value - 1]), mmse_estimate(next[a]));
        beliefs_[i.value - 1] = std::move(next[a]);
        outcome.degenerate += degenerate[a];
      }
      previous = std::move(current);
      outcome.iterations = t;
      if (cfg_.early_stop_shift && n > 0 && shift / static_cast<double>(n) < *cfg_.early_stop_shift) break;
    }
    return outcome;
  }

 private:
  const Scenario& scenario_;
  const MeasurementSet& measurements_;
  const RunConfig& cfg_;
  std::vector<ParticleBelief>& beliefs_;
  TrafficLog& traffic_;
};

inline std::vector<ParticleBelief> prior_beliefs(const Scenario& scenario, const RunConfig& cfg) {
  std::vector<ParticleBelief> beliefs;
  beliefs.reserve(scenario.node_count());
  for (NodeId id : scenario.nodes()) beliefs.push_back(init_belief(id, scenario, cfg.particles, cfg.seed));
  return beliefs;
}

// Runs every agent with at least one incident edge as a single synchronous
// group that fuses all of its neighbors in `graph`.
inline RunResult run_flat(const Scenario& scenario, const ConnectivityGraph& graph, const MeasurementSet& measurements,
                          const RunConfig& cfg) {
  validate(cfg);
  if (graph.node_count() != scenario.node_count()) throw IntegrityError("graph does not match scenario");
  RunResult result;
  result.beliefs = prior_beliefs(scenario, cfg);
  std::vector<NodeId> active;
  std::vector<std::vector<NodeId>> refs;
  std::vector<int> layer_of(scenario.node_count(), 0);
  for (NodeId i : scenario.agents()) {
    layer_of[i.value - 1] = 1;
    const auto& nbrs = graph.neighbors(i);
    if (nbrs.empty()) {
      result.unlocalized.push_back(i);
      continue;
    }
    active.push_back(i);
    refs.push_back(nbrs);
  }
  LayerRunner runner(scenario, measurements, cfg, result.beliefs, result.traffic);
  const auto outcome = runner.run(active, refs, layer_of, 0);
  result.iterations_run = outcome.iterations;
  result.degenerate_fusions = outcome.degenerate;
  return result;
}

}  // namespace detail

/// Standard NBP: T synchronous iterations in which every agent fuses the
/// messages of all its neighbors. Anchors send but never update. Agents
/// without neighbors keep their prior and are reported as unlocalized.
inline RunResult run_standard_nbp(const Scenario& scenario, const ConnectivityGraph& graph,
                                  const MeasurementSet& measurements, const RunConfig& cfg) {
  return detail::run_flat(scenario, graph, measurements, cfg);
}

/// Same engine as run_standard_nbp, restricted to the retained tree edges.
inline RunResult run_tree_nbp(const Scenario& scenario, const TreeGraph& tree, const MeasurementSet& measurements,
                              const RunConfig& cfg) {
  for (const Edge& e : tree.retained_edges) {
    if (!measurements.contains(e.a, e.b)) throw IntegrityError("tree edge has no measurement");
  }
  return detail::run_flat(scenario, tree.as_graph(scenario.node_count()), measurements, cfg);
}

}  // namespace wsnloc
