#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <ostream>
#include <set>
#include <span>
#include <string_view>
#include <vector>

#include "wsnloc/nbp.hpp"
#include "wsnloc/particles.hpp"

namespace wsnloc {

/// Empirical CDF of positioning error sampled at ascending thresholds.
struct CdfCurve {
  std::vector<double> thresholds;  // meters, ascending
  std::vector<double> values;      // fraction with error < threshold

  /// Value at a threshold that is part of the curve.
  double at(double threshold) const {
    for (std::size_t i = 0; i < thresholds.size(); ++i) {
      if (thresholds[i] == threshold) return values[i];
    }
    throw ConfigError("threshold not sampled by this curve");
  }

  /// threshold_m,cdf
  void write_csv(std::ostream& os) const {
    const auto old_precision = os.precision(9);
    os << "threshold_m,cdf\n";
    for (std::size_t i = 0; i < thresholds.size(); ++i) os << thresholds[i] << ',' << values[i] << '\n';
    os.precision(old_precision);
  }
};

inline void check_thresholds(std::span<const double> thresholds) {
  for (std::size_t i = 1; i < thresholds.size(); ++i) {
    if (!(thresholds[i] > thresholds[i - 1])) throw ConfigError("CDF thresholds must be strictly ascending");
  }
}

/// CDF over a pooled list of errors (one per scored agent, possibly across
/// many networks).
inline CdfCurve error_cdf(std::span<const double> errors, std::span<const double> thresholds) {
  check_thresholds(thresholds);
  std::vector<double> sorted(errors.begin(), errors.end());
  std::sort(sorted.begin(), sorted.end());
  CdfCurve curve;
  curve.thresholds.assign(thresholds.begin(), thresholds.end());
  for (double th : thresholds) {
    const auto below = std::lower_bound(sorted.begin(), sorted.end(), th) - sorted.begin();
    curve.values.push_back(sorted.empty() ? 0.0 : static_cast<double>(below) / static_cast<double>(sorted.size()));
  }
  return curve;
}

/// CDF of ||truth - estimate|| over every node present in `truth`.
inline CdfCurve error_cdf(const std::map<NodeId, Point>& estimates, const std::map<NodeId, Point>& truth,
                          std::span<const double> thresholds) {
  std::vector<double> errors;
  errors.reserve(truth.size());
  for (const auto& [id, p] : truth) {
    auto it = estimates.find(id);
    if (it == estimates.end()) throw IntegrityError("no estimate for node " + std::to_string(id.value));
    errors.push_back(distance(p, it->second));
  }
  return error_cdf(errors, thresholds);
}

inline double median(std::vector<double> values) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
  const double hi = values[mid];
  if (values.size() % 2 == 1) return hi;
  const double lo = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lo + hi);
}

// ---------------------------------------------------------------------------
// Complexity
// ---------------------------------------------------------------------------

enum class ComplexityModel { nbp, bfs, hierarchical };

inline std::string_view to_string(ComplexityModel m) {
  switch (m) {
    case ComplexityModel::nbp: return "nbp";
    case ComplexityModel::bfs: return "bfs";
    case ComplexityModel::hierarchical: return "hierarchical";
  }
  return "nbp";
}

/// Average number of links used per iteration: pi N^2 p^2 for standard NBP,
/// 2(N-1) on a spanning tree, and pi N^2 p^2 / L^2 with L layers.
inline double analytic_complexity(ComplexityModel model, int n_agents, double p, int layers = 1) {
  if (n_agents < 1) throw ConfigError("N must be at least 1");
  if (!(p > 0.0)) throw ConfigError("p must be positive");
  if (layers < 1) throw ConfigError("L must be at least 1");
  const double n = n_agents;
  switch (model) {
    case ComplexityModel::nbp: return std::numbers::pi * n * n * p * p;
    case ComplexityModel::bfs: return 2.0 * (n - 1.0);
    case ComplexityModel::hierarchical: return std::numbers::pi * n * n * p * p / (double(layers) * layers);
  }
  return 0.0;
}

/// Smallest layer count for which the layered scheme uses fewer links than a
/// spanning tree, i.e. the least L with N pi p^2 < 2 L^2 (strictly, in terms
/// of the two analytic values).
inline int crossover_layers(int n_agents, double p) {
  const double bfs = analytic_complexity(ComplexityModel::bfs, n_agents, p);
  int l = 1;
  while (analytic_complexity(ComplexityModel::hierarchical, n_agents, p, l) >= bfs) ++l;
  return l;
}

enum class LinkAggregation { per_iteration_mean, total };

enum class LinkFilter { all, agents_only };

/// Links used by a run. per_iteration_mean averages the number of distinct
/// directed (sender, receiver) pairs over the iterations present in the log;
/// total is the record count. agents_only drops messages sent by anchors
/// (layer 0).
inline double measured_links(const TrafficLog& log, LinkAggregation mode, LinkFilter filter = LinkFilter::all) {
  auto keep = [&](const TrafficRecord& r) { return filter == LinkFilter::all || r.sender_layer != 0; };
  if (mode == LinkAggregation::total) {
    return static_cast<double>(std::count_if(log.records().begin(), log.records().end(), keep));
  }
  std::map<int, std::set<std::pair<std::uint32_t, std::uint32_t>>> by_iter;
  for (const TrafficRecord& r : log.records()) {
    auto& slot = by_iter[r.iteration];
    if (keep(r)) slot.insert({r.sender.value, r.receiver.value});
  }
  if (by_iter.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& [it, pairs] : by_iter) sum += static_cast<double>(pairs.size());
  return sum / static_cast<double>(by_iter.size());
}

struct ComplexityReport {
  std::string algorithm;
  int n_agents = 0;
  double p = 0.0;
  int layers = 1;
  double analytic_value = 0.0;
  double measured_links = 0.0;  // mean over completed runs
};

// ---------------------------------------------------------------------------
// Complementary entropy ratio
// ---------------------------------------------------------------------------

struct CerValue {
  double value = 0.0;
  bool meaningful = true;  // false when the estimated entropy is not positive
};

/// 1 - H(reference) / H(estimate) with moment-matched Gaussian entropies.
/// Two Dirac (anchor) beliefs give 0.
inline CerValue cer(const ParticleBelief& estimate, const ParticleBelief& reference) {
  const EntropyEstimate h_est = gaussian_entropy(estimate);
  const EntropyEstimate h_ref = gaussian_entropy(reference);
  if (h_est.degenerate && h_ref.degenerate) return {0.0, true};
  const double value = 1.0 - h_ref.nats / h_est.nats;
  return {value, h_est.nats > 0.0};
}

/// Synthetic reference belief for CER: K samples from an isotropic Gaussian of
/// standard deviation `sigma` around the true position.
inline ParticleBelief reference_belief(Point truth, double sigma, std::size_t k_samples, std::uint64_t seed) {
  Rng rng(derive_seed(seed, tag(Stream::prior), 0xce7));
  std::normal_distribution<double> unit(0.0, 1.0);
  ParticleBelief b;
  b.reserve(k_samples);
  for (std::size_t k = 0; k < k_samples; ++k) {
    const double x = truth.x + sigma * unit(rng);
    const double y = truth.y + sigma * unit(rng);
    b.push_back({x, y}, 1.0 / static_cast<double>(k_samples));
  }
  return b;
}

}  // namespace wsnloc
