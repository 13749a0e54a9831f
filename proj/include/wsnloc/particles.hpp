#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <ostream>
#include <span>
#include <vector>

#include "wsnloc/core.hpp"
#include "wsnloc/scenario.hpp"

namespace wsnloc {

/// Densities below this value are clamped so weight ratios stay finite.
inline constexpr double kDensityFloor = 1e-300;

/// Regularization added to sample covariances before taking determinants (m^2).
inline constexpr double kEntropyEpsilon = 1e-6;

/// K weighted planar samples approximating one node's position posterior.
/// Stored as parallel arrays so the density kernels vectorize.
struct ParticleBelief {
  std::vector<double> xs;
  std::vector<double> ys;
  std::vector<double> weights;

  std::size_t size() const { return xs.size(); }
  bool empty() const { return xs.empty(); }
  Point sample(std::size_t k) const { return {xs[k], ys[k]}; }

  void push_back(Point p, double w) {
    xs.push_back(p.x);
    ys.push_back(p.y);
    weights.push_back(w);
  }

  void reserve(std::size_t n) {
    xs.reserve(n);
    ys.reserve(n);
    weights.reserve(n);
  }

  /// Scales weights to sum to one. Returns the pre-normalization total.
  double normalize() {
    const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
    if (total > 0.0) {
      for (double& w : weights) w /= total;
    }
    return total;
  }

  std::uint64_t fingerprint() const {
    Fnv1a h;
    for (std::size_t k = 0; k < size(); ++k) {
      h.add(xs[k]);
      h.add(ys[k]);
      h.add(weights[k]);
    }
    return h.value();
  }

  friend bool operator==(const ParticleBelief&, const ParticleBelief&) = default;
};

/// Isotropic Gaussian mixture carried on one directed edge. `bandwidth` is the
/// per-axis variance shared by all components (m^2).
struct MixtureMessage {
  std::vector<double> xs;
  std::vector<double> ys;
  std::vector<double> weights;
  double bandwidth = 1.0;

  std::size_t size() const { return xs.size(); }
  Point mean(std::size_t k) const { return {xs[k], ys[k]}; }

  friend bool operator==(const MixtureMessage&, const MixtureMessage&) = default;
};

namespace detail {

// Sum_k coeff[k] * exp(-|p - m_k|^2 * inv_two_var). Eight independent
// accumulators keep the loop vectorizable without reassociation flags.
inline double gaussian_sum(const double* __restrict mx, const double* __restrict my, const double* __restrict coeff,
                           std::size_t n, double x, double y, double inv_two_var) {
  double acc[8] = {0, 0, 0, 0, 0, 0, 0, 0};
  std::size_t k = 0;
  for (; k + 8 <= n; k += 8) {
    for (std::size_t j = 0; j < 8; ++j) {
      const double dx = x - mx[k + j];
      const double dy = y - my[k + j];
      acc[j] += coeff[k + j] * fast_exp(-(dx * dx + dy * dy) * inv_two_var);
    }
  }
  double total = 0.0;
  for (; k < n; ++k) {
    const double dx = x - mx[k];
    const double dy = y - my[k];
    total += coeff[k] * fast_exp(-(dx * dx + dy * dy) * inv_two_var);
  }
  for (double a : acc) total += a;
  return total;
}

}  // namespace detail

/// Precomputed evaluator for repeated density queries against one message.
class MixtureEvaluator {
 public:
  explicit MixtureEvaluator(const MixtureMessage& msg)
      : msg_(&msg), coeff_(msg.size()), inv_two_var_(0.5 / msg.bandwidth) {
    const double norm = 1.0 / (2.0 * std::numbers::pi * msg.bandwidth);
    for (std::size_t k = 0; k < msg.size(); ++k) coeff_[k] = msg.weights[k] * norm;
  }

  /// Density at (x, y), clamped below at kDensityFloor.
  double operator()(double x, double y) const {
    const double d =
        detail::gaussian_sum(msg_->xs.data(), msg_->ys.data(), coeff_.data(), coeff_.size(), x, y, inv_two_var_);
    return d > kDensityFloor ? d : kDensityFloor;
  }

  double operator()(Point p) const { return (*this)(p.x, p.y); }

 private:
  const MixtureMessage* msg_;
  std::vector<double> coeff_;
  double inv_two_var_;
};

/// Sum_k w_k N(x; m_k, bandwidth * I), clamped below at kDensityFloor.
inline double mixture_density(const MixtureMessage& msg, Point x) { return MixtureEvaluator(msg)(x); }

/// Prior belief: agents get K uniform samples over the area, anchors K copies
/// of their true position. Weights are 1/K.
inline ParticleBelief init_belief(NodeId node, const Scenario& scenario, std::size_t k_samples, std::uint64_t seed) {
  if (k_samples == 0) throw ConfigError("particle count must be at least 1");
  if (!scenario.contains(node)) throw IntegrityError("unknown node " + std::to_string(node.value));
  ParticleBelief b;
  b.reserve(k_samples);
  const double w = 1.0 / static_cast<double>(k_samples);
  if (scenario.is_anchor(node)) {
    const Point p = scenario.position(node);
    for (std::size_t k = 0; k < k_samples; ++k) b.push_back(p, w);
    return b;
  }
  Rng rng(derive_seed(seed, tag(Stream::prior), node.value));
  std::uniform_real_distribution<double> coord(0.0, scenario.area_side());
  for (std::size_t k = 0; k < k_samples; ++k) {
    const double x = coord(rng);
    const double y = coord(rng);
    b.push_back({x, y}, w);
  }
  return b;
}

/// Systematic resampling of a weighted pool down to K equal-weight samples.
/// Weights need not be normalized.
inline ParticleBelief resample(const ParticleBelief& pool, std::size_t k_samples, std::uint64_t seed) {
  if (pool.empty()) throw ConfigError("cannot resample an empty pool");
  if (k_samples == 0) throw ConfigError("particle count must be at least 1");
  double total = 0.0;
  for (double w : pool.weights) {
    if (!(w >= 0.0)) throw ConfigError("resampling weights must be non-negative");
    total += w;
  }
  if (!(total > 0.0) || !std::isfinite(total)) throw DegenerateWeightsError("all resampling weights are zero");

  Rng rng(derive_seed(seed, tag(Stream::resample)));
  const double step = total / static_cast<double>(k_samples);
  double u = std::uniform_real_distribution<double>(0.0, step)(rng);
  ParticleBelief out;
  out.reserve(k_samples);
  const double w = 1.0 / static_cast<double>(k_samples);
  std::size_t i = 0;
  double cumulative = pool.weights[0];
  for (std::size_t k = 0; k < k_samples; ++k) {
    // Zero-weight points are skipped even when u sits exactly on a boundary.
    while ((u > cumulative || pool.weights[i] == 0.0) && i + 1 < pool.size()) cumulative += pool.weights[++i];
    std::size_t pick = i;
    while (pool.weights[pick] == 0.0 && pick > 0) --pick;
    out.push_back(pool.sample(pick), w);
    u += step;
  }
  return out;
}

/// Weighted particle mean.
inline Point mmse_estimate(const ParticleBelief& belief) {
  double x = 0.0, y = 0.0, total = 0.0;
  for (std::size_t k = 0; k < belief.size(); ++k) {
    x += belief.weights[k] * belief.xs[k];
    y += belief.weights[k] * belief.ys[k];
    total += belief.weights[k];
  }
  if (total <= 0.0) return {};
  return {x / total, y / total};
}

struct Covariance2 {
  double xx = 0.0;
  double xy = 0.0;
  double yy = 0.0;

  double det() const { return xx * yy - xy * xy; }
  double trace() const { return xx + yy; }
};

inline Covariance2 weighted_covariance(std::span<const double> xs, std::span<const double> ys,
                                       std::span<const double> weights) {
  double total = 0.0, mx = 0.0, my = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    total += weights[k];
    mx += weights[k] * xs[k];
    my += weights[k] * ys[k];
  }
  if (total <= 0.0) return {};
  mx /= total;
  my /= total;
  Covariance2 c;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    const double dx = xs[k] - mx;
    const double dy = ys[k] - my;
    c.xx += weights[k] * dx * dx;
    c.xy += weights[k] * dx * dy;
    c.yy += weights[k] * dy * dy;
  }
  c.xx /= total;
  c.xy /= total;
  c.yy /= total;
  return c;
}

struct EntropyEstimate {
  double nats = 0.0;
  bool degenerate = false;  // all samples coincide; value is the regularized floor
};

/// Entropy of the moment-matched bivariate Gaussian,
/// 0.5 ln((2 pi e)^2 det(Sigma + eps I)). Diagnostic only.
inline EntropyEstimate gaussian_entropy(const ParticleBelief& belief) {
  Covariance2 c = weighted_covariance(belief.xs, belief.ys, belief.weights);
  bool degenerate = true;
  for (std::size_t k = 1; k < belief.size() && degenerate; ++k) {
    degenerate = belief.xs[k] == belief.xs[0] && belief.ys[k] == belief.ys[0];
  }
  if (degenerate) c = {};
  c.xx += kEntropyEpsilon;
  c.yy += kEntropyEpsilon;
  const double two_pi_e = 2.0 * std::numbers::pi * std::numbers::e;
  return {0.5 * std::log(two_pi_e * two_pi_e * c.det()), degenerate};
}

/// Belief dump: node_id,sample_index,x,y,weight.
inline void write_belief_csv_header(std::ostream& os) { os << "node_id,sample_index,x,y,weight\n"; }

inline void write_belief_csv_rows(std::ostream& os, NodeId node, const ParticleBelief& belief) {
  const auto old_precision = os.precision(9);
  for (std::size_t k = 0; k < belief.size(); ++k) {
    os << node.value << ',' << k << ',' << belief.xs[k] << ',' << belief.ys[k] << ',' << belief.weights[k] << '\n';
  }
  os.precision(old_precision);
}

}  // namespace wsnloc
