// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <chrono>
#include <cstdio>
#include <map>
#include <string>
#include <thread>

#include "support.hpp"

using namespace wsnloc;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

int failures = 0;

void report(int id, bool pass, const std::string& detail, double seconds) {
  std::printf("%s criterion %d: %s [%.1f s]\n", pass ? "PASS" : "FAIL", id, detail.c_str(), seconds);
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

unsigned workers() { return std::max(1u, std::thread::hardware_concurrency()); }

// 1 -------------------------------------------------------------------------

void analytic() {
  const auto t0 = Clock::now();
  const double nbp = analytic_complexity(ComplexityModel::nbp, 100, 0.2);
  const double bfs = analytic_complexity(ComplexityModel::bfs, 100, 0.2);
  bool ok = std::abs(nbp - 400.0 * std::numbers::pi) < 1e-9 && std::abs(nbp - 1256.64) < 0.005 && bfs == 198.0;
  for (int l = 1; l <= 10; ++l) {
    const double h = analytic_complexity(ComplexityModel::hierarchical, 100, 0.2, l);
    ok = ok && std::abs(h - nbp / (l * l)) < 1e-9;
    // N pi p^2 < 2 L^2  <=>  hierarchical below BFS (up to the N vs N-1 in BFS).
    const bool below = h < bfs;
    ok = ok && below == (l >= 3);
  }
  ok = ok && crossover_layers(100, 0.2) == 3;
  report(1, ok && seconds_since(t0) < 1.0,
         fmt("nbp=%.2f bfs=%.0f hier(L=2)=%.2f hier(L=3)=%.2f crossover L=%d", nbp, bfs,
             analytic_complexity(ComplexityModel::hierarchical, 100, 0.2, 2),
             analytic_complexity(ComplexityModel::hierarchical, 100, 0.2, 3), crossover_layers(100, 0.2)),
         seconds_since(t0));
}

// 2 -------------------------------------------------------------------------

double mean_agent_links(bool torus, int seeds) {
  ScenarioConfig sc = preset_config(NetworkPreset::net1);
  sc.area_side = 50.0;
  sc.radio_range = 10.0;  // p = R / a = 0.2
  sc.agent_count = 100;
  sc.torus = torus;
  RunConfig rc;
  rc.particles = 30;  // link counts do not depend on K or T
  rc.iterations = 1;
  std::vector<double> links(static_cast<std::size_t>(seeds));
  detail::parallel_for(links.size(), workers(), [&](std::size_t k) {
    const Scenario s = generate_scenario(sc, 1000 + k);
    const ConnectivityGraph g = build_connectivity(s);
    const MeasurementSet m = measure_distances(s, g.edges(), 1000 + k);
    RunConfig local = rc;
    local.seed = 1000 + k;
    const RunResult r = run_standard_nbp(s, g, m, local);
    links[k] = measured_links(r.traffic, LinkAggregation::per_iteration_mean, LinkFilter::agents_only);
  });
  return std::accumulate(links.begin(), links.end(), 0.0) / seeds;
}

void formula_vs_measurement() {
  const auto t0 = Clock::now();
  const double formula = analytic_complexity(ComplexityModel::nbp, 100, 0.2);
  const double torus = mean_agent_links(true, 200);
  const double square = mean_agent_links(false, 200);
  const double torus_dev = torus / formula - 1.0;
  const double square_dev = square / formula - 1.0;
  const double secs = seconds_since(t0);
  report(2, std::abs(torus_dev) <= 0.05 && square < formula && std::abs(square_dev) <= 0.25 && secs <= 120.0,
         fmt("formula %.1f, torus %.1f (%+.1f%%), square %.1f (%+.1f%%)", formula, torus, 100 * torus_dev, square,
             100 * square_dev),
         secs);
}

// 3 -------------------------------------------------------------------------

void reduction() {
  const auto t0 = Clock::now();
  int identical = 0;
  const int seeds = 20;
  for (int k = 0; k < seeds; ++k) {
    const std::uint64_t seed = 300 + k;
    const Scenario s = generate_scenario(preset_config(NetworkPreset::net2), seed);
    const ConnectivityGraph g = build_connectivity(s);
    const MeasurementSet m = measure_distances(s, g.edges(), seed);
    RunConfig rc = preset_run_config();
    rc.seed = seed;
    rc.workers = workers();
    const RunResult flat = run_standard_nbp(s, g, m, rc);
    const HierarchicalResult h = run_hierarchical_nbp(s, g, m, assign_layers(g, s.anchors(), 0), rc);
    identical += h.run.beliefs == flat.beliefs;
  }
  const double secs = seconds_since(t0);
  report(3, identical == seeds && secs <= 300.0, fmt("%d/%d net2 seeds bit-identical", identical, seeds), secs);
}

// 4, 5, 6 -------------------------------------------------------------------

struct Batch {
  std::map<std::string, ExperimentResult> results;
  double seconds = 0.0;
};

Batch run_net1_batch() {
  const auto t0 = Clock::now();
  Batch batch;
  auto add = [&](const std::string& key, Algorithm algo, std::optional<int> c) {
    ExperimentConfig cfg = experiment_preset(NetworkPreset::net1, algo);
    cfg.threshold_init = c;
    cfg.trials = 50;
    cfg.base_seed = 100;
    cfg.workers = workers();
    batch.results.emplace(key, run_experiment(cfg));
  };
  add("nbp", Algorithm::nbp, std::nullopt);
  add("bfs", Algorithm::nbp_bfs, std::nullopt);
  for (int c = 0; c <= 3; ++c) add("c" + std::to_string(c), Algorithm::hierarchical, c);
  batch.seconds = seconds_since(t0);
  return batch;
}

double cdf_at_1m(const ExperimentResult& r) {
  const std::vector<double> th = {1.0};
  return error_cdf(r.pooled_errors(), th).values[0];
}

void accuracy_ordering(const Batch& b) {
  const ExperimentResult& nbp = b.results.at("nbp");
  const ExperimentResult& bfs = b.results.at("bfs");
  const ExperimentResult& c3 = b.results.at("c3");
  const bool complete = nbp.completed() == 50 && bfs.completed() == 50 && c3.completed() == 50;
  const bool a = c3.median_error() < nbp.median_error();
  const bool bb = cdf_at_1m(c3) >= 0.75;
  const bool c = cdf_at_1m(c3) - cdf_at_1m(bfs) >= 0.05;
  report(4, complete && a && bb && c && b.seconds <= 900.0,
         fmt("median c3 %.3f vs nbp %.3f m; CDF(1m) c3 %.3f (>= 0.75), bfs %.3f, nbp %.3f", c3.median_error(),
             nbp.median_error(), cdf_at_1m(c3), cdf_at_1m(bfs), cdf_at_1m(nbp)),
         b.seconds);
}

void threshold_insensitivity(const Batch& b) {
  double v[4];
  for (int c = 0; c <= 3; ++c) v[c] = cdf_at_1m(b.results.at("c" + std::to_string(c)));
  double spread = 0.0;
  double margin = 1.0;
  for (int i = 0; i < 3; ++i) {
    for (int j = i + 1; j < 3; ++j) spread = std::max(spread, std::abs(v[i] - v[j]));
    margin = std::min(margin, v[3] - v[i]);
  }
  report(5, spread < 0.05 && margin >= 0.03 && b.seconds <= 1800.0,
         fmt("CDF(1m) c0 %.3f c1 %.3f c2 %.3f c3 %.3f; max pairwise spread below 3 = %.3f (< 0.05), c3 margin = %.3f "
             "(>= 0.03)",
             v[0], v[1], v[2], v[3], spread, margin),
         b.seconds);
}

void runtime_and_traffic(const Batch& b) {
  const ExperimentResult& nbp = b.results.at("nbp");
  const ExperimentResult& c3 = b.results.at("c3");
  double t_nbp = 0.0, t_c3 = 0.0;
  int fewer = 0, paired = 0;
  std::map<int, std::vector<double>> by_layers;
  for (std::size_t k = 0; k < nbp.trials.size(); ++k) {
    const TrialRecord& a = nbp.trials[k];
    const TrialRecord& h = c3.trials[k];
    if (!a.ok || !h.ok) continue;
    ++paired;
    t_nbp += a.inference_seconds;
    t_c3 += h.inference_seconds;
    fewer += h.directed_messages < a.directed_messages;
    by_layers[h.layers].push_back(h.inference_seconds);
  }
  const double speedup = t_c3 > 0.0 ? t_nbp / t_c3 : 0.0;
  const double share = paired > 0 ? static_cast<double>(fewer) / paired : 0.0;
  // Median runtime per realized layer count, over groups with at least 3 runs.
  bool monotone = true;
  double prev = std::numeric_limits<double>::infinity();
  std::string groups;
  for (const auto& [layers, times] : by_layers) {
    if (times.size() < 3) continue;
    const double med = median(times);
    monotone = monotone && med <= prev;
    prev = med;
    groups += fmt(" L=%d:%.3fs(n=%zu)", layers, med, times.size());
  }
  report(6, paired == 50 && speedup >= 3.0 && share >= 0.95 && monotone && b.seconds <= 900.0,
         fmt("speedup %.2fx (>= 3), fewer messages in %.0f%% of seeds (>= 95%%), median runtime by L:%s", speedup,
             100 * share, groups.c_str()),
         b.seconds);
}

// 7 -------------------------------------------------------------------------

void oracle_equivalence() {
  const auto t0 = Clock::now();
  const NoiseModel noise{0.2, 0.01};
  const std::vector<Point> anchors = {{0, 0}, {10, 0}, {0, 10}};
  const Point truth{5, 5};
  std::vector<double> ranges;
  for (const Point& a : anchors) ranges.push_back(distance(a, truth));
  const Point oracle = testing::grid_posterior_mean(anchors, ranges, noise, 0, 10, 0, 10, 0.05);

  const Scenario s = testing::make_scenario({truth}, anchors, 10, 12, noise);
  const ConnectivityGraph g = build_connectivity(s);
  MeasurementSet m;
  for (const Edge& e : g.edges()) m.set(e.a, e.b, s.true_distance(e.a, e.b));

  std::vector<double> medians;
  std::string detail;
  for (std::size_t k : {200u, 2000u, 20000u}) {
    std::vector<double> errors(50);
    detail::parallel_for(errors.size(), workers(), [&](std::size_t i) {
      RunConfig rc;
      rc.particles = k;
      rc.iterations = 2;
      rc.seed = 700 + i;
      errors[i] = distance(run_standard_nbp(s, g, m, rc).estimate(NodeId(1)), oracle);
    });
    medians.push_back(median(errors));
    detail += fmt(" K=%zu:%.4f", k, medians.back());
  }
  const double secs = seconds_since(t0);
  const bool monotone = medians[1] < medians[0] && medians[2] < medians[1];
  report(7, medians[0] < 0.2 && monotone && secs <= 300.0,
         fmt("median error vs grid posterior mean (%.3f, %.3f):%s (K=200 < 0.2, decreasing)", oracle.x, oracle.y,
             detail.c_str()),
         secs);
}

// 8 -------------------------------------------------------------------------

void structural_invariants() {
  const auto t0 = Clock::now();
  std::size_t mll = 0, audit = 0, partition_errors = 0, monotone_errors = 0, anchor_changes = 0, nondeterministic = 0;
  double worst_norm = 0.0;
  for (std::uint64_t seed = 800; seed < 810; ++seed) {
    const Scenario s = generate_scenario(preset_config(NetworkPreset::net1), seed);
    const ConnectivityGraph g = build_connectivity(s);
    const MeasurementSet m = measure_distances(s, g.edges(), seed);
    RunConfig rc;
    rc.particles = 50;
    rc.iterations = 2;
    rc.seed = seed;
    for (int c = 0; c <= 3; ++c) {
      const LayerAssignment la = assign_layers(g, s.anchors(), c);
      std::size_t assigned = la.unassignable.size();
      for (const Layer& l : la.layers) assigned += l.agents.size();
      partition_errors += assigned != s.agent_count() || la.layer_of.size() + la.unassignable.size() != assigned;

      std::vector<NodeId> more = s.anchors();
      for (std::uint32_t k = 1; k <= 10; ++k) more.push_back(NodeId(k * 9));
      if (c > 0) {
        const LayerAssignment sup = assign_layers(g, more, c);
        for (const auto& [id, l] : la.layer_of) {
          const bool promoted = id.value % 9 == 0 && id.value <= 90;
          monotone_errors += !promoted && !sup.layer_of.contains(id);
        }
      }

      RunConfig serial = rc;
      const HierarchicalResult h = run_hierarchical_nbp(s, g, m, la, serial);
      RunConfig parallel = rc;
      parallel.workers = 4;
      const HierarchicalResult hp = run_hierarchical_nbp(s, g, m, la, parallel);
      nondeterministic += h.run.fingerprint() != hp.run.fingerprint();
      audit += audit_propagation(h.run.traffic, la);
      for (const TrafficRecord& r : h.run.traffic.records()) mll += r.sender_layer > r.receiver_layer;
      for (NodeId a : s.anchors()) anchor_changes += h.run.belief(a) != init_belief(a, s, rc.particles, rc.seed);
      for (NodeId i : s.agents()) {
        const auto& w = h.run.belief(i).weights;
        worst_norm = std::max(worst_norm, std::abs(std::accumulate(w.begin(), w.end(), 0.0) - 1.0));
      }
    }
  }

  // Systematic resampling is unbiased: expected copies = K * normalized weight.
  ParticleBelief pool;
  const std::vector<double> w = {0.05, 0.1, 0.15, 0.3, 0.4};
  for (std::size_t k = 0; k < w.size(); ++k) pool.push_back({static_cast<double>(k), 0.0}, w[k]);
  std::vector<double> counts(w.size(), 0.0);
  const int reps = 2000;
  for (int r = 0; r < reps; ++r) {
    const ParticleBelief out = resample(pool, 7, 5000 + r);
    for (std::size_t k = 0; k < out.size(); ++k) counts[static_cast<std::size_t>(out.xs[k])] += 1.0;
  }
  double worst_bias = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k) worst_bias = std::max(worst_bias, std::abs(counts[k] / reps - 7 * w[k]));
  // Per-slot copy counts take at most two adjacent values, so sd <= 0.5 and the
  // standard error of the mean is <= 0.5 / sqrt(reps); allow 5 of those.
  const double bias_tol = 5 * 0.5 / std::sqrt(double(reps));

  const double secs = seconds_since(t0);
  const bool ok = mll == 0 && audit == 0 && partition_errors == 0 && monotone_errors == 0 && anchor_changes == 0 &&
                  nondeterministic == 0 && worst_norm < 1e-9 && worst_bias < bias_tol && secs <= 300.0;
  report(8, ok,
         fmt("MLL %zu, audit violations %zu, partition errors %zu, activation regressions %zu, anchor changes %zu, "
             "worker-count mismatches %zu, max |sum w - 1| %.1e, max resampling bias %.4f (< %.4f)",
             mll, audit, partition_errors, monotone_errors, anchor_changes, nondeterministic, worst_norm, worst_bias,
             bias_tol),
         secs);
}

}  // namespace

int main() {
  analytic();
  formula_vs_measurement();
  reduction();
  const Batch batch = run_net1_batch();
  accuracy_ordering(batch);
  threshold_insensitivity(batch);
  runtime_and_traffic(batch);
  oracle_equivalence();
  structural_invariants();
  std::printf("%d of 8 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
