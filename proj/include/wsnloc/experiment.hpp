#pragma once

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "wsnloc/graph.hpp"
#include "wsnloc/hierarchy.hpp"
#include "wsnloc/io.hpp"
#include "wsnloc/metrics.hpp"
#include "wsnloc/nbp.hpp"
#include "wsnloc/presets.hpp"
#include "wsnloc/scenario.hpp"

namespace wsnloc {

enum class Algorithm { nbp, nbp_bfs, nbp_min, hierarchical };

inline std::string_view to_string(Algorithm a) {
  switch (a) {
    case Algorithm::nbp: return "nbp";
    case Algorithm::nbp_bfs: return "nbp-bfs";
    case Algorithm::nbp_min: return "nbp-min";
    case Algorithm::hierarchical: return "hierarchical";
  }
  return "nbp";
}

inline Algorithm algorithm_from_string(std::string_view s) {
  if (s == "nbp") return Algorithm::nbp;
  if (s == "nbp-bfs") return Algorithm::nbp_bfs;
  if (s == "nbp-min") return Algorithm::nbp_min;
  if (s == "hierarchical") return Algorithm::hierarchical;
  throw ConfigError("unknown algorithm '" + std::string(s) + "'");
}

/// How agents that never receive a message enter the error statistics.
enum class ScoreUnassignable {
  exclude,     // dropped from the CDF
  prior_mean,  // scored at the mean of their uniform prior
};

inline std::string_view to_string(ScoreUnassignable s) {
  return s == ScoreUnassignable::exclude ? "exclude" : "prior-mean";
}

inline ScoreUnassignable score_unassignable_from_string(std::string_view s) {
  if (s == "exclude") return ScoreUnassignable::exclude;
  if (s == "prior-mean") return ScoreUnassignable::prior_mean;
  throw ConfigError("unknown unassignable scoring '" + std::string(s) + "'");
}

/// 0.1 m to 5 m in 0.1 m steps.
inline std::vector<double> default_cdf_thresholds() {
  std::vector<double> out;
  for (int k = 1; k <= 50; ++k) out.push_back(k / 10.0);
  return out;
}

struct ExperimentConfig {
  std::optional<NetworkPreset> preset = NetworkPreset::net1;  // label only; `scenario` is authoritative
  ScenarioConfig scenario = preset_config(NetworkPreset::net1);
  Algorithm algorithm = Algorithm::hierarchical;
  std::optional<int> threshold_init;  // hierarchical only, 3 when unset
  LayeringMode layering = LayeringMode::gate_first_layer;
  RunConfig run = preset_run_config();  // seed and workers are set per trial
  int trials = 50;
  std::uint64_t base_seed = 1;
  unsigned workers = 1;
  ScoreUnassignable score_unassignable = ScoreUnassignable::exclude;
  std::vector<double> cdf_thresholds = default_cdf_thresholds();
  std::string output_dir;

  int effective_threshold() const { return threshold_init.value_or(3); }

  std::string label() const {
    std::string s(to_string(algorithm));
    if (algorithm == Algorithm::hierarchical) s += "(c=" + std::to_string(effective_threshold()) + ")";
    return s;
  }

  std::uint64_t trial_seed(int index) const { return base_seed + static_cast<std::uint64_t>(index); }

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

inline void validate(const ExperimentConfig& cfg) {
  if (cfg.trials < 1) throw ConfigError("trials must be at least 1");
  if (cfg.workers < 1) throw ConfigError("workers must be at least 1");
  if (cfg.threshold_init && cfg.algorithm != Algorithm::hierarchical) {
    throw ConfigError("threshold_init only applies to the hierarchical algorithm");
  }
  if (cfg.effective_threshold() < 0 || cfg.effective_threshold() > 3) throw ConfigError("threshold_init must be in 0..3");
  if (cfg.cdf_thresholds.empty()) throw ConfigError("at least one CDF threshold is required");
  check_thresholds(cfg.cdf_thresholds);
  validate(cfg.scenario);
  validate(cfg.run);
}

/// Experiment for a reference deployment with the matching inference settings.
inline ExperimentConfig experiment_preset(NetworkPreset p, Algorithm algorithm = Algorithm::hierarchical) {
  ExperimentConfig cfg;
  cfg.preset = p;
  cfg.scenario = preset_config(p);
  cfg.run = preset_run_config();
  cfg.algorithm = algorithm;
  return cfg;
}

inline void to_json(Json& j, const ExperimentConfig& c) {
  j = Json::object();
  j["preset"] = c.preset ? Json(to_string(*c.preset)) : Json(nullptr);
  j["scenario"] = c.scenario;
  j["algorithm"] = to_string(c.algorithm);
  if (c.threshold_init) j["threshold_init"] = *c.threshold_init;
  j["layering"] = to_string(c.layering);
  j["run"] = c.run;
  j["trials"] = c.trials;
  j["base_seed"] = c.base_seed;
  j["workers"] = c.workers;
  j["score_unassignable"] = to_string(c.score_unassignable);
  j["cdf_thresholds"] = c.cdf_thresholds;
  j["output_dir"] = c.output_dir;
}

/// A "preset" key seeds the scenario from the reference deployment; keys
/// under "scenario" then override individual fields.
inline void from_json(const Json& j, ExperimentConfig& c) {
  if (!j.is_object()) throw ConfigError("experiment config must be a JSON object");
  if (j.contains("preset")) {
    if (j.at("preset").is_null()) {
      c.preset.reset();
    } else {
      c.preset = network_preset_from_string(j.at("preset").get<std::string>());
      c.scenario = preset_config(*c.preset);
    }
  }
  if (j.contains("scenario")) from_json(j.at("scenario"), c.scenario);
  if (j.contains("algorithm")) c.algorithm = algorithm_from_string(j.at("algorithm").get<std::string>());
  if (j.contains("threshold_init") && !j.at("threshold_init").is_null()) {
    c.threshold_init = j.at("threshold_init").get<int>();
  }
  if (j.contains("layering")) c.layering = layering_mode_from_string(j.at("layering").get<std::string>());
  if (j.contains("run")) from_json(j.at("run"), c.run);
  c.trials = j.value("trials", c.trials);
  c.base_seed = j.value("base_seed", c.base_seed);
  c.workers = j.value("workers", c.workers);
  if (j.contains("score_unassignable")) {
    c.score_unassignable = score_unassignable_from_string(j.at("score_unassignable").get<std::string>());
  }
  if (j.contains("cdf_thresholds")) c.cdf_thresholds = j.at("cdf_thresholds").get<std::vector<double>>();
  c.output_dir = j.value("output_dir", c.output_dir);
}

/// Parses and validates a config. Malformed JSON values become ConfigError.
inline ExperimentConfig parse_experiment_config(const Json& j) {
  ExperimentConfig cfg;
  try {
    from_json(j, cfg);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("invalid experiment config: ") + e.what());
  }
  validate(cfg);
  return cfg;
}

inline ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  return parse_experiment_config(read_json_file(path));
}

// ---------------------------------------------------------------------------
// Trials
// ---------------------------------------------------------------------------

struct AgentScore {
  NodeId agent;
  double error = 0.0;  // meters, MMSE estimate vs truth; area center for unlocalized agents
  bool localized = true;
};

struct TrialRecord {
  int index = 0;
  std::uint64_t seed = 0;
  bool ok = true;
  std::string error;  // failure message when !ok
  std::vector<AgentScore> agents;
  double inference_seconds = 0.0;
  std::size_t directed_messages = 0;
  double links_per_iteration = 0.0;  // agent senders only
  int layers = 1;
  std::size_t unassignable = 0;
  std::size_t degenerate_fusions = 0;
  std::uint64_t scenario_hash = 0;
  std::uint64_t measurement_hash = 0;
  std::uint64_t result_hash = 0;
  std::vector<IterationTraffic> traffic;

  std::vector<double> scored_errors(ScoreUnassignable mode) const {
    std::vector<double> out;
    for (const AgentScore& a : agents) {
      if (a.localized || mode == ScoreUnassignable::prior_mean) out.push_back(a.error);
    }
    return out;
  }
};

/// Everything one trial produced, for callers that need more than the record.
struct TrialRun {
  TrialRecord record;
  Scenario scenario;
  RunResult run;
  std::optional<LayerAssignment> assignment;
};

/// Runs one trial: scenario, measurements and inference all derive from
/// `seed`. Only the algorithm itself (tree or layer construction included) is
/// timed. Exceptions propagate.
inline TrialRun execute_trial(const ExperimentConfig& cfg, std::uint64_t seed, unsigned inner_workers = 1) {
  TrialRun out;
  TrialRecord& rec = out.record;
  rec.seed = seed;
  rec.index = static_cast<int>(seed - cfg.base_seed);
  out.scenario = generate_scenario(cfg.scenario, seed);
  const Scenario& scenario = out.scenario;
  const ConnectivityGraph graph = build_connectivity(scenario);
  const MeasurementSet meas = measure_distances(scenario, graph, seed);
  RunConfig rc = cfg.run;
  rc.seed = seed;
  rc.workers = inner_workers;

  const auto start = std::chrono::steady_clock::now();
  switch (cfg.algorithm) {
    case Algorithm::nbp:
      out.run = run_standard_nbp(scenario, graph, meas, rc);
      break;
    case Algorithm::nbp_bfs:
      out.run = run_tree_nbp(scenario, bfs_spanning_tree(graph, scenario.anchors()), meas, rc);
      break;
    case Algorithm::nbp_min:
      out.run = run_tree_nbp(scenario, min_spanning_tree(graph, meas), meas, rc);
      break;
    case Algorithm::hierarchical: {
      out.assignment = assign_layers(graph, scenario.anchors(), cfg.effective_threshold(), cfg.layering);
      out.run = run_hierarchical_nbp(scenario, graph, meas, *out.assignment, rc).run;
      break;
    }
  }
  rec.inference_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  const RunResult& run = out.run;
  const Point prior_mean{scenario.area_side() / 2.0, scenario.area_side() / 2.0};
  for (NodeId i : scenario.agents()) {
    const bool localized = std::find(run.unlocalized.begin(), run.unlocalized.end(), i) == run.unlocalized.end();
    const Point estimate = localized ? run.estimate(i) : prior_mean;
    rec.agents.push_back({i, distance(estimate, scenario.position(i)), localized});
  }
  rec.directed_messages = run.traffic.size();
  rec.links_per_iteration = measured_links(run.traffic, LinkAggregation::per_iteration_mean, LinkFilter::agents_only);
  rec.layers = out.assignment ? std::max<int>(1, static_cast<int>(out.assignment->layer_count())) : 1;
  rec.unassignable = run.unlocalized.size();
  rec.degenerate_fusions = run.degenerate_fusions;
  rec.scenario_hash = scenario.fingerprint();
  rec.measurement_hash = meas.fingerprint();
  rec.result_hash = run.fingerprint();
  rec.traffic = run.traffic.per_iteration();
  return out;
}

/// Like execute_trial but records failures instead of throwing.
inline TrialRecord run_trial(const ExperimentConfig& cfg, int index, unsigned inner_workers = 1) {
  const std::uint64_t seed = cfg.trial_seed(index);
  try {
    return execute_trial(cfg, seed, inner_workers).record;
  } catch (const std::exception& e) {
    TrialRecord rec;
    rec.index = index;
    rec.seed = seed;
    rec.ok = false;
    rec.error = e.what();
    return rec;
  }
}

// ---------------------------------------------------------------------------
// Experiments
// ---------------------------------------------------------------------------

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<TrialRecord> trials;  // ascending seed
  CdfCurve cdf;
  ComplexityReport complexity;
  bool partial = false;  // some trial failed

  std::vector<double> pooled_errors() const {
    std::vector<double> out;
    for (const TrialRecord& t : trials) {
      if (!t.ok) continue;
      const auto e = t.scored_errors(config.score_unassignable);
      out.insert(out.end(), e.begin(), e.end());
    }
    return out;
  }

  double median_error() const { return median(pooled_errors()); }

  std::size_t completed() const {
    return static_cast<std::size_t>(std::count_if(trials.begin(), trials.end(), [](const auto& t) { return t.ok; }));
  }

  template <typename Fn>
  double mean_over_completed(Fn&& field) const {
    double sum = 0.0;
    std::size_t n = 0;
    for (const TrialRecord& t : trials) {
      if (!t.ok) continue;
      sum += static_cast<double>(field(t));
      ++n;
    }
    return n == 0 ? 0.0 : sum / static_cast<double>(n);
  }

  double mean_runtime() const {
    return mean_over_completed([](const TrialRecord& t) { return t.inference_seconds; });
  }
  double mean_messages() const {
    return mean_over_completed([](const TrialRecord& t) { return t.directed_messages; });
  }
};

inline ComplexityReport complexity_report(const ExperimentResult& r) {
  const ExperimentConfig& cfg = r.config;
  ComplexityReport rep;
  rep.algorithm = cfg.label();
  rep.n_agents = cfg.scenario.agent_count;
  rep.p = cfg.scenario.radio_range / cfg.scenario.area_side;
  const double mean_layers = r.mean_over_completed([](const TrialRecord& t) { return t.layers; });
  rep.layers = std::max(1, static_cast<int>(std::lround(mean_layers)));
  ComplexityModel model = ComplexityModel::nbp;
  if (cfg.algorithm == Algorithm::nbp_bfs || cfg.algorithm == Algorithm::nbp_min) model = ComplexityModel::bfs;
  if (cfg.algorithm == Algorithm::hierarchical) model = ComplexityModel::hierarchical;
  if (rep.n_agents >= 1) rep.analytic_value = analytic_complexity(model, rep.n_agents, rep.p, rep.layers);
  rep.measured_links = r.mean_over_completed([](const TrialRecord& t) { return t.links_per_iteration; });
  return rep;
}

namespace detail {

inline std::string hex64(std::uint64_t v) {
  char buf[19];
  std::snprintf(buf, sizeof buf, "0x%016llx", static_cast<unsigned long long>(v));
  return buf;
}

inline std::uint64_t parse_hex64(const std::string& s) { return std::stoull(s, nullptr, 16); }

inline std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

}  // namespace detail

inline Json manifest_json(const ExperimentResult& r) {
  Json trials = Json::array();
  for (const TrialRecord& t : r.trials) {
    Json row{{"index", t.index}, {"seed", t.seed}, {"ok", t.ok}};
    if (t.ok) {
      row["scenario_hash"] = detail::hex64(t.scenario_hash);
      row["measurement_hash"] = detail::hex64(t.measurement_hash);
      row["result_hash"] = detail::hex64(t.result_hash);
    } else {
      row["error"] = t.error;
    }
    trials.push_back(row);
  }
  return Json{{"format", "wsnloc-experiment/1"},
              {"config", r.config},
              {"partial", r.partial},
              {"completed_trials", r.completed()},
              {"complexity", r.complexity},
              {"trials", trials}};
}

/// Writes manifest.json, cdf.csv, trials.csv, traffic.csv, agents.csv and
/// timing.csv. Every file except timing.csv is a pure function of the config.
inline void write_experiment(const ExperimentResult& r, const std::filesystem::path& dir) {
  ensure_directory(dir);
  write_json_file(dir / "manifest.json", manifest_json(r));
  {
    auto os = open_output(dir / "cdf.csv");
    r.cdf.write_csv(os);
  }
  {
    auto os = open_output(dir / "trials.csv");
    os.precision(9);
    os << "index,seed,ok,layers,directed_messages,links_per_iteration,degenerate_fusions,unassignable,scored_agents,"
          "median_error_m,scenario_hash,result_hash,error\n";
    for (const TrialRecord& t : r.trials) {
      const auto errors = t.scored_errors(r.config.score_unassignable);
      os << t.index << ',' << t.seed << ',' << (t.ok ? 1 : 0) << ',' << t.layers << ',' << t.directed_messages << ','
         << t.links_per_iteration << ',' << t.degenerate_fusions << ',' << t.unassignable << ',' << errors.size() << ',';
      if (!errors.empty()) os << median(errors);
      os << ',' << detail::hex64(t.scenario_hash) << ',' << detail::hex64(t.result_hash) << ','
         << detail::csv_quote(t.error) << '\n';
    }
  }
  {
    auto os = open_output(dir / "traffic.csv");
    os << "seed,iteration,directed_messages,links_active\n";
    for (const TrialRecord& t : r.trials) {
      for (const IterationTraffic& it : t.traffic) {
        os << t.seed << ',' << it.iteration << ',' << it.directed_messages << ',' << it.links_active << '\n';
      }
    }
  }
  {
    auto os = open_output(dir / "agents.csv");
    os.precision(9);
    os << "seed,agent,error_m,localized\n";
    for (const TrialRecord& t : r.trials) {
      for (const AgentScore& a : t.agents) {
        os << t.seed << ',' << a.agent.value << ',' << a.error << ',' << (a.localized ? 1 : 0) << '\n';
      }
    }
  }
  {
    auto os = open_output(dir / "timing.csv");
    os.precision(9);
    os << "seed,inference_seconds\n";
    for (const TrialRecord& t : r.trials) os << t.seed << ',' << t.inference_seconds << '\n';
  }
}

/// Runs `trials` trials with seeds base_seed + index, up to `workers` at a
/// time, and writes the result files when output_dir is set. A failing trial
/// is recorded and flags the result as partial.
inline ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  validate(cfg);
  if (!cfg.output_dir.empty()) ensure_directory(cfg.output_dir);
  ExperimentResult result;
  result.config = cfg;
  result.trials.resize(static_cast<std::size_t>(cfg.trials));
  const unsigned inner = cfg.trials == 1 ? cfg.workers : 1;
  detail::parallel_for(result.trials.size(), cfg.workers,
                       [&](std::size_t k) { result.trials[k] = run_trial(cfg, static_cast<int>(k), inner); });
  result.partial = result.completed() != result.trials.size();
  result.cdf = error_cdf(result.pooled_errors(), cfg.cdf_thresholds);
  result.complexity = complexity_report(result);
  if (!cfg.output_dir.empty()) write_experiment(result, cfg.output_dir);
  return result;
}

// ---------------------------------------------------------------------------
// Paired comparison
// ---------------------------------------------------------------------------

struct ComparisonRow {
  std::string label;
  std::size_t trials = 0;  // completed
  double median_error = 0.0;
  std::vector<double> cdf;  // at Comparison::thresholds
  double mean_runtime = 0.0;
  double mean_messages = 0.0;
  std::optional<double> runtime_ratio;  // relative to the first row
  std::optional<double> traffic_ratio;
};

struct Comparison {
  std::vector<double> thresholds;
  std::vector<ComparisonRow> rows;
  std::vector<ExperimentResult> results;

  /// label,trials,median_error_m,cdf_<th>...,mean_runtime_s,mean_messages,runtime_ratio,traffic_ratio
  void write_csv(std::ostream& os) const {
    const auto old_precision = os.precision(9);
    os << "label,trials,median_error_m";
    for (double th : thresholds) os << ",cdf_" << th;
    os << ",mean_runtime_s,mean_messages,runtime_ratio,traffic_ratio\n";
    for (const ComparisonRow& r : rows) {
      os << r.label << ',' << r.trials << ',' << r.median_error;
      for (double v : r.cdf) os << ',' << v;
      os << ',' << r.mean_runtime << ',' << r.mean_messages << ',';
      if (r.runtime_ratio) os << *r.runtime_ratio;
      os << ',';
      if (r.traffic_ratio) os << *r.traffic_ratio;
      os << '\n';
    }
    os.precision(old_precision);
  }
};

/// Runs every config on the same seeds and tabulates them. Configs must agree
/// on the deployment, base seed and trial count. Ratios are relative to the
/// first config and omitted when there is only one.
inline Comparison compare_experiments(const std::vector<ExperimentConfig>& configs,
                                      std::vector<double> thresholds = {0.5, 1.0, 2.0}) {
  if (configs.empty()) throw ConfigError("nothing to compare");
  check_thresholds(thresholds);
  const ExperimentConfig& ref = configs.front();
  for (const ExperimentConfig& c : configs) {
    validate(c);
    if (c.preset != ref.preset || c.scenario != ref.scenario) throw ConfigError("compared configs use different presets");
    if (c.base_seed != ref.base_seed || c.trials != ref.trials) {
      throw ConfigError("compared configs must share base_seed and trials");
    }
  }

  Comparison cmp;
  cmp.thresholds = thresholds;
  for (const ExperimentConfig& c : configs) {
    ExperimentConfig run_cfg = c;
    run_cfg.cdf_thresholds = thresholds;
    cmp.results.push_back(run_experiment(run_cfg));
  }
  for (std::size_t k = 0; k < static_cast<std::size_t>(ref.trials); ++k) {
    std::optional<std::uint64_t> hash;
    for (const ExperimentResult& r : cmp.results) {
      const TrialRecord& t = r.trials[k];
      if (!t.ok) continue;
      if (hash && *hash != t.scenario_hash) throw IntegrityError("paired trials saw different scenarios");
      hash = t.scenario_hash;
    }
  }
  for (const ExperimentResult& r : cmp.results) {
    ComparisonRow row;
    row.label = r.config.label();
    row.trials = r.completed();
    row.median_error = r.median_error();
    row.cdf = r.cdf.values;
    row.mean_runtime = r.mean_runtime();
    row.mean_messages = r.mean_messages();
    cmp.rows.push_back(std::move(row));
  }
  if (cmp.rows.size() > 1) {
    const ComparisonRow base = cmp.rows.front();
    for (ComparisonRow& row : cmp.rows) {
      if (base.mean_runtime > 0.0) row.runtime_ratio = row.mean_runtime / base.mean_runtime;
      if (base.mean_messages > 0.0) row.traffic_ratio = row.mean_messages / base.mean_messages;
    }
  }
  return cmp;
}

// ---------------------------------------------------------------------------
// Replay
// ---------------------------------------------------------------------------

struct ReplayOutcome {
  TrialRecord record;
  std::uint64_t expected_scenario_hash = 0;
  std::uint64_t expected_result_hash = 0;

  bool matches() const {
    return record.scenario_hash == expected_scenario_hash && record.result_hash == expected_result_hash;
  }
};

/// Re-runs the trial with `seed` from a manifest and checks its fingerprints.
inline ReplayOutcome replay_trial(const Json& manifest, std::uint64_t seed) {
  if (!manifest.contains("config") || !manifest.contains("trials")) throw ConfigError("not an experiment manifest");
  const ExperimentConfig cfg = parse_experiment_config(manifest.at("config"));
  for (const Json& t : manifest.at("trials")) {
    if (t.at("seed").get<std::uint64_t>() != seed) continue;
    if (!t.at("ok").get<bool>()) throw ConfigError("trial " + std::to_string(seed) + " failed in the recorded run");
    ReplayOutcome out;
    out.record = execute_trial(cfg, seed).record;
    out.expected_scenario_hash = detail::parse_hex64(t.at("scenario_hash").get<std::string>());
    out.expected_result_hash = detail::parse_hex64(t.at("result_hash").get<std::string>());
    return out;
  }
  throw ConfigError("seed " + std::to_string(seed) + " is not part of the manifest");
}

inline ReplayOutcome replay_trial(const std::filesystem::path& manifest_path, std::uint64_t seed) {
  return replay_trial(read_json_file(manifest_path), seed);
}

}  // namespace wsnloc
