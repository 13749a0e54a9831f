// wsnloc: run, compare and replay localization experiments.
//
//   wsnloc preset net1 --algorithm hierarchical > net1.json
//   wsnloc run --config net1.json --trials 10 --out results/net1
//   wsnloc compare --preset net1 --algorithm nbp --algorithm hierarchical --out results/cmp
//   wsnloc replay --config results/net1/manifest.json --seed 3

#include <algorithm>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "wsnloc/experiment.hpp"

namespace {

using namespace wsnloc;

struct Overrides {
  std::optional<int> trials;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> workers;
  std::optional<std::string> out;
  std::optional<int> threshold_init;
  std::optional<std::string> score_unassignable;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--trials", o.trials, "Number of trials")->check(CLI::PositiveNumber);
  cmd->add_option("--seed", o.seed, "Base seed; trial k uses seed + k");
  cmd->add_option("--workers", o.workers, "Trials run concurrently")->check(CLI::PositiveNumber);
  cmd->add_option("--out", o.out, "Output directory");
  cmd->add_option("--threshold-init", o.threshold_init, "First-layer confidence threshold (hierarchical)")
      ->check(CLI::Range(0, 3));
  cmd->add_option("--score-unassignable", o.score_unassignable, "How unreachable agents are scored")
      ->check(CLI::IsMember({"exclude", "prior-mean"}));
}

void apply(const Overrides& o, ExperimentConfig& cfg) {
  if (o.trials) cfg.trials = *o.trials;
  if (o.seed) cfg.base_seed = *o.seed;
  if (o.workers) cfg.workers = *o.workers;
  if (o.out) cfg.output_dir = *o.out;
  if (o.threshold_init) cfg.threshold_init = *o.threshold_init;
  if (o.score_unassignable) cfg.score_unassignable = score_unassignable_from_string(*o.score_unassignable);
}

void print_summary(const ExperimentResult& r) {
  std::printf("%s: %zu/%d trials completed%s\n", r.config.label().c_str(), r.completed(), r.config.trials,
              r.partial ? " (partial)" : "");
  std::printf("  median error   %.4f m\n", r.median_error());
  for (double th : {0.5, 1.0, 2.0}) {
    const auto it = std::find(r.cdf.thresholds.begin(), r.cdf.thresholds.end(), th);
    if (it != r.cdf.thresholds.end()) std::printf("  CDF(%.1f m)     %.4f\n", th, r.cdf.values[it - r.cdf.thresholds.begin()]);
  }
  std::printf("  inference      %.3f s/trial\n", r.mean_runtime());
  std::printf("  messages       %.0f directed/trial\n", r.mean_messages());
  std::printf("  links          %.1f measured vs %.1f analytic (L=%d)\n", r.complexity.measured_links,
              r.complexity.analytic_value, r.complexity.layers);
}

void print_comparison(const Comparison& cmp) {
  std::printf("%-18s %6s %9s", "algorithm", "trials", "median_m");
  for (double th : cmp.thresholds) std::printf("  cdf@%-4g", th);
  std::printf(" %10s %10s %8s %8s\n", "runtime_s", "messages", "t_ratio", "m_ratio");
  for (const ComparisonRow& r : cmp.rows) {
    std::printf("%-18s %6zu %9.4f", r.label.c_str(), r.trials, r.median_error);
    for (double v : r.cdf) std::printf("  %8.4f", v);
    std::printf(" %10.3f %10.0f", r.mean_runtime, r.mean_messages);
    if (r.runtime_ratio) std::printf(" %8.3f %8.3f", *r.runtime_ratio, *r.traffic_ratio);
    std::printf("\n");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cooperative sensor-network localization experiments"};
  app.require_subcommand(1);

  Overrides run_o;
  std::optional<std::string> run_config;
  std::optional<std::string> run_algorithm;
  auto* run = app.add_subcommand("run", "Execute an experiment config");
  run->add_option("--config", run_config, "Experiment config (JSON); defaults to the net1 preset");
  run->add_option("--algorithm", run_algorithm, "nbp, nbp-bfs, nbp-min or hierarchical");
  add_common(run, run_o);

  std::string preset_name = "net1";
  std::optional<std::string> preset_algorithm;
  Overrides preset_o;
  auto* preset = app.add_subcommand("preset", "Print the experiment config of a reference deployment");
  preset->add_option("network", preset_name, "net1, net2 or net3")->check(CLI::IsMember({"net1", "net2", "net3"}));
  preset->add_option("--algorithm", preset_algorithm, "nbp, nbp-bfs, nbp-min or hierarchical");
  add_common(preset, preset_o);

  Overrides cmp_o;
  std::vector<std::string> cmp_configs;
  std::vector<std::string> cmp_algorithms;
  std::string cmp_preset = "net1";
  auto* compare = app.add_subcommand("compare", "Paired-seed comparison of several algorithms");
  compare->add_option("--config", cmp_configs, "Experiment configs to compare (repeatable)");
  compare->add_option("--algorithm", cmp_algorithms, "Algorithms to compare on --preset (repeatable)");
  compare->add_option("--preset", cmp_preset, "Deployment for --algorithm")->check(CLI::IsMember({"net1", "net2", "net3"}));
  add_common(compare, cmp_o);

  std::string replay_manifest;
  std::uint64_t replay_seed = 0;
  auto* replay = app.add_subcommand("replay", "Re-run one trial from a manifest and check it");
  replay->add_option("--config", replay_manifest, "manifest.json of a finished run")->required();
  replay->add_option("--seed", replay_seed, "Seed of the trial to replay")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      ExperimentConfig cfg = run_config ? parse_experiment_config(read_json_file(*run_config)) : ExperimentConfig{};
      if (run_algorithm) cfg.algorithm = algorithm_from_string(*run_algorithm);
      apply(run_o, cfg);
      if (cfg.output_dir.empty()) throw ConfigError("no output directory; pass --out");
      const ExperimentResult r = run_experiment(cfg);
      print_summary(r);
      std::printf("  written to     %s\n", cfg.output_dir.c_str());
      return r.partial ? 4 : 0;
    }
    if (*preset) {
      ExperimentConfig cfg = experiment_preset(network_preset_from_string(preset_name));
      if (preset_algorithm) cfg.algorithm = algorithm_from_string(*preset_algorithm);
      apply(preset_o, cfg);
      validate(cfg);
      std::cout << Json(cfg).dump(2) << '\n';
      return 0;
    }
    if (*compare) {
      std::vector<ExperimentConfig> configs;
      for (const std::string& path : cmp_configs) configs.push_back(parse_experiment_config(read_json_file(path)));
      const std::vector<std::string> algorithms =
          !cmp_algorithms.empty() || !configs.empty()
              ? cmp_algorithms
              : std::vector<std::string>{"nbp-bfs", "nbp-min", "nbp", "hierarchical"};
      for (const std::string& a : algorithms) {
        configs.push_back(experiment_preset(network_preset_from_string(cmp_preset), algorithm_from_string(a)));
      }
      std::optional<std::string> out = cmp_o.out;
      Overrides shared = cmp_o;
      shared.out.reset();
      for (ExperimentConfig& c : configs) {
        const int threshold = cmp_o.threshold_init.value_or(c.effective_threshold());
        shared.threshold_init.reset();
        apply(shared, c);
        c.output_dir.clear();
        if (c.algorithm == Algorithm::hierarchical) c.threshold_init = threshold;
      }
      const Comparison cmp = compare_experiments(configs);
      print_comparison(cmp);
      if (out) {
        ensure_directory(*out);
        auto os = open_output(std::filesystem::path(*out) / "compare.csv");
        cmp.write_csv(os);
        for (const ExperimentResult& r : cmp.results) {
          std::string name = r.config.label();
          std::erase(name, ')');
          std::replace(name.begin(), name.end(), '(', '-');
          std::erase(name, '=');
          write_experiment(r, std::filesystem::path(*out) / name);
        }
      }
      return 0;
    }
    if (*replay) {
      const ReplayOutcome r = replay_trial(std::filesystem::path(replay_manifest), replay_seed);
      std::printf("seed %llu: scenario %s, result %s -> %s\n", static_cast<unsigned long long>(replay_seed),
                  detail::hex64(r.record.scenario_hash).c_str(), detail::hex64(r.record.result_hash).c_str(),
                  r.matches() ? "match" : "MISMATCH");
      return r.matches() ? 0 : 5;
    }
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return 2;
  } catch (const IoError& e) {
    std::fprintf(stderr, "i/o error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
