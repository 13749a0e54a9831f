// Localizes a few Network-1 style deployments with every algorithm and prints
// error and traffic summaries side by side.
//
//   localize_net1 [trials] [first_seed]

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "wsnloc/wsnloc.hpp"

namespace {

struct Tally {
  std::string name;
  std::vector<double> errors;
  double seconds = 0.0;
  double messages = 0.0;
  double layers = 0.0;
};

}  // namespace

int main(int argc, char** argv) {
  using namespace wsnloc;
  const int trials = argc > 1 ? std::atoi(argv[1]) : 3;
  const std::uint64_t first = argc > 2 ? std::strtoull(argv[2], nullptr, 10) : 1;

  std::vector<Tally> tallies = {{"nbp"}, {"nbp-bfs"}, {"nbp-min"}, {"hier c=0"},
                                {"hier c=1"}, {"hier c=2"}, {"hier c=3"}};
  const ScenarioConfig sc = preset_config(NetworkPreset::net1);
  RunConfig rc;

  for (int t = 0; t < trials; ++t) {
    const std::uint64_t seed = first + static_cast<std::uint64_t>(t);
    const Scenario scenario = generate_scenario(sc, seed);
    const ConnectivityGraph graph = build_connectivity(scenario);
    const MeasurementSet meas = measure_distances(scenario, graph, seed);
    rc.seed = seed;

    auto score = [&](Tally& tally, auto&& run) {
      const auto start = std::chrono::steady_clock::now();
      auto [result, layers] = run();
      tally.seconds += std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      tally.messages += static_cast<double>(result.traffic.size());
      tally.layers += layers;
      for (NodeId i : scenario.agents()) {
        if (std::find(result.unlocalized.begin(), result.unlocalized.end(), i) != result.unlocalized.end()) continue;
        tally.errors.push_back(distance(result.estimate(i), scenario.position(i)));
      }
    };

    score(tallies[0], [&] { return std::pair{run_standard_nbp(scenario, graph, meas, rc), 1}; });
    score(tallies[1], [&] {
      return std::pair{run_tree_nbp(scenario, bfs_spanning_tree(graph, scenario.anchors()), meas, rc), 1};
    });
    score(tallies[2], [&] { return std::pair{run_tree_nbp(scenario, min_spanning_tree(graph, meas), meas, rc), 1}; });
    for (int c = 0; c <= 3; ++c) {
      score(tallies[3 + c], [&] {
        const LayerAssignment la = assign_layers(graph, scenario.anchors(), c);
        auto h = run_hierarchical_nbp(scenario, graph, meas, la, rc);
        return std::pair{std::move(h.run), static_cast<int>(la.layer_count())};
      });
    }
  }

  const std::vector<double> thresholds = {0.5, 1.0, 2.0};
  std::printf("%-10s %8s %8s %8s %8s %9s %10s %7s\n", "algorithm", "median", "cdf0.5", "cdf1", "cdf2", "runtime",
              "messages", "layers");
  for (const Tally& tally : tallies) {
    const CdfCurve cdf = error_cdf(tally.errors, thresholds);
    std::printf("%-10s %8.3f %8.3f %8.3f %8.3f %8.2fs %10.0f %7.1f\n", tally.name.c_str(), median(tally.errors),
                cdf.values[0], cdf.values[1], cdf.values[2], tally.seconds / trials, tally.messages / trials,
                tally.layers / trials);
  }
  return 0;
}
