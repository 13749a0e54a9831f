#pragma once

#include <string>
#include <string_view>

#include "wsnloc/nbp.hpp"
#include "wsnloc/scenario.hpp"

namespace wsnloc {

enum class NetworkPreset { net1, net2, net3 };

inline std::string_view to_string(NetworkPreset p) {
  switch (p) {
    case NetworkPreset::net1: return "net1";
    case NetworkPreset::net2: return "net2";
    case NetworkPreset::net3: return "net3";
  }
  return "net1";
}

inline NetworkPreset network_preset_from_string(std::string_view s) {
  if (s == "net1") return NetworkPreset::net1;
  if (s == "net2") return NetworkPreset::net2;
  if (s == "net3") return NetworkPreset::net3;
  throw ConfigError("unknown network preset '" + std::string(s) + "'");
}

/// Reference deployments on a 50 m square with R = 12 m, sigma0 = 0.2 m and
/// k_sigma = 0.01: net1 has 13 anchors and 100 agents, net2 13 anchors and 50
/// agents, net3 9 anchors and 100 agents.
inline ScenarioConfig preset_config(NetworkPreset p) {
  ScenarioConfig cfg;
  cfg.area_side = 50.0;
  cfg.radio_range = 12.0;
  cfg.noise = {0.2, 0.01};
  switch (p) {
    case NetworkPreset::net1:
      cfg.anchor_layout = AnchorPreset::net1;
      cfg.agent_count = 100;
      break;
    case NetworkPreset::net2:
      cfg.anchor_layout = AnchorPreset::net2;
      cfg.agent_count = 50;
      break;
    case NetworkPreset::net3:
      cfg.anchor_layout = AnchorPreset::net3;
      cfg.agent_count = 100;
      break;
  }
  return cfg;
}

/// Inference settings used with the presets: K = 200 particles, T = 10
/// exchanges, h = 2.
inline RunConfig preset_run_config() {
  RunConfig rc;
  rc.particles = 200;
  rc.iterations = 10;
  rc.oversampling = 2.0;
  return rc;
}

}  // namespace wsnloc
