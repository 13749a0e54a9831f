#pragma once

#include <filesystem>
#include <fstream>
#include <string>

#include "json.hpp"

#include "wsnloc/hierarchy.hpp"
#include "wsnloc/metrics.hpp"
#include "wsnloc/scenario.hpp"

namespace wsnloc {

using Json = nlohmann::ordered_json;

// JSON conversions for configuration and artifact types. Missing keys keep
// their defaults.

inline void to_json(Json& j, const Point& p) { j = Json::array({p.x, p.y}); }

inline void from_json(const Json& j, Point& p) {
  if (!j.is_array() || j.size() != 2) throw ConfigError("a point must be a [x, y] array");
  p = {j.at(0).get<double>(), j.at(1).get<double>()};
}

inline void to_json(Json& j, const NoiseModel& n) { j = Json{{"sigma0", n.sigma0}, {"k_sigma", n.k_sigma}}; }

inline void from_json(const Json& j, NoiseModel& n) {
  n.sigma0 = j.value("sigma0", n.sigma0);
  n.k_sigma = j.value("k_sigma", n.k_sigma);
}

inline void to_json(Json& j, const ScenarioConfig& c) {
  j = Json{{"area_side", c.area_side},
           {"radio_range", c.radio_range},
           {"noise", c.noise},
           {"anchor_layout", to_string(c.anchor_layout)},
           {"anchor_positions", c.anchor_positions},
           {"agent_count", c.agent_count},
           {"torus", c.torus}};
}

inline void from_json(const Json& j, ScenarioConfig& c) {
  c.area_side = j.value("area_side", c.area_side);
  c.radio_range = j.value("radio_range", c.radio_range);
  if (j.contains("noise")) c.noise = j.at("noise").get<NoiseModel>();
  if (j.contains("anchor_layout")) c.anchor_layout = anchor_preset_from_string(j.at("anchor_layout").get<std::string>());
  if (j.contains("anchor_positions")) c.anchor_positions = j.at("anchor_positions").get<std::vector<Point>>();
  c.agent_count = j.value("agent_count", c.agent_count);
  c.torus = j.value("torus", c.torus);
}

inline void to_json(Json& j, const RunConfig& r) {
  j = Json{{"particles", r.particles}, {"iterations", r.iterations}, {"oversampling", r.oversampling}};
  if (r.early_stop_shift) j["early_stop_shift"] = *r.early_stop_shift;
}

// seed and workers are per-trial execution details, not part of the config.
inline void from_json(const Json& j, RunConfig& r) {
  r.particles = j.value("particles", r.particles);
  r.iterations = j.value("iterations", r.iterations);
  r.oversampling = j.value("oversampling", r.oversampling);
  if (j.contains("early_stop_shift") && !j.at("early_stop_shift").is_null()) {
    r.early_stop_shift = j.at("early_stop_shift").get<double>();
  }
}

/// Node table with ids, roles and true positions.
inline Json scenario_json(const Scenario& s) {
  Json nodes = Json::array();
  for (NodeId id : s.nodes()) {
    const Point p = s.position(id);
    nodes.push_back({{"id", id.value}, {"role", s.is_anchor(id) ? "anchor" : "agent"}, {"x", p.x}, {"y", p.y}});
  }
  return Json{{"seed", s.seed()}, {"config", s.config()}, {"fingerprint", s.fingerprint()}, {"nodes", nodes}};
}

/// Rebuilds a scenario from scenario_json output. The fingerprint is checked.
inline Scenario scenario_from_json(const Json& j) {
  const auto cfg = j.at("config").get<ScenarioConfig>();
  std::vector<Point> agents, anchors;
  for (const Json& n : j.at("nodes")) {
    const Point p{n.at("x").get<double>(), n.at("y").get<double>()};
    (n.at("role").get<std::string>() == "anchor" ? anchors : agents).push_back(p);
  }
  Scenario s(cfg, j.at("seed").get<std::uint64_t>(), std::move(agents), std::move(anchors));
  if (j.contains("fingerprint") && j.at("fingerprint").get<std::uint64_t>() != s.fingerprint()) {
    throw IntegrityError("scenario fingerprint mismatch");
  }
  return s;
}

inline Json layers_json(const LayerAssignment& la) {
  auto ids = [](const std::vector<NodeId>& v) {
    Json a = Json::array();
    for (NodeId id : v) a.push_back(id.value);
    return a;
  };
  Json layers = Json::array();
  for (const Layer& l : la.layers) {
    layers.push_back({{"index", l.index}, {"threshold", l.threshold}, {"confidence", l.confidence}, {"agents", ids(l.agents)}});
  }
  return Json{{"threshold_init", la.threshold_init},
              {"mode", to_string(la.mode)},
              {"flat", la.flat},
              {"anchors", ids(la.anchors)},
              {"layers", layers},
              {"unassignable", ids(la.unassignable)}};
}

inline void to_json(Json& j, const ComplexityReport& r) {
  j = Json{{"algorithm", r.algorithm},       {"n_agents", r.n_agents},
           {"p", r.p},                       {"layers", r.layers},
           {"analytic_value", r.analytic_value}, {"measured_links", r.measured_links}};
}

// ---------------------------------------------------------------------------
// Files
// ---------------------------------------------------------------------------

inline std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot write " + path.string());
  return os;
}

inline void ensure_directory(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) throw IoError("cannot create directory " + dir.string());
}

inline Json read_json_file(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot read " + path.string());
  try {
    return Json::parse(is);
  } catch (const Json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

inline void write_json_file(const std::filesystem::path& path, const Json& j) {
  std::ofstream os = open_output(path);
  os << j.dump(2) << '\n';
  if (!os) throw IoError("failed writing " + path.string());
}

}  // namespace wsnloc
