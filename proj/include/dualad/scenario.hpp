#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "dualad/geom.hpp"

namespace dualad {

/// Simulation grid resolution shared by scenarios, planners and the engine.
inline constexpr double kGridStep = 0.1;
inline constexpr const char* kScenarioFormat = "dualad-scn-1";

enum class AgentKind { vehicle, pedestrian, bicycle, static_object };

const char* to_string(AgentKind kind);
AgentKind agent_kind_from_string(const std::string& s);

struct AgentState {
  double t = 0.0;
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;
  double speed = 0.0;
  bool operator==(const AgentState&) const = default;
};

struct AgentRecord {
  std::string id;
  AgentKind kind = AgentKind::vehicle;
  double width = 0.0;
  double length = 0.0;
  /// States as written in the file.
  std::vector<AgentState> logged_states;
  /// Logged states resampled onto the 0.1 s grid over [0, duration].
  std::vector<AgentState> states;

  bool operator==(const AgentRecord&) const = default;
};

struct EgoInit {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;
  double speed = 0.0;
  bool operator==(const EgoInit&) const = default;
};

enum class LightState { red, green };

struct TrafficLightState {
  double t = 0.0;
  double stop_line_s = 0.0;
  LightState state = LightState::green;
  bool operator==(const TrafficLightState&) const = default;
};

struct Scenario {
  std::string id;
  ReferencePath centerline;
  double speed_limit = 0.0;
  EgoInit ego_init;
  std::vector<AgentRecord> agents;
  double duration = 0.0;
  std::vector<TrafficLightState> traffic_lights;
  /// Optional logged expert ego track; used as the progress reference.
  std::optional<std::vector<AgentState>> ego_log;

  /// Number of grid intervals, i.e. duration / kGridStep.
  std::size_t num_steps() const;
  /// Stop lines (absolute centerline arc length) whose light is red at `t`.
  std::vector<double> red_stop_lines(double t) const;

  bool operator==(const Scenario&) const = default;
};

/// Grid-resampling of a logged track: linear in position and speed, heading
/// interpolated on the circle, endpoints held outside the logged span.
std::vector<AgentState> resample_states(const std::vector<AgentState>& logged, double duration, double step = kGridStep);

/// Parses and validates one scenario document.
/// Throws ParseError, SchemaError or ValidationError naming the field.
Scenario parse_scenario(const nlohmann::json& doc);
Scenario parse_scenario_text(const std::string& text);
Scenario load_scenario(const std::filesystem::path& path);

nlohmann::json scenario_to_json(const Scenario& scenario);
std::string serialize_scenario(const Scenario& scenario);

/// Loads every *.json file in `dir`, sorted by scenario id.
std::vector<Scenario> load_corpus(const std::filesystem::path& dir);

enum class SelectionMetric { r_cls, nr_cls };

struct BenchmarkSet {
  std::string name;
  std::vector<std::string> scenario_ids;
  SelectionMetric selection_metric = SelectionMetric::r_cls;
  std::size_t k = 0;
};

/// The k lowest-scoring ids, ascending by score, ties broken by id.
/// Throws InsufficientResults when k exceeds the number of results.
BenchmarkSet select_worst_k(std::vector<std::pair<std::string, double>> results, std::size_t k,
                            SelectionMetric metric = SelectionMetric::r_cls, std::string name = {});

nlohmann::json benchmark_set_to_json(const BenchmarkSet& set);

}  // namespace dualad
