#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "dualad/geom.hpp"
#include "dualad/scenario.hpp"

namespace dualad {

struct VehicleParams {
  double length = 4.7;
  double width = 2.0;
  double wheelbase = 2.7;
  double max_steering = 0.6;
};

struct EgoSnapshot {
  CartesianPose pose;
  double speed = 0.0;
  double accel = 0.0;
  /// Path curvature implied by the current steering angle.
  double curvature = 0.0;
};

struct AgentSnapshot {
  std::string id;
  AgentKind kind = AgentKind::vehicle;
  double width = 0.0;
  double length = 0.0;
  CartesianPose pose;
  double speed = 0.0;
  /// Index into Scenario::agents, used by log-replay prediction.
  std::size_t track = 0;
};

/// Everything a planner or reasoner may observe at one instant.
struct WorldFrame {
  double time = 0.0;
  std::size_t step = 0;
  EgoSnapshot ego;
  std::vector<AgentSnapshot> agents;
  double speed_limit = 15.0;
  /// Red stop lines as absolute centerline arc lengths.
  std::vector<double> red_stop_lines;
  /// Source scenario, when the frame comes from one (log-replay prediction).
  const Scenario* scenario = nullptr;
};

inline OrientedBox ego_box(const CartesianPose& pose, const VehicleParams& v) { return {pose, v.width, v.length}; }

inline OrientedBox agent_box(const AgentSnapshot& a) { return {a.pose, a.width, a.length}; }

/// Frame built from the logged grid states of `scenario` at `step`, with the
/// ego at its initial state.
WorldFrame frame_from_scenario(const Scenario& scenario, std::size_t step);

}  // namespace dualad
